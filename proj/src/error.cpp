#include "archgraph/error.hpp"

namespace archgraph {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTemplateNotFound: return "template-not-found";
    case ErrorCode::kUnknownTemplate: return "unknown-template";
    case ErrorCode::kUnknownRecord: return "unknown-record";
    case ErrorCode::kUnknownVersion: return "unknown-version";
    case ErrorCode::kValidationFailed: return "validation-failed";
    case ErrorCode::kDestructiveChange: return "destructive-change";
    case ErrorCode::kEmptyChange: return "empty-change";
    case ErrorCode::kInvalidChange: return "invalid-change";
    case ErrorCode::kDanglingAnchor: return "dangling-anchor";
    case ErrorCode::kUnknownRole: return "unknown-role";
    case ErrorCode::kUnknownTarget: return "unknown-target";
    case ErrorCode::kTypeMismatch: return "type-mismatch";
    case ErrorCode::kExceptionConflict: return "exception-conflict";
    case ErrorCode::kAlreadySingleton: return "already-singleton";
    case ErrorCode::kCycleDetected: return "cycle-detected";
    case ErrorCode::kUnknownTerm: return "unknown-term";
    case ErrorCode::kInvalidEnrichment: return "invalid-enrichment";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kCycleInSubclass: return "cycle-in-subclass";
    case ErrorCode::kEmptySlug: return "empty-slug";
    case ErrorCode::kVersionMismatch: return "version-mismatch";
    case ErrorCode::kMissingMapping: return "missing-mapping";
    case ErrorCode::kInvalidMapping: return "invalid-mapping";
    case ErrorCode::kGraphMismatch: return "graph-mismatch";
    case ErrorCode::kMalformedQuery: return "malformed-query";
    case ErrorCode::kUnknownIri: return "unknown-iri";
    case ErrorCode::kCorruptStore: return "corrupt-store";
    case ErrorCode::kPortInUse: return "port-in-use";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kUnknownJob: return "unknown-job";
    case ErrorCode::kLocked: return "locked";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

}  // namespace archgraph
