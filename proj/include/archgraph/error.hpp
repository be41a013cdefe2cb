#pragma once

#include <stdexcept>
#include <string>

namespace archgraph {

// Machine-readable error codes. The string form is what the CLI prints and
// what the HTTP API returns in its error payload.
enum class ErrorCode {
  kTemplateNotFound,
  kUnknownTemplate,
  kUnknownRecord,
  kUnknownVersion,
  kValidationFailed,
  kDestructiveChange,
  kEmptyChange,
  kInvalidChange,
  kDanglingAnchor,
  kUnknownRole,
  kUnknownTarget,
  kTypeMismatch,
  kExceptionConflict,
  kAlreadySingleton,
  kCycleDetected,
  kUnknownTerm,
  kInvalidEnrichment,
  kParseError,
  kCycleInSubclass,
  kEmptySlug,
  kVersionMismatch,
  kMissingMapping,
  kInvalidMapping,
  kGraphMismatch,
  kMalformedQuery,
  kUnknownIri,
  kCorruptStore,
  kPortInUse,
  kConflict,
  kUnknownJob,
  kLocked,
  kIo,
  kInvalidArgument,
  kInternal,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // True for errors caused by user input rather than by the engine.
  bool is_user_error() const noexcept {
    return code_ != ErrorCode::kInternal && code_ != ErrorCode::kIo &&
           code_ != ErrorCode::kCorruptStore;
  }

 private:
  ErrorCode code_;
};

}  // namespace archgraph
