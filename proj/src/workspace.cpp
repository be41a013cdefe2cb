#include "archgraph/workspace.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "archgraph/canonical_io.hpp"
#include "archgraph/error.hpp"

namespace archgraph {

namespace fs = std::filesystem;

DirectoryLock::DirectoryLock(const fs::path& dir) {
  fs::path path = dir / "LOCK";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open " + path.string() + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::kLocked, "data directory " + dir.string() + " is locked by another process");
  }
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

Workspace::Workspace(fs::path dir, std::optional<Config> config) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "mappings", ec);
  fs::create_directories(dir_ / "curation", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create data directory " + dir_.string() + ": " + ec.message());

  fs::path config_path = dir_ / "config.json";
  if (config) {
    config_ = *config;
  } else if (fs::exists(config_path)) {
    try {
      config_ = Config::load(config_path);
    } catch (const Error& e) {
      throw Error(ErrorCode::kCorruptStore, config_path.string() + ": " + e.what());
    }
  }
  if (!fs::exists(config_path)) write_file_atomic(config_path, to_canonical(config_.to_json()));

  records_ = std::make_unique<RecordStore>(dir_, config_.entity_types);
  curation_ = std::make_unique<CurationStore>(config_.entity_types);

  fs::path curation_path = dir_ / "curation" / "state.json";
  if (fs::exists(curation_path)) {
    try {
      curation_->restore(parse_document(read_file(curation_path), curation_path.string()));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kCorruptStore, curation_path.string() + ": " + e.what());
    }
  }

  fs::path ontology_path = dir_ / "ontology.json";
  if (fs::exists(ontology_path)) {
    try {
      ontology_ = parse_ontology(read_file(ontology_path));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kCorruptStore, ontology_path.string() + ": " + e.what());
    }
  }
  for (const auto& entry : fs::directory_iterator(dir_ / "mappings")) {
    if (entry.path().extension() != ".json") continue;
    try {
      MappingSpec m = parse_mapping_document(read_file(entry.path()));
      mappings_[m.template_id] = std::move(m);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kCorruptStore, entry.path().string() + ": " + e.what());
    }
  }

  graphs_ = std::make_unique<GraphStore>(dir_ / "graph");
}

void Workspace::save_curation() {
  write_file_atomic(dir_ / "curation" / "state.json", to_canonical(curation_->to_json()));
}

Template Workspace::import_template(std::string_view document) {
  Template t = parse_template(document);
  int v = records_->put_template(t);
  return records_->get_template(t.id, v);
}

Template Workspace::evolve_template(const std::string& id, const TemplateChange& change) {
  return records_->evolve_template(id, change);
}

RecordVersion Workspace::import_record(std::string_view document, const std::string& author) {
  return records_->put_record(parse_record(document), author);
}

std::vector<RecordVersion> Workspace::import_records(const fs::path& path, const std::string& author) {
  if (fs::is_directory(path)) return records_->import_directory(path, author);
  return {import_record(read_file(path), author)};
}

OntologySchema Workspace::import_ontology(std::string_view document) {
  OntologySchema schema = parse_ontology(document);
  std::unique_lock lock(schema_mutex_);
  write_file_atomic(dir_ / "ontology.json", to_canonical(ontology_to_json(schema)));
  ontology_ = schema;
  return schema;
}

ValidationReport Workspace::import_mapping(std::string_view document) {
  MappingSpec spec = parse_mapping_document(document);
  Template tmpl = records_->get_template(spec.template_id, spec.template_version);
  std::unique_lock lock(schema_mutex_);
  ValidationReport report = validate_mapping(spec, ontology_, tmpl);
  if (!report.ok()) return report;
  write_file_atomic(dir_ / "mappings" / (spec.template_id + ".json"), serialize_mapping(spec));
  mappings_[spec.template_id] = std::move(spec);
  return report;
}

IngestReport Workspace::publish(const std::string& record_id) {
  std::lock_guard lock(curation_write_);
  auto mentions = records_->publish_record(record_id);
  IngestReport report = curation_->ingest_mentions(
      mentions, [&](const Anchor& a) { return records_->resolve_anchor(a).has_value(); });
  save_curation();
  return report;
}

MatchReport Workspace::auto_match(const std::vector<MatchRule>& rules) {
  std::lock_guard lock(curation_write_);
  MatchReport r = curation_->auto_match(rules);
  save_curation();
  return r;
}

std::string Workspace::manual_match(const std::set<std::string>& ids) {
  std::lock_guard lock(curation_write_);
  std::string m = curation_->manual_match(ids);
  save_curation();
  return m;
}

std::string Workspace::unmatch(const std::string& local_id) {
  std::lock_guard lock(curation_write_);
  std::string m = curation_->unmatch(local_id);
  save_curation();
  return m;
}

MasterInstance Workspace::set_preferred(const std::string& master_id, const std::string& role, const std::string& value) {
  std::lock_guard lock(curation_write_);
  auto m = curation_->set_preferred(master_id, role, value);
  save_curation();
  return m;
}

MasterInstance Workspace::set_enrichment(const std::string& master_id, const std::string& key, const std::string& value) {
  std::lock_guard lock(curation_write_);
  auto m = curation_->set_enrichment(master_id, key, value);
  save_curation();
  return m;
}

VocabularyTerm Workspace::set_preferred_term(const std::string& vocabulary, const std::string& raw,
                                             const std::string& preferred) {
  std::lock_guard lock(curation_write_);
  auto t = curation_->set_preferred_term(vocabulary, raw, preferred);
  save_curation();
  return t;
}

VocabularyTerm Workspace::set_broader(const std::string& vocabulary, const std::string& raw, const std::string& broader) {
  std::lock_guard lock(curation_write_);
  auto t = curation_->set_broader(vocabulary, raw, broader);
  save_curation();
  return t;
}

TransformReport Workspace::transform(const TransformScope& scope, bool parallel) {
  std::lock_guard lock(transform_mutex_);
  auto maps = mappings();
  auto onto = ontology();
  return transform_all(scope, *records_, *curation_, maps, onto, config_, *graphs_, parallel);
}

ResultTable Workspace::query(const Json& document) const {
  Query q = parse_query(document);
  auto snap = graphs_->snapshot();
  return run_query(*snap, q);
}

std::string Workspace::export_nquads(const std::set<std::string>& graphs) const {
  return graphs_->export_nquads(graphs);
}

std::size_t Workspace::import_nquads(std::string_view text) { return graphs_->import_nquads(text); }

std::vector<ProvenanceEntry> Workspace::provenance(const std::string& iri) const {
  auto snap = graphs_->snapshot();
  return provenance_of(*snap, iri, config_, *records_);
}

std::vector<Record> Workspace::published_records(const std::string& template_id, int template_version) const {
  std::vector<Record> out;
  std::optional<Template> tmpl;
  for (const auto& [id, v] : records_->published()) {
    Record r = records_->get_record(id, v);
    if (r.template_id != template_id || r.template_version > template_version) continue;
    if (r.template_version < template_version) {
      if (!tmpl) tmpl = records_->get_template(template_id, template_version);
      r = upgrade_record(r, *tmpl);
    }
    out.push_back(std::move(r));
  }
  return out;
}

QualityReport Workspace::quality(const std::optional<std::vector<MatchRule>>& rules) const {
  QualityReport report;
  auto onto = ontology();
  auto maps = mappings();
  for (const auto& id : records_->template_ids()) {
    Template t = records_->get_template(id);
    auto c = completeness_report(published_records(id, t.version), t);
    report.completeness.insert(report.completeness.end(), c.begin(), c.end());
  }
  for (const auto& [tid, m] : maps) {
    auto v = value_consistency(published_records(tid, m.template_version), declared_formats(m, onto));
    report.value_consistency.insert(report.value_consistency.end(), v.begin(), v.end());
  }
  auto snap = graphs_->snapshot();
  report.schema_consistency = schema_consistency(*snap, onto, config_);
  report.conciseness = conciseness_report(*curation_, rules ? *rules : curation_->last_rules());
  report.property_warnings = property_warnings(onto);
  return report;
}

OntologySchema Workspace::ontology() const {
  std::shared_lock lock(schema_mutex_);
  return ontology_;
}

std::map<std::string, MappingSpec> Workspace::mappings() const {
  std::shared_lock lock(schema_mutex_);
  return mappings_;
}

}  // namespace archgraph
