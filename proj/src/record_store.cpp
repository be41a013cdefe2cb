#include "archgraph/record_store.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <mutex>

#include "archgraph/error.hpp"
#include "archgraph/hashing.hpp"

namespace archgraph {

namespace fs = std::filesystem;

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RecordStore::RecordStore(fs::path root, std::set<std::string> entity_types)
    : root_(std::move(root)), entity_types_(std::move(entity_types)), clock_(utc_timestamp) {
  fs::create_directories(root_ / "templates");
  fs::create_directories(root_ / "records");
  load();
}

void RecordStore::set_clock(std::function<std::string()> clock) {
  std::unique_lock lock(mutex_);
  clock_ = std::move(clock);
}

void RecordStore::load() {
  for (const auto& dir : fs::directory_iterator(root_ / "templates")) {
    if (!dir.is_directory()) continue;
    for (const auto& file : fs::directory_iterator(dir.path())) {
      if (file.path().extension() != ".json") continue;
      try {
        Template t = parse_template(read_file(file.path()));
        templates_[t.id][t.version] = std::move(t);
      } catch (const Error& e) {
        throw Error(ErrorCode::kCorruptStore, file.path().string() + ": " + e.what());
      }
    }
  }
  for (const auto& dir : fs::directory_iterator(root_ / "records")) {
    if (!dir.is_directory()) continue;
    fs::path meta_path = dir.path() / "meta.json";
    if (!fs::exists(meta_path)) continue;
    std::string id = dir.path().filename().string();
    Entry entry;
    fs::path current = meta_path;
    try {
      Json meta = parse_document(read_file(meta_path), meta_path.string());
      for (const auto& v : meta.at("versions")) {
        RecordVersion rv{id, v.at("version").get<int>(), v.at("timestamp").get<std::string>(),
                         v.at("author").get<std::string>(), v.at("hash").get<std::string>()};
        current = dir.path() / (std::to_string(rv.version) + ".json");
        std::string bytes = read_file(current);
        if (sha256_hex(bytes) != rv.content_hash) {
          throw Error(ErrorCode::kCorruptStore, "content hash mismatch");
        }
        entry.contents.push_back(parse_record(bytes));
        entry.history.push_back(std::move(rv));
      }
      if (meta.contains("published_version") && !meta.at("published_version").is_null()) {
        entry.published_version = meta.at("published_version").get<int>();
      }
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kCorruptStore, current.string() + ": " + e.what());
    }
    records_.emplace(id, std::move(entry));
  }
}

void RecordStore::write_meta(const std::string& id, const Entry& entry) const {
  Json versions = Json::array();
  for (const auto& v : entry.history) {
    versions.push_back({{"version", v.version},
                        {"timestamp", v.timestamp},
                        {"author", v.author},
                        {"hash", v.content_hash}});
  }
  Json meta{{"format_version", 1}, {"record", id}, {"versions", versions}};
  meta["published_version"] =
      entry.published_version ? Json(*entry.published_version) : Json(nullptr);
  write_file_atomic(root_ / "records" / id / "meta.json", to_canonical(meta));
}

int RecordStore::put_template(const Template& t) {
  check_template(t, entity_types_);
  std::unique_lock lock(mutex_);
  auto& versions = templates_[t.id];
  if (auto it = versions.find(t.version); it != versions.end()) {
    if (it->second == t) return t.version;
    throw Error(ErrorCode::kInvalidChange,
                "template " + t.id + " v" + std::to_string(t.version) + " already exists");
  }
  if (!versions.empty() && t.version < versions.rbegin()->first) {
    throw Error(ErrorCode::kInvalidChange, "template versions must increase");
  }
  write_file_atomic(root_ / "templates" / t.id / (std::to_string(t.version) + ".json"),
                    serialize_template(t));
  versions[t.version] = t;
  return t.version;
}

Template RecordStore::evolve_template(const std::string& id, const TemplateChange& change) {
  Template next = archgraph::evolve_template(get_template(id), change, entity_types_);
  put_template(next);
  return next;
}

const Template& RecordStore::template_locked(const std::string& id,
                                             std::optional<int> version) const {
  auto it = templates_.find(id);
  if (it == templates_.end() || it->second.empty()) {
    throw Error(ErrorCode::kUnknownTemplate, "unknown template " + id);
  }
  if (!version) return it->second.rbegin()->second;
  auto vit = it->second.find(*version);
  if (vit == it->second.end()) {
    throw Error(ErrorCode::kUnknownTemplate,
                "unknown template " + id + " v" + std::to_string(*version));
  }
  return vit->second;
}

Template RecordStore::get_template(const std::string& id, std::optional<int> version) const {
  std::shared_lock lock(mutex_);
  return template_locked(id, version);
}

std::vector<std::string> RecordStore::template_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

bool RecordStore::has_template(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return templates_.contains(id);
}

RecordVersion RecordStore::put_record(const Record& record, const std::string& author) {
  std::unique_lock lock(mutex_);
  const Template& tmpl = template_locked(record.template_id, record.template_version);
  auto violations = validate_record(record, tmpl);
  if (!violations.empty()) {
    std::string msg = "record " + record.id + " violates its template:";
    for (const auto& v : violations) msg += " " + v.to_string();
    throw Error(ErrorCode::kValidationFailed, msg);
  }
  std::string bytes = serialize_record(record);
  Entry& e = records_[record.id];
  RecordVersion rv{record.id, static_cast<int>(e.history.size()) + 1, clock_(), author,
                   sha256_hex(bytes)};
  try {
    write_file_atomic(root_ / "records" / record.id / (std::to_string(rv.version) + ".json"),
                      bytes);
    Entry next = e;
    next.history.push_back(rv);
    next.contents.push_back(record);
    write_meta(record.id, next);
    e = std::move(next);
  } catch (...) {
    if (e.history.empty()) records_.erase(record.id);
    throw;
  }
  return rv;
}

const RecordStore::Entry& RecordStore::entry(const std::string& id) const {
  auto it = records_.find(id);
  if (it == records_.end()) throw Error(ErrorCode::kUnknownRecord, "unknown record " + id);
  return it->second;
}

Record RecordStore::get_record(const std::string& id, std::optional<int> version) const {
  std::shared_lock lock(mutex_);
  const Entry& e = entry(id);
  int v = version.value_or(static_cast<int>(e.history.size()));
  if (v < 1 || v > static_cast<int>(e.history.size())) {
    throw Error(ErrorCode::kUnknownVersion,
                "record " + id + " has no version " + std::to_string(v));
  }
  return e.contents[static_cast<size_t>(v - 1)];
}

std::vector<RecordVersion> RecordStore::versions(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return entry(id).history;
}

std::vector<std::string> RecordStore::record_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : records_) out.push_back(id);
  return out;
}

std::vector<Mention> RecordStore::publish_record(const std::string& id) {
  std::unique_lock lock(mutex_);
  auto it = records_.find(id);
  if (it == records_.end()) throw Error(ErrorCode::kUnknownRecord, "unknown record " + id);
  Entry next = it->second;
  next.published_version = static_cast<int>(next.history.size());
  const Record& latest = next.contents.back();
  const Template& tmpl = template_locked(latest.template_id, latest.template_version);
  auto mentions = extract_mentions(latest, tmpl);
  if (next.published_version != it->second.published_version) write_meta(id, next);
  it->second = std::move(next);
  return mentions;
}

PublishState RecordStore::publish_state(const std::string& id) const {
  std::shared_lock lock(mutex_);
  return {id, entry(id).published_version};
}

std::vector<std::pair<std::string, int>> RecordStore::published() const {
  std::shared_lock lock(mutex_);
  std::vector<std::pair<std::string, int>> out;
  for (const auto& [id, e] : records_) {
    if (e.published_version) out.emplace_back(id, *e.published_version);
  }
  return out;
}

std::optional<std::vector<std::string>> RecordStore::resolve_anchor(
    const Anchor& anchor, std::optional<int> version) const {
  std::shared_lock lock(mutex_);
  auto it = records_.find(anchor.record_id);
  if (it == records_.end()) return std::nullopt;
  const Entry& e = it->second;
  int v = version.value_or(e.published_version.value_or(static_cast<int>(e.history.size())));
  if (v < 1 || v > static_cast<int>(e.history.size())) return std::nullopt;
  const Record& r = e.contents[static_cast<size_t>(v - 1)];
  auto tit = r.tables.find(anchor.table);
  if (tit == r.tables.end() || anchor.row >= tit->second.size()) return std::nullopt;
  const Row& row = tit->second[anchor.row];
  if (row.deleted) return std::nullopt;
  const Template* tmpl = nullptr;
  if (auto t = templates_.find(r.template_id); t != templates_.end()) {
    if (auto tv = t->second.find(r.template_version); tv != t->second.end()) tmpl = &tv->second;
  }
  const TableSpec* table = tmpl ? tmpl->find_table(anchor.table) : nullptr;
  std::vector<std::string> raws;
  for (const auto& col : anchor.columns) {
    const ColumnSpec* spec = table ? table->find_column(col) : nullptr;
    if (!spec) return std::nullopt;
    const Cell* cell = row.cell(*spec);
    raws.push_back(cell ? cell->raw : std::string());
  }
  return raws;
}

std::vector<RecordVersion> RecordStore::import_directory(const fs::path& dir,
                                                         const std::string& author) {
  std::vector<fs::path> files;
  for (const auto& f : fs::directory_iterator(dir)) {
    if (f.is_regular_file() && f.path().extension() == ".json") files.push_back(f.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RecordVersion> out;
  for (const auto& f : files) out.push_back(put_record(parse_record(read_file(f)), author));
  return out;
}

}  // namespace archgraph
