#include "support.hpp"

#include <random>
#include <unistd.h>

#include "archgraph/canonical_io.hpp"

namespace archgraph::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("archgraph-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Config maritime_config() { return Config::load(maritime("config.json")); }

void load_maritime(Workspace& ws, const std::vector<std::string>& record_ids) {
  ws.import_template(read_file(maritime("templates/ship-register.json")));
  ws.import_ontology(read_file(maritime("ontology.json")));
  auto report = ws.import_mapping(read_file(maritime("mappings/ship-register.json")));
  if (!report.ok()) throw std::runtime_error("fixture mapping invalid: " + report.to_json().dump());
  std::vector<std::string> ids = record_ids;
  if (ids.empty()) ids = {"reg-001", "reg-002", "reg-003"};
  for (const auto& id : ids) {
    ws.import_record(read_file(maritime("records/" + id + ".json")), "fixture");
    ws.publish(id);
  }
}

std::vector<MatchRule> maritime_rules() { return parse_match_rules(read_file(maritime("rules.json"))); }

Record synthetic_record(std::mt19937& rng, const std::string& id, int crew) {
  static const std::vector<std::string> ships{"Pallade", "Speranza", "Aghios Nikolaos", "Fortuna", "Concordia", "Evangelistria"};
  static const std::vector<std::string> types{"Brigantino", "Goletta", "Trabaccolo", "Bombarda", "Tartana"};
  static const std::vector<std::string> places{"Sardinia", "Syros", "Galaxidi", "Genova", "Livorno", "Camogli", "Trieste", ""};
  static const std::vector<std::string> first{"Agostino", "Giovanni", "Luigi", "Pietro", "Nikolaos", "Antonio", "Giorgos", "Andrea"};
  static const std::vector<std::string> last{"Brondi", "Rossi", "Ferrari", "Costa", "Vafiadakis", "Bianchi", "Russo", "Papadakis"};
  static const std::vector<std::string> professions{"Capitano", "Marinaio", "Mozzo", "Nostromo", "Cuoco", "Scrivano"};
  auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
  auto date = [&](int from, int span) {
    if (rng() % 15 == 0) return std::string("?\?/?\?/") + std::to_string(from);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d/%02d/%04d", 1 + static_cast<int>(rng() % 28), 1 + static_cast<int>(rng() % 12),
                  from + static_cast<int>(rng() % static_cast<unsigned>(span)));
    return std::string(buf);
  };
  auto put = [](Row& row, const std::string& col, const std::string& v) {
    if (!v.empty()) row.cells[col] = Cell{v, std::nullopt};
  };

  Record r;
  r.id = id;
  r.template_id = "ship-register";
  r.template_version = 1;
  r.metadata = {"2024-01-01", "2024-01-01", "generator"};
  Row ship;
  put(ship, "ship_name", pick(ships) + " " + std::to_string(rng() % 40));
  put(ship, "ship_type", pick(types));
  put(ship, "tonnage", std::to_string(40 + rng() % 200) + (rng() % 2 ? ",5" : ""));
  put(ship, "construction_place", pick(places));
  put(ship, "construction_date", date(1820, 40));
  if (rng() % 3 == 0) put(ship, "owner", "Fratelli " + pick(last));
  r.tables["ship"].push_back(std::move(ship));
  auto& rows = r.tables["crew"];
  for (int i = 0; i < crew; ++i) {
    Row row;
    put(row, "name", pick(first) + " " + pick(last));
    put(row, "birth_place", pick(places));
    if (rng() % 2) put(row, "birth_date", date(1790, 40));
    put(row, "profession", pick(professions));
    rows.push_back(std::move(row));
  }
  return r;
}

SyntheticCorpus::SyntheticCorpus(const std::filesystem::path& dir, std::size_t n, std::uint32_t seed, int crew)
    : config(maritime_config()) {
  ontology = parse_ontology(read_file(maritime("ontology.json")));
  Template tmpl = parse_template(read_file(maritime("templates/ship-register.json")));
  auto mapping = parse_mapping(read_file(maritime("mappings/ship-register.json")), ontology, tmpl);
  mappings.emplace(tmpl.id, std::get<MappingSpec>(mapping));
  records = std::make_unique<RecordStore>(dir / "records-root", config.entity_types);
  curation = std::make_unique<CurationStore>(config.entity_types);
  graphs = std::make_unique<GraphStore>();
  records->put_template(tmpl);
  std::mt19937 rng(seed);
  std::vector<Mention> mentions;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn-%05zu", i);
    records->put_record(synthetic_record(rng, id, crew));
    auto ms = records->publish_record(id);
    mentions.insert(mentions.end(), ms.begin(), ms.end());
  }
  curation->ingest_mentions(mentions);
}

}  // namespace archgraph::testing
