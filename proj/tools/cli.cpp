#include "archgraph/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "archgraph/error.hpp"
#include "archgraph/service.hpp"
#include "archgraph/text.hpp"
#include "archgraph/workspace.hpp"

namespace archgraph {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDataEnv = "ARCHGRAPH_DATA";

Service* g_serving = nullptr;

void on_signal(int) {
  if (g_serving) g_serving->stop();
}

struct Options {
  std::string data;
  std::string config;
  std::string format = "table";
  bool structured() const { return format == "structured"; }
};

void print_json(std::ostream& out, const Json& j) { out << to_canonical(j); }

// Input files named on the command line; a missing one is the caller's mistake.
std::string read_input(const std::string& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::kInvalidArgument, "cannot read input file " + path);
  return read_file(path);
}

std::vector<MatchRule> load_rules(const std::string& path) { return parse_match_rules(read_input(path)); }

// Graph scope for export: "all", or a comma-separated list of graph IRIs and
// the keywords records, curation-links, term-hierarchy, materialised,
// provenance, record:<id>.
std::set<std::string> resolve_scope(const std::string& spec, const Workspace& ws) {
  std::set<std::string> out;
  if (spec.empty() || spec == "all") return out;
  const Config& c = ws.config();
  for (const auto& raw : text::split(spec, ',')) {
    std::string item = text::trim(raw);
    if (item == "curation-links") out.insert(c.curation_links_graph);
    else if (item == "term-hierarchy") out.insert(c.term_hierarchy_graph);
    else if (item == "materialised") out.insert(c.materialised_graph);
    else if (item == "provenance") out.insert(c.provenance_graph);
    else if (item == "records") {
      for (const auto& [g, _] : ws.graphs().snapshot()->graphs()) {
        if (!c.record_of_graph(g).empty()) out.insert(g);
      }
    } else if (item.rfind("record:", 0) == 0) out.insert(c.record_graph(item.substr(7)));
    else if (!item.empty()) out.insert(item);
  }
  if (out.empty()) out.insert("");  // a scope naming nothing exports nothing
  return out;
}

std::string transform_text(const TransformReport& r) {
  std::string out = "commit " + std::to_string(r.commit) + ", " + std::to_string(r.records.size()) + " record(s)\n";
  for (const auto& [g, n] : r.graph_quads) out += "  " + g + "  " + std::to_string(n) + "\n";
  for (const auto& w : r.warnings) out += "warning: " + w + "\n";
  return out;
}

std::string provenance_text(const std::vector<ProvenanceEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += e.record_id + " v" + (e.record_version ? std::to_string(*e.record_version) : std::string("?")) + "  " +
           e.table + "[" + std::to_string(e.row) + "]";
    for (size_t i = 0; i < e.columns.size(); ++i) {
      out += "  " + e.columns[i] + "=" + (i < e.raw.size() ? e.raw[i] : std::string());
    }
    out += "  (" + e.subject + ")\n";
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Archival transcript to knowledge-graph workflow", "archgraph"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--data", opt.data, "Data directory (default: $ARCHGRAPH_DATA)");
  app.add_option("--config", opt.config, "Configuration file");
  app.add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"table", "structured"}));

  std::string file, id, author, rules_file, graphs_scope = "all", output, address, role, value, vocab_name;
  std::vector<std::string> ids;
  bool all = false, serial = false, csv = false;
  int port = -1;

  auto* init = app.add_subcommand("init", "Create a data directory");
  auto* import_template = app.add_subcommand("import-template", "Import a template document");
  import_template->add_option("file", file)->required();
  auto* evolve = app.add_subcommand("evolve-template", "Apply an additive template change");
  evolve->add_option("template", id)->required();
  evolve->add_option("file", file)->required();
  auto* import_record = app.add_subcommand("import-record", "Import a record file or a directory of records");
  import_record->add_option("path", file)->required();
  import_record->add_option("--author", author);
  auto* import_ontology = app.add_subcommand("import-ontology", "Import the ontology document");
  import_ontology->add_option("file", file)->required();
  auto* import_mapping = app.add_subcommand("import-mapping", "Validate and import a mapping document");
  import_mapping->add_option("file", file)->required();
  auto* publish = app.add_subcommand("publish", "Publish the latest version of records");
  publish->add_option("records", ids);
  publish->add_flag("--all", all, "Publish every record");
  auto* auto_match = app.add_subcommand("auto-match", "Run rule-based instance matching");
  auto_match->add_option("--rules", rules_file)->required();
  auto* match = app.add_subcommand("match", "Manually match locals or masters");
  match->add_option("ids", ids)->required()->expected(2, -1);
  auto* unmatch = app.add_subcommand("unmatch", "Detach a local from its master");
  unmatch->add_option("local", id)->required();
  auto* set_preferred = app.add_subcommand("set-preferred", "Set a preferred attribute value on a master");
  set_preferred->add_option("master", id)->required();
  set_preferred->add_option("role", role)->required();
  set_preferred->add_option("value", value)->required();
  auto* set_enrichment = app.add_subcommand("set-enrichment", "Set an enrichment on a location master");
  set_enrichment->add_option("master", id)->required();
  set_enrichment->add_option("key", role)->required();
  set_enrichment->add_option("value", value)->required();
  auto* set_term = app.add_subcommand("set-preferred-term", "Set the preferred term of a vocabulary term");
  set_term->add_option("vocabulary", vocab_name)->required();
  set_term->add_option("raw", id)->required();
  set_term->add_option("preferred", value)->required();
  auto* set_broader = app.add_subcommand("set-broader", "Set the broader term of a vocabulary term");
  set_broader->add_option("vocabulary", vocab_name)->required();
  set_broader->add_option("raw", id)->required();
  set_broader->add_option("broader", value)->required();
  auto* transform = app.add_subcommand("transform", "Transform published records into the graph store");
  transform->add_option("--record", ids, "Limit to these records");
  transform->add_flag("--serial", serial, "Use the serial reference path");
  auto* query = app.add_subcommand("query", "Run a query document");
  query->add_option("--file", file)->required();
  query->add_flag("--csv", csv, "Print CSV");
  auto* exp = app.add_subcommand("export", "Export graphs as canonical N-Quads");
  exp->add_option("--graphs", graphs_scope, "all, or a comma-separated list of graphs");
  exp->add_option("--output", output, "Write to a file instead of stdout");
  auto* import_nquads = app.add_subcommand("import-nquads", "Import N-Quads into the graph store");
  import_nquads->add_option("file", file)->required();
  auto* quality = app.add_subcommand("quality", "Report completeness, consistency and conciseness");
  quality->add_option("--rules", rules_file, "Match rules for conciseness (default: last auto-match)");
  auto* provenance = app.add_subcommand("provenance", "Trace an IRI back to its transcript cells");
  provenance->add_option("iri", id)->required();
  auto* locals = app.add_subcommand("locals", "List local instances of an entity type");
  locals->add_option("type", id)->required();
  auto* masters = app.add_subcommand("masters", "List masters of an entity type");
  masters->add_option("type", id)->required();
  auto* terms = app.add_subcommand("terms", "List the terms of a vocabulary");
  terms->add_option("vocabulary", vocab_name)->required();
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--address", address);
  serve->add_option("--port", port);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    if (opt.data.empty()) {
      if (const char* env = std::getenv(kDataEnv)) opt.data = env;
    }
    if (opt.data.empty()) throw Error(ErrorCode::kInvalidArgument, std::string("no data directory: pass --data or set ") + kDataEnv);
    std::optional<Config> config;
    if (!opt.config.empty()) config = Config::load(opt.config);

    const std::set<CLI::App*> mutating = {init,    import_template, evolve,        import_record, import_ontology,
                                          import_mapping, publish,   auto_match,    match,         unmatch,
                                          set_preferred,  set_enrichment, set_term, set_broader,   transform,
                                          import_nquads,  serve};
    CLI::App* cmd = app.get_subcommands().front();
    fs::create_directories(opt.data);
    std::optional<DirectoryLock> lock;
    if (mutating.count(cmd)) lock.emplace(opt.data);
    Workspace ws(opt.data, config);

    if (cmd == init) {
      if (opt.structured()) print_json(out, {{"data", opt.data}, {"config", ws.config().to_json()}});
      else out << "initialised " << opt.data << "\n";
    } else if (cmd == import_template) {
      Template t = ws.import_template(read_input(file));
      if (opt.structured()) print_json(out, template_to_json(t));
      else out << "template " << t.id << " version " << t.version << "\n";
    } else if (cmd == evolve) {
      Template t = ws.evolve_template(id, template_change_from_json(parse_document(read_input(file), file)));
      if (opt.structured()) print_json(out, template_to_json(t));
      else out << "template " << t.id << " version " << t.version << "\n";
    } else if (cmd == import_record) {
      auto versions = ws.import_records(file, author);
      if (opt.structured()) {
        Json j = Json::array();
        for (const auto& v : versions) j.push_back({{"record_id", v.record_id}, {"version", v.version}, {"content_hash", v.content_hash}});
        print_json(out, j);
      } else {
        for (const auto& v : versions) out << "record " << v.record_id << " version " << v.version << "\n";
      }
    } else if (cmd == import_ontology) {
      auto schema = ws.import_ontology(read_input(file));
      if (opt.structured()) print_json(out, ontology_to_json(schema));
      else out << schema.classes.size() << " classes, " << schema.properties.size() << " properties\n";
    } else if (cmd == import_mapping) {
      auto report = ws.import_mapping(read_input(file));
      if (!report.ok()) {
        print_json(out, report.to_json());
        err << "error: invalid-mapping: " << report.issues.size() << " issue(s)\n";
        return 1;
      }
      if (opt.structured()) print_json(out, {{"valid", true}});
      else out << "mapping imported\n";
    } else if (cmd == publish) {
      if (all) ids = ws.records().record_ids();
      if (ids.empty()) throw Error(ErrorCode::kInvalidArgument, "publish needs record ids or --all");
      Json j = Json::object();
      for (const auto& rid : ids) {
        auto report = ws.publish(rid);
        j[rid] = report.to_json();
        if (!opt.structured()) out << "published " << rid << "\n";
      }
      if (opt.structured()) print_json(out, j);
    } else if (cmd == auto_match) {
      auto report = ws.auto_match(load_rules(rules_file));
      if (opt.structured()) print_json(out, report.to_json());
      else out << "masters " << report.masters_before << " -> " << report.masters_after << " (" << report.blocked_unions
               << " blocked)\n";
    } else if (cmd == match) {
      std::string m = ws.manual_match({ids.begin(), ids.end()});
      if (opt.structured()) print_json(out, master_to_json(*ws.curation().find_master(m)));
      else out << m << "\n";
    } else if (cmd == unmatch) {
      std::string m = ws.unmatch(id);
      if (opt.structured()) print_json(out, master_to_json(*ws.curation().find_master(m)));
      else out << m << "\n";
    } else if (cmd == set_preferred || cmd == set_enrichment) {
      auto m = cmd == set_preferred ? ws.set_preferred(id, role, value) : ws.set_enrichment(id, role, value);
      if (opt.structured()) print_json(out, master_to_json(m));
      else out << m.master_id << "\n";
    } else if (cmd == set_term || cmd == set_broader) {
      auto t = cmd == set_term ? ws.set_preferred_term(vocab_name, id, value) : ws.set_broader(vocab_name, id, value);
      if (opt.structured()) print_json(out, term_to_json(t));
      else out << t.vocabulary << "/" << t.raw << "\n";
    } else if (cmd == transform) {
      TransformScope scope = ids.empty() ? TransformScope::everything() : TransformScope::only({ids.begin(), ids.end()});
      auto report = ws.transform(scope, !serial);
      if (opt.structured()) print_json(out, report.to_json());
      else out << transform_text(report);
    } else if (cmd == query) {
      auto table = ws.query(parse_document(read_input(file), file));
      if (csv) out << table.to_csv();
      else if (opt.structured()) print_json(out, table.to_json());
      else out << table.to_text();
    } else if (cmd == exp) {
      std::string text = ws.export_nquads(resolve_scope(graphs_scope, ws));
      if (output.empty()) out << text;
      else write_file_atomic(output, text);
    } else if (cmd == import_nquads) {
      size_t n = ws.import_nquads(read_input(file));
      if (opt.structured()) print_json(out, {{"quads", n}});
      else out << n << " quads\n";
    } else if (cmd == quality) {
      std::optional<std::vector<MatchRule>> rules;
      if (!rules_file.empty()) rules = load_rules(rules_file);
      auto report = ws.quality(rules);
      if (opt.structured()) print_json(out, report.to_json());
      else out << report.to_text();
    } else if (cmd == provenance) {
      auto entries = ws.provenance(id);
      if (opt.structured()) {
        Json j = Json::array();
        for (const auto& e : entries) j.push_back(e.to_json());
        print_json(out, j);
      } else {
        out << provenance_text(entries);
      }
    } else if (cmd == locals || cmd == masters) {
      if (!ws.config().entity_types.count(id)) throw Error(ErrorCode::kUnknownTarget, "unknown entity type " + id);
      Json j = Json::array();
      if (cmd == locals) {
        for (const auto& [_, l] : ws.curation().locals()) {
          if (l.entity_type != id) continue;
          j.push_back(local_to_json(l));
          if (!opt.structured()) {
            std::vector<std::string> vals;
            for (const auto& [r, v] : l.attributes) vals.push_back(r + "=" + v);
            out << l.local_id << "  " << l.master_id << "  " << text::join(vals, " ") << "\n";
          }
        }
      } else {
        for (const auto& [_, m] : ws.curation().masters()) {
          if (m.entity_type != id) continue;
          j.push_back(master_to_json(m));
          if (!opt.structured()) {
            out << m.master_id << "  " << m.members.size() << "  "
                << text::join({m.members.begin(), m.members.end()}, " ") << "\n";
          }
        }
      }
      if (opt.structured()) print_json(out, j);
    } else if (cmd == terms) {
      Json j = Json::array();
      for (const auto& [key, t] : ws.curation().terms()) {
        if (key.first != vocab_name) continue;
        j.push_back(term_to_json(t));
        if (!opt.structured()) {
          out << t.raw << "  preferred=" << t.preferred_term.value_or("") << "  broader=" << t.broader.value_or("")
              << "  appearances=" << t.appearances.size() << "\n";
        }
      }
      if (opt.structured()) print_json(out, j);
    } else if (cmd == serve) {
      Service service(ws);
      service.start(address.empty() ? ws.config().address : address, port >= 0 ? port : ws.config().port);
      err << "listening on " << (address.empty() ? ws.config().address : address) << ":" << service.port() << "\n";
      g_serving = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.wait();
      g_serving = nullptr;
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.is_user_error() ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace archgraph
