#include <gtest/gtest.h>

#include <httplib.h>

#include <cstdlib>
#include <sstream>

#include "archgraph/canonical_io.hpp"
#include "archgraph/cli.hpp"
#include "archgraph/service.hpp"
#include "support.hpp"

namespace archgraph {
namespace {

using testing::maritime;
using testing::TempDir;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  CliRun run(std::vector<std::string> args) {
    std::vector<std::string> full{"--data", data.string()};
    full.insert(full.end(), args.begin(), args.end());
    std::ostringstream out, err;
    int code = run_cli(full, out, err);
    return {code, out.str(), err.str()};
  }
  CliRun ok(std::vector<std::string> args) {
    auto r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return r;
  }
  void load() {
    ok({"--config", maritime("config.json").string(), "init"});
    ok({"import-template", maritime("templates/ship-register.json").string()});
    ok({"import-ontology", maritime("ontology.json").string()});
    ok({"import-mapping", maritime("mappings/ship-register.json").string()});
    ok({"import-record", maritime("records").string(), "--author", "tester"});
    ok({"publish", "--all"});
  }
  std::string local_named(const std::string& name) {
    auto r = ok({"--format", "structured", "locals", "person"});
    for (const auto& l : Json::parse(r.out))
      if (l["attributes"].dump().find(name) != std::string::npos) return l["id"];
    return "";
  }

  TempDir dir{"cli"};
  std::filesystem::path data = dir / "data";
};

TEST_F(Cli, FullWorkflow) {
  load();
  auto imported = ok({"--format", "structured", "transform"});
  EXPECT_EQ(Json::parse(imported.out)["records"].size(), 3u);
  auto q = ok({"query", "--file", maritime("queries/ships-by-construction-place.json").string(), "--csv"});
  EXPECT_EQ(q.out, "place,count\nSardinia,1\nSyros,1\nUnknown,1\n");
  auto table = ok({"query", "--file", maritime("queries/ships-by-construction-place.json").string()});
  EXPECT_NE(table.out.find("Unknown"), std::string::npos);

  ok({"auto-match", "--rules", maritime("rules.json").string()});
  std::string a = local_named("Agostino B??ndi"), b = local_named("A Brondi");
  ASSERT_FALSE(a.empty());
  ASSERT_FALSE(b.empty());
  auto m = ok({"match", a, b});
  std::string master = m.out.substr(0, m.out.find('\n'));
  EXPECT_EQ(master.rfind("m-", 0), 0u);
  ok({"set-preferred", master, "name", "Agostino Brondi"});
  ok({"set-preferred-term", "professions", "Capitano", "Captain"});
  ok({"set-broader", "professions", "Mozzo", "Marinaio"});
  ok({"transform"});

  auto prov = ok({"provenance", "https://rs.sealitproject.eu/kb/person/agostino-brondi"});
  EXPECT_NE(prov.out.find("Agostino B??ndi"), std::string::npos);
  EXPECT_NE(prov.out.find("A Brondi"), std::string::npos);

  auto out_file = dir / "export.nq";
  ok({"export", "--graphs", "all", "--output", out_file.string()});
  auto exported = read_file(out_file);
  EXPECT_EQ(ok({"export"}).out, exported);
  auto links = ok({"export", "--graphs", "curation-links"}).out;
  EXPECT_NE(links.find("same-identity"), std::string::npos);
  EXPECT_EQ(links.find("/graph/record/"), std::string::npos);
  auto one = ok({"export", "--graphs", "record:reg-003"}).out;
  EXPECT_NE(one.find("Speranza"), std::string::npos);
  EXPECT_EQ(one.find("Pallade"), std::string::npos);

  auto terms = ok({"terms", "professions"}).out;
  EXPECT_NE(terms.find("Capitano  preferred=Captain"), std::string::npos);
  EXPECT_NE(ok({"masters", "person"}).out.find(master), std::string::npos);
  auto quality = ok({"quality"}).out;
  EXPECT_NE(quality.find("construction_place"), std::string::npos);
}

TEST_F(Cli, PartialTransformAndSerialPath) {
  load();
  ok({"transform", "--serial"});
  auto serial = ok({"export"}).out;
  ok({"transform"});
  EXPECT_EQ(ok({"export"}).out, serial);
  auto r = ok({"--format", "structured", "transform", "--record", "reg-002"});
  EXPECT_EQ(Json::parse(r.out)["records"], Json::array({"reg-002"}));
  EXPECT_EQ(ok({"export"}).out, serial);
}

TEST_F(Cli, ImportNquadsAndQuality) {
  load();
  ok({"transform"});
  auto r = ok({"import-nquads", (testing::fixtures_dir() / "quality" / "tonnage-on-person.nq").string()});
  EXPECT_EQ(r.out, "3 quads\n");
  auto q = ok({"--format", "structured", "quality", "--rules", maritime("rules.json").string()});
  auto j = Json::parse(q.out);
  ASSERT_EQ(j["schema_consistency"].size(), 1u);
  EXPECT_EQ(j["schema_consistency"][0]["property"], "has_tonnage");
}

TEST_F(Cli, Errors) {
  auto none = run({});
  EXPECT_EQ(none.code, 1);
  auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("transform"), std::string::npos);

  ok({"init"});
  auto missing = run({"import-template", (dir / "nope.json").string()});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("error: "), std::string::npos);

  auto bad_type = run({"locals", "vessel"});
  EXPECT_EQ(bad_type.code, 1);
  EXPECT_NE(bad_type.err.find("unknown-target"), std::string::npos);

  ok({"import-template", maritime("templates/ship-register.json").string()});
  ok({"import-ontology", maritime("ontology.json").string()});
  auto doc = Json::parse(read_file(maritime("mappings/ship-register.json")));
  doc["entities"][0]["class"] = "Vessel";
  write_file_atomic(dir / "bad-mapping.json", doc.dump());
  auto bad = run({"import-mapping", (dir / "bad-mapping.json").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("issues"), std::string::npos);

  auto publish = run({"publish"});
  EXPECT_EQ(publish.code, 1);
  EXPECT_EQ(run({"match", "l-only"}).code, 1);
  EXPECT_EQ(run({"--format", "xml", "init"}).code, 1);

  std::ostringstream out, err;
  ::unsetenv("ARCHGRAPH_DATA");
  EXPECT_EQ(run_cli({"init"}, out, err), 1);
  EXPECT_NE(err.str().find("ARCHGRAPH_DATA"), std::string::npos);
}

TEST_F(Cli, SameOutputAsServiceApi) {
  load();
  ok({"auto-match", "--rules", maritime("rules.json").string()});
  ok({"transform"});
  auto cli_export = ok({"export"}).out;
  auto cli_quality = ok({"--format", "structured", "quality"}).out;

  Workspace ws(dir / "svc", testing::maritime_config());
  Service service(ws);
  service.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", service.port());
  auto post = [&](const std::string& path, const std::string& body) {
    auto res = client.Post(path, body, "application/json");
    EXPECT_TRUE(res && res->status < 300) << path;
    return res ? Json::parse(res->body) : Json();
  };
  post("/templates", read_file(maritime("templates/ship-register.json")));
  post("/ontology", read_file(maritime("ontology.json")));
  post("/mappings", read_file(maritime("mappings/ship-register.json")));
  for (auto id : {"reg-001", "reg-002", "reg-003"}) {
    post("/records", read_file(maritime(std::string("records/") + id + ".json")));
    post(std::string("/records/") + id + "/publish", "");
  }
  auto rules = Json::parse(read_file(maritime("rules.json")));
  auto match = post("/jobs", Json{{"kind", "auto-match"}, {"rules", rules}}.dump());
  service.wait_job(match["id"]);
  auto tr = post("/jobs", R"({"kind":"transform"})");
  service.wait_job(tr["id"]);
  auto exported = client.Get("/graphs/export");
  auto quality = client.Get("/quality");
  ASSERT_TRUE(exported && quality);
  EXPECT_EQ(exported->body, cli_export);
  EXPECT_EQ(to_canonical(Json::parse(quality->body)), cli_quality);
  service.stop();
}

TEST_F(Cli, EmptyDirectoryExportsNothing) {
  ok({"init"});
  auto r = ok({"export"});
  EXPECT_EQ(r.out, "");
}

TEST_F(Cli, TransformWithoutMappingNamesTemplate) {
  ok({"init"});
  ok({"import-template", maritime("templates/ship-register.json").string()});
  ok({"import-record", maritime("records/reg-001.json").string()});
  ok({"publish", "reg-001"});
  auto r = run({"transform"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("missing-mapping"), std::string::npos);
  EXPECT_NE(r.err.find("ship-register"), std::string::npos);
}

TEST_F(Cli, LockedDirectory) {
  ok({"init"});
  DirectoryLock held(data);
  auto r = run({"import-template", maritime("templates/ship-register.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("locked"), std::string::npos);
  // readers are not blocked
  EXPECT_EQ(run({"export"}).code, 0);
}

TEST_F(Cli, EvolveTemplate) {
  load();
  write_file_atomic(dir / "change.json",
                    R"({"ops":[{"op":"rename-column","table":"crew","from":"birth_place","to":"place_of_birth"}]})");
  auto r = ok({"evolve-template", "ship-register", (dir / "change.json").string()});
  EXPECT_EQ(r.out, "template ship-register version 2\n");
  write_file_atomic(dir / "destructive.json", R"({"ops":[{"op":"delete-column","table":"crew","column":"name"}]})");
  EXPECT_EQ(run({"evolve-template", "ship-register", (dir / "destructive.json").string()}).code, 1);
}

}  // namespace
}  // namespace archgraph
