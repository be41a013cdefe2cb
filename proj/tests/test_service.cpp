#include <gtest/gtest.h>

#include <httplib.h>

#include "archgraph/canonical_io.hpp"
#include "archgraph/service.hpp"
#include "support.hpp"

namespace archgraph {
namespace {

using testing::maritime;
using testing::TempDir;

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ws = std::make_unique<Workspace>(dir / "data", testing::maritime_config());
    ServiceOptions opts;
    opts.job_delay = delay();
    service = std::make_unique<Service>(*ws, opts);
    service->start("127.0.0.1", 0);
    client = std::make_unique<httplib::Client>("127.0.0.1", service->port());
    client->set_read_timeout(30, 0);
  }
  void TearDown() override {
    client.reset();
    service->stop();
    service.reset();
    ws.reset();
  }
  virtual std::chrono::milliseconds delay() const { return std::chrono::milliseconds(0); }

  Json post(const std::string& path, const std::string& body, int expect) {
    auto res = client->Post(path, body, "application/json");
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return res->body.empty() ? Json() : Json::parse(res->body);
  }
  Json get(const std::string& path, int expect = 200) {
    auto res = client->Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return Json::parse(res->body);
  }
  void load_over_http() {
    post("/templates", read_file(maritime("templates/ship-register.json")), 201);
    post("/ontology", read_file(maritime("ontology.json")), 201);
    post("/mappings", read_file(maritime("mappings/ship-register.json")), 201);
    for (auto id : {"reg-001", "reg-002", "reg-003"}) {
      post("/records", read_file(maritime(std::string("records/") + id + ".json")), 201);
      post(std::string("/records/") + id + "/publish", "", 200);
    }
  }
  Json run_job(const Json& request) {
    auto job = post("/jobs", request.dump(), 202);
    auto done = service->wait_job(job["id"]);
    EXPECT_EQ(std::string(job_state_name(done.state)), "done") << done.to_json().dump();
    return get("/jobs/" + job["id"].get<std::string>());
  }

  TempDir dir{"svc"};
  std::unique_ptr<Workspace> ws;
  std::unique_ptr<Service> service;
  std::unique_ptr<httplib::Client> client;
};

TEST_F(ServiceTest, Health) { EXPECT_EQ(get("/health")["status"], "ok"); }

TEST_F(ServiceTest, GroupedQueryOverHttp) {
  load_over_http();
  auto job = run_job({{"kind", "transform"}, {"scope", "all"}});
  EXPECT_EQ(job["state"], "done");
  EXPECT_EQ(job["report"]["records"].size(), 3u);

  auto query = read_file(maritime("queries/ships-by-construction-place.json"));
  auto res = client->Post("/query?format=csv", query, "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, "place,count\nSardinia,1\nSyros,1\nUnknown,1\n");
  auto table = post("/query", query, 200);
  EXPECT_TRUE(table.is_object());
}

TEST_F(ServiceTest, CurationEndpoints) {
  load_over_http();
  auto locals = get("/curation/person/locals");
  std::vector<std::string> brondi;
  for (const auto& l : locals) {
    std::string id = l["id"];
    std::string name = l.dump();
    if (name.find("B??ndi") != std::string::npos || name.find("A Brondi") != std::string::npos) brondi.push_back(id);
  }
  ASSERT_EQ(brondi.size(), 2u);
  auto master = post("/curation/match", Json{{"ids", brondi}}.dump(), 200);
  EXPECT_EQ(master["members"].size(), 2u);
  std::string mid = master["id"];

  auto pref = post("/curation/masters/" + mid + "/preferred", R"({"role":"name","value":"Agostino Brondi"})", 200);
  EXPECT_EQ(pref["preferred"]["name"], "Agostino Brondi");
  post("/curation/masters/" + mid + "/enrichments", R"({"key":"nationality","value":"Italian"})", 400);

  auto term = post("/vocabularies/professions/terms/preferred", R"({"raw":"Capitano","preferred":"Captain"})", 200);
  EXPECT_EQ(term["preferred"], "Captain");
  post("/vocabularies/professions/terms/broader", R"({"raw":"Mozzo","broader":"Marinaio"})", 200);
  post("/vocabularies/professions/terms/broader", R"({"raw":"Marinaio","broader":"Mozzo"})", 400);
  EXPECT_GE(get("/vocabularies/professions/terms").size(), 3u);

  auto single = post("/curation/unmatch", Json{{"local", brondi[0]}}.dump(), 200);
  EXPECT_EQ(single["members"].size(), 1u);
  get("/curation/vessel/masters", 404);

  run_job({{"kind", "transform"}});
  auto prov = get("/provenance?iri=" + httplib::detail::encode_query_param(
                                           "https://rs.sealitproject.eu/kb/term/professions/capitano"));
  EXPECT_EQ(prov.size(), 2u);
  get("/provenance?iri=" + httplib::detail::encode_query_param("https://nowhere.example/x"), 404);
}

TEST_F(ServiceTest, RecordsAndTemplates) {
  load_over_http();
  auto records = get("/records");
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0]["published_version"], 1);
  auto rec = get("/records/reg-001");
  EXPECT_EQ(rec["tables"]["crew"][0]["cells"]["name"]["raw"], "Agostino B??ndi");
  get("/records/reg-404", 404);
  get("/records/reg-001?version=7", 404);
  get("/records/reg-001?version=x", 400);
  EXPECT_EQ(get("/records/reg-001/versions").size(), 1u);
  auto tmpl = post("/templates/ship-register/changes",
                   R"({"ops":[{"op":"add-column","table":"ship","column":{"name":"flag","kind":"plain-text"}}]})", 201);
  EXPECT_EQ(tmpl["version"], 2);
  EXPECT_EQ(get("/templates/ship-register?version=1")["version"], 1);
  post("/templates/ship-register/changes", R"({"ops":[{"op":"delete-table","table":"crew"}]})", 400);
  EXPECT_EQ(get("/mappings").size(), 1u);
  get("/mappings/nothing", 400);
}

TEST_F(ServiceTest, InvalidMappingReturnsReport) {
  post("/templates", read_file(maritime("templates/ship-register.json")), 201);
  post("/ontology", read_file(maritime("ontology.json")), 201);
  auto doc = Json::parse(read_file(maritime("mappings/ship-register.json")));
  doc["entities"][0]["class"] = "Vessel";
  auto err = post("/mappings", doc.dump(), 422);
  EXPECT_EQ(err["error"]["code"], "invalid-mapping");
  EXPECT_FALSE(err["error"]["report"]["issues"].empty());
}

TEST_F(ServiceTest, ExportImportAndQuality) {
  load_over_http();
  run_job({{"kind", "transform"}});
  auto res = client->Get("/graphs/export");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->body, ws->export_nquads());
  auto one = client->Get("/graphs/export?graph=" +
                         httplib::detail::encode_query_param(ws->config().record_graph("reg-003")));
  ASSERT_TRUE(one);
  EXPECT_EQ(one->body, ws->export_nquads({ws->config().record_graph("reg-003")}));
  auto imported = post("/graphs/import", read_file(testing::fixtures_dir() / "quality" / "tonnage-on-person.nq"), 200);
  EXPECT_EQ(imported["quads"], 3);
  auto quality = get("/quality");
  EXPECT_EQ(quality["schema_consistency"].size(), 1u);
  post("/graphs/import", "<a> <b> <c> .\n", 400);
}

TEST_F(ServiceTest, MalformedRequests) {
  post("/jobs", "{", 400);
  post("/jobs", R"({"kind":"reindex"})", 400);
  post("/jobs", R"({"kind":"transform","scope":42})", 400);
  post("/query", R"({"patterns":[]})", 400);
  get("/jobs/job-999", 404);
}

TEST_F(ServiceTest, FailedJobCarriesError) {
  post("/templates", read_file(maritime("templates/ship-register.json")), 201);
  post("/records", read_file(maritime("records/reg-001.json")), 201);
  post("/records/reg-001/publish", "", 200);
  auto job = post("/jobs", R"({"kind":"transform"})", 202);
  auto done = service->wait_job(job["id"]);
  EXPECT_EQ(done.state, JobStatus::State::kFailed);
  EXPECT_EQ(done.error["code"], "missing-mapping");
}

class SlowJobs : public ServiceTest {
  std::chrono::milliseconds delay() const override { return std::chrono::milliseconds(400); }
};

TEST_F(SlowJobs, OverlappingJobsConflict) {
  load_over_http();
  auto first = post("/jobs", R"({"kind":"transform","scope":{"records":["reg-001","reg-002"]}})", 202);
  EXPECT_EQ(first["state"], "queued");
  auto clash = post("/jobs", R"({"kind":"transform","scope":{"records":["reg-002"]}})", 409);
  EXPECT_EQ(clash["error"]["code"], "conflict");
  post("/jobs", R"({"kind":"transform","scope":"all"})", 409);
  auto other = post("/jobs", R"({"kind":"transform","scope":{"records":["reg-003"]}})", 202);
  auto rules = Json::parse(read_file(maritime("rules.json")));
  auto match = post("/jobs", Json{{"kind", "auto-match"}, {"rules", rules}}.dump(), 202);
  for (const auto& j : {first, other, match}) EXPECT_EQ(service->wait_job(j["id"]).state, JobStatus::State::kDone);
  EXPECT_EQ(get("/jobs").size(), 3u);
  post("/jobs", R"({"kind":"transform","scope":{"records":["reg-002"]}})", 202);
}

TEST(Service, PortInUse) {
  TempDir dir("svc");
  Workspace ws(dir / "data", testing::maritime_config());
  Service a(ws);
  a.start("127.0.0.1", 0);
  Service b(ws);
  try {
    b.start("127.0.0.1", a.port());
    FAIL() << "expected port-in-use";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPortInUse);
  }
  a.stop();
}

}  // namespace
}  // namespace archgraph
