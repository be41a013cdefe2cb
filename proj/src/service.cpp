#include "archgraph/service.hpp"

#include <atomic>
#include <condition_variable>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "archgraph/error.hpp"

namespace archgraph {

namespace {

constexpr const char* kJson = "application/json";

struct JobScope {
  std::string kind;
  bool all = false;
  std::set<std::string> items;  // record ids or entity types

  bool overlaps(const JobScope& o) const {
    if (kind != o.kind) return false;
    if (all || o.all) return true;
    for (const auto& i : items) {
      if (o.items.count(i)) return true;
    }
    return false;
  }
};

Json error_json(ErrorCode code, const std::string& message) {
  return {{"error", {{"code", to_string(code)}, {"message", message}}}};
}

Json version_json(const RecordVersion& v) {
  return {{"record_id", v.record_id},
          {"version", v.version},
          {"timestamp", v.timestamp},
          {"author", v.author},
          {"content_hash", v.content_hash}};
}

Json body_json(const httplib::Request& req) { return parse_document(req.body, "request body"); }

std::string string_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("request needs string field '") + key + "'");
  }
  return j[key].get<std::string>();
}

std::optional<int> version_param(const httplib::Request& req) {
  if (!req.has_param("version")) return std::nullopt;
  try {
    return std::stoi(req.get_param_value("version"));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "version must be an integer");
  }
}

}  // namespace

const char* job_state_name(JobStatus::State state) {
  switch (state) {
    case JobStatus::State::kQueued: return "queued";
    case JobStatus::State::kRunning: return "running";
    case JobStatus::State::kDone: return "done";
    case JobStatus::State::kFailed: return "failed";
  }
  return "unknown";
}

Json JobStatus::to_json() const {
  Json j = {{"id", id}, {"kind", kind}, {"state", job_state_name(state)}, {"scope", scope}};
  if (!report.is_null()) j["report"] = report;
  if (!error.is_null()) j["error"] = error;
  return j;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTemplateNotFound:
    case ErrorCode::kUnknownTemplate:
    case ErrorCode::kUnknownRecord:
    case ErrorCode::kUnknownVersion:
    case ErrorCode::kUnknownTarget:
    case ErrorCode::kUnknownTerm:
    case ErrorCode::kUnknownIri:
    case ErrorCode::kUnknownJob:
      return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kLocked:
      return 409;
    case ErrorCode::kValidationFailed:
    case ErrorCode::kInvalidMapping:
      return 422;
    case ErrorCode::kInternal:
    case ErrorCode::kIo:
    case ErrorCode::kCorruptStore:
      return 500;
    default:
      return 400;
  }
}

struct Service::Impl {
  Workspace& ws;
  ServiceOptions options;
  httplib::Server server;
  std::thread listener;
  int port = 0;
  std::atomic<bool> running{false};

  mutable std::mutex jobs_mutex;
  mutable std::condition_variable jobs_cv;
  std::map<std::string, JobStatus> jobs;
  std::map<std::string, JobScope> scopes;
  std::vector<std::thread> workers;
  uint64_t next_job = 1;

  Impl(Workspace& w, ServiceOptions o) : ws(w), options(o) {
    // no SO_REUSEPORT: a second server on a busy port must fail to bind
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    routes();
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  Handler guarded(Handler h) {
    return [h](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        res.status = http_status(e.code());
        res.set_content(error_json(e.code(), e.what()).dump(), kJson);
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(error_json(ErrorCode::kInternal, e.what()).dump(), kJson);
      }
    };
  }

  static void reply(httplib::Response& res, const Json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), kJson);
  }

  void check_type(const std::string& type) const {
    if (!ws.config().entity_types.count(type)) throw Error(ErrorCode::kUnknownTarget, "unknown entity type " + type);
  }

  void routes() {
    auto& s = server;
    s.Get("/health", guarded([](const auto&, auto& res) { reply(res, {{"status", "ok"}}); }));

    s.Get("/templates", guarded([this](const auto&, auto& res) {
      Json out = Json::array();
      for (const auto& id : ws.records().template_ids()) {
        Template t = ws.records().get_template(id);
        out.push_back({{"id", t.id}, {"name", t.name}, {"version", t.version}});
      }
      reply(res, out);
    }));
    s.Post("/templates", guarded([this](const auto& req, auto& res) {
      reply(res, template_to_json(ws.import_template(req.body)), 201);
    }));
    s.Get(R"(/templates/([^/]+))", guarded([this](const auto& req, auto& res) {
      reply(res, template_to_json(ws.records().get_template(req.matches[1], version_param(req))));
    }));
    s.Post(R"(/templates/([^/]+)/changes)", guarded([this](const auto& req, auto& res) {
      auto change = template_change_from_json(body_json(req));
      reply(res, template_to_json(ws.evolve_template(req.matches[1], change)), 201);
    }));

    s.Get("/records", guarded([this](const auto&, auto& res) {
      Json out = Json::array();
      for (const auto& id : ws.records().record_ids()) {
        auto state = ws.records().publish_state(id);
        out.push_back({{"id", id},
                       {"versions", ws.records().versions(id).size()},
                       {"published_version", state.published_version ? Json(*state.published_version) : Json(nullptr)}});
      }
      reply(res, out);
    }));
    s.Post("/records", guarded([this](const auto& req, auto& res) {
      reply(res, version_json(ws.import_record(req.body, req.get_header_value("X-Author"))), 201);
    }));
    s.Get(R"(/records/([^/]+))", guarded([this](const auto& req, auto& res) {
      reply(res, record_to_json(ws.records().get_record(req.matches[1], version_param(req))));
    }));
    s.Get(R"(/records/([^/]+)/versions)", guarded([this](const auto& req, auto& res) {
      Json out = Json::array();
      for (const auto& v : ws.records().versions(req.matches[1])) out.push_back(version_json(v));
      reply(res, out);
    }));
    s.Post(R"(/records/([^/]+)/publish)", guarded([this](const auto& req, auto& res) {
      reply(res, ws.publish(req.matches[1]).to_json());
    }));

    s.Get(R"(/curation/([^/]+)/locals)", guarded([this](const auto& req, auto& res) {
      std::string type = req.matches[1];
      check_type(type);
      Json out = Json::array();
      for (const auto& [_, l] : ws.curation().locals()) {
        if (l.entity_type == type) out.push_back(local_to_json(l));
      }
      reply(res, out);
    }));
    s.Get(R"(/curation/([^/]+)/masters)", guarded([this](const auto& req, auto& res) {
      std::string type = req.matches[1];
      check_type(type);
      Json out = Json::array();
      for (const auto& [_, m] : ws.curation().masters()) {
        if (m.entity_type == type) out.push_back(master_to_json(m));
      }
      reply(res, out);
    }));
    s.Get(R"(/curation/appearances/([^/]+))", guarded([this](const auto& req, auto& res) {
      Json out = Json::array();
      for (const auto& a : ws.curation().list_appearances(req.matches[1])) out.push_back(anchor_to_json(a));
      reply(res, out);
    }));
    s.Post("/curation/match", guarded([this](const auto& req, auto& res) {
      Json body = body_json(req);
      if (!body.contains("ids") || !body["ids"].is_array()) {
        throw Error(ErrorCode::kInvalidArgument, "request needs array field 'ids'");
      }
      std::set<std::string> ids;
      for (const auto& id : body["ids"]) ids.insert(id.get<std::string>());
      std::string master = ws.manual_match(ids);
      reply(res, master_to_json(*ws.curation().find_master(master)));
    }));
    s.Post("/curation/unmatch", guarded([this](const auto& req, auto& res) {
      std::string master = ws.unmatch(string_field(body_json(req), "local"));
      reply(res, master_to_json(*ws.curation().find_master(master)));
    }));
    s.Post(R"(/curation/masters/([^/]+)/preferred)", guarded([this](const auto& req, auto& res) {
      Json body = body_json(req);
      reply(res, master_to_json(ws.set_preferred(req.matches[1], string_field(body, "role"), string_field(body, "value"))));
    }));
    s.Post(R"(/curation/masters/([^/]+)/enrichments)", guarded([this](const auto& req, auto& res) {
      Json body = body_json(req);
      reply(res, master_to_json(ws.set_enrichment(req.matches[1], string_field(body, "key"), string_field(body, "value"))));
    }));

    s.Get(R"(/vocabularies/([^/]+)/terms)", guarded([this](const auto& req, auto& res) {
      std::string vocab = req.matches[1];
      Json out = Json::array();
      for (const auto& [key, t] : ws.curation().terms()) {
        if (key.first == vocab) out.push_back(term_to_json(t));
      }
      reply(res, out);
    }));
    s.Post(R"(/vocabularies/([^/]+)/terms/preferred)", guarded([this](const auto& req, auto& res) {
      Json body = body_json(req);
      reply(res, term_to_json(ws.set_preferred_term(req.matches[1], string_field(body, "raw"), string_field(body, "preferred"))));
    }));
    s.Post(R"(/vocabularies/([^/]+)/terms/broader)", guarded([this](const auto& req, auto& res) {
      Json body = body_json(req);
      reply(res, term_to_json(ws.set_broader(req.matches[1], string_field(body, "raw"), string_field(body, "broader"))));
    }));

    s.Get("/ontology", guarded([this](const auto&, auto& res) { reply(res, ontology_to_json(ws.ontology())); }));
    s.Post("/ontology", guarded([this](const auto& req, auto& res) {
      reply(res, ontology_to_json(ws.import_ontology(req.body)), 201);
    }));

    s.Get("/mappings", guarded([this](const auto&, auto& res) {
      Json out = Json::array();
      for (const auto& [tid, m] : ws.mappings()) out.push_back({{"template", tid}, {"template_version", m.template_version}});
      reply(res, out);
    }));
    s.Get(R"(/mappings/([^/]+))", guarded([this](const auto& req, auto& res) {
      auto maps = ws.mappings();
      auto it = maps.find(req.matches[1]);
      if (it == maps.end()) throw Error(ErrorCode::kMissingMapping, "no mapping for template '" + std::string(req.matches[1]) + "'");
      reply(res, mapping_to_json(it->second));
    }));
    s.Post("/mappings", guarded([this](const auto& req, auto& res) {
      ValidationReport report = ws.import_mapping(req.body);
      if (!report.ok()) {
        Json err = error_json(ErrorCode::kInvalidMapping, "mapping does not validate");
        err["error"]["report"] = report.to_json();
        reply(res, err, 422);
        return;
      }
      reply(res, {{"valid", true}}, 201);
    }));

    s.Post("/jobs", guarded([this](const auto& req, auto& res) { reply(res, submit(body_json(req)).to_json(), 202); }));
    s.Get("/jobs", guarded([this](const auto&, auto& res) {
      Json out = Json::array();
      for (const auto& j : list()) out.push_back(j.to_json());
      reply(res, out);
    }));
    s.Get(R"(/jobs/([^/]+))", guarded([this](const auto& req, auto& res) { reply(res, poll(req.matches[1]).to_json()); }));

    s.Post("/query", guarded([this](const auto& req, auto& res) {
      ResultTable table = ws.query(body_json(req));
      if (req.has_param("format") && req.get_param_value("format") == "csv") {
        res.set_content(table.to_csv(), "text/csv");
        return;
      }
      reply(res, table.to_json());
    }));
    s.Get("/graphs/export", guarded([this](const auto& req, auto& res) {
      std::set<std::string> scope;
      for (size_t i = 0; i < req.get_param_value_count("graph"); ++i) scope.insert(req.get_param_value("graph", i));
      res.set_content(ws.export_nquads(scope), "application/n-quads");
    }));
    s.Post("/graphs/import", guarded([this](const auto& req, auto& res) {
      reply(res, {{"quads", ws.import_nquads(req.body)}});
    }));
    s.Get(R"(/provenance/(.+))", guarded([this](const auto& req, auto& res) { provenance(req.matches[1], res); }));
    s.Get("/provenance", guarded([this](const auto& req, auto& res) {
      if (!req.has_param("iri")) throw Error(ErrorCode::kInvalidArgument, "missing 'iri' parameter");
      provenance(req.get_param_value("iri"), res);
    }));
    s.Get("/quality", guarded([this](const auto&, auto& res) { reply(res, ws.quality().to_json()); }));
  }

  void provenance(const std::string& iri, httplib::Response& res) {
    Json out = Json::array();
    for (const auto& e : ws.provenance(iri)) out.push_back(e.to_json());
    reply(res, out);
  }

  JobStatus submit(const Json& request) {
    std::string kind = string_field(request, "kind");
    JobScope scope{kind, false, {}};
    Json scope_json;
    std::function<Json()> work;
    if (kind == "transform") {
      TransformScope ts;
      const Json s = request.value("scope", Json("all"));
      if (s == "all") {
        scope.all = true;
      } else if (s.is_object() && s.contains("records") && s["records"].is_array()) {
        ts.all = false;
        for (const auto& id : s["records"]) ts.records.insert(id.get<std::string>());
        scope.items = ts.records;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "transform scope must be \"all\" or {\"records\": [...]}");
      }
      scope_json = s;
      work = [this, ts] { return ws.transform(ts).to_json(); };
    } else if (kind == "auto-match") {
      if (!request.contains("rules")) throw Error(ErrorCode::kInvalidArgument, "auto-match needs 'rules'");
      auto rules = parse_match_rules(request["rules"].dump());
      for (const auto& r : rules) scope.items.insert(r.entity_type);
      scope_json = Json(scope.items);
      work = [this, rules] { return ws.auto_match(rules).to_json(); };
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown job kind '" + kind + "'");
    }

    std::lock_guard lock(jobs_mutex);
    for (const auto& [id, st] : jobs) {
      if (!st.terminal() && scopes.at(id).overlaps(scope)) {
        throw Error(ErrorCode::kConflict, "job " + id + " is already working on an overlapping scope");
      }
    }
    JobStatus status;
    status.id = "job-" + std::to_string(next_job++);
    status.kind = kind;
    status.scope = scope_json;
    jobs[status.id] = status;
    scopes[status.id] = scope;
    workers.emplace_back([this, id = status.id, work] { execute(id, work); });
    return status;
  }

  void execute(const std::string& id, const std::function<Json()>& work) {
    if (options.job_delay.count() > 0) std::this_thread::sleep_for(options.job_delay);
    update(id, [](JobStatus& s) { s.state = JobStatus::State::kRunning; });
    try {
      Json report = work();
      update(id, [&](JobStatus& s) {
        s.report = report;
        s.state = JobStatus::State::kDone;
      });
    } catch (const Error& e) {
      update(id, [&](JobStatus& s) {
        s.error = error_json(e.code(), e.what())["error"];
        s.state = JobStatus::State::kFailed;
      });
    } catch (const std::exception& e) {
      update(id, [&](JobStatus& s) {
        s.error = error_json(ErrorCode::kInternal, e.what())["error"];
        s.state = JobStatus::State::kFailed;
      });
    }
  }

  void update(const std::string& id, const std::function<void(JobStatus&)>& f) {
    {
      std::lock_guard lock(jobs_mutex);
      f(jobs.at(id));
    }
    jobs_cv.notify_all();
  }

  JobStatus poll(const std::string& id) const {
    std::lock_guard lock(jobs_mutex);
    auto it = jobs.find(id);
    if (it == jobs.end()) throw Error(ErrorCode::kUnknownJob, "unknown job " + id);
    return it->second;
  }

  std::vector<JobStatus> list() const {
    std::lock_guard lock(jobs_mutex);
    std::vector<JobStatus> out;
    for (const auto& [_, s] : jobs) out.push_back(s);
    return out;
  }
};

Service::Service(Workspace& workspace, ServiceOptions options)
    : impl_(std::make_unique<Impl>(workspace, options)) {}

Service::~Service() {
  stop();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->jobs_mutex);
    workers.swap(impl_->workers);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

void Service::start(const std::string& address, int port) {
  if (impl_->running) throw Error(ErrorCode::kInvalidArgument, "service already started");
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(address);
    if (impl_->port < 0) throw Error(ErrorCode::kPortInUse, "cannot bind " + address);
  } else {
    if (!impl_->server.bind_to_port(address, port)) {
      throw Error(ErrorCode::kPortInUse, "cannot bind " + address + ":" + std::to_string(port));
    }
    impl_->port = port;
  }
  impl_->running = true;
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

int Service::port() const { return impl_->port; }

void Service::stop() {
  if (!impl_->running.exchange(false)) return;
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
}

void Service::wait() {
  if (impl_->listener.joinable()) impl_->listener.join();
}

JobStatus Service::submit_job(const Json& request) { return impl_->submit(request); }

JobStatus Service::poll_job(const std::string& id) const { return impl_->poll(id); }

std::vector<JobStatus> Service::jobs() const { return impl_->list(); }

JobStatus Service::wait_job(const std::string& id, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(impl_->jobs_mutex);
  auto it = impl_->jobs.find(id);
  if (it == impl_->jobs.end()) throw Error(ErrorCode::kUnknownJob, "unknown job " + id);
  impl_->jobs_cv.wait_for(lock, timeout, [&] { return impl_->jobs.at(id).terminal(); });
  return impl_->jobs.at(id);
}

}  // namespace archgraph
