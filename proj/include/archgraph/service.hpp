#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "archgraph/canonical_io.hpp"
#include "archgraph/error.hpp"
#include "archgraph/workspace.hpp"

namespace archgraph {

struct JobStatus {
  enum class State { kQueued, kRunning, kDone, kFailed };

  std::string id;
  std::string kind;  // "transform" or "auto-match"
  State state = State::kQueued;
  Json scope;
  Json report;  // on completion
  Json error;   // {"code", "message"} when failed

  bool terminal() const { return state == State::kDone || state == State::kFailed; }
  Json to_json() const;
};

const char* job_state_name(JobStatus::State state);

struct ServiceOptions {
  // Pause before each job starts executing; lets tests observe running jobs.
  std::chrono::milliseconds job_delay{0};
};

// HTTP API over one workspace. Endpoint catalogue: docs/api.md.
class Service {
 public:
  explicit Service(Workspace& workspace, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and starts serving on a background thread. Port 0 picks a free
  // port. Throws kPortInUse when the address cannot be bound.
  void start(const std::string& address, int port);
  int port() const;
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

  // Job API, also used by the HTTP handlers. Throws kConflict when a job of
  // the same kind with an overlapping scope is queued or running, and
  // kInvalidArgument for malformed requests.
  JobStatus submit_job(const Json& request);
  JobStatus poll_job(const std::string& id) const;
  std::vector<JobStatus> jobs() const;
  // Waits for a job to reach a terminal state (tests and scripts).
  JobStatus wait_job(const std::string& id, std::chrono::milliseconds timeout = std::chrono::seconds(60)) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP status for an error code.
int http_status(ErrorCode code);

}  // namespace archgraph
