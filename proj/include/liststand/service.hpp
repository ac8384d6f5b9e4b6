#pragma once

#include "liststand/engine.hpp"

#include <json.hpp>
#include <memory>
#include <string>

namespace liststand {

enum class JobKind { ingest, materialize };
enum class JobState { pending, running, done, failed };
const char* to_string(JobKind k);
const char* to_string(JobState s);

struct ApiJob {
  std::string job_id;
  JobKind kind = JobKind::ingest;
  JobState state = JobState::pending;
  std::string detail;
  nlohmann::json result;  // set when done
};

nlohmann::json job_to_json(const ApiJob& job);

/// JSON HTTP front end over an Engine. Long operations run as jobs on
/// background threads so queries stay responsive.
class Service {
public:
  explicit Service(Engine& engine);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds; port 0 picks a free one. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  void run();
  void stop();
  /// Spawns run() on an internal thread.
  void start_background();

  /// Blocks until the job leaves pending/running; for tests and scripts.
  ApiJob wait_job(const std::string& job_id);

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace liststand
