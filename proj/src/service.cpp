#include "liststand/service.hpp"

#include "liststand/error.hpp"
#include "liststand/export.hpp"
#include "liststand/message_io.hpp"
#include "liststand/text.hpp"

#include <httplib.h>

#include <atomic>
#include <condition_variable>
#include <map>
#include <thread>

namespace liststand {

using json = nlohmann::json;

const char* to_string(JobKind k) { return k == JobKind::ingest ? "ingest" : "materialize"; }

const char* to_string(JobState s) {
  switch (s) {
    case JobState::pending: return "pending";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "pending";
}

json job_to_json(const ApiJob& job) {
  return {{"job_id", job.job_id},
          {"kind", to_string(job.kind)},
          {"state", to_string(job.state)},
          {"detail", job.detail},
          {"result", job.result}};
}

namespace {

// Raised while decoding a request; becomes 400.
struct BadRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    default: return 422;
  }
}

const char* code_name(int status) {
  switch (status) {
    case 400: return "bad_request";
    case 404: return "not_found";
    case 409: return "conflict";
    default: return "unprocessable";
  }
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send(res, status, {{"error", {{"code", code_name(status)}, {"message", message}}}});
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw BadRequest("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

template <typename F>
auto decoding(F f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw BadRequest(e.what());
  } catch (const json::exception& e) {
    throw BadRequest(e.what());
  }
}

std::string param(const httplib::Request& req, const char* name, std::string fallback = {}) {
  return req.has_param(name) ? req.get_param_value(name) : fallback;
}

std::optional<std::size_t> limit_param(const httplib::Request& req) {
  if (!req.has_param("limit")) return std::nullopt;
  std::string v = req.get_param_value("limit");
  if (!text::is_integer(v) || v[0] == '-') throw BadRequest("limit must be a non-negative integer");
  return std::stoull(v);
}

std::int64_t int_param(const httplib::Request& req, const char* name, std::int64_t fallback) {
  if (!req.has_param(name)) return fallback;
  std::string v = req.get_param_value(name);
  if (!text::is_integer(v)) throw BadRequest(std::string(name) + " must be an integer");
  return std::stoll(v);
}

json view_status_json(const ViewStatus& v) {
  json j = view_to_json(v.def);
  j["stale"] = v.stale;
  return j;
}

}  // namespace

struct Service::Impl {
  explicit Impl(Engine& e) : engine(e) {}

  Engine& engine;
  httplib::Server server;
  std::thread server_thread;

  std::mutex jobs_mutex;
  std::condition_variable jobs_changed;
  std::map<std::string, ApiJob> jobs;
  std::vector<std::thread> workers;
  std::atomic<std::uint64_t> next_job{1};

  ApiJob submit(JobKind kind, std::string detail, std::function<json()> work) {
    ApiJob job;
    job.job_id = "job-" + std::to_string(next_job++);
    job.kind = kind;
    job.detail = std::move(detail);
    {
      std::lock_guard lock(jobs_mutex);
      jobs[job.job_id] = job;
      workers.emplace_back([this, id = job.job_id, work = std::move(work)] {
        set_state(id, JobState::running, std::nullopt, json());
        try {
          json result = work();
          set_state(id, JobState::done, std::nullopt, std::move(result));
        } catch (const std::exception& e) {
          set_state(id, JobState::failed, std::string(e.what()), json());
        }
      });
    }
    return job;
  }

  void set_state(const std::string& id, JobState state, std::optional<std::string> detail, json result) {
    std::lock_guard lock(jobs_mutex);
    ApiJob& job = jobs.at(id);
    job.state = state;
    if (detail) job.detail = *detail;
    if (!result.is_null()) job.result = std::move(result);
    jobs_changed.notify_all();
  }

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  Handler wrap(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const BadRequest& e) {
        send_error(res, 400, e.what());
      } catch (const Error& e) {
        send_error(res, status_for(e.code()), e.what());
      } catch (const std::exception& e) {
        send_error(res, 422, e.what());
      }
    };
  }

  void routes() {
    server.Post("/ingest", wrap([this](const auto& req, auto& res) { post_ingest(req, res); }));
    server.Get(R"(/jobs/([^/]+))", wrap([this](const auto& req, auto& res) {
      std::lock_guard lock(jobs_mutex);
      auto it = jobs.find(req.matches[1]);
      if (it == jobs.end()) throw Error(ErrorCode::not_found, "no such job: " + std::string(req.matches[1]));
      send(res, 200, job_to_json(it->second));
    }));
    server.Get(R"(/schema/([^/]+))", wrap([this](const auto& req, auto& res) {
      std::string name = req.matches[1];
      auto schema = engine.schema_of(name);
      send(res, 200, {{"collection", name},
                      {"version", engine.views().effective_version(name)},
                      {"schema", schema ? schema_to_json(*schema) : json(nullptr)}});
    }));
    server.Post("/query", wrap([this](const auto& req, auto& res) {
      json body = parse_body(req);
      QuerySpec spec = decoding([&] { return query_from_json(body); });
      auto limit = limit_param(req);
      QueryResult r = engine.query(spec);
      std::size_t total = r.documents.size();
      if (limit && r.documents.size() > *limit) r.documents.resize(*limit);
      send(res, 200, {{"result", to_canonical_xml(r.documents)},
                      {"count", total},
                      {"returned", r.documents.size()},
                      {"schema", schema_to_json(r.schema)}});
    }));
    server.Post("/views", wrap([this](const auto& req, auto& res) {
      json body = parse_body(req);
      auto [name, spec, materialized] = decoding([&] {
        return std::tuple(body.at("name").template get<std::string>(), query_from_json(body.at("spec")),
                          body.value("materialized", false));
      });
      ViewDef def = engine.views().register_view(name, std::move(spec), materialized);
      engine.persist();
      send(res, 201, view_status_json({def, false}));
    }));
    server.Get("/views", wrap([this](const auto&, auto& res) {
      json out = json::array();
      for (const auto& v : engine.views().list()) out.push_back(view_status_json(v));
      send(res, 200, out);
    }));
    server.Post(R"(/views/([^/]+)/refresh)", wrap([this](const auto& req, auto& res) {
      std::string name = req.matches[1];
      engine.views().get(name);  // 404 before queueing
      ApiJob job = submit(JobKind::materialize, "refresh " + name, [this, name] {
        ViewDef def = engine.views().refresh(name);
        engine.persist();
        return view_status_json({def, engine.views().is_stale(name)});
      });
      send(res, 202, job_to_json(job));
    }));
    server.Get("/stats", wrap([this](const auto& req, auto& res) {
      std::string kind = param(req, "kind", "posts_per_entity");
      if (kind != "posts_per_entity" && kind != "posts_per_domain" && kind != "posters_per_domain") {
        throw BadRequest("unknown stats kind: " + kind);
      }
      RankedTable t = engine.stats(kind);
      if (auto limit = limit_param(req)) t = t.top(*limit);
      if (req.has_param("top")) t = t.top(static_cast<std::size_t>(std::max<std::int64_t>(0, int_param(req, "top", 0))));
      if (param(req, "anonymize") == "true" || param(req, "anonymize") == "1") t = t.anonymized();
      json j = table_to_json(t);
      j["kind"] = kind;
      send(res, 200, j);
    }));
    server.Get("/graph", wrap([this](const auto& req, auto& res) {
      std::string kind = param(req, "kind", "coparticipation");
      if (kind != "coparticipation") throw BadRequest("unknown graph kind: " + kind);
      std::string weighting = param(req, "weighting", "threads");
      if (weighting != "threads" && weighting != "message_pairs") throw BadRequest("unknown weighting: " + weighting);
      SocialGraph g = engine.graph(int_param(req, "min_weight", 1), weighting == "threads"
                                                                         ? CoparticipationWeight::threads
                                                                         : CoparticipationWeight::message_pairs);
      send(res, 200, graph_to_json(g));
    }));
    server.Get(R"(/profile/([^/]+))", wrap([this](const auto& req, auto& res) {
      std::string id = req.matches[1];
      if (!text::is_integer(id)) throw BadRequest("entity id must be an integer");
      AnsweringProfile p = engine.profile(std::stoll(id));
      json rows = json::array();
      for (const auto& r : p.rows) {
        rows.push_back({{"other", r.other}, {"replies_to_other", r.replies_to_other},
                        {"replies_from_other", r.replies_from_other}});
      }
      send(res, 200, {{"subject", p.subject}, {"rows", std::move(rows)}});
    }));
    server.Post("/facts", wrap([this](const auto& req, auto& res) { post_facts(req, res); }));
    server.Get("/facts", wrap([this](const auto& req, auto& res) {
      if (!req.has_param("agent")) throw BadRequest("agent parameter is required");
      Timestamp as_of = Timestamp::max();
      if (req.has_param("as_of")) {
        auto t = parse_iso8601(req.get_param_value("as_of"));
        if (!t) throw BadRequest("as_of must be an ISO-8601 timestamp");
        as_of = *t;
      }
      auto facts = engine.known_by(req.get_param_value("agent"), as_of);
      if (auto limit = limit_param(req); limit && facts.size() > *limit) facts.resize(*limit);
      json out = json::array();
      for (const auto& f : facts) out.push_back(fact_to_json(f));
      send(res, 200, out);
    }));
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status == 404 ? 404 : res.status, "no route for " + req.method + " " + req.path);
    });
  }

  void post_ingest(const httplib::Request& req, httplib::Response& res) {
    json body = parse_body(req);
    std::vector<MailboxSource> sources = decoding([&] {
      std::vector<MailboxSource> out;
      json list = body.contains("sources") ? body.at("sources") : json::array({body});
      for (const auto& s : list) {
        MailboxSource src;
        src.uri = s.contains("uri") ? s.at("uri").get<std::string>() : s.at("source").get<std::string>();
        src.kind = parse_source_kind(s.value("kind", "mbox_file"));
        src.source_id = s.value("source_id", src.uri);
        out.push_back(std::move(src));
      }
      if (out.empty()) throw Error(ErrorCode::invalid_argument, "no sources given");
      return out;
    });
    std::string detail = std::to_string(sources.size()) + " source(s)";
    ApiJob job = submit(JobKind::ingest, detail, [this, sources] {
      IngestReport r = engine.ingest(sources);
      json errors = json::array();
      for (const auto& e : r.errors) errors.push_back({{"source_id", e.source_id}, {"message", e.message}});
      json warnings = json::array();
      for (const auto& w : r.warnings) {
        warnings.push_back({{"source_id", w.source_id}, {"offset", w.offset}, {"message", w.message}});
      }
      return json{{"loaded", r.loaded}, {"stored", r.stored}, {"duplicates", r.duplicates},
                  {"errors", std::move(errors)}, {"warnings", std::move(warnings)}};
    });
    send(res, 202, job_to_json(job));
  }

  void post_facts(const httplib::Request& req, httplib::Response& res) {
    // JSON object, JSON array, or JSON lines
    std::string lines;
    std::string_view body = req.body;
    auto first = body.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && body[first] == '[') {
      json arr = parse_body(req);
      for (const auto& e : arr) lines += e.dump() + "\n";
    } else {
      std::size_t line_no = 0;
      for (const auto& line : text::split(body, '\n')) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
          lines += json::parse(line).dump() + "\n";
        } catch (const json::parse_error& e) {
          throw BadRequest("malformed JSON on line " + std::to_string(line_no) + " at byte " + std::to_string(e.byte));
        }
      }
    }
    if (lines.empty()) throw BadRequest("no facts given");
    auto ids = engine.assert_facts(lines);
    send(res, 201, {{"fact_ids", ids}});
  }
};

Service::Service(Engine& engine) : impl_(std::make_unique<Impl>(engine)) { impl_->routes(); }

Service::~Service() {
  stop();
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->jobs_mutex);
    workers.swap(impl_->workers);
  }
  for (auto& w : workers) w.join();
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::start_background() {
  impl_->server_thread = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
}

ApiJob Service::wait_job(const std::string& job_id) {
  std::unique_lock lock(impl_->jobs_mutex);
  auto it = impl_->jobs.find(job_id);
  if (it == impl_->jobs.end()) throw Error(ErrorCode::not_found, "no such job: " + job_id);
  impl_->jobs_changed.wait(lock, [&] {
    auto s = impl_->jobs.at(job_id).state;
    return s == JobState::done || s == JobState::failed;
  });
  return impl_->jobs.at(job_id);
}

}  // namespace liststand
