#include "activeclust/service.hpp"

#include "activeclust/error.hpp"
#include "activeclust/metrics.hpp"

#include <httplib.h>

#include <condition_variable>
#include <random>
#include <sstream>

namespace activeclust {
namespace {

using Json = nlohmann::json;

Reply error_reply(int status, const std::string& message) { return {status, Json{{"error", message}}}; }

bool valid_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 &&
         std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
}

Json pair_json(const std::optional<std::pair<int, int>>& p) {
  return p ? Json::array({p->first, p->second}) : Json(nullptr);
}

// Creation failures caused by the request itself rather than by its data.
bool is_config_error(ErrorCode code) { return code == ErrorCode::InvalidParameter; }

}  // namespace

SessionService::SessionService(ServiceOptions opts, Clock clock)
    : opts_(std::move(opts)), clock_(std::move(clock)), server_(std::make_unique<httplib::Server>()) {
  if (!clock_) clock_ = [] { return std::chrono::system_clock::now(); };
  salt_ = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
}

SessionService::~SessionService() {
  stop();
  std::map<std::string, std::shared_ptr<Handle>> doomed;
  {
    std::lock_guard lock(mu_);
    doomed.swap(sessions_);
  }
  for (auto& [_, h] : doomed) {
    if (h->worker.joinable()) h->worker.join();
  }
}

std::string SessionService::new_id() {
  std::lock_guard lock(mu_);
  const auto n = ++counter_;
  std::uint64_t x = salt_ + n * 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  x ^= x >> 31;
  std::ostringstream out;
  out << std::hex << x << 'n' << std::dec << n;
  return out.str();
}

std::filesystem::path SessionService::session_path(const std::string& id) const {
  return opts_.data_dir / (id + ".json");
}

std::shared_ptr<SessionService::Handle> SessionService::find(const std::string& id) {
  if (!valid_id(id)) return nullptr;
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  // Evicted sessions come back from their auto-save.
  const auto path = session_path(id);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return nullptr;
  try {
    auto h = std::make_shared<Handle>(Session::load(path));
    h->created = h->last_activity = clock_();
    sessions_.emplace(id, h);
    return h;
  } catch (const Error&) {
    return nullptr;
  }
}

void SessionService::start_advance(const std::shared_ptr<Handle>& h) {
  if (h->worker.joinable()) h->worker.join();
  h->busy = true;
  h->error.clear();
  Handle* raw = h.get();
  h->worker = std::thread([raw] {
    std::lock_guard lock(raw->mu);
    try {
      raw->session.advance();
    } catch (const std::exception& e) {
      raw->error = e.what();
    }
    raw->busy = false;
  });
}

void SessionService::wait_idle(const std::string& id) {
  auto h = find(id);
  if (!h) return;
  while (h->busy) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  std::lock_guard lock(h->mu);
}

Json SessionService::query_body(Session& s) const {
  Json body{{"status", to_string(s.status())},
            {"queries_used", s.queries_used()},
            {"budget", s.config().query_budget},
            {"n_c", s.n_c()}};
  const auto pending = s.pending_pair();
  if (!pending) return body;
  body["pair"] = pair_json(pending);
  Json meta = Json::array();
  for (int x : {pending->first, pending->second}) {
    Json m{{"index", x}};
    if (const auto& ds = s.dataset()) {
      Json f = Json::array();
      for (Eigen::Index c = 0; c < ds->features.cols(); ++c) f.push_back(ds->features(x, c));
      m["features"] = std::move(f);
    }
    if (auto set = s.certain_sets().membership(x)) m["certain_set"] = *set;
    meta.push_back(std::move(m));
  }
  body["sample_meta"] = std::move(meta);
  return body;
}

Reply SessionService::create(const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::exception& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) return error_reply(400, "config must be a JSON object");
  if (j.contains("oracle") && j["oracle"] != "interactive") {
    return error_reply(400, "sessions served over HTTP use the interactive oracle");
  }
  j["oracle"] = "interactive";
  SessionConfig cfg;
  try {
    cfg = j.get<SessionConfig>();
  } catch (const Error& e) {
    return error_reply(400, e.what());
  } catch (const Json::exception& e) {
    return error_reply(400, e.what());
  }
  if (cfg.data.empty()) return error_reply(400, "config has no data path");

  std::shared_ptr<Handle> h;
  try {
    h = std::make_shared<Handle>(Session::create(cfg));
  } catch (const Error& e) {
    return error_reply(is_config_error(e.code()) ? 400 : 422, e.what());
  } catch (const std::exception& e) {
    return error_reply(422, e.what());
  }
  h->created = h->last_activity = clock_();
  const auto id = new_id();
  const bool async = h->session.sample_count() > opts_.async_threshold;
  std::unique_lock session_lock(h->mu);
  {
    std::lock_guard lock(mu_);
    sessions_.emplace(id, h);
  }
  if (async) {
    session_lock.unlock();
    start_advance(h);
    return {201, Json{{"id", id}, {"status", "running"}}};
  }
  h->session.advance();
  auto out = query_body(h->session);
  out["id"] = id;
  return {201, out};
}

Reply SessionService::query(const std::string& id) {
  auto h = find(id);
  if (!h) return error_reply(404, "unknown session '" + id + "'");
  if (h->busy) return {202, Json{{"status", "running"}}};
  std::lock_guard lock(h->mu);
  h->last_activity = clock_();
  if (!h->error.empty()) return error_reply(500, h->error);
  if (h->session.status() == Status::Running) return {202, Json{{"status", "running"}}};
  return {200, query_body(h->session)};
}

Reply SessionService::answer(const std::string& id, const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const Json::exception& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("pair") || !j["pair"].is_array() || j["pair"].size() != 2 ||
      !j["pair"][0].is_number_integer() || !j["pair"][1].is_number_integer() || !j.contains("answer") ||
      !j["answer"].is_string()) {
    return error_reply(400, "expected {\"pair\": [i, j], \"answer\": \"must\" | \"cannot\"}");
  }
  const auto kind = parse_link_kind(j["answer"].get<std::string>());
  if (!kind) return error_reply(400, "answer must be \"must\" or \"cannot\"");
  const int a = j["pair"][0].get<int>();
  const int b = j["pair"][1].get<int>();

  auto h = find(id);
  if (!h) return error_reply(404, "unknown session '" + id + "'");
  if (h->busy) return error_reply(409, "session is still advancing");
  std::unique_lock lock(h->mu);
  if (h->busy) return error_reply(409, "session is still advancing");
  h->last_activity = clock_();
  auto& s = h->session;
  const auto pending = s.pending_pair();
  if (!pending || *pending != std::pair{a, b}) {
    auto reply = error_reply(409, "pair is not the pending query");
    reply.body["pending"] = pair_json(pending);
    return reply;
  }
  s.accept_answer(a, b, *kind);
  if (s.sample_count() > opts_.async_threshold) {
    lock.unlock();
    start_advance(h);
    return {202, Json{{"accepted", true}, {"status", "running"}}};
  }
  try {
    s.advance();
  } catch (const std::exception& e) {
    h->error = e.what();
    return error_reply(500, e.what());
  }
  auto out = query_body(s);
  out["accepted"] = true;
  out["next"] = pair_json(s.pending_pair());
  return {200, out};
}

Reply SessionService::clustering(const std::string& id) {
  auto h = find(id);
  if (!h) return error_reply(404, "unknown session '" + id + "'");
  if (h->busy) return error_reply(409, "session is still advancing");
  std::lock_guard lock(h->mu);
  h->last_activity = clock_();
  auto& s = h->session;
  if (s.curve().empty() && !s.has_clustering()) return error_reply(409, "no clustering yet");
  const auto& cl = s.clustering();
  Json body{{"labels", cl.assignment.labels},
            {"n_c", cl.assignment.n_c},
            {"certain_sets", s.certain_sets().sets()},
            {"queries_used", s.queries_used()},
            {"status", to_string(s.status())}};
  if (const auto& truth = s.labels()) {
    body["metrics"] = {{"jcc", jaccard(cl.assignment.labels, *truth)},
                       {"v_measure", v_measure(cl.assignment.labels, *truth).v}};
  }
  return {200, body};
}

Reply SessionService::status(const std::string& id) {
  auto h = find(id);
  if (!h) return error_reply(404, "unknown session '" + id + "'");
  if (h->busy) return {200, Json{{"status", "running"}, {"busy", true}}};
  std::lock_guard lock(h->mu);
  const auto& s = h->session;
  Json body{{"status", to_string(s.status())},
            {"busy", false},
            {"iteration", s.iteration()},
            {"queries_used", s.queries_used()},
            {"budget", s.config().query_budget},
            {"n_c", s.n_c()},
            {"samples", s.sample_count()},
            {"certain", s.certain_sets().certain_count()}};
  if (!h->error.empty()) body["error"] = h->error;
  return {200, body};
}

Reply SessionService::curve(const std::string& id) {
  auto h = find(id);
  if (!h) return error_reply(404, "unknown session '" + id + "'");
  if (h->busy) return {202, Json{{"status", "running"}}};
  std::lock_guard lock(h->mu);
  return {200, curve_to_json(h->session.curve())};
}

Reply SessionService::export_session(const std::string& id) {
  auto h = find(id);
  if (!h) return error_reply(404, "unknown session '" + id + "'");
  if (h->busy) return error_reply(409, "session is still advancing");
  std::lock_guard lock(h->mu);
  h->last_activity = clock_();
  return {200, h->session.to_json()};
}

std::size_t SessionService::evict_idle() {
  const auto now = clock_();
  std::size_t evicted = 0;
  std::lock_guard lock(mu_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    auto& h = it->second;
    std::unique_lock session_lock(h->mu, std::try_to_lock);
    if (!session_lock || h->busy || now - h->last_activity <= opts_.idle_timeout) {
      ++it;
      continue;
    }
    try {
      std::filesystem::create_directories(opts_.data_dir);
      h->session.save(session_path(it->first));
    } catch (const std::exception&) {
      ++it;
      continue;
    }
    if (h->worker.joinable()) h->worker.join();
    session_lock.unlock();
    it = sessions_.erase(it);
    ++evicted;
  }
  return evicted;
}

std::size_t SessionService::live_sessions() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

void SessionService::setup_routes(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto guarded = [send](auto fn) {
    return [send, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        send(res, fn(req));
      } catch (const std::exception& e) {
        send(res, error_reply(500, e.what()));
      }
    };
  };

  server.set_default_headers({{"Access-Control-Allow-Origin", opts_.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/sessions", guarded([this](const httplib::Request& req) { return create(req.body); }));
  server.Get(R"(/sessions/([A-Za-z0-9]+)/query)",
             guarded([this](const httplib::Request& req) { return query(req.matches[1]); }));
  server.Post(R"(/sessions/([A-Za-z0-9]+)/answer)",
              guarded([this](const httplib::Request& req) { return answer(req.matches[1], req.body); }));
  server.Get(R"(/sessions/([A-Za-z0-9]+)/clustering)",
             guarded([this](const httplib::Request& req) { return clustering(req.matches[1]); }));
  server.Get(R"(/sessions/([A-Za-z0-9]+)/status)",
             guarded([this](const httplib::Request& req) { return status(req.matches[1]); }));
  server.Get(R"(/sessions/([A-Za-z0-9]+)/curve)",
             guarded([this](const httplib::Request& req) { return curve(req.matches[1]); }));
  server.Get(R"(/sessions/([A-Za-z0-9]+)/export)", [this, send](const httplib::Request& req, httplib::Response& res) {
    try {
      const std::string id = req.matches[1];
      const auto r = export_session(id);
      send(res, r);
      if (r.status == 200) res.set_header("Content-Disposition", "attachment; filename=\"" + id + ".json\"");
    } catch (const std::exception& e) {
      send(res, error_reply(500, e.what()));
    }
  });

  if (!opts_.static_dir.empty()) server.set_mount_point("/", opts_.static_dir.string());
}

void SessionService::listen() {
  setup_routes(*server_);
  stopping_ = false;
  std::mutex sweep_mu;
  std::condition_variable sweep_cv;
  sweeper_ = std::thread([this, &sweep_mu, &sweep_cv] {
    std::unique_lock lock(sweep_mu);
    while (!sweep_cv.wait_for(lock, opts_.sweep_interval, [this] { return stopping_.load(); })) evict_idle();
  });
  int port = opts_.port;
  bool bound = false;
  if (port == 0) {
    port = server_->bind_to_any_port(opts_.host);
    bound = port > 0;
  } else {
    bound = server_->bind_to_port(opts_.host, port);
  }
  if (bound) {
    bound_port_ = port;
    server_->listen_after_bind();
  }
  {
    std::lock_guard lock(sweep_mu);
    stopping_ = true;
  }
  sweep_cv.notify_all();
  sweeper_.join();
  if (!bound) throw Error(ErrorCode::IoError, "cannot bind " + opts_.host + ":" + std::to_string(opts_.port));
}

void SessionService::stop() {
  stopping_ = true;
  if (server_) server_->stop();
}

bool SessionService::wait_until_listening(std::chrono::milliseconds timeout) const {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    if (bound_port_ > 0 && server_->is_running()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return false;
}

}  // namespace activeclust
