#pragma once

#include "activeclust/engine.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace activeclust {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "sessions";
  std::filesystem::path static_dir;  // UI bundle, mounted at / when set
  std::string cors_origin = "*";
  // Sessions above this many samples advance in the background; the answer
  // call returns 202 and clients poll /status.
  int async_threshold = 1000;
  std::chrono::seconds idle_timeout = std::chrono::hours(24);
  std::chrono::seconds sweep_interval = std::chrono::minutes(5);
};

struct Reply {
  int status = 200;
  nlohmann::json body;
};

// Live interactive sessions behind a small JSON API. Every handler is callable
// directly; listen() binds them to HTTP routes.
class SessionService {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  explicit SessionService(ServiceOptions opts = {}, Clock clock = nullptr);
  ~SessionService();
  SessionService(const SessionService&) = delete;
  SessionService& operator=(const SessionService&) = delete;

  Reply create(const std::string& body);
  Reply query(const std::string& id);
  Reply answer(const std::string& id, const std::string& body);
  Reply clustering(const std::string& id);
  Reply status(const std::string& id);
  Reply curve(const std::string& id);
  Reply export_session(const std::string& id);

  // Saves and drops sessions idle longer than the timeout; returns how many.
  std::size_t evict_idle();
  std::size_t live_sessions() const;
  // Blocks until a background advance of the session (if any) is done.
  void wait_idle(const std::string& id);

  // Binds routes and serves until stop(). With port 0 an ephemeral port is
  // chosen; bound_port() reports it once listening.
  void listen();
  void stop();
  int bound_port() const { return bound_port_.load(); }
  bool wait_until_listening(std::chrono::milliseconds timeout) const;

 private:
  struct Handle {
    std::mutex mu;
    Session session;
    std::chrono::system_clock::time_point created;
    std::chrono::system_clock::time_point last_activity;
    std::atomic<bool> busy{false};
    std::string error;  // failure of the last background advance
    std::thread worker;

    explicit Handle(Session s) : session(std::move(s)) {}
  };

  std::shared_ptr<Handle> find(const std::string& id);
  std::string new_id();
  std::filesystem::path session_path(const std::string& id) const;
  void start_advance(const std::shared_ptr<Handle>& h);
  nlohmann::json query_body(Session& s) const;
  void setup_routes(httplib::Server& server);

  ServiceOptions opts_;
  Clock clock_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Handle>> sessions_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_ = 0;

  std::unique_ptr<httplib::Server> server_;
  std::atomic<int> bound_port_{0};
  std::atomic<bool> stopping_{false};
  std::thread sweeper_;
};

}  // namespace activeclust
