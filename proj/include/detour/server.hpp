#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "detour/engine.hpp"
#include "detour/experiment.hpp"
#include "detour/rng.hpp"

namespace detour {

/// Error carrying the HTTP status the API should answer with.
struct ApiError : std::runtime_error {
  ApiError(int status, const std::string& what) : std::runtime_error(what), status(status) {}
  int status;
};

/// Server-side participant sessions. Hidden structure (walls, losses,
/// blockage flags) stays here; every method returns only what a participant
/// could observe on screen.
class SessionManager {
 public:
  SessionManager(ExperimentConfig cfg, std::filesystem::path data_dir, std::uint64_t seed = 1);

  nlohmann::json create(const nlohmann::json& body);
  nlohmann::json trial(const std::string& id);
  nlohmann::json action(const std::string& id, const nlohmann::json& body);
  nlohmann::json complete(const std::string& id);

  const ExperimentConfig& config() const { return cfg_; }

 private:
  struct Session {
    std::mutex mu;
    std::string id;
    std::string participant;
    std::vector<TrialRecord> trials;
    std::size_t cursor = 0;
    bool started = false;  // current trial has been shown
    EnvState state;
    Rng rng;
    bool completed = false;
  };

  std::shared_ptr<Session> find(const std::string& id);
  nlohmann::json trial_view(Session& s) const;
  void start_current(Session& s) const;

  ExperimentConfig cfg_;
  std::filesystem::path data_dir_;
  std::uint64_t seed_;
  std::mutex mu_;
  std::uint64_t counter_ = 0;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

struct ServerHandle;

/// HTTP front end for SessionManager (JSON in, JSON out).
class TaskServer {
 public:
  TaskServer(ExperimentConfig cfg, std::filesystem::path data_dir, std::uint64_t seed = 1);
  ~TaskServer();
  TaskServer(const TaskServer&) = delete;
  TaskServer& operator=(const TaskServer&) = delete;

  /// Binds to a free port when `port` is 0. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

  SessionManager& sessions() { return sessions_; }

 private:
  SessionManager sessions_;
  std::unique_ptr<ServerHandle> http_;
};

}  // namespace detour
