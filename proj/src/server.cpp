#include "detour/server.hpp"

#include <cstdio>

#include <httplib.h>

#include "detour/trial_log.hpp"

namespace detour {

using nlohmann::json;

namespace {

constexpr const char* kInstructions =
    "Imagine you have just moved to a new city. Use the arrow keys (up, right, down, left) to travel from your "
    "position (yellow) to the destination (red). Some routes are blocked by obstacles you cannot see; bumping into "
    "one costs a point and a move. Each move into a square costs points, some squares cost more. Reaching the "
    "destination earns 100 points. You have 15 moves per trip.";

constexpr const char* kAccidentNotice =
    "From now on your points count. A random accident might happen in one of the possible routes.";

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "anonymous" : out;
}

}  // namespace

SessionManager::SessionManager(ExperimentConfig cfg, std::filesystem::path data_dir, std::uint64_t seed)
    : cfg_(std::move(cfg)), data_dir_(std::move(data_dir)), seed_(seed) {}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ApiError(404, "unknown session");
  return it->second;
}

json SessionManager::create(const json& body) {
  if (!body.is_object() || !body.contains("participant") || !body["participant"].is_string()) {
    throw ApiError(400, "body must be {\"participant\": string}");
  }
  auto s = std::make_shared<Session>();
  std::uint64_t n;
  {
    std::lock_guard lock(mu_);
    n = counter_++;
  }
  char id[17];
  std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(derive_seed(seed_, 9, n)));
  s->id = id;
  s->participant = body["participant"].get<std::string>();
  Rng schedule(derive_seed(seed_, 10, n));
  s->trials = schedule_trials(cfg_, schedule, s->participant);
  s->rng = Rng(derive_seed(seed_, 11, n));
  {
    std::lock_guard lock(mu_);
    sessions_[s->id] = s;
  }
  json blocks = json::array();
  for (const auto& b : cfg_.blocks) blocks.push_back({{"phase", std::string(to_string(b.phase))}, {"trials", b.trials}});
  return {{"session_id", s->id},
          {"grid", {{"rows", cfg_.grid.rows}, {"cols", cfg_.grid.cols}}},
          {"move_budget", cfg_.move_budget},
          {"total_trials", s->trials.size()},
          {"blocks", blocks},
          {"instructions", kInstructions},
          {"paid_instructions", kAccidentNotice}};
}

void SessionManager::start_current(Session& s) const {
  TrialRecord& t = s.trials[s.cursor];
  t.transitions.clear();
  t.score = 0;
  t.outcome = Outcome::InProgress;
  s.state = initial_state(cfg_, t);
  s.started = true;
}

json SessionManager::trial_view(Session& s) const {
  if (s.cursor >= s.trials.size()) return {{"session_done", true}, {"total_trials", s.trials.size()}};
  const TrialRecord& t = s.trials[s.cursor];
  const BlockSpec& b = cfg_.blocks[static_cast<std::size_t>(t.block - 1)];
  return {{"session_done", false},
          {"trial_index", s.cursor},
          {"total_trials", s.trials.size()},
          {"block", t.block},
          {"trial", t.trial},
          {"phase", std::string(to_string(t.phase))},
          {"paid", b.paid},
          {"start", t.start},
          {"goal", t.goal},
          {"current", s.state.current},
          {"moves_left", cfg_.move_budget - s.state.moves_used},
          {"score", s.state.score},
          {"trial_done", s.state.terminated}};
}

json SessionManager::trial(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  if (s->started && s->state.terminated) {
    ++s->cursor;
    s->started = false;
  }
  if (s->cursor < s->trials.size() && !s->started) start_current(*s);
  return trial_view(*s);
}

json SessionManager::action(const std::string& id, const json& body) {
  auto s = find(id);
  if (!body.is_object() || !body.contains("key") || !body["key"].is_string()) {
    throw ApiError(400, "body must be {\"key\": string}");
  }
  const auto a = parse_action(body["key"].get<std::string>());
  if (!a) throw ApiError(400, "unknown key");
  std::lock_guard lock(s->mu);
  if (s->completed || s->cursor >= s->trials.size()) throw ApiError(409, "session finished");
  if (!s->started) start_current(*s);
  if (s->state.terminated) throw ApiError(409, "trial finished");

  TrialRecord& t = s->trials[s->cursor];
  auto [next, tr] = step(cfg_, t, s->state, *a, s->rng);
  s->state = next;
  t.transitions.push_back(tr);
  t.score = next.score;
  if (next.terminated) t.outcome = next.current == t.goal ? Outcome::GoalReached : Outcome::BudgetExhausted;
  return {{"new_cell", tr.next},
          {"reward", tr.reward},
          {"wall_hit", tr.wall_hit},
          {"moves_left", cfg_.move_budget - next.moves_used},
          {"trial_done", next.terminated},
          {"trial_score", next.score}};
}

json SessionManager::complete(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  std::vector<TrialRecord> done;
  for (const auto& t : s->trials) {
    if (t.outcome != Outcome::InProgress) done.push_back(t);
  }
  std::filesystem::create_directories(data_dir_);
  const std::string name = sanitize(s->participant) + "_" + s->id + ".jsonl";
  write_jsonl((data_dir_ / name).string(), done);
  s->completed = true;
  return {{"saved", name}, {"trials", done.size()}};
}

struct ServerHandle {
  httplib::Server http;
};

TaskServer::TaskServer(ExperimentConfig cfg, std::filesystem::path data_dir, std::uint64_t seed)
    : sessions_(std::move(cfg), std::move(data_dir), seed), http_(std::make_unique<ServerHandle>()) {
  auto& srv = http_->http;
  auto reply = [](httplib::Response& res, int status, const json& j) {
    res.status = status;
    res.set_content(j.dump(), "application/json; charset=utf-8");
  };
  auto guarded = [reply](auto fn) {
    return [reply, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        reply(res, 200, fn(req));
      } catch (const ApiError& e) {
        reply(res, e.status, {{"error", e.what()}});
      } catch (const json::exception& e) {
        reply(res, 400, {{"error", std::string("invalid JSON: ") + e.what()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}});
      }
    };
  };
  auto parse_body = [](const httplib::Request& req) { return req.body.empty() ? json::object() : json::parse(req.body); };

  srv.Post("/api/session", guarded([this, parse_body](const httplib::Request& req) {
             return sessions_.create(parse_body(req));
           }));
  srv.Get("/api/session/:id/trial", guarded([this](const httplib::Request& req) {
            return sessions_.trial(req.path_params.at("id"));
          }));
  srv.Post("/api/session/:id/action", guarded([this, parse_body](const httplib::Request& req) {
             return sessions_.action(req.path_params.at("id"), parse_body(req));
           }));
  srv.Post("/api/session/:id/complete", guarded([this](const httplib::Request& req) {
             return sessions_.complete(req.path_params.at("id"));
           }));
}

TaskServer::~TaskServer() { stop(); }

int TaskServer::bind(const std::string& host, int port) {
  if (port == 0) return http_->http.bind_to_any_port(host);
  return http_->http.bind_to_port(host, port) ? port : -1;
}

bool TaskServer::listen_after_bind() { return http_->http.listen_after_bind(); }

void TaskServer::stop() {
  if (http_ && http_->http.is_running()) http_->http.stop();
}

void TaskServer::wait_until_ready() const { http_->http.wait_until_ready(); }

}  // namespace detour
