#include "detour/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "detour/paths.hpp"

namespace detour {

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::InProgress: return "in_progress";
    case Outcome::GoalReached: return "goal";
    case Outcome::BudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

Outcome parse_outcome(std::string_view s) {
  if (s == "goal") return Outcome::GoalReached;
  if (s == "budget_exhausted") return Outcome::BudgetExhausted;
  if (s == "in_progress") return Outcome::InProgress;
  throw std::invalid_argument("unknown outcome: " + std::string(s));
}

std::optional<Cell> legal_transition(const ExperimentConfig& cfg, Cell cell, Action action,
                                     std::optional<Wall> blockage) {
  if (!cfg.grid.contains(cell)) return std::nullopt;
  if (cfg.walls.blocks(cell, action)) return std::nullopt;
  if (blockage && blockage->from == cell && blockage->action == action) return std::nullopt;
  return cfg.grid.neighbor(cell, action);
}

int sample_entry_reward(const LossTable& losses, Cell cell, Cell goal, Rng& rng) {
  const double u = rng.uniform();
  if (cell == goal) return losses.goal_reward;
  if (const CellLoss* l = losses.find(cell)) return u < l->probability ? l->amount : losses.regular;
  return losses.regular;
}

namespace {

std::set<std::pair<Cell, Cell>> edges_of(const Path& p) {
  std::set<std::pair<Cell, Cell>> out;
  for (std::size_t i = 1; i < p.size(); ++i) out.insert({p[i - 1], p[i]});
  return out;
}

std::optional<Wall> optimal_path_edge(const ExperimentConfig& cfg, CellPair pair) {
  const RankedPaths& ranked = rank_paths(cfg, pair.start, pair.goal);
  if (ranked.paths.empty()) return std::nullopt;

  // Edges shared by every optimal path, minus any edge used by a runner-up path.
  std::set<std::pair<Cell, Cell>> runner_up;
  std::set<std::pair<Cell, Cell>> common;
  bool first = true;
  for (std::size_t i = 0; i < ranked.paths.size(); ++i) {
    if (ranked.level[i] == 1) {
      auto e = edges_of(ranked.paths[i]);
      if (first) {
        common = std::move(e);
        first = false;
      } else {
        std::set<std::pair<Cell, Cell>> keep;
        std::set_intersection(common.begin(), common.end(), e.begin(), e.end(), std::inserter(keep, keep.begin()));
        common = std::move(keep);
      }
    } else if (ranked.level[i] == 2) {
      runner_up.merge(edges_of(ranked.paths[i]));
    }
  }

  const Path& best = ranked.paths.front();
  auto try_edges = [&](bool avoid_runner_up) -> std::optional<Wall> {
    for (std::size_t i = 1; i < best.size(); ++i) {
      const std::pair<Cell, Cell> e{best[i - 1], best[i]};
      if (!common.contains(e)) continue;
      if (avoid_runner_up && runner_up.contains(e)) continue;
      const Wall w{e.first, *cfg.grid.action_between(e.first, e.second)};
      if (cfg.reachable(pair.start, pair.goal, w)) return w;
    }
    return std::nullopt;
  };
  if (auto w = try_edges(true)) return w;
  return try_edges(false);
}

}  // namespace

std::optional<Wall> blockage_for(const ExperimentConfig& cfg, CellPair pair) {
  switch (cfg.blockage_policy) {
    case BlockagePolicy::FixedWall: return cfg.blockage_wall;
    case BlockagePolicy::OptimalPathEdge: return optimal_path_edge(cfg, pair);
  }
  return std::nullopt;
}

EnvState initial_state(const ExperimentConfig& cfg, const TrialRecord& trial) {
  EnvState s;
  s.current = trial.start;
  if (trial.blocked) {
    s.blockage = blockage_for(cfg, {trial.start, trial.goal});
    if (!s.blockage) throw std::invalid_argument("blocked trial without an admissible blockage");
  }
  return s;
}

std::pair<EnvState, Transition> step(const ExperimentConfig& cfg, const TrialRecord& trial, const EnvState& state,
                                     Action action, Rng& rng) {
  if (state.terminated) throw std::logic_error("step after trial termination");
  EnvState next = state;
  Transition tr{state.current, action, cfg.losses.regular, state.current, false};
  if (auto dest = legal_transition(cfg, state.current, action, state.blockage)) {
    tr.next = *dest;
    tr.reward = sample_entry_reward(cfg.losses, *dest, trial.goal, rng);
  } else {
    tr.wall_hit = true;
  }
  next.current = tr.next;
  next.moves_used += 1;
  next.score += tr.reward;
  next.terminated = next.current == trial.goal || next.moves_used >= cfg.move_budget;
  return {next, tr};
}

TrialEngine::TrialEngine(const ExperimentConfig& cfg, TrialRecord& trial, Rng& rng)
    : cfg_(cfg), trial_(trial), rng_(rng), state_(initial_state(cfg, trial)) {
  trial_.transitions.clear();
  trial_.score = 0;
  trial_.outcome = Outcome::InProgress;
}

Transition TrialEngine::step(Action a) {
  auto [next, tr] = detour::step(cfg_, trial_, state_, a, rng_);
  state_ = next;
  trial_.transitions.push_back(tr);
  trial_.score = state_.score;
  if (state_.terminated) {
    trial_.outcome = state_.current == trial_.goal ? Outcome::GoalReached : Outcome::BudgetExhausted;
  }
  return tr;
}

std::vector<TrialRecord> schedule_trials(const ExperimentConfig& cfg, Rng& rng, const std::string& participant) {
  const auto pairs = cfg.valid_pairs();
  if (pairs.empty()) throw std::invalid_argument("configuration has no valid pairs");

  // Blocked flags: round(fraction * n) test trials chosen uniformly.
  const int n_test = cfg.trial_count(Phase::Test);
  const int n_blocked = static_cast<int>(std::lround(cfg.blocked_fraction * n_test));
  std::vector<int> order(n_test);
  for (int i = 0; i < n_test; ++i) order[i] = i;
  for (int i = 0; i < n_blocked; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_test - i)));
    std::swap(order[i], order[j]);
  }
  std::vector<bool> blocked(n_test, false);
  for (int i = 0; i < n_blocked; ++i) blocked[order[i]] = true;

  std::vector<TrialRecord> out;
  out.reserve(cfg.trial_count());
  std::optional<CellPair> previous;
  int test_index = 0;
  for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
    const BlockSpec& spec = cfg.blocks[b];
    const int block_no = static_cast<int>(b) + 1;
    for (int t = 1; t <= spec.trials; ++t) {
      TrialRecord rec;
      rec.participant = participant;
      rec.experiment = cfg.id;
      rec.block = block_no;
      rec.trial = t;
      rec.phase = spec.phase;
      const bool is_blocked = spec.phase == Phase::Test && blocked[test_index++];

      std::optional<CellPair> pair;
      if (spec.phase == Phase::Test && cfg.test_pair) {
        pair = cfg.test_pair;
      } else if (cfg.fixed_tail && cfg.fixed_tail->block == block_no && t > spec.trials - cfg.fixed_tail->trials) {
        pair = cfg.fixed_tail->pair;
      } else {
        for (;;) {
          const CellPair candidate = pairs[rng.uniform_int(pairs.size())];
          if (previous && candidate == *previous) continue;
          if (is_blocked && !blockage_for(cfg, candidate)) continue;
          pair = candidate;
          break;
        }
      }
      rec.start = pair->start;
      rec.goal = pair->goal;
      rec.blocked = is_blocked;
      previous = pair;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace detour
