#pragma once

#include <optional>
#include <string>
#include <vector>

#include "detour/experiment.hpp"
#include "detour/grid.hpp"
#include "detour/rng.hpp"

namespace detour {

struct Transition {
  Cell state = 0;
  Action action = Action::Up;
  int reward = 0;
  Cell next = 0;
  bool wall_hit = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

enum class Outcome { InProgress, GoalReached, BudgetExhausted };

std::string_view to_string(Outcome o);
Outcome parse_outcome(std::string_view s);

struct TrialRecord {
  std::string participant;
  int experiment = 0;
  int block = 0;  // 1-based
  int trial = 0;  // 1-based within block
  Phase phase = Phase::Learning;
  Cell start = 0;
  Cell goal = 0;
  bool blocked = false;
  std::vector<Transition> transitions;
  Outcome outcome = Outcome::InProgress;
  int score = 0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct EnvState {
  Cell current = 0;
  int moves_used = 0;
  int score = 0;
  bool terminated = false;
  std::optional<Wall> blockage;
};

/// Destination of (cell, action), or nothing when the move leaves the board,
/// hits a permanent wall or hits the trial's blockage.
std::optional<Cell> legal_transition(const ExperimentConfig& cfg, Cell cell, Action action,
                                     std::optional<Wall> blockage = std::nullopt);

/// Entry reward for moving into `cell`. Always consumes exactly one uniform draw.
int sample_entry_reward(const LossTable& losses, Cell cell, Cell goal, Rng& rng);

/// The wall used on blocked trials of this pair, if any.
std::optional<Wall> blockage_for(const ExperimentConfig& cfg, CellPair pair);

EnvState initial_state(const ExperimentConfig& cfg, const TrialRecord& trial);

/// One move. Throws std::logic_error when the state is already terminated.
std::pair<EnvState, Transition> step(const ExperimentConfig& cfg, const TrialRecord& trial, const EnvState& state,
                                     Action action, Rng& rng);

/// Convenience wrapper that drives one trial and appends to its record.
class TrialEngine {
 public:
  TrialEngine(const ExperimentConfig& cfg, TrialRecord& trial, Rng& rng);

  const EnvState& state() const { return state_; }
  bool done() const { return state_.terminated; }
  Transition step(Action a);

 private:
  const ExperimentConfig& cfg_;
  TrialRecord& trial_;
  Rng& rng_;
  EnvState state_;
};

/// Trial stubs (no transitions) for the whole block schedule of one participant.
std::vector<TrialRecord> schedule_trials(const ExperimentConfig& cfg, Rng& rng, const std::string& participant = "");

}  // namespace detour
