#pragma once

#include <optional>
#include <string>
#include <vector>

#include "detour/engine.hpp"
#include "detour/experiment.hpp"
#include "detour/models.hpp"
#include "detour/reward.hpp"
#include "detour/rng.hpp"
#include "detour/tabular.hpp"

namespace detour {

enum class Knowledge {
  Oracle,             // T-hat equals the permanent wall layout
  LearnOnExperience,  // T-hat starts geometric and learns walls when hit
};

struct AgentOptions {
  Knowledge knowledge = Knowledge::Oracle;
  std::optional<double> reward_decay;  // alpha_2, off by default
};

/// One learner from the model zoo behind a single interface.
///
/// Per trial: begin_trial, then alternate policy/observe, then end_trial.
class Agent {
 public:
  Agent(const ExperimentConfig& cfg, const ModelSpec& spec, AgentOptions options = {});

  void begin_trial(Cell start, Cell goal);
  ActionVector<double> policy(Cell cell);
  ActionVector<double> log_policy(Cell cell);
  void observe(const Transition& tr);
  void end_trial();

  const ModelSpec& spec() const { return spec_; }
  const RewardEstimate& reward() const { return reward_; }
  const SuccessorTable& transitions() const { return next_; }
  const ActionValueTable<double>& q_table() const { return q_; }
  const SuccessorMatrix<double>& sr_matrix() const { return m_; }
  /// TD error of the most recent Q-learning update.
  double last_td_error() const { return delta_; }

  /// Action values at `cell` under the current beliefs (MB part for the hybrid).
  ActionVector<double> q_values(Cell cell);

 private:
  void replan();
  ActionVector<double> sr_values(Cell cell) const;
  void flush_sr(std::optional<int> next_action);

  const ExperimentConfig* cfg_;
  ModelSpec spec_;
  const ModelInfo* info_;
  AgentOptions options_;
  RewardEstimate reward_;

  Cell goal_ = 0;
  SuccessorTable next_;         // beliefs including within-trial overrides
  SuccessorTable base_next_;    // beliefs without overrides
  std::vector<bool> traversed_;  // (cell, action) pairs ever moved through
  bool plan_dirty_ = true;
  ActionValueTable<double> plan_;  // planner output for MB planners

  ActionValueTable<double> q_;  // Q-learning table
  double delta_ = 0.0;

  SuccessorMatrix<double> m_;
  std::optional<Transition> pending_;
};

/// Samples an action index from a probability vector with one uniform draw.
int sample_action(const ActionVector<double>& p, Rng& rng);

/// Runs one participant through the full schedule. Environment, agent and
/// schedule streams are all derived from `seed`.
std::vector<TrialRecord> simulate_participant(const ExperimentConfig& cfg, const ModelSpec& spec, std::uint64_t seed,
                                              const std::string& participant, AgentOptions options = {});

/// Cohort of `n` participants; participant i uses derive_seed(master, 0, i).
std::vector<TrialRecord> simulate_cohort(const ExperimentConfig& cfg, const ModelSpec& spec, std::uint64_t master_seed,
                                         int n, AgentOptions options = {});

}  // namespace detour
