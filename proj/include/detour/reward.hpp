#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "detour/engine.hpp"
#include "detour/experiment.hpp"
#include "detour/models.hpp"

namespace detour {

struct FilterRates {
  double high = 0.8;
  double medium = 0.8;
  double low = 0.8;
  std::optional<double> decay;  // alpha_2

  double rate(Saliency s) const;
};

/// One step of the linear filter on a single estimate.
/// A non-regular reward blends in; a regular reward only decays (if enabled).
double reward_filter_update(double estimate, int observed, double alpha1, std::optional<double> decay,
                            int regular = -1);

/// Per-cell entry-reward belief. Values are indexed by 0-based cell.
class RewardEstimate {
 public:
  RewardEstimate(const ExperimentConfig& cfg, RewardRule rule, FilterRates rates = {});

  /// Feeds an entry reward observed at `cell` while heading for `goal`.
  /// Returns true if the estimate changed.
  bool observe(Cell cell, int reward, Cell goal);

  double operator()(Cell cell) const { return values_(cell - 1); }
  const Eigen::VectorXd& values() const { return values_; }

  /// Estimate with the current goal's entry set to the goal reward.
  Eigen::VectorXd for_goal(Cell goal) const;

  RewardRule rule() const { return rule_; }

 private:
  const ExperimentConfig* cfg_;
  RewardRule rule_;
  FilterRates rates_;
  Eigen::VectorXd values_;
};

/// Replays `history` through a fresh estimate of the given kind.
RewardEstimate heuristic_reward(const ExperimentConfig& cfg, RewardRule rule, const std::vector<TrialRecord>& history,
                                FilterRates rates = {});

}  // namespace detour
