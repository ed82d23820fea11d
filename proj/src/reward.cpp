#include "detour/reward.hpp"

namespace detour {

double FilterRates::rate(Saliency s) const {
  switch (s) {
    case Saliency::High: return high;
    case Saliency::Medium: return medium;
    case Saliency::Low: return low;
    case Saliency::Regular: return 1.0;
  }
  return 1.0;
}

double reward_filter_update(double estimate, int observed, double alpha1, std::optional<double> decay, int regular) {
  if (observed != regular) return alpha1 * estimate + (1.0 - alpha1) * observed;
  if (decay) return *decay * estimate;
  return estimate;
}

RewardEstimate::RewardEstimate(const ExperimentConfig& cfg, RewardRule rule, FilterRates rates)
    : cfg_(&cfg),
      rule_(rule),
      rates_(rates),
      values_(Eigen::VectorXd::Constant(cfg.grid.cell_count(), cfg.losses.regular)) {}

bool RewardEstimate::observe(Cell cell, int reward, Cell goal) {
  if (cell == goal) return false;
  double& v = values_(cell - 1);
  const double before = v;
  const int regular = cfg_->losses.regular;
  switch (rule_) {
    case RewardRule::None:
    case RewardRule::ShortestPath: return false;
    case RewardRule::LinearFilter: {
      const Saliency s = cfg_->losses.saliency(cell);
      if (s == Saliency::Regular) return false;
      v = reward_filter_update(v, reward, rates_.rate(s), rates_.decay, regular);
      break;
    }
    case RewardRule::AvoidSalient:
      if (reward != regular && cfg_->losses.saliency(cell) == Saliency::High) v = reward;
      break;
    case RewardRule::LastReward: v = reward; break;
  }
  return v != before;
}

Eigen::VectorXd RewardEstimate::for_goal(Cell goal) const {
  Eigen::VectorXd r = values_;
  r(goal - 1) = cfg_->losses.goal_reward;
  return r;
}

RewardEstimate heuristic_reward(const ExperimentConfig& cfg, RewardRule rule, const std::vector<TrialRecord>& history,
                                FilterRates rates) {
  RewardEstimate est(cfg, rule, rates);
  for (const auto& trial : history) {
    for (const auto& tr : trial.transitions) {
      if (!tr.wall_hit) est.observe(tr.next, tr.reward, trial.goal);
    }
  }
  return est;
}

}  // namespace detour
