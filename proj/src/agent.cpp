#include "detour/agent.hpp"

#include <cmath>
#include <cstdio>

namespace detour {

namespace {

bool uses_sr(Planner p) { return p == Planner::SuccessorRep || p == Planner::Hybrid; }

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

Agent::Agent(const ExperimentConfig& cfg, const ModelSpec& spec, AgentOptions options)
    : cfg_(&cfg),
      spec_(spec),
      info_(&spec.info()),
      options_(options),
      reward_(cfg, info_->reward,
              FilterRates{spec[Param::Alpha1High], spec[Param::Alpha1Medium], spec[Param::Alpha1Low],
                          options.reward_decay}) {
  const int n = cfg.grid.cell_count();
  base_next_ = options.knowledge == Knowledge::Oracle ? oracle_successors(cfg) : geometric_successors(cfg.grid);
  next_ = base_next_;
  traversed_.assign(static_cast<std::size_t>(n * kActionCount), false);
  if (info_->planner == Planner::QLearning) {
    q_.resize(n, kActionCount);
    const Eigen::RowVector4d q0(spec[Param::QUp0], spec[Param::QRight0], spec[Param::QDown0], spec[Param::QLeft0]);
    q_.rowwise() = q0;
  }
  if (uses_sr(info_->planner)) m_ = SuccessorMatrix<double>::Zero(n * kActionCount, n);
}

void Agent::begin_trial(Cell start, Cell goal) {
  (void)start;
  if (goal != goal_) plan_dirty_ = true;
  goal_ = goal;
  pending_.reset();
}

void Agent::replan() {
  const double gamma = spec_[Param::Gamma];
  const CellVector<double> r = reward_.for_goal(goal_);
  if (info_->planner == Planner::DepthLimited) {
    plan_ = depth_limited_vi<double>(next_, r, goal_ - 1, gamma, static_cast<int>(spec_[Param::Omega]));
  } else {
    plan_ = value_iteration<double>(next_, r, goal_ - 1, gamma).q;
  }
  plan_dirty_ = false;
}

ActionVector<double> Agent::sr_values(Cell cell) const {
  const CellVector<double> r = reward_.for_goal(goal_);
  ActionVector<double> q;
  const Eigen::Index base = static_cast<Eigen::Index>(cell - 1) * kActionCount;
  for (int a = 0; a < kActionCount; ++a) q(a) = m_.row(base + a).dot(r);
  return q;
}

ActionVector<double> Agent::q_values(Cell cell) {
  switch (info_->planner) {
    case Planner::Random: return ActionVector<double>::Zero();
    case Planner::QLearning: return q_.row(cell - 1).transpose();
    case Planner::SuccessorRep: return sr_values(cell);
    case Planner::ValueIteration:
    case Planner::DepthLimited:
    case Planner::Hybrid:
      if (plan_dirty_) replan();
      return plan_.row(cell - 1).transpose();
  }
  return ActionVector<double>::Zero();
}

ActionVector<double> Agent::policy(Cell cell) {
  const double beta = spec_[Param::Beta];
  switch (info_->planner) {
    case Planner::Random: return ActionVector<double>::Constant(1.0 / kActionCount);
    case Planner::Hybrid:
      return hybrid_mix(softmax_policy(q_values(cell), beta), softmax_policy(sr_values(cell), beta),
                        spec_[Param::OmegaHybrid]);
    default: return softmax_policy(q_values(cell), beta);
  }
}

ActionVector<double> Agent::log_policy(Cell cell) {
  const double beta = spec_[Param::Beta];
  switch (info_->planner) {
    case Planner::Random: return ActionVector<double>::Constant(std::log(1.0 / kActionCount));
    case Planner::Hybrid: {
      const double w = spec_[Param::OmegaHybrid];
      const ActionVector<double> mb = log_softmax_policy(q_values(cell), beta);
      const ActionVector<double> sr = log_softmax_policy(sr_values(cell), beta);
      const double lw = std::log(w);
      const double lv = std::log1p(-w);
      ActionVector<double> out;
      for (int a = 0; a < kActionCount; ++a) out(a) = log_sum_exp(lw + mb(a), lv + sr(a));
      return out;
    }
    default: return log_softmax_policy(q_values(cell), beta);
  }
}

void Agent::flush_sr(std::optional<int> next_action) {
  const Transition& p = *pending_;
  const double rate = info_->id >= 9 && info_->id <= 11 ? spec_[Param::Lambda] : spec_[Param::AlphaL];
  sr_td_update<double>(m_, p.state - 1, index_of(p.action), p.next - 1, next_action, rate, spec_[Param::Gamma]);
  pending_.reset();
}

void Agent::observe(const Transition& tr) {
  const int s = tr.state - 1;
  const int a = index_of(tr.action);
  const std::size_t sa = static_cast<std::size_t>(s * kActionCount + a);

  if (tr.wall_hit) {
    if (next_(s, a) != s) {
      const bool transient = options_.knowledge == Knowledge::Oracle || traversed_[sa];
      next_(s, a) = s;
      if (!transient) base_next_(s, a) = s;
      plan_dirty_ = true;
    }
  } else {
    traversed_[sa] = true;
    if (options_.knowledge == Knowledge::LearnOnExperience && base_next_(s, a) != tr.next - 1) {
      base_next_(s, a) = tr.next - 1;
      next_(s, a) = tr.next - 1;
      plan_dirty_ = true;
    }
    if (reward_.observe(tr.next, tr.reward, goal_)) plan_dirty_ = true;
  }

  switch (info_->planner) {
    case Planner::QLearning:
      delta_ = q_learning_update<double>(q_, s, a, tr.reward, tr.next - 1, tr.next == goal_, spec_[Param::AlphaC],
                                         spec_[Param::Gamma]);
      break;
    case Planner::SuccessorRep:
    case Planner::Hybrid:
      if (pending_) flush_sr(a);
      pending_ = tr;
      if (tr.next == goal_) flush_sr(std::nullopt);
      break;
    default: break;
  }
}

void Agent::end_trial() {
  if (pending_) flush_sr(std::nullopt);
  if (next_ != base_next_) {
    next_ = base_next_;
    plan_dirty_ = true;
  }
}

int sample_action(const ActionVector<double>& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int a = 0; a < kActionCount - 1; ++a) {
    acc += p(a);
    if (u < acc) return a;
  }
  return kActionCount - 1;
}

std::vector<TrialRecord> simulate_participant(const ExperimentConfig& cfg, const ModelSpec& spec, std::uint64_t seed,
                                              const std::string& participant, AgentOptions options) {
  Rng env_rng(derive_seed(seed, 1, 0));
  Rng agent_rng(derive_seed(seed, 2, 0));
  Rng schedule_rng(derive_seed(seed ^ cfg.pair_seed, 3, 0));
  auto trials = schedule_trials(cfg, schedule_rng, participant);
  Agent agent(cfg, spec, options);
  for (auto& trial : trials) {
    TrialEngine engine(cfg, trial, env_rng);
    agent.begin_trial(trial.start, trial.goal);
    while (!engine.done()) {
      const Cell here = engine.state().current;
      const Action a = action_at(sample_action(agent.policy(here), agent_rng));
      agent.observe(engine.step(a));
    }
    agent.end_trial();
  }
  return trials;
}

std::vector<TrialRecord> simulate_cohort(const ExperimentConfig& cfg, const ModelSpec& spec, std::uint64_t master_seed,
                                         int n, AgentOptions options) {
  std::vector<TrialRecord> out;
  for (int i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "sim%03d", i + 1);
    auto trials = simulate_participant(cfg, spec, derive_seed(master_seed, 0, static_cast<std::uint64_t>(i)), id,
                                       options);
    out.insert(out.end(), std::make_move_iterator(trials.begin()), std::make_move_iterator(trials.end()));
  }
  return out;
}

}  // namespace detour
