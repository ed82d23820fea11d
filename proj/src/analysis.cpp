#include "detour/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace detour {

double binomial_upper_tail(int n, double p, int m) {
  if (m <= 0) return 1.0;
  if (m > n) return 0.0;
  // Sum in log space so large n stays accurate.
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  double total = 0.0;
  for (int k = m; k <= n; ++k) {
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    total += std::exp(log_choose + k * lp + (n - k) * lq);
  }
  return std::min(total, 1.0);
}

std::optional<int> binomial_threshold(int n, double p, double alpha) {
  for (int m = 0; m <= n; ++m) {
    if (binomial_upper_tail(n, p, m) <= alpha) return m;
  }
  return std::nullopt;
}

std::string_view to_string(PathClass c) {
  switch (c) {
    case PathClass::Optimal: return "optimal";
    case PathClass::SecondOptimal: return "second-optimal";
    case PathClass::Other: return "other";
  }
  return "?";
}

Path trial_cells(const TrialRecord& trial) {
  Path cells{trial.start};
  for (const auto& tr : trial.transitions) {
    if (!tr.wall_hit) cells.push_back(tr.next);
  }
  return cells;
}

Path loop_erase(const Path& cells) {
  Path out;
  for (Cell c : cells) {
    auto it = std::find(out.begin(), out.end(), c);
    if (it != out.end()) {
      out.erase(it + 1, out.end());
    } else {
      out.push_back(c);
    }
  }
  return out;
}

PathClassification classify_trial_path(const TrialRecord& trial, const ExperimentConfig& cfg, PathRanker* ranker) {
  if (trial.start == trial.goal) throw std::invalid_argument("trial has identical start and goal");
  if (!cfg.reachable(trial.start, trial.goal)) throw std::invalid_argument("goal unreachable from start");

  PathClassification out;
  out.path = trial.blocked ? loop_erase(trial_cells(trial)) : trial_cells(trial);
  if (trial.outcome != Outcome::GoalReached || out.path.back() != trial.goal) return out;

  std::optional<Wall> blockage;
  if (trial.blocked) blockage = blockage_for(cfg, {trial.start, trial.goal});
  std::optional<RankedPaths> local;
  const RankedPaths* ranked;
  if (ranker) {
    ranked = &ranker->get({trial.start, trial.goal}, blockage);
  } else {
    local = rank_paths(cfg, trial.start, trial.goal, blockage);
    ranked = &*local;
  }
  for (std::size_t i = 0; i < ranked->paths.size(); ++i) {
    if (ranked->paths[i] == out.path) {
      out.rank = ranked->level[i] + (trial.blocked ? 1 : 0);
      break;
    }
  }
  if (out.rank == 1) out.cls = PathClass::Optimal;
  if (out.rank == 2) out.cls = PathClass::SecondOptimal;
  return out;
}

std::vector<std::vector<TrialRecord>> group_by_participant(const std::vector<TrialRecord>& logs) {
  std::vector<std::vector<TrialRecord>> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& t : logs) {
    auto [it, fresh] = index.try_emplace(t.participant, out.size());
    if (fresh) out.emplace_back();
    out[it->second].push_back(t);
  }
  return out;
}

OptimalityReport optimality_report(const std::vector<TrialRecord>& logs, const ExperimentConfig& cfg, double chance,
                                   double alpha) {
  PathRanker ranker(cfg);
  OptimalityReport report;
  std::map<std::tuple<Cell, Cell, bool>, PairClassCounts> pairs;
  for (const auto& trials : group_by_participant(logs)) {
    ParticipantOptimality row;
    row.participant = trials.front().participant;
    for (const auto& t : trials) {
      const bool pretest = t.phase == Phase::Pretest;
      const bool replan = t.phase == Phase::Test && t.blocked;
      if (!pretest && !replan && t.phase != Phase::Test) continue;
      const PathClassification c = classify_trial_path(t, cfg, &ranker);
      auto& counts = pairs[{t.start, t.goal, t.blocked}];
      counts.pair = {t.start, t.goal};
      counts.blocked = t.blocked;
      if (c.cls == PathClass::Optimal) ++counts.optimal;
      else if (c.cls == PathClass::SecondOptimal) ++counts.second_optimal;
      else ++counts.other;
      if (pretest) {
        ++row.pretest_n;
        if (c.cls == PathClass::Optimal) ++row.pretest_optimal;
      }
      if (replan) {
        ++row.replan_n;
        if (c.cls == PathClass::SecondOptimal) ++row.replan_second_optimal;
      }
    }
    row.pretest_threshold = binomial_threshold(row.pretest_n, chance, alpha);
    row.pretest_pass = row.pretest_threshold && row.pretest_optimal >= *row.pretest_threshold;
    row.replan_threshold = binomial_threshold(row.replan_n, chance, alpha);
    row.replan_pass = row.replan_threshold && row.replan_second_optimal >= *row.replan_threshold;
    report.participants.push_back(std::move(row));
  }
  for (auto& [key, counts] : pairs) report.pairs.push_back(counts);
  return report;
}

Heatmap occupancy_heatmap(const std::vector<TrialRecord>& logs, const GridSpec& grid, const TrialFilter& filter) {
  Heatmap h;
  h.cells = Eigen::VectorXi::Zero(grid.cell_count());
  h.actions.setZero(grid.cell_count(), kActionCount);
  for (const auto& t : logs) {
    if (filter && !filter(t)) continue;
    for (const auto& tr : t.transitions) {
      h.cells(tr.next - 1) += 1;
      h.actions(tr.state - 1, index_of(tr.action)) += 1;
    }
  }
  return h;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nan("");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

LearningCurve learning_curve(const std::vector<TrialRecord>& logs, const TrialFilter& filter) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& t : logs) {
    if (filter && !filter(t)) continue;
    auto& [sum, n] = acc[t.block];
    sum += t.score;
    ++n;
  }
  LearningCurve curve;
  std::vector<double> x, y;
  for (const auto& [block, sn] : acc) {
    curve.blocks.push_back({block, sn.first / sn.second, sn.second});
    x.push_back(block);
    y.push_back(sn.first / sn.second);
  }
  curve.spearman_rho = x.size() >= 2 ? spearman(x, y) : std::nan("");
  return curve;
}

std::vector<LossRate> salient_loss_rate(const std::vector<TrialRecord>& logs, const ExperimentConfig& cfg, Cell cell) {
  const CellLoss* loss = cfg.losses.find(cell);
  if (!loss) throw std::invalid_argument("cell " + std::to_string(cell) + " has no salient loss");
  std::vector<LossRate> out;
  for (const auto& trials : group_by_participant(logs)) {
    LossRate r;
    r.participant = trials.front().participant;
    for (Phase p : {Phase::Learning, Phase::Pretest, Phase::Test}) r.count[p] = 0;
    for (const auto& t : trials) {
      if (t.goal == cell) continue;
      for (const auto& tr : t.transitions) {
        if (!tr.wall_hit && tr.next == cell && tr.reward == loss->amount && loss->amount != cfg.losses.regular) {
          ++r.count[t.phase];
        }
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

double mean_loss_rate(const std::vector<LossRate>& rates, Phase phase) {
  if (rates.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : rates) total += r.count.at(phase);
  return total / static_cast<double>(rates.size());
}

}  // namespace detour
