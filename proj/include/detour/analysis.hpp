#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "detour/engine.hpp"
#include "detour/experiment.hpp"
#include "detour/paths.hpp"

namespace detour {

/// P(X >= m) for X ~ Binomial(n, p).
double binomial_upper_tail(int n, double p, int m);

/// Smallest m with P(X >= m) <= alpha, or nothing if no m <= n qualifies.
std::optional<int> binomial_threshold(int n, double p, double alpha);

enum class PathClass { Optimal, SecondOptimal, Other };
std::string_view to_string(PathClass c);

struct PathClassification {
  PathClass cls = PathClass::Other;
  int rank = 0;  // 0 when the path is not a ranked start-goal path
  Path path;     // cells actually matched
};

/// Cells occupied by the trial in order, starting with the start cell.
/// Wall hits do not add a cell.
Path trial_cells(const TrialRecord& trial);

/// Removes cycles in order of appearance, e.g. 3 7 8 7 6 -> 3 7 6.
Path loop_erase(const Path& cells);

/// Ranks the trial's path against all simple paths for its pair. On blocked
/// trials the blocked route counts as rank 1, so the best available detour is
/// rank 2, and the checking excursion is removed first.
PathClassification classify_trial_path(const TrialRecord& trial, const ExperimentConfig& cfg,
                                       PathRanker* ranker = nullptr);

struct ParticipantOptimality {
  std::string participant;
  int pretest_n = 0;
  int pretest_optimal = 0;
  std::optional<int> pretest_threshold;
  bool pretest_pass = false;
  int replan_n = 0;
  int replan_second_optimal = 0;
  std::optional<int> replan_threshold;
  bool replan_pass = false;
};

struct PairClassCounts {
  CellPair pair;
  bool blocked = false;
  int optimal = 0;
  int second_optimal = 0;
  int other = 0;
};

struct OptimalityReport {
  std::vector<ParticipantOptimality> participants;
  std::vector<PairClassCounts> pairs;
};

/// Pretest: optimal-path count against the binomial threshold.
/// Re-planning: second-optimal count over blocked test trials.
OptimalityReport optimality_report(const std::vector<TrialRecord>& logs, const ExperimentConfig& cfg,
                                   double chance = 0.5, double alpha = 0.05);

struct Heatmap {
  Eigen::VectorXi cells;  // index cell - 1
  Eigen::Matrix<int, Eigen::Dynamic, kActionCount, Eigen::RowMajor> actions;
  int total() const { return cells.sum(); }
};

using TrialFilter = std::function<bool(const TrialRecord&)>;

/// Every transition counts one visit to the cell it ends in.
Heatmap occupancy_heatmap(const std::vector<TrialRecord>& logs, const GridSpec& grid, const TrialFilter& filter = {});

struct BlockMean {
  int block = 0;
  double mean_score = 0.0;
  int trials = 0;
};

struct LearningCurve {
  std::vector<BlockMean> blocks;
  double spearman_rho = 0.0;  // block index vs mean score
};

LearningCurve learning_curve(const std::vector<TrialRecord>& logs, const TrialFilter& filter = {});

/// Spearman rank correlation with average ranks for ties. NaN if undefined.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct LossRate {
  std::string participant;
  std::map<Phase, int> count;
};

/// Salient-loss deliveries at `cell` per participant and phase.
std::vector<LossRate> salient_loss_rate(const std::vector<TrialRecord>& logs, const ExperimentConfig& cfg, Cell cell);

/// Mean over participants of the counts for one phase.
double mean_loss_rate(const std::vector<LossRate>& rates, Phase phase);

/// Splits a combined log into participants, in order of first appearance.
std::vector<std::vector<TrialRecord>> group_by_participant(const std::vector<TrialRecord>& logs);

}  // namespace detour
