#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "detour/fitting.hpp"
#include "detour/selection.hpp"

namespace detour {

struct ParamRecovery {
  std::string name;
  double truth = 0.0;
  double median = 0.0;
  double bias = 0.0;  // mean(fitted - truth)
  double rmse = 0.0;
};

struct RecoveryReport {
  ModelSpec truth;
  std::vector<int> candidates;
  std::vector<FitResult> fits;
  std::vector<ComparisonRow> table;
  int best_mean_bic = 0;  // model with the lowest mean BIC
  double generator_ep_bic = 0.0;
  std::vector<ParamRecovery> params;  // generator's own parameters
};

/// Simulates `n_subjects` from `truth`, fits every candidate and summarises
/// which model the cohort selects.
RecoveryReport recovery_study(const ExperimentConfig& cfg, const ModelSpec& truth, int n_subjects,
                              const std::vector<int>& candidates, std::uint64_t master_seed, const FitOptions& opts,
                              int jobs = 1, std::int64_t ep_samples = 100000);

}  // namespace detour
