#include "detour/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "detour/agent.hpp"

namespace detour {

RecoveryReport recovery_study(const ExperimentConfig& cfg, const ModelSpec& truth, int n_subjects,
                              const std::vector<int>& candidates, std::uint64_t master_seed, const FitOptions& opts,
                              int jobs, std::int64_t ep_samples) {
  if (std::find(candidates.begin(), candidates.end(), truth.model) == candidates.end()) {
    throw std::invalid_argument("candidate set must include the generating model");
  }
  RecoveryReport report;
  report.truth = truth;
  report.candidates = candidates;

  const auto logs = simulate_cohort(cfg, truth, master_seed, n_subjects, opts.agent);
  report.fits = fit_all(cfg, logs, candidates, opts, jobs);
  report.table = compare_models(report.fits, Split::Train, ep_samples, master_seed);

  const auto best = std::min_element(report.table.begin(), report.table.end(),
                                     [](const auto& a, const auto& b) { return a.mean_bic < b.mean_bic; });
  report.best_mean_bic = best->model;
  for (const auto& row : report.table) {
    if (row.model == truth.model) report.generator_ep_bic = row.ep_bic;
  }

  for (Param p : truth.info().params) {
    std::vector<double> fitted;
    for (const auto& f : report.fits) {
      if (f.model == truth.model) fitted.push_back(f.params[p]);
    }
    ParamRecovery pr;
    pr.name = param_info(p).name;
    pr.truth = truth[p];
    std::vector<double> sorted = fitted;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    pr.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double sum = 0.0, sq = 0.0;
    for (double v : fitted) {
      sum += v - pr.truth;
      sq += (v - pr.truth) * (v - pr.truth);
    }
    pr.bias = sum / static_cast<double>(n);
    pr.rmse = std::sqrt(sq / static_cast<double>(n));
    report.params.push_back(pr);
  }
  return report;
}

}  // namespace detour
