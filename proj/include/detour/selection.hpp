#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "detour/fitting.hpp"
#include "detour/rng.hpp"

namespace detour {

/// Digamma function for x > 0.
double digamma(double x);

struct DirichletPosterior {
  Eigen::VectorXd alpha;
  double alpha0 = 1.0;
  int iterations = 0;
  bool converged = false;
  /// Expected model frequencies alpha / sum(alpha).
  Eigen::VectorXd expected() const { return alpha / alpha.sum(); }
};

/// Random-effects model selection by variational Bayes. `log_evidence` is
/// participants x models. Throws std::invalid_argument on a non-finite entry
/// or fewer than two models.
DirichletPosterior vb_dirichlet(const Eigen::MatrixXd& log_evidence, double alpha0 = 1.0, double tol = 1e-6,
                                int max_iter = 10000);

/// Fraction of Dirichlet draws in which each model has the largest frequency.
Eigen::VectorXd exceedance_prob(const DirichletPosterior& posterior, std::int64_t n_samples, Rng& rng);

enum class Criterion { BIC, AIC };
std::string_view to_string(Criterion c);
Criterion parse_criterion(std::string_view s);

/// Log evidence approximated as -IC / 2.
double log_evidence(const FitResult& fit, Criterion ic);

struct EvidenceMatrix {
  std::vector<std::string> participants;
  std::vector<int> models;
  Eigen::MatrixXd values;
};

/// Collects one split's fits into a rectangular matrix. Throws if any
/// (participant, model) cell is missing or duplicated.
EvidenceMatrix evidence_matrix(const std::vector<FitResult>& fits, Split split, Criterion ic);

struct ComparisonRow {
  int model = 0;
  double mean_bic = 0.0;
  double mean_aic = 0.0;
  double alpha_bic = 0.0;
  double ep_bic = 0.0;
  double alpha_aic = 0.0;
  double ep_aic = 0.0;
};

/// Per-model table of mean IC, Dirichlet alpha and exceedance probability
/// under both criteria.
std::vector<ComparisonRow> compare_models(const std::vector<FitResult>& fits, Split split, std::int64_t n_samples,
                                          std::uint64_t seed, double alpha0 = 1.0);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);
std::string comparison_json(const std::vector<ComparisonRow>& rows);

}  // namespace detour
