#include "detour/selection.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace detour {

double digamma(double x) {
  if (!(x > 0)) throw std::domain_error("digamma needs x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic expansion with Bernoulli-number coefficients.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 -
                                                                                             inv2 * (691.0 / 32760 - inv2 / 12.0))))));
  return result + std::log(x) - 0.5 * inv - series;
}

DirichletPosterior vb_dirichlet(const Eigen::MatrixXd& log_evidence, double alpha0, double tol, int max_iter) {
  const Eigen::Index n = log_evidence.rows();
  const Eigen::Index k = log_evidence.cols();
  if (k < 2) throw std::invalid_argument("model selection needs at least two models");
  if (!log_evidence.allFinite()) throw std::invalid_argument("evidence contains non-finite entries");

  DirichletPosterior post;
  post.alpha0 = alpha0;
  post.alpha = Eigen::VectorXd::Constant(k, alpha0);
  Eigen::VectorXd log_u(k);
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd psi(k);
    for (Eigen::Index j = 0; j < k; ++j) psi(j) = digamma(post.alpha(j));
    psi.array() -= digamma(post.alpha.sum());

    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      log_u = log_evidence.row(i).transpose() + psi;
      log_u.array() -= log_u.maxCoeff();
      Eigen::VectorXd u = log_u.array().exp();
      counts += u / u.sum();
    }
    const Eigen::VectorXd next = Eigen::VectorXd::Constant(k, alpha0) + counts;
    const double change = (next - post.alpha).cwiseAbs().maxCoeff();
    post.alpha = next;
    post.iterations = it;
    if (change < tol) {
      post.converged = true;
      break;
    }
  }
  return post;
}

Eigen::VectorXd exceedance_prob(const DirichletPosterior& posterior, std::int64_t n_samples, Rng& rng) {
  const Eigen::Index k = posterior.alpha.size();
  Eigen::VectorXd wins = Eigen::VectorXd::Zero(k);
  if (k == 1) {
    wins(0) = 1.0;
    return wins;
  }
  // The argmax of a Dirichlet draw equals the argmax of its unnormalised gammas.
  for (std::int64_t s = 0; s < n_samples; ++s) {
    Eigen::Index best = 0;
    double best_v = -1.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double g = rng.gamma(posterior.alpha(j));
      if (g > best_v) {
        best_v = g;
        best = j;
      }
    }
    wins(best) += 1.0;
  }
  return wins / static_cast<double>(n_samples);
}

std::string_view to_string(Criterion c) { return c == Criterion::BIC ? "bic" : "aic"; }

Criterion parse_criterion(std::string_view s) {
  if (s == "bic" || s == "BIC") return Criterion::BIC;
  if (s == "aic" || s == "AIC") return Criterion::AIC;
  throw std::invalid_argument("unknown criterion: " + std::string(s));
}

double log_evidence(const FitResult& fit, Criterion ic) {
  return -0.5 * (ic == Criterion::BIC ? fit.bic : fit.aic);
}

EvidenceMatrix evidence_matrix(const std::vector<FitResult>& fits, Split split, Criterion ic) {
  EvidenceMatrix m;
  std::map<std::string, std::size_t> row_of;
  std::map<int, std::size_t> col_of;
  for (const auto& f : fits) {
    if (f.split != split) continue;
    if (row_of.try_emplace(f.participant, m.participants.size()).second) m.participants.push_back(f.participant);
    if (col_of.try_emplace(f.model, m.models.size()).second) m.models.push_back(f.model);
  }
  m.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(m.participants.size()),
                                       static_cast<Eigen::Index>(m.models.size()), std::nan(""));
  for (const auto& f : fits) {
    if (f.split != split) continue;
    double& cell = m.values(static_cast<Eigen::Index>(row_of[f.participant]),
                            static_cast<Eigen::Index>(col_of[f.model]));
    if (!std::isnan(cell)) throw std::invalid_argument("duplicate fit for " + f.participant);
    cell = log_evidence(f, ic);
  }
  if (m.values.hasNaN()) throw std::invalid_argument("evidence matrix has missing (participant, model) fits");
  return m;
}

std::vector<ComparisonRow> compare_models(const std::vector<FitResult>& fits, Split split, std::int64_t n_samples,
                                          std::uint64_t seed, double alpha0) {
  std::vector<ComparisonRow> rows;
  for (Criterion ic : {Criterion::BIC, Criterion::AIC}) {
    const EvidenceMatrix m = evidence_matrix(fits, split, ic);
    if (rows.empty()) {
      for (int model : m.models) rows.push_back({model});
    }
    const Eigen::VectorXd mean_ic = -2.0 * m.values.colwise().mean().transpose();
    Eigen::VectorXd alpha, ep;
    if (m.models.size() == 1) {
      alpha = Eigen::VectorXd::Constant(1, alpha0 + static_cast<double>(m.participants.size()));
      ep = Eigen::VectorXd::Ones(1);
    } else {
      const DirichletPosterior post = vb_dirichlet(m.values, alpha0);
      Rng rng(derive_seed(seed, ic == Criterion::BIC ? 1 : 2, 0));
      alpha = post.alpha;
      ep = exceedance_prob(post, n_samples, rng);
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (ic == Criterion::BIC) {
        rows[j].mean_bic = mean_ic(jj);
        rows[j].alpha_bic = alpha(jj);
        rows[j].ep_bic = ep(jj);
      } else {
        rows[j].mean_aic = mean_ic(jj);
        rows[j].alpha_aic = alpha(jj);
        rows[j].ep_aic = ep(jj);
      }
    }
  }
  return rows;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "model,name,mean_BIC,mean_AIC,alpha_BIC,EP_BIC,alpha_AIC,EP_AIC\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.model,
                  std::string(model_info(r.model).short_name).c_str(), r.mean_bic, r.mean_aic, r.alpha_bic, r.ep_bic,
                  r.alpha_aic, r.ep_aic);
    out << buf;
  }
}

std::string comparison_json(const std::vector<ComparisonRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"model", r.model},
                   {"name", std::string(model_info(r.model).short_name)},
                   {"mean_BIC", r.mean_bic},
                   {"mean_AIC", r.mean_aic},
                   {"alpha_BIC", r.alpha_bic},
                   {"EP_BIC", r.ep_bic},
                   {"alpha_AIC", r.alpha_aic},
                   {"EP_AIC", r.ep_aic}});
  }
  return arr.dump(2);
}

}  // namespace detour
