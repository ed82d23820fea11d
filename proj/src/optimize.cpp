#include "detour/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace detour {

namespace {

double safe(double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : v; }

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts) {
  const Eigen::Index n = x0.size();
  NelderMeadResult res;
  if (n == 0) {
    res.x = x0;
    res.f = safe(f(x0));
    res.evals = 1;
    res.converged = true;
    return res;
  }

  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return safe(f(x));
  };

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> val(static_cast<std::size_t>(n + 1));
  val[0] = eval(x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts[i + 1](i) += opts.initial_step;
    val[i + 1] = eval(pts[i + 1]);
  }

  std::vector<std::size_t> order(pts.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    std::vector<Eigen::VectorXd> p2;
    std::vector<double> v2;
    for (std::size_t i : order) {
      p2.push_back(pts[i]);
      v2.push_back(val[i]);
    }
    pts = std::move(p2);
    val = std::move(v2);
  };

  bool converged = false;
  for (;;) {
    sort_simplex();
    double diameter = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      diameter = std::max(diameter, (pts[i] - pts[0]).cwiseAbs().maxCoeff());
    }
    const bool f_flat = opts.f_tol > 0 && std::isfinite(val.back()) && val.back() - val.front() <= opts.f_tol;
    if (diameter < opts.x_tol || f_flat) {
      converged = true;
      break;
    }
    if (evals >= opts.max_evals) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += pts[i];
    centroid /= static_cast<double>(n);
    const Eigen::VectorXd& worst = pts[n];

    const Eigen::VectorXd xr = centroid + (centroid - worst);
    const double fr = eval(xr);
    if (fr < val[0]) {
      const Eigen::VectorXd xe = centroid + 2.0 * (centroid - worst);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[n] = xe;
        val[n] = fe;
      } else {
        pts[n] = xr;
        val[n] = fr;
      }
      continue;
    }
    if (fr < val[n - 1]) {
      pts[n] = xr;
      val[n] = fr;
      continue;
    }
    if (fr < val[n]) {
      const Eigen::VectorXd xc = centroid + 0.5 * (xr - centroid);
      const double fc = eval(xc);
      if (fc <= fr) {
        pts[n] = xc;
        val[n] = fc;
        continue;
      }
    } else {
      const Eigen::VectorXd xc = centroid + 0.5 * (worst - centroid);
      const double fc = eval(xc);
      if (fc < val[n]) {
        pts[n] = xc;
        val[n] = fc;
        continue;
      }
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
      pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
      val[i] = eval(pts[i]);
    }
  }

  res.x = pts[0];
  res.f = val[0];
  res.evals = evals;
  res.converged = converged;
  return res;
}

}  // namespace detour
