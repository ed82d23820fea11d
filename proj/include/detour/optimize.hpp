#pragma once

#include <functional>

#include <Eigen/Dense>

namespace detour {

struct NelderMeadOptions {
  int max_evals = 2000;
  double x_tol = 1e-6;  // simplex diameter (infinity norm around the best vertex)
  double f_tol = 0.0;   // optional spread of objective values; 0 disables
  double initial_step = 0.5;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

/// Unconstrained minimisation with the standard reflect / expand / contract /
/// shrink moves (coefficients 1, 2, 1/2, 1/2). Bounds are the caller's job,
/// usually via a change of variables.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const NelderMeadOptions& opts = {});

}  // namespace detour
