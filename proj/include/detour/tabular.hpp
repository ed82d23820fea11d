#pragma once

// Dense kernels shared by the agents. Cells are addressed by 0-based index
// (cell id - 1); actions by index_of(Action).

#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "detour/experiment.hpp"
#include "detour/grid.hpp"

namespace detour {

template <typename Scalar>
using ActionValueTable = Eigen::Matrix<Scalar, Eigen::Dynamic, kActionCount, Eigen::RowMajor>;

template <typename Scalar>
using CellVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ActionVector = Eigen::Matrix<Scalar, kActionCount, 1>;

/// Rows indexed by state * 4 + action, columns by successor cell.
template <typename Scalar>
using SuccessorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Deterministic transition belief: destination index per (cell, action).
/// A wall is encoded as the cell itself.
using SuccessorTable = Eigen::Matrix<int, Eigen::Dynamic, kActionCount, Eigen::RowMajor>;

SuccessorTable geometric_successors(const GridSpec& grid);
SuccessorTable oracle_successors(const ExperimentConfig& cfg, std::optional<Wall> blockage = std::nullopt);

/// Boltzmann policy p(a) proportional to exp(beta * q(a)), max-shifted.
template <typename Derived>
ActionVector<typename Derived::Scalar> softmax_policy(const Eigen::MatrixBase<Derived>& q,
                                                      typename Derived::Scalar beta) {
  using Scalar = typename Derived::Scalar;
  ActionVector<Scalar> z = beta * q.derived().template cast<Scalar>();
  z.array() -= z.maxCoeff();
  ActionVector<Scalar> p = z.array().exp();
  return p / p.sum();
}

template <typename Derived>
ActionVector<typename Derived::Scalar> log_softmax_policy(const Eigen::MatrixBase<Derived>& q,
                                                          typename Derived::Scalar beta) {
  using Scalar = typename Derived::Scalar;
  ActionVector<Scalar> z = beta * q.derived().template cast<Scalar>();
  z.array() -= z.maxCoeff();
  const Scalar log_norm = std::log(z.array().exp().sum());
  z.array() -= log_norm;
  return z;
}

/// Weighted average of two action distributions.
template <typename DerivedA, typename DerivedB>
ActionVector<typename DerivedA::Scalar> hybrid_mix(const Eigen::MatrixBase<DerivedA>& p_mb,
                                                   const Eigen::MatrixBase<DerivedB>& p_sr,
                                                   typename DerivedA::Scalar weight) {
  return weight * p_mb + (typename DerivedA::Scalar(1) - weight) * p_sr;
}

/// One Q-learning step on (s, a, r, s'). Returns the TD error.
template <typename Scalar>
Scalar q_learning_update(ActionValueTable<Scalar>& q, int s, int a, Scalar reward, int s_next, bool terminal,
                         Scalar alpha, Scalar gamma) {
  const Scalar bootstrap = terminal ? Scalar(0) : q.row(s_next).maxCoeff();
  const Scalar delta = reward + gamma * bootstrap - q(s, a);
  q(s, a) += alpha * delta;
  return delta;
}

template <typename Scalar>
struct QValueResult {
  ActionValueTable<Scalar> q;
  int sweeps = 0;
  bool converged = false;
};

namespace detail {

template <typename Scalar>
void backup(const SuccessorTable& next, const CellVector<Scalar>& reward, int goal, Scalar gamma, Scalar wall_reward,
            const CellVector<Scalar>& value, ActionValueTable<Scalar>& out) {
  const Eigen::Index n = next.rows();
  for (Eigen::Index s = 0; s < n; ++s) {
    if (s == goal) {
      out.row(s).setZero();
      continue;
    }
    for (int a = 0; a < kActionCount; ++a) {
      const int d = next(s, a);
      if (d == s) {
        out(s, a) = wall_reward + gamma * value(s);
      } else if (d == goal) {
        out(s, a) = reward(d);
      } else {
        out(s, a) = reward(d) + gamma * value(d);
      }
    }
  }
}

}  // namespace detail

/// Synchronous q-value iteration with entry rewards. The goal is absorbing
/// and worth nothing after its entry reward. Stops when the sup-norm change
/// falls below `tol` or after `max_sweeps`.
template <typename Scalar>
QValueResult<Scalar> value_iteration(const SuccessorTable& next, const CellVector<Scalar>& reward, int goal,
                                     Scalar gamma, Scalar tol = Scalar(1e-6), int max_sweeps = 500,
                                     Scalar wall_reward = Scalar(-1)) {
  const Eigen::Index n = next.rows();
  QValueResult<Scalar> res;
  res.q = ActionValueTable<Scalar>::Zero(n, kActionCount);
  ActionValueTable<Scalar> fresh(n, kActionCount);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    const CellVector<Scalar> value = res.q.rowwise().maxCoeff();
    detail::backup(next, reward, goal, gamma, wall_reward, value, fresh);
    const Scalar change = (fresh - res.q).cwiseAbs().maxCoeff();
    res.q.swap(fresh);
    res.sweeps = sweep;
    if (change < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/// Exactly `depth` backups from zero: states further than `depth` moves
/// contribute nothing.
template <typename Scalar>
ActionValueTable<Scalar> depth_limited_vi(const SuccessorTable& next, const CellVector<Scalar>& reward, int goal,
                                          Scalar gamma, int depth, Scalar wall_reward = Scalar(-1)) {
  const Eigen::Index n = next.rows();
  ActionValueTable<Scalar> q = ActionValueTable<Scalar>::Zero(n, kActionCount);
  ActionValueTable<Scalar> fresh(n, kActionCount);
  for (int sweep = 0; sweep < depth; ++sweep) {
    const CellVector<Scalar> value = q.rowwise().maxCoeff();
    detail::backup(next, reward, goal, gamma, wall_reward, value, fresh);
    q.swap(fresh);
  }
  return q;
}

/// On-policy successor-representation TD step for (s, a) -> s' followed by a'.
/// Without a' (terminal) the bootstrap vector is zero.
template <typename Scalar>
void sr_td_update(SuccessorMatrix<Scalar>& m, int s, int a, int s_next, std::optional<int> a_next, Scalar alpha,
                  Scalar gamma) {
  const Eigen::Index row = static_cast<Eigen::Index>(s) * kActionCount + a;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> target = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>::Zero(m.cols());
  if (a_next) target = gamma * m.row(static_cast<Eigen::Index>(s_next) * kActionCount + *a_next);
  target(s_next) += Scalar(1);
  m.row(row) += alpha * (target - m.row(row));
}

/// Q(s, a) = sum_u M(s, a, u) * R(u).
template <typename Scalar>
ActionValueTable<Scalar> sr_q(const SuccessorMatrix<Scalar>& m, const CellVector<Scalar>& reward) {
  const CellVector<Scalar> flat = m * reward;
  return Eigen::Map<const ActionValueTable<Scalar>>(flat.data(), m.rows() / kActionCount, kActionCount);
}

/// Greedy rollout from `start` following argmax Q (first maximal action on ties).
/// Stops at the goal, on a revisit, or after `max_moves`.
template <typename Scalar>
std::vector<Cell> greedy_rollout(const SuccessorTable& next, const ActionValueTable<Scalar>& q, Cell start, Cell goal,
                                 int max_moves) {
  std::vector<Cell> path{start};
  std::vector<bool> seen(static_cast<std::size_t>(next.rows()), false);
  int s = start - 1;
  seen[s] = true;
  for (int k = 0; k < max_moves && s != goal - 1; ++k) {
    Eigen::Index best;
    q.row(s).maxCoeff(&best);
    const int d = next(s, static_cast<int>(best));
    if (d == s || seen[d]) break;
    seen[d] = true;
    path.push_back(d + 1);
    s = d;
  }
  return path;
}

}  // namespace detour
