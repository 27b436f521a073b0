#ifndef MSLP_TESTS_LP_ORACLES_HPP
#define MSLP_TESTS_LP_ORACLES_HPP

// Independent reference solvers for cross-checking the LP/QP engine. All of
// them are brute force on purpose: no simplex, no active-set logic shared
// with the code under test.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "mslp/lp.hpp"

namespace oracle {

struct Result {
  bool feasible = false;
  double objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd z;
};

// Visits every size-k index subset of {0..total-1} in lexicographic order.
template <typename F>
void for_each_subset(int total, int k, F&& visit) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > total) return;
  for (;;) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == total - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Vertex enumeration for min <c,z>, Mz <= r, z >= 0. Only valid on bounded
// feasible regions (callers construct instances that way). Constraint ids:
// [0,m) rows, [m,m+n) the z_j >= 0 bounds.
inline Result lp_vertex_enumerate(const mslp::LpProblem& p,
                                  double tol = 1e-7) {
  const int n = static_cast<int>(p.c.size());
  const int m = static_cast<int>(p.r.size());
  Result best;
  if (n == 0) {
    best.feasible = m == 0 || p.r.minCoeff() >= -tol;
    best.objective = best.feasible
                         ? 0.0
                         : std::numeric_limits<double>::infinity();
    best.z = Eigen::VectorXd::Zero(0);
    return best;
  }
  for_each_subset(m + n, n, [&](const std::vector<int>& active) {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      if (active[i] < m) {
        a.row(i) = p.M.row(active[i]);
        b(i) = p.r(active[i]);
      } else {
        a.row(i).setZero();
        a(i, active[i] - m) = 1.0;
        b(i) = 0.0;
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) return;
    const Eigen::VectorXd z = lu.solve(b);
    if (z.minCoeff() < -tol) return;
    if (m > 0 && (p.M * z - p.r).maxCoeff() > tol) return;
    const double obj = p.c.dot(z);
    if (!best.feasible || obj < best.objective) {
      best.feasible = true;
      best.objective = obj;
      best.z = z;
    }
  });
  return best;
}

// KKT enumeration for the QP, valid when the prox term covers every variable
// (strictly convex) and the data is in general position. Constraint ids as in
// lp_vertex_enumerate.
inline Result qp_enumerate(const mslp::QpProblem& qp, double tol = 1e-7) {
  const mslp::LpProblem& p = qp.lp;
  const int n = static_cast<int>(p.c.size());
  const int m = static_cast<int>(p.r.size());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  h.head(qp.center.size()).setConstant(qp.sigma);
  Eigen::VectorXd g0 = p.c;
  g0.head(qp.center.size()) -= qp.sigma * qp.center;
  const auto qval = [&](const Eigen::VectorXd& z) {
    return 0.5 * qp.sigma * (z.head(qp.center.size()) - qp.center).squaredNorm() +
           p.c.dot(z);
  };
  Result best;
  for (int k = 0; k <= n; ++k) {
    for_each_subset(m + n, k, [&](const std::vector<int>& active) {
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
      kkt.topLeftCorner(n, n) = h.asDiagonal();
      Eigen::VectorXd rhs(n + k);
      rhs.head(n) = -g0;
      for (int i = 0; i < k; ++i) {
        Eigen::VectorXd ai;
        double bi;
        if (active[i] < m) {
          ai = p.M.row(active[i]).transpose();
          bi = p.r(active[i]);
        } else {
          ai = Eigen::VectorXd::Zero(n);
          ai(active[i] - m) = -1.0;
          bi = 0.0;
        }
        kkt.block(0, n + i, n, 1) = ai;
        kkt.block(n + i, 0, 1, n) = ai.transpose();
        rhs(n + i) = bi;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd sol = lu.solve(rhs);
      const Eigen::VectorXd z = sol.head(n);
      const Eigen::VectorXd lam = sol.tail(k);
      if (k > 0 && lam.minCoeff() < -tol) return;
      if (z.minCoeff() < -tol) return;
      if (m > 0 && (p.M * z - p.r).maxCoeff() > tol) return;
      const double obj = qval(z);
      if (!best.feasible || obj < best.objective) {
        best.feasible = true;
        best.objective = obj;
        best.z = z;
      }
    });
  }
  return best;
}

// Projected gradient for box-shaped QPs: requires M == I so row i reads
// z_i <= r_i. Handles zero-curvature coordinates because each projection step
// still moves them monotonically to the binding end of the box.
inline Result pg_box(const mslp::QpProblem& qp, int max_iter = 400000,
                     double step_tol = 1e-13) {
  const mslp::LpProblem& p = qp.lp;
  const int n = static_cast<int>(p.c.size());
  if (p.M.rows() != n || !p.M.isIdentity(1e-14))
    throw std::runtime_error("pg_box: not a box instance");
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  h.head(qp.center.size()).setConstant(qp.sigma);
  Eigen::VectorXd g0 = p.c;
  g0.head(qp.center.size()) -= qp.sigma * qp.center;
  const double alpha = 1.0 / (qp.sigma + 1.0);
  Eigen::VectorXd z = 0.5 * p.r;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd g = (h.array() * z.array()).matrix() + g0;
    Eigen::VectorXd next =
        (z - alpha * g).cwiseMax(0.0).cwiseMin(p.r);
    const double moved = (next - z).cwiseAbs().maxCoeff();
    z = next;
    if (moved < step_tol) break;
  }
  Result res;
  res.feasible = true;
  res.z = z;
  res.objective =
      0.5 * qp.sigma * (z.head(qp.center.size()) - qp.center).squaredNorm() +
      p.c.dot(z);
  return res;
}

// KKT certificate check for any convex instance: returns the largest
// violation across feasibility, stationarity, dual signs and complementarity.
inline double qp_kkt_residual(const mslp::QpProblem& qp,
                              const mslp::LpSolution& s) {
  const mslp::LpProblem& p = qp.lp;
  const int n = static_cast<int>(p.c.size());
  const int m = static_cast<int>(p.r.size());
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  h.head(qp.center.size()).setConstant(qp.sigma);
  Eigen::VectorXd g = (h.array() * s.primal.array()).matrix() + p.c;
  g.head(qp.center.size()) -= qp.sigma * qp.center;

  double viol = 0.0;
  viol = std::max(viol, -s.primal.minCoeff());
  Eigen::VectorXd slack;
  if (m > 0) {
    slack = p.r - p.M * s.primal;
    viol = std::max(viol, -slack.minCoeff());
    viol = std::max(viol, s.dual.maxCoeff());  // duals must be <= 0
    for (int i = 0; i < m; ++i)
      viol = std::max(viol, std::abs(s.dual(i) * slack(i)));
  }
  // stationarity: nu = g + M'mu with mu = -dual >= 0, and nu >= 0 supported
  // on the active bounds only
  Eigen::VectorXd resid = g;
  if (m > 0) resid -= p.M.transpose() * s.dual;
  for (int j = 0; j < n; ++j) {
    if (s.primal(j) <= 1e-7) {
      // bound can absorb any nonnegative leftover
      viol = std::max(viol, -resid(j));
    } else {
      viol = std::max(viol, std::abs(resid(j)));
    }
  }
  return viol;
}

}  // namespace oracle

#endif
