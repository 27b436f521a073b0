#include "mslp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mslp {

namespace {

constexpr double red_cost_tol = 1e-9;  // pricing optimality threshold
constexpr double degen_tol = 1e-12;

double inf() { return std::numeric_limits<double>::infinity(); }

// ---------------------------------------------------------------- simplex --

// Two-phase revised simplex on the slack form  [M | I | -I] (z, s, t) = r.
// Column ids: [0,n) structural, [n,n+m) row slacks, [n+m,n+2m) artificials.
// Artificial i exists only for rows with r(i) < 0 and never re-enters once
// nonbasic. The working basis is refactorized every pivot; at desk scale the
// dense LU is cheap and removes any update-drift concern.
struct simplex {
  const LpProblem& p;
  int n, m;
  int phase = 1;
  std::vector<int> basis;      // column id occupying each row slot
  std::vector<char> is_basic;  // indexed by column id
  Eigen::MatrixXd ab;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;   // of ab
  Eigen::PartialPivLU<Eigen::MatrixXd> lut;  // of ab'
  Eigen::VectorXd xb;
  int iterations = 0;

  explicit simplex(const LpProblem& prob)
      : p(prob),
        n(static_cast<int>(prob.c.size())),
        m(static_cast<int>(prob.r.size())) {}

  bool structural(int j) const { return j < n; }
  bool artificial(int j) const { return j >= n + m; }

  Eigen::VectorXd column(int j) const {
    if (j < n) return p.M.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    if (j < n + m)
      e(j - n) = 1.0;
    else
      e(j - n - m) = -1.0;
    return e;
  }

  double cost(int j) const {
    if (phase == 1) return artificial(j) ? 1.0 : 0.0;
    return structural(j) ? p.c(j) : 0.0;
  }

  void refactor() {
    ab.resize(m, m);
    for (int i = 0; i < m; ++i) ab.col(i) = column(basis[i]);
    lu.compute(ab);
    const auto diag = lu.matrixLU().diagonal().cwiseAbs();
    if (diag.minCoeff() <= pivot_tol * std::max(1.0, diag.maxCoeff()))
      throw solver_error("simplex: singular working basis");
    lut.compute(Eigen::MatrixXd(ab.transpose()));
    xb = lu.solve(p.r);
  }

  void setup() {
    basis.resize(m);
    is_basic.assign(n + 2 * m, 0);
    bool any_art = false;
    for (int i = 0; i < m; ++i) {
      const bool neg = p.r(i) < 0;
      any_art = any_art || neg;
      basis[i] = neg ? n + m + i : n + i;
      is_basic[basis[i]] = 1;
    }
    phase = any_art ? 1 : 2;
    refactor();
  }

  double phase_objective() const {
    double v = 0.0;
    for (int i = 0; i < m; ++i) v += cost(basis[i]) * xb(i);
    return v;
  }

  // Runs the current phase to optimality; false means an unbounded ray.
  bool run(int max_iter) {
    bool bland = false;
    int stall = 0;
    double prev = inf();
    for (;;) {
      if (iterations >= max_iter) throw solver_error("simplex: iteration limit");
      Eigen::VectorXd cb(m);
      for (int i = 0; i < m; ++i) cb(i) = cost(basis[i]);
      const Eigen::VectorXd y = lut.solve(cb);

      // pricing: Dantzig, or Bland once degenerate pivots pile up
      int enter = -1;
      double best = -red_cost_tol;
      for (int j = 0; j < n + m; ++j) {  // artificials never enter
        if (is_basic[j]) continue;
        const double dj =
            cost(j) - (j < n ? y.dot(p.M.col(j)) : y(j - n));
        if (bland) {
          if (dj < -red_cost_tol) {
            enter = j;
            break;
          }
        } else if (dj < best) {
          best = dj;
          enter = j;
        }
      }
      if (enter < 0) return true;

      const Eigen::VectorXd w = lu.solve(column(enter));

      // ratio test; in phase 2 a basic artificial sits at zero and leaves as
      // soon as any direction touches its row, whichever the sign
      int leave = -1;
      double t = inf();
      for (int i = 0; i < m; ++i) {
        const double wi = w(i);
        double ratio;
        if (phase == 2 && artificial(basis[i])) {
          if (std::abs(wi) <= pivot_tol) continue;
          ratio = std::max(0.0, xb(i)) / std::abs(wi);
        } else {
          if (wi <= pivot_tol) continue;
          ratio = std::max(0.0, xb(i)) / wi;
        }
        if (ratio < t - degen_tol ||
            (ratio < t + degen_tol && (leave < 0 || basis[i] < basis[leave]))) {
          t = ratio;
          leave = i;
        }
      }
      if (leave < 0) return false;

      is_basic[basis[leave]] = 0;
      is_basic[enter] = 1;
      basis[leave] = enter;
      ++iterations;
      refactor();

      const double obj = phase_objective();
      if (obj < prev - degen_tol * (1.0 + std::abs(prev))) {
        stall = 0;
        bland = false;
      } else if (++stall >= stall_threshold) {
        bland = true;
      }
      prev = obj;
    }
  }

  // After a feasible phase 1, pivot leftover artificials out wherever a
  // nonzero pivot exists; a row that admits none is linearly dependent and
  // keeps its artificial pinned at zero through phase 2.
  void drive_out_artificials() {
    for (int i = 0; i < m; ++i) {
      if (!artificial(basis[i])) continue;
      Eigen::VectorXd ei = Eigen::VectorXd::Zero(m);
      ei(i) = 1.0;
      const Eigen::VectorXd rowi = lut.solve(ei);  // row i of ab^{-1}
      for (int j = 0; j < n + m; ++j) {
        if (is_basic[j]) continue;
        const double piv =
            j < n ? rowi.dot(p.M.col(j)) : rowi(j - n);
        if (std::abs(piv) > pivot_tol) {
          is_basic[basis[i]] = 0;
          is_basic[j] = 1;
          basis[i] = j;
          refactor();
          break;
        }
      }
    }
  }

  LpSolution finish() {
    LpSolution s;
    s.status = SolveStatus::Optimal;
    s.iterations = iterations;
    s.primal = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i)
      if (structural(basis[i])) s.primal(basis[i]) = xb(i);
    s.primal = s.primal.cwiseMax(0.0);
    s.objective = p.c.dot(s.primal);
    Eigen::VectorXd cb(m);
    for (int i = 0; i < m; ++i) cb(i) = cost(basis[i]);
    s.dual = lut.solve(cb);
    // tight rows excluding artificial-held ones; then |rows| == |cols| and
    // M[rows, cols] inherits nonsingularity from the working basis
    for (int i = 0; i < m; ++i)
      if (!is_basic[n + i] && !is_basic[n + m + i]) s.basis.rows.push_back(i);
    for (int j = 0; j < n; ++j)
      if (is_basic[j]) s.basis.cols.push_back(j);
    return s;
  }
};

}  // namespace

LpSolution solve_lp(const LpProblem& p) {
  const int n = static_cast<int>(p.c.size());
  const int m = static_cast<int>(p.r.size());
  if (p.M.rows() != m || p.M.cols() != n)
    throw solver_error("solve_lp: dimension mismatch");

  LpSolution s;
  if (n == 0) {
    const double worst = m > 0 ? p.r.minCoeff() : 0.0;
    s.status = worst >= -feas_tol ? SolveStatus::Optimal : SolveStatus::Infeasible;
    s.primal = Eigen::VectorXd::Zero(0);
    s.dual = Eigen::VectorXd::Zero(m);
    s.objective = s.status == SolveStatus::Optimal
                      ? 0.0
                      : std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  if (m == 0) {
    if (p.c.minCoeff() < -red_cost_tol) {
      s.status = SolveStatus::Unbounded;
      s.objective = -inf();
      return s;
    }
    s.primal = Eigen::VectorXd::Zero(n);
    s.dual = Eigen::VectorXd::Zero(0);
    return s;
  }

  simplex sx(p);
  sx.setup();
  const int cap = 5000 + 200 * (n + m);
  if (sx.phase == 1) {
    if (!sx.run(cap)) throw solver_error("simplex: unbounded phase-1 ray");
    const double infeas = sx.phase_objective();
    if (infeas > feas_tol * (1.0 + p.r.cwiseAbs().maxCoeff())) {
      s.status = SolveStatus::Infeasible;
      s.objective = std::numeric_limits<double>::quiet_NaN();
      s.iterations = sx.iterations;
      return s;
    }
    sx.drive_out_artificials();
    sx.phase = 2;
  }
  if (!sx.run(cap)) {
    s.status = SolveStatus::Unbounded;
    s.objective = -inf();
    s.iterations = sx.iterations;
    s.primal = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i)
      if (sx.structural(sx.basis[i])) s.primal(sx.basis[i]) = sx.xb(i);
    s.primal = s.primal.cwiseMax(0.0);
    return s;
  }
  return sx.finish();
}

LpSolution solve_lp_via_dual(const LpProblem& p) {
  // dual of  min <c,z>, Mz <= r, z >= 0  in the same canonical shape:
  //   min <r,w>  s.t.  -M'w <= c, w >= 0      (w = -y)
  // value(P) = -value(D'); primal of P = -(row duals of D').
  LpProblem d;
  d.c = p.r;
  d.M = -p.M.transpose();
  d.r = p.c;
  const LpSolution ds = solve_lp(d);

  LpSolution s;
  s.iterations = ds.iterations;
  switch (ds.status) {
    case SolveStatus::Optimal:
      s.status = SolveStatus::Optimal;
      s.dual = -ds.primal;
      s.primal = (-ds.dual).cwiseMax(0.0);
      s.objective = -ds.objective + 0.0;  // + 0.0 clears a negative zero
      return s;  // basis intentionally empty: it belongs to D', not to P
    case SolveStatus::Unbounded:
      s.status = SolveStatus::Infeasible;
      s.objective = std::numeric_limits<double>::quiet_NaN();
      return s;
    case SolveStatus::Infeasible:
      // P is unbounded or infeasible; classify on the primal (rare path)
      return solve_lp(p);
  }
  throw solver_error("solve_lp_via_dual: unreachable");
}

// --------------------------------------------------------------------- qp --

namespace {

// Sorted-set helpers for the working set.
bool set_contains(const std::vector<int>& v, int x) {
  return std::binary_search(v.begin(), v.end(), x);
}
void set_insert(std::vector<int>& v, int x) {
  v.insert(std::lower_bound(v.begin(), v.end(), x), x);
}
void set_erase(std::vector<int>& v, int x) {
  v.erase(std::lower_bound(v.begin(), v.end(), x));
}

}  // namespace

LpSolution solve_qp(const QpProblem& qp, const Basis* warm,
                    const Eigen::VectorXd* start) {
  const LpProblem& p = qp.lp;
  const int n = static_cast<int>(p.c.size());
  const int m = static_cast<int>(p.r.size());
  const int np = static_cast<int>(qp.center.size());
  if (p.M.rows() != m || p.M.cols() != n || np > n || qp.sigma <= 0.0)
    throw solver_error("solve_qp: bad problem data");

  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  h.head(np).setConstant(qp.sigma);
  Eigen::VectorXd g0 = p.c;
  g0.head(np) -= qp.sigma * qp.center;
  const auto grad = [&](const Eigen::VectorXd& z) {
    return Eigen::VectorXd((h.array() * z.array()).matrix() + g0);
  };
  const auto qval = [&](const Eigen::VectorXd& z) {
    return 0.5 * qp.sigma * (z.head(np) - qp.center).squaredNorm() +
           p.c.dot(z);
  };
  const double rscale = 1.0 + (m > 0 ? p.r.cwiseAbs().maxCoeff() : 0.0);

  // feasible start: caller-provided point when it checks out, else phase 1
  Eigen::VectorXd z;
  bool have_start = false;
  if (start && start->size() == n) {
    Eigen::VectorXd cand = start->cwiseMax(0.0);
    if (m == 0 || (p.r - p.M * cand).minCoeff() >= -feas_tol * rscale) {
      z = std::move(cand);
      have_start = true;
    }
  }
  int lp_iters = 0;
  if (!have_start) {
    LpProblem feas{Eigen::VectorXd::Zero(n), p.M, p.r};
    LpSolution fs = solve_lp(feas);
    lp_iters = fs.iterations;
    if (fs.status != SolveStatus::Optimal) {
      LpSolution s;
      s.status = SolveStatus::Infeasible;
      s.objective = std::numeric_limits<double>::quiet_NaN();
      s.iterations = lp_iters;
      return s;
    }
    z = fs.primal;
  }

  const double act_tol = 1e-9 * rscale;
  std::vector<int> w_rows, w_bnd;
  {
    Eigen::VectorXd slack =
        m > 0 ? Eigen::VectorXd(p.r - p.M * z) : Eigen::VectorXd();
    const auto row_active = [&](int i) { return slack(i) <= act_tol; };
    const auto bnd_active = [&](int j) { return z(j) <= act_tol; };
    if (warm) {
      for (int i : warm->rows)
        if (i >= 0 && i < m && row_active(i)) w_rows.push_back(i);
      for (int j : warm->cols)
        if (j >= 0 && j < n && bnd_active(j)) w_bnd.push_back(j);
      std::sort(w_rows.begin(), w_rows.end());
      std::sort(w_bnd.begin(), w_bnd.end());
    } else {
      for (int i = 0; i < m; ++i)
        if (row_active(i)) w_rows.push_back(i);
      for (int j = 0; j < n; ++j)
        if (bnd_active(j)) w_bnd.push_back(j);
    }
    for (int j : w_bnd) z(j) = 0.0;
  }

  const int cap = 500 + 50 * (n + m);
  const double curv_floor = 1e-9 * std::max(1.0, qp.sigma);
  for (int iter = 0;; ++iter) {
    if (iter >= cap) throw solver_error("qp: iteration limit");

    std::vector<int> free_vars;
    for (int j = 0; j < n; ++j)
      if (!set_contains(w_bnd, j)) free_vars.push_back(j);
    const int nf = static_cast<int>(free_vars.size());
    const int k = static_cast<int>(w_rows.size());

    // null-space basis of the working rows over the free variables
    Eigen::MatrixXd zb;  // nf x dim, orthonormal columns
    if (nf > 0) {
      if (k == 0) {
        zb = Eigen::MatrixXd::Identity(nf, nf);
      } else {
        Eigen::MatrixXd aw(k, nf);
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < nf; ++b) aw(a, b) = p.M(w_rows[a], free_vars[b]);
        Eigen::FullPivLU<Eigen::MatrixXd> awlu(aw);
        awlu.setThreshold(1e-10);
        if (awlu.dimensionOfKernel() > 0) {
          Eigen::MatrixXd kern = awlu.kernel();
          Eigen::HouseholderQR<Eigen::MatrixXd> qr(kern);
          zb = qr.householderQ() *
               Eigen::MatrixXd::Identity(nf, kern.cols());
        } else {
          zb.resize(nf, 0);
        }
      }
    } else {
      zb.resize(0, 0);
    }

    const Eigen::VectorXd g = grad(z);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    bool ray = false;
    if (zb.cols() > 0) {
      Eigen::VectorXd gf(nf), hf(nf);
      for (int b = 0; b < nf; ++b) {
        gf(b) = g(free_vars[b]);
        hf(b) = h(free_vars[b]);
      }
      const Eigen::VectorXd gr = zb.transpose() * gf;
      const Eigen::MatrixXd hr =
          zb.transpose() * (hf.asDiagonal() * zb);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hr);
      const Eigen::VectorXd& lam = es.eigenvalues();
      const Eigen::MatrixXd& q = es.eigenvectors();
      const Eigen::VectorXd ge = q.transpose() * gr;
      // gradient mass sitting in zero-curvature directions drives a ray
      Eigen::VectorXd flat = Eigen::VectorXd::Zero(ge.size());
      for (int i = 0; i < ge.size(); ++i)
        if (lam(i) <= curv_floor) flat(i) = ge(i);
      if (flat.norm() > 1e-9 * (1.0 + g.norm())) {
        ray = true;
        const Eigen::VectorXd df = -zb * (q * flat);
        for (int b = 0; b < nf; ++b) d(free_vars[b]) = df(b);
      } else {
        Eigen::VectorXd ve = Eigen::VectorXd::Zero(ge.size());
        for (int i = 0; i < ge.size(); ++i)
          if (lam(i) > curv_floor) ve(i) = -ge(i) / lam(i);
        const Eigen::VectorXd df = zb * (q * ve);
        for (int b = 0; b < nf; ++b) d(free_vars[b]) = df(b);
      }
    }

    const double dnorm = d.size() > 0 ? d.cwiseAbs().maxCoeff() : 0.0;
    if (!ray && dnorm <= 1e-11 * (1.0 + z.cwiseAbs().maxCoeff())) {
      // stationary on the working set: check multiplier signs
      const int nb = static_cast<int>(w_bnd.size());
      if (k + nb == 0) {
        LpSolution s;
        s.status = SolveStatus::Optimal;
        s.primal = z;
        s.dual = Eigen::VectorXd::Zero(m);
        s.objective = qval(z);
        s.iterations = iter + lp_iters;
        return s;
      }
      Eigen::MatrixXd kmat(n, k + nb);
      for (int a = 0; a < k; ++a) kmat.col(a) = p.M.row(w_rows[a]).transpose();
      for (int b = 0; b < nb; ++b) {
        kmat.col(k + b).setZero();
        kmat.col(k + b)(w_bnd[b]) = -1.0;
      }
      const Eigen::VectorXd lambda =
          kmat.colPivHouseholderQr().solve(-g);
      int worst = -1;
      double worst_val = -kkt_tol;
      for (int i = 0; i < lambda.size(); ++i)
        if (lambda(i) < worst_val) {
          worst_val = lambda(i);
          worst = i;
        }
      if (worst < 0) {
        LpSolution s;
        s.status = SolveStatus::Optimal;
        s.primal = z;
        s.dual = Eigen::VectorXd::Zero(m);
        for (int a = 0; a < k; ++a)
          s.dual(w_rows[a]) = std::min(0.0, -lambda(a));
        s.objective = qval(z);
        s.basis.rows = w_rows;
        s.basis.cols = w_bnd;
        s.iterations = iter + lp_iters;
        return s;
      }
      if (worst < k)
        set_erase(w_rows, w_rows[worst]);
      else
        set_erase(w_bnd, w_bnd[worst - k]);
      continue;
    }

    // ratio test against constraints outside the working set
    double tmax = ray ? inf() : 1.0;
    int block_row = -1, block_bnd = -1;
    for (int i = 0; i < m; ++i) {
      if (set_contains(w_rows, i)) continue;
      const double md = p.M.row(i).dot(d);
      if (md <= pivot_tol) continue;
      const double ti = std::max(0.0, p.r(i) - p.M.row(i).dot(z)) / md;
      if (ti < tmax - degen_tol) {
        tmax = ti;
        block_row = i;
        block_bnd = -1;
      }
    }
    for (int j = 0; j < n; ++j) {
      if (set_contains(w_bnd, j)) continue;
      if (d(j) >= -pivot_tol) continue;
      const double tj = std::max(0.0, z(j)) / (-d(j));
      if (tj < tmax - degen_tol) {
        tmax = tj;
        block_row = -1;
        block_bnd = j;
      }
    }
    if (ray && block_row < 0 && block_bnd < 0) {
      LpSolution s;
      s.status = SolveStatus::Unbounded;
      s.primal = z;
      s.objective = -inf();
      s.iterations = iter + lp_iters;
      return s;
    }
    z += tmax * d;
    if (block_row >= 0) set_insert(w_rows, block_row);
    if (block_bnd >= 0) {
      set_insert(w_bnd, block_bnd);
      z(block_bnd) = 0.0;
    }
  }
}

Eigen::VectorXd basis_reconstruct(const Basis& basis, const Eigen::MatrixXd& M,
                                  const Eigen::VectorXd& rhs) {
  if (basis.rows.size() != basis.cols.size())
    throw solver_error("basis_reconstruct: |rows| != |cols|");
  const int k = static_cast<int>(basis.rows.size());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(M.cols());
  if (k == 0) return u;
  for (int i : basis.rows)
    if (i < 0 || i >= M.rows() || i >= rhs.size())
      throw solver_error("basis_reconstruct: row index out of range");
  for (int j : basis.cols)
    if (j < 0 || j >= M.cols())
      throw solver_error("basis_reconstruct: column index out of range");
  Eigen::MatrixXd sub(k, k);
  Eigen::VectorXd b(k);
  for (int i = 0; i < k; ++i) {
    b(i) = rhs(basis.rows[i]);
    for (int j = 0; j < k; ++j) sub(i, j) = M(basis.rows[i], basis.cols[j]);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sub);
  const auto diag = lu.matrixLU().diagonal().cwiseAbs();
  if (diag.minCoeff() <= pivot_tol * std::max(1.0, diag.maxCoeff()))
    throw singular_basis_error("basis_reconstruct: singular basis", basis);
  const Eigen::VectorXd uj = lu.solve(b);
  for (int j = 0; j < k; ++j) u(basis.cols[j]) = uj(j);
  return u;
}

}  // namespace mslp
