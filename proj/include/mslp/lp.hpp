#ifndef MSLP_LP_HPP
#define MSLP_LP_HPP

// Dense LP/QP engine used by every stage subproblem.
//
// Canonical problem shape:   min <c,z>  s.t.  M z <= r,  z >= 0.
// The QP adds a proximal term (sigma/2)*|z_head - center|^2 on the leading
// variables (epigraph variables carry no curvature).
//
// Duals follow the convention  max <r,y> s.t. M'y <= c, y <= 0:  the returned
// dual vector is <= 0 at optimality and <r,dual> equals the primal objective.

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace mslp {

// Solver tolerances. The stage problems are desk-scale, so these are absolute
// up to a mild scaling by the data magnitude inside the solver.
inline constexpr double feas_tol = 1e-8;
inline constexpr double comp_tol = 1e-8;
inline constexpr double obj_tol = 1e-7;
inline constexpr double pivot_tol = 1e-10;
inline constexpr double kkt_tol = 1e-7;

// Dantzig pricing switches to Bland's rule after this many consecutive
// non-improving pivots (anti-cycling).
inline constexpr int stall_threshold = 50;

enum class SolveStatus { Optimal, Infeasible, Unbounded };

// Identity of an optimal vertex: the tight inequality rows together with the
// basic (nonzero-eligible) columns. |rows| == |cols| always, and the submatrix
// M[rows, cols] is nonsingular. Both sets are kept sorted; two bases are equal
// iff both sorted sets are equal.
//
// solve_qp reuses the struct with a different reading: rows = active
// inequality rows, cols = variables pinned at their lower bound 0. That
// encoding is a working set, not a vertex; it must not be fed to
// basis_reconstruct.
struct Basis {
  std::vector<int> rows;
  std::vector<int> cols;
  bool operator==(const Basis&) const = default;
};

struct LpProblem {
  Eigen::VectorXd c;  // length n
  Eigen::MatrixXd M;  // m x n
  Eigen::VectorXd r;  // length m
};

// min (sigma/2)|z[0:prox_dim] - center|^2 + <c,z>  over the LP region.
// prox_dim = center.size(); trailing variables are purely linear.
struct QpProblem {
  LpProblem lp;
  Eigen::VectorXd center;
  double sigma = 1.0;
};

struct LpSolution {
  SolveStatus status = SolveStatus::Optimal;
  Eigen::VectorXd primal;
  Eigen::VectorXd dual;  // per row of M, <= 0 at optimality
  double objective = 0.0;
  Basis basis;
  int iterations = 0;
};

struct solver_error : std::runtime_error {
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

// Singular basis carries its identity so the caller can drop it from a pool.
struct singular_basis_error : solver_error {
  Basis basis;
  singular_basis_error(const std::string& what, Basis b)
      : solver_error(what), basis(std::move(b)) {}
};

// Two-phase dense revised simplex. Statuses are returned, never thrown;
// numerical breakdown (singular working basis) throws solver_error.
LpSolution solve_lp(const LpProblem& p);

// Primal active-set method for the convex QP. Zero-curvature directions with
// negative gradient are followed to the nearest blocking constraint like
// simplex rays. warm, if given, seeds the initial working set (stale entries
// are dropped); start, if given and feasible, skips the phase-1 LP.
LpSolution solve_qp(const QpProblem& p, const Basis* warm = nullptr,
                    const Eigen::VectorXd* start = nullptr);

// Solves min <c,z> s.t. Mz <= r, z >= 0 through its explicit dual
// (useful when m >> n: the dual simplex basis has size n). The returned
// primal/dual/objective refer to the original problem; the basis field is
// empty and must not be fed to basis_reconstruct.
LpSolution solve_lp_via_dual(const LpProblem& p);

// Applies the reconstruction map of a stored basis: solves
// M[rows, cols] * u[cols] = rhs[rows], zero elsewhere. Throws
// singular_basis_error when the submatrix is singular within pivot_tol.
Eigen::VectorXd basis_reconstruct(const Basis& basis, const Eigen::MatrixXd& M,
                                  const Eigen::VectorXd& rhs);

}  // namespace mslp

#endif
