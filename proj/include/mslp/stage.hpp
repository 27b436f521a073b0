#ifndef MSLP_STAGE_HPP
#define MSLP_STAGE_HPP

// One-stage subproblem assembly shared by the solvers. A stage problem at
// (t, x, obs) minimizes <d,u> plus a weighted sum of epigraph variables, one
// per next-stage observation, each bounded below by affine pieces of the next
// state. theta >= 0 encodes the always-valid zero piece (value functions are
// nonnegative after the shift preprocessing).

#include <vector>

#include "mslp/instance.hpp"
#include "mslp/lp.hpp"

namespace mslp {

// lower bounding piece h(x) >= alpha + <beta, x>
struct Piece {
  double alpha = 0.0;
  Eigen::VectorXd beta;
  int origin = 0;  // iteration that created it
};

// one expectation term: weight, dynamics into the next stage, applicable pieces
struct FutureTerm {
  double weight = 0.0;
  const Observation* obs = nullptr;
  const std::vector<Piece>* pieces = nullptr;  // null means zero approximation
};

// variables z = [u; theta], one theta per future term
struct StageProblem {
  LpProblem lp;
  int t = 0;
  int nu = 0;
  double fixed = 0.0;                     // <c_t, x> + cost shift, outside the LP
  std::vector<int> term_of_row;           // for rows >= m: owning future term
  std::vector<int> piece_of_row;          //               piece index inside it
};

// cost overrides the stage u-cost d_t when given (theta weights unchanged)
StageProblem build_stage(const MslpInstance& in, int t, int obs, const Eigen::VectorXd& x,
                         const std::vector<FutureTerm>& future,
                         const Eigen::VectorXd* cost = nullptr);

struct StageSolution {
  SolveStatus status = SolveStatus::Optimal;
  Eigen::VectorXd u;
  Eigen::VectorXd theta;
  Eigen::VectorXd pi;  // duals of the m stage rows, <= 0
  double value = 0.0;  // fixed + lp objective
  Eigen::VectorXd g;   // subgradient of the stage value in x
  Basis basis;
  int iterations = 0;
};

// Solves the stage LP, picking the dual route when rows dwarf columns, and
// assembles the subgradient g = c - C'pi + sum of piece-row weights A'beta.
StageSolution solve_stage(const MslpInstance& in, int t, int obs, const Eigen::VectorXd& x,
                          const StageProblem& sp, const std::vector<FutureTerm>& future);

// same unpacking for an externally solved stage problem (e.g. the prox QP)
StageSolution unpack_stage(const MslpInstance& in, int t, int obs, const StageProblem& sp,
                           const std::vector<FutureTerm>& future, const LpSolution& sol);

// max(0, max_j alpha_j + <beta_j, x>); -1 from argmax means the zero piece
double piece_value(const std::vector<Piece>& pieces, const Eigen::VectorXd& x);
int piece_argmax(const std::vector<Piece>& pieces, const Eigen::VectorXd& x);

}  // namespace mslp

#endif
