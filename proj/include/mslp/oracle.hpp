#ifndef MSLP_ORACLE_HPP
#define MSLP_ORACLE_HPP

// Ground-truth machinery kept independent of the iterative solvers: the
// deterministic-equivalent tree LP over an explicit support, a one-step
// evaluator against a supplied future approximation, and Monte-Carlo policy
// rollouts.

#include <functional>
#include <vector>

#include "mslp/instance.hpp"
#include "mslp/process.hpp"
#include "mslp/stage.hpp"

namespace mslp {

// expectation structure entering one stage: (weight, dynamics, pieces) terms;
// index runs over the stage's support or over a pool snapshot
using StageTerms = std::vector<FutureTerm>;

// terms straight from the ground-truth support with true probabilities;
// element [t] describes the expectation over stage-t observations (t >= 1)
std::vector<StageTerms> ground_terms(const MslpInstance& in);

struct TreeValue {
  SolveStatus status = SolveStatus::Optimal;
  double value = 0.0;
  Eigen::VectorXd u0;  // decision at the queried node
  long paths = 0;
};

inline constexpr long default_path_cap = 10000;

// Exact value of the remaining horizon from (t, x, obs): enumerates every
// path of terms[t+1..T], substitutes the dynamics, and solves one flat LP.
// Piece lists inside the terms are ignored; the expansion reaches the
// terminal stage. Throws when the path count exceeds the cap.
TreeValue solve_extensive(const MslpInstance& in, int t, int obs, const Eigen::VectorXd& x,
                          const std::vector<StageTerms>& terms, long path_cap = default_path_cap);

// Value of the one-step problem at (t, x, obs) with the future expressed by
// the given terms' pieces; empty terms at the terminal stage.
double one_step_value(const MslpInstance& in, int t, int obs, const Eigen::VectorXd& x,
                      const StageTerms& future);

using Policy = std::function<Eigen::VectorXd(int t, int obs, const Eigen::VectorXd& x)>;

struct PolicyEvalReport {
  double mean = 0.0;
  double std_error = 0.0;  // sample stdev / sqrt(rollouts)
  int rollouts = 0;        // completed rollouts entering the mean
  int discarded = 0;
  std::vector<int> violations;  // infeasible decisions seen, per stage
};

// True-cost rollouts on fresh paths from the source; an infeasible decision
// discards the rollout and is counted against its stage.
PolicyEvalReport evaluate_policy(const MslpInstance& in, const Policy& policy, int n_rollouts,
                                 FiniteSupportSource& source);

}  // namespace mslp

#endif
