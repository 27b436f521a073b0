#ifndef MSLP_SDDP_HPP
#define MSLP_SDDP_HPP

// Nested decomposition on the known finite support: forward simulation of
// candidate trajectories, backward dual passes over every observation, and an
// append-only cut store per stage. Cuts for a stage with random rhs are keyed
// by observation (a dual vector prices that observation's rhs); with a
// deterministic rhs all observations share one list.

#include <cstdint>
#include <vector>

#include "mslp/instance.hpp"
#include "mslp/oracle.hpp"
#include "mslp/stage.hpp"

namespace mslp {

struct CutPools {
  // at[t]: size 1 when stage t rhs is deterministic, else one list per omega
  std::vector<std::vector<std::vector<Piece>>> at;

  static CutPools make(const MslpInstance& in);
  const std::vector<Piece>& pieces_for(int t, int omega) const;
  std::vector<Piece>& pieces_for(int t, int omega);
  long total_cuts() const;
};

// expectation terms over the stage-t support, wired to the pools' cut lists
StageTerms cut_terms(const MslpInstance& in, const CutPools& pools, int t);

// distinct states entering each stage (index t = 1..T), exact-byte dedup
using Trajectories = std::vector<std::vector<Eigen::VectorXd>>;

struct ForwardResult {
  Eigen::VectorXd u0;
  double lower_bound = 0.0;  // root problem value under the current cuts
  Trajectories points;
};

// n_paths = 0 sweeps the whole scenario tree; otherwise that many sampled
// paths drawn from (seed, iteration). Throws on an infeasible stage LP.
ForwardResult sddp_forward(const MslpInstance& in, const CutPools& pools, int n_paths,
                           std::uint64_t seed, int iteration);

// Backward dual pass: stages T..1, every trajectory point, every omega; each
// subproblem dual becomes one cut appended to the stage's store.
void sddp_backward(const MslpInstance& in, CutPools& pools, const Trajectories& points,
                   int iteration);

struct SddpConfig {
  int max_iters = 200;
  double lb_tol = 1e-9;  // lower-bound stabilization threshold
  int patience = 5;      // consecutive small improvements required to stop
  int n_paths = 0;       // 0 = full sweep
  std::uint64_t seed = 0;
};

struct SddpResult {
  Eigen::VectorXd u0;
  std::vector<double> lower_bounds;  // one per iteration, nondecreasing
  std::vector<double> wall_seconds;  // cumulative at the end of each iteration
  CutPools pools;
  int iterations = 0;
  bool converged = false;
};

SddpResult sddp_run(const MslpInstance& in, const SddpConfig& cfg);

}  // namespace mslp

#endif
