#ifndef MSLP_SDLP_HPP
#define MSLP_SDLP_HPP

// Sequential-sampling solver. Each iteration draws one fresh sample path,
// simulates regularized decisions along it, and rebuilds the value function
// approximations backward in time from the observations seen so far. A piece
// generated at iteration i is worth (i/k)^{T-t} of itself by iteration k;
// that discount keeps every stored piece a valid lower bound while the
// empirical stage distributions drift under new draws.

#include <cstdint>
#include <vector>

#include "mslp/instance.hpp"
#include "mslp/lp.hpp"
#include "mslp/oracle.hpp"
#include "mslp/process.hpp"
#include "mslp/stage.hpp"

namespace mslp {

// affine lower bounds alpha(w) + <beta(w), x> with one coefficient pair per
// pooled observation known at creation; observations pooled later are not
// covered and the piece does not bid for them
struct Minorant {
  int origin = 0;          // iteration that created the piece
  bool incumbent = false;  // formed at the incumbent trajectory
  double scale = 1.0;      // (origin/k)^{T-t}, refreshed by scale_pool
  std::vector<double> alpha;             // [pool index]
  std::vector<Eigen::VectorXd> beta;     // [pool index], length nx_t
};

struct MinorantPool {
  int t = 0;
  std::vector<Minorant> pieces;

  // max(0, best scaled piece) at x under pooled observation j; j = -1 or an
  // uncovered index falls through to the zero piece
  double value(int j, const Eigen::VectorXd& x) const;
  // piece index attaining value (ties -> newest); -1 means the zero piece
  int argmax(int j, const Eigen::VectorXd& x) const;
};

// scaled pieces applicable to pooled observation j, ready for build_stage
std::vector<Piece> render_pieces(const MinorantPool& pool, int j);

// stored dual vertex, frozen together with the averaged-future data of the
// stage problem it was solved under
struct DualVertex {
  int origin = 0;
  Eigen::VectorXd pi;        // row duals, <= 0
  double alpha_bar = 0.0;    // constant part of the averaged future
  Eigen::VectorXd beta_bar;  // state-linear part, length nx_t
  Eigen::VectorXd rho_bar;   // control cost it was solved with, length nu_t
};

struct DualVertexPool {
  int t = 0;
  std::vector<DualVertex> entries;
};

// deduplicated vertex identities of the averaged stage problems; the
// reconstruction map of any entry yields a candidate incumbent decision
struct BasisPool {
  int t = 0;
  std::vector<Basis> entries;
  std::vector<int> origin;  // parallel to entries
};

// how argmax-generated coefficients carry the immediate stage cost c_t and
// shift. Scaling them with everything else is the only choice that both
// reduces to the exact-solve coefficients at origin == k and provably keeps
// every piece a lower bound; the alternatives exist for comparison runs.
// AddUnscaled appends them at full weight (overshoots when d_t can earn),
// Omit drops them from argmax pieces entirely.
enum class CostConvention { Scale, AddUnscaled, Omit };

struct SdlpConfig {
  int iterations = 2000;
  double sigma = 1.0;   // proximal weight, >= 1
  double q = 0.2;       // incumbent acceptance fraction, in (0,1)
  int max_pieces = -1;  // per-stage piece cap: -1 = nu_t + 3, 0 = unlimited
  CostConvention argmax_cost = CostConvention::Scale;
  std::uint64_t seed = 0;
};

struct SdlpTraceRow {
  int k = 0;
  double f_incumbent = 0.0;  // approximation value at the end-of-iteration incumbent
  double f_candidate = 0.0;  // and at the iteration's candidate
  double step_norm = 0.0;    // |u0 - incumbent| at the root solve
  bool incumbent_changed = false;
  std::vector<int> observed_sizes;  // pooled observations per stage, t = 1..T
  double wall_seconds = 0.0;        // cumulative
};

struct SdlpRunState {
  const MslpInstance* in = nullptr;
  SdlpConfig cfg;
  int k = 0;  // completed iterations

  Eigen::VectorXd u0_hat;  // root incumbent
  Eigen::VectorXd u0;      // latest root candidate

  std::vector<MinorantPool> minorants;    // [t], t >= 1
  std::vector<DualVertexPool> duals;      // [t], t >= 1
  std::vector<BasisPool> bases;           // [t], 1 <= t <= T-1
  std::vector<ObservationPool> observed;  // [t], t >= 1

  // latest iteration's path and trajectories; states and decisions at [t]
  SamplePath path;
  std::vector<Eigen::VectorXd> x_hat, u_hat;    // incumbent
  std::vector<Eigen::VectorXd> x_cand, u_cand;  // candidate
  StageSolution terminal_cand;  // terminal solve at the candidate state

  // root approximation values before (f_prev_*) and after (f_root_*) the
  // backward updates, at the candidate and the pre-update incumbent
  double f_prev_cand = 0.0, f_prev_inc = 0.0;
  double f_root_cand = 0.0, f_root_inc = 0.0;

  bool incumbent_changed = false;
  int incumbent_changes = 0;
  int bfp_fallbacks = 0;         // prediction stages served by a fresh LP
  int descent_violations = 0;    // root solves breaking the descent inequality
  double descent_gap_max = 0.0;  // worst observed f-drop + |step|^2 excess
  double wall_seconds = 0.0;
  std::vector<SdlpTraceRow> trace;
};

// myopic root minimizer as the initial incumbent; pools empty
SdlpRunState sdlp_init(const MslpInstance& in, const SdlpConfig& cfg);

// stage-t approximation value <c,x> + shift + <d,u> + frequency-weighted pool
// queries at the next states, using the pools in their current state
double objective_value(const SdlpRunState& run, int t, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u);

// expectation terms over the stage-t pool (weights = empirical frequencies);
// store receives the rendered pieces and must outlive the returned terms
StageTerms pool_terms(const SdlpRunState& run, int t, std::vector<std::vector<Piece>>& store);

// stored-piece cap applied after each update (the +1 is the protected
// incumbent slot); 0 means unlimited
int piece_capacity(const SdlpRunState& run, int t);

// regularized root solve min f + (sigma/2)|u - incumbent|^2; records the
// candidate, the pre-update f values, and the descent bookkeeping
void solve_root(SdlpRunState& run);

// basis-policy decision at one stage state: reconstruct every pooled basis,
// keep the feasible ones, take the approximation-value argmin (ties -> older
// basis); no feasible basis falls back to a fresh stage LP whose basis joins
// the pool. Also the rollout policy for out-of-sample evaluation.
Eigen::VectorXd bfp_decision(SdlpRunState& run, int t, int obs, const Eigen::VectorXd& x, int k);

// incumbent trajectory by the basis policy at every non-terminal stage
void prediction_pass(SdlpRunState& run, const SamplePath& path);

// candidate trajectory: stage QPs centered at the incumbents, terminal LP
void optimization_pass(SdlpRunState& run, const SamplePath& path);

// averaged future of stage t from the maximizing stage-(t+1) pieces at the
// candidate next states: rho_bar = d_t + sum w B'beta, beta_bar = sum w
// A'beta, alpha_bar = sum w (alpha + <beta, a>)
struct FutureAggregate {
  double alpha_bar = 0.0;
  Eigen::VectorXd beta_bar;
  Eigen::VectorXd rho_bar;
};
FutureAggregate aggregate_future(const SdlpRunState& run, int t);

// best stored dual at state x under the (origin/k)^{horizon-t} discount,
// returned as piece coefficients (trivial zeros when the pool is empty); an
// origin == k pick under Scale matches the coefficients of an exact solve
struct ScaledPick {
  int pick = -1;  // index into the dual pool
  double alpha = 0.0;
  Eigen::VectorXd beta;
};
ScaledPick pick_scaled_dual(const DualVertexPool& duals, int horizon, int k,
                            const StageTemplate& st, const Eigen::VectorXd& b,
                            const Eigen::MatrixXd& C, const Eigen::VectorXd& x,
                            CostConvention conv);

// terminal pieces from exact solves at the candidate and incumbent terminal
// states, argmax coefficients for the other pooled observations
void terminal_update(SdlpRunState& run);

// one backward step at a non-terminal stage: solve the averaged stage problem
// at the candidate and incumbent states, store duals and bases, append both
// pieces, rescale and truncate the pool
void nonterminal_update(SdlpRunState& run, int t);

// refresh scale = (origin/k)^{horizon-t} on pieces from earlier iterations
void scale_pool(MinorantPool& pool, int horizon, int k);

// accept the candidate as the new incumbent when the updated approximation
// confirms at least a q-fraction of the improvement predicted before the
// backward updates
bool root_incumbent_test(SdlpRunState& run);

// one full iteration: root solve, forward passes along the path, observation
// recording, backward updates, incumbent test
void sdlp_iterate_path(SdlpRunState& run, const SamplePath& path);
void sdlp_iterate(SdlpRunState& run, FiniteSupportSource& source);

SdlpRunState sdlp_run(const MslpInstance& in, const SdlpConfig& cfg);

}  // namespace mslp

#endif
