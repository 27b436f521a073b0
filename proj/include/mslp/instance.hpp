#ifndef MSLP_INSTANCE_HPP
#define MSLP_INSTANCE_HPP

// Multistage stochastic LP in state-variable form.
//
// Stage t carries endogenous state x_t and decision u_t >= 0 with
//   D_t u_t <= b_t - C_t x_t,
// stage cost <c_t,x_t> + <d_t,u_t> + cost_shift_t, and dynamics
//   x_{t+1} = a_{t+1} + A_{t+1} x_t + B_{t+1} u_t
// driven by the stage-(t+1) observation. The exogenous process is stagewise
// independent with finite support; (b_t, C_t) are deterministic unless an
// observation overrides them. Terminal cost-to-go is identically zero.

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mslp {

struct model_error : std::runtime_error {
  explicit model_error(const std::string& what) : std::runtime_error(what) {}
};

struct StageTemplate {
  int nx = 0, nu = 0, m = 0;
  Eigen::VectorXd c;  // cost on x_t
  Eigen::VectorXd d;  // cost on u_t
  Eigen::MatrixXd D;  // m x nu
  Eigen::VectorXd b;  // deterministic rhs
  Eigen::MatrixXd C;  // m x nx
  double cost_shift = 0.0;  // constant added to the stage cost (see shift_nonneg)
};

// One realization of the stage-t exogenous data, t >= 1. Dynamics are always
// per-observation; the rhs pair (b, C) only when has_rhs is set. Identity is
// bit-exact content equality so that repeated draws pool by count.
struct Observation {
  int t = 0;
  Eigen::VectorXd a;  // nx_t
  Eigen::MatrixXd A;  // nx_t x nx_{t-1}
  Eigen::MatrixXd B;  // nx_t x nu_{t-1}
  bool has_rhs = false;
  Eigen::VectorXd b;  // m_t, only when has_rhs
  Eigen::MatrixXd C;  // m_t x nx_t, only when has_rhs

  std::uint64_t key() const;  // FNV-1a over dims and raw bytes
};

bool same_content(const Observation& x, const Observation& y);

struct MslpInstance {
  std::string name;
  int T = 0;
  Eigen::VectorXd x0;
  std::vector<StageTemplate> stages;              // 0..T
  std::vector<std::vector<Observation>> support;  // [t] for t>=1; [0] empty
  std::vector<std::vector<double>> prob;          // parallel to support
};

struct State {
  int t = 0;
  Eigen::VectorXd x;
  int obs = -1;  // index into support[t]; -1 at the root
};

// Effective rhs data for (stage, observation index); obs = -1 means the
// template values (mandatory at the root).
const Eigen::VectorXd& stage_b(const MslpInstance& in, int t, int obs);
const Eigen::MatrixXd& stage_C(const MslpInstance& in, int t, int obs);

// True when any stage-t observation overrides (b, C); such stages make the
// feasible region itself random.
bool rhs_random(const MslpInstance& in, int t);

Eigen::VectorXd apply_dynamics(const Eigen::VectorXd& x, const Observation& o,
                               const Eigen::VectorXd& u);

// Adds per-stage constants until every stage cost is certifiably >= 0 on a
// box relaxation of the reachable sets, so all value functions are >= 0.
// Throws model_error when the relaxation is unbounded below. Idempotent.
struct ShiftReport {
  std::vector<double> per_stage;
  double total = 0.0;
};
ShiftReport shift_nonneg(MslpInstance& in);

// Assumption checks: boundedness of the root feasible set (per-coordinate
// max LPs), recourse-matrix row rank, support/probability sanity, and a
// probabilistic complete-recourse probe over random feasible trajectories.
// Returns human-readable violations; empty means the instance passed.
std::vector<std::string> validate(const MslpInstance& in, int probe_checks = 200,
                                  std::uint64_t seed = 0);

}  // namespace mslp

#endif
