#include "mslp/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mslp {

std::vector<StageTerms> ground_terms(const MslpInstance& in) {
  std::vector<StageTerms> terms(static_cast<std::size_t>(in.T) + 1);
  for (int t = 1; t <= in.T; ++t) {
    const auto& sup = in.support[static_cast<std::size_t>(t)];
    for (std::size_t j = 0; j < sup.size(); ++j)
      terms[static_cast<std::size_t>(t)].push_back(
          {in.prob[static_cast<std::size_t>(t)][j], &sup[j], nullptr});
  }
  return terms;
}

namespace {

struct TreeNode {
  int stage = 0;
  const Observation* obs = nullptr;  // null at the queried root
  double prob = 1.0;
  int parent = -1;
  int uoff = 0;
};

}  // namespace

TreeValue solve_extensive(const MslpInstance& in, int t, int obs, const Eigen::VectorXd& x,
                          const std::vector<StageTerms>& terms, long path_cap) {
  long paths = 1;
  for (int s = t + 1; s <= in.T; ++s) {
    paths *= static_cast<long>(terms[static_cast<std::size_t>(s)].size());
    if (paths > path_cap)
      throw std::runtime_error("path count " + std::to_string(paths) + " exceeds cap " +
                               std::to_string(path_cap));
  }

  // enumerate the tree and assign decision-block offsets
  std::vector<TreeNode> nodes;
  nodes.push_back({t, nullptr, 1.0, -1, 0});
  int nvar = in.stages[static_cast<std::size_t>(t)].nu;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    int s = nodes[i].stage;
    if (s == in.T) continue;
    for (const FutureTerm& f : terms[static_cast<std::size_t>(s) + 1]) {
      nodes.push_back({s + 1, f.obs, nodes[i].prob * f.weight, static_cast<int>(i), nvar});
      nvar += in.stages[static_cast<std::size_t>(s) + 1].nu;
    }
  }

  // substituted state of each node, affine in the stacked decisions
  std::vector<Eigen::VectorXd> xconst(nodes.size());
  std::vector<Eigen::MatrixXd> xlin(nodes.size());
  xconst[0] = x;
  xlin[0] = Eigen::MatrixXd::Zero(x.size(), nvar);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const TreeNode& nd = nodes[i];
    const TreeNode& par = nodes[static_cast<std::size_t>(nd.parent)];
    const Observation& o = *nd.obs;
    xconst[i] = o.a + o.A * xconst[static_cast<std::size_t>(nd.parent)];
    xlin[i] = o.A * xlin[static_cast<std::size_t>(nd.parent)];
    xlin[i].middleCols(par.uoff, in.stages[static_cast<std::size_t>(par.stage)].nu) += o.B;
  }

  int mrows = 0;
  for (const TreeNode& nd : nodes) mrows += in.stages[static_cast<std::size_t>(nd.stage)].m;

  LpProblem p;
  p.c = Eigen::VectorXd::Zero(nvar);
  p.M = Eigen::MatrixXd::Zero(mrows, nvar);
  p.r.resize(mrows);
  double fixed = 0.0;
  int row = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& nd = nodes[i];
    const StageTemplate& st = in.stages[static_cast<std::size_t>(nd.stage)];
    bool over = nd.obs != nullptr && nd.obs->has_rhs;
    const Eigen::VectorXd& b = i == 0 ? stage_b(in, t, obs) : (over ? nd.obs->b : st.b);
    const Eigen::MatrixXd& C = i == 0 ? stage_C(in, t, obs) : (over ? nd.obs->C : st.C);
    // D u + C x(u) <= b  with x(u) = xconst + xlin u
    p.M.middleRows(row, st.m) = C * xlin[i];
    p.M.block(row, nd.uoff, st.m, st.nu) += st.D;
    p.r.segment(row, st.m) = b - C * xconst[i];
    row += st.m;
    fixed += nd.prob * (st.c.dot(xconst[i]) + st.cost_shift);
    p.c += nd.prob * (xlin[i].transpose() * st.c);
    p.c.segment(nd.uoff, st.nu) += nd.prob * st.d;
  }

  LpSolution sol = p.M.rows() > 4 * p.M.cols() + 32 ? solve_lp_via_dual(p) : solve_lp(p);
  TreeValue out;
  out.status = sol.status;
  out.paths = paths;
  if (sol.status == SolveStatus::Optimal) {
    out.value = fixed + sol.objective;
    out.u0 = sol.primal.head(in.stages[static_cast<std::size_t>(t)].nu);
  }
  return out;
}

double one_step_value(const MslpInstance& in, int t, int obs, const Eigen::VectorXd& x,
                      const StageTerms& future) {
  StageProblem sp = build_stage(in, t, obs, x, future);
  StageSolution sol = solve_stage(in, t, obs, x, sp, future);
  if (sol.status != SolveStatus::Optimal) throw std::runtime_error("one-step evaluation failed");
  return sol.value;
}

PolicyEvalReport evaluate_policy(const MslpInstance& in, const Policy& policy, int n_rollouts,
                                 FiniteSupportSource& source) {
  PolicyEvalReport rep;
  rep.violations.assign(static_cast<std::size_t>(in.T) + 1, 0);
  double sum = 0.0;
  double sumsq = 0.0;
  for (int r = 0; r < n_rollouts; ++r) {
    SamplePath path = source.next();
    Eigen::VectorXd x = in.x0;
    int cur = -1;
    double cost = 0.0;
    bool ok = true;
    for (int t = 0; t <= in.T; ++t) {
      const StageTemplate& st = in.stages[static_cast<std::size_t>(t)];
      Eigen::VectorXd u = policy(t, cur, x);
      bool feasible = u.size() == st.nu && u.minCoeff() >= -1e-9 &&
                      (st.D * u - (stage_b(in, t, cur) - stage_C(in, t, cur) * x)).maxCoeff() <= 1e-6;
      if (!feasible) {
        ++rep.violations[static_cast<std::size_t>(t)];
        ok = false;
        break;
      }
      cost += st.c.dot(x) + st.cost_shift + st.d.dot(u);
      if (t < in.T) {
        cur = path.obs[static_cast<std::size_t>(t) + 1];
        x = apply_dynamics(x, in.support[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(cur)], u);
      }
    }
    if (!ok) {
      ++rep.discarded;
      continue;
    }
    ++rep.rollouts;
    sum += cost;
    sumsq += cost * cost;
  }
  if (rep.rollouts > 0) {
    rep.mean = sum / rep.rollouts;
    if (rep.rollouts > 1) {
      double var = (sumsq - sum * sum / rep.rollouts) / (rep.rollouts - 1);
      rep.std_error = std::sqrt(std::max(0.0, var)) / std::sqrt(static_cast<double>(rep.rollouts));
    }
  }
  return rep;
}

}  // namespace mslp
