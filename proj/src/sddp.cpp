#include "mslp/sddp.hpp"

#include <chrono>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "mslp/process.hpp"

namespace mslp {

CutPools CutPools::make(const MslpInstance& in) {
  CutPools p;
  p.at.resize(static_cast<std::size_t>(in.T) + 1);
  for (int t = 1; t <= in.T; ++t)
    p.at[static_cast<std::size_t>(t)].resize(
        rhs_random(in, t) ? in.support[static_cast<std::size_t>(t)].size() : 1);
  return p;
}

const std::vector<Piece>& CutPools::pieces_for(int t, int omega) const {
  const auto& stage = at[static_cast<std::size_t>(t)];
  return stage.size() == 1 ? stage[0] : stage[static_cast<std::size_t>(omega)];
}

std::vector<Piece>& CutPools::pieces_for(int t, int omega) {
  auto& stage = at[static_cast<std::size_t>(t)];
  return stage.size() == 1 ? stage[0] : stage[static_cast<std::size_t>(omega)];
}

long CutPools::total_cuts() const {
  long n = 0;
  for (const auto& stage : at)
    for (const auto& list : stage) n += static_cast<long>(list.size());
  return n;
}

StageTerms cut_terms(const MslpInstance& in, const CutPools& pools, int t) {
  StageTerms terms;
  const auto& sup = in.support[static_cast<std::size_t>(t)];
  for (std::size_t j = 0; j < sup.size(); ++j)
    terms.push_back({in.prob[static_cast<std::size_t>(t)][j], &sup[j],
                     &pools.pieces_for(t, static_cast<int>(j))});
  return terms;
}

namespace {

[[noreturn]] void recourse_failure(int t, const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << "stage " << t << " subproblem infeasible; complete recourse violated at state (";
  for (long i = 0; i < x.size(); ++i) os << (i > 0 ? ", " : "") << x[i];
  os << ")";
  throw std::runtime_error(os.str());
}

StageSolution solve_node(const MslpInstance& in, const CutPools& pools, int t, int obs,
                         const Eigen::VectorXd& x) {
  StageTerms fut = t < in.T ? cut_terms(in, pools, t + 1) : StageTerms{};
  StageProblem sp = build_stage(in, t, obs, x, fut);
  StageSolution sol = solve_stage(in, t, obs, x, sp, fut);
  if (sol.status == SolveStatus::Infeasible) recourse_failure(t, x);
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error("stage subproblem unbounded; shifted costs required");
  return sol;
}

bool same_bits(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

// decisions already computed this pass, keyed by (state bits, observation)
struct SolveCache {
  std::vector<Eigen::VectorXd> x;
  std::vector<int> obs;
  std::vector<Eigen::VectorXd> u;

  const Eigen::VectorXd* find(const Eigen::VectorXd& xq, int o) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (obs[i] == o && same_bits(x[i], xq)) return &u[i];
    return nullptr;
  }
};

void note_point(Trajectories& points, int t, const Eigen::VectorXd& x) {
  auto& list = points[static_cast<std::size_t>(t)];
  for (const Eigen::VectorXd& p : list)
    if (same_bits(p, x)) return;
  list.push_back(x);
}

}  // namespace

ForwardResult sddp_forward(const MslpInstance& in, const CutPools& pools, int n_paths,
                           std::uint64_t seed, int iteration) {
  ForwardResult out;
  out.points.resize(static_cast<std::size_t>(in.T) + 1);
  StageSolution root = solve_node(in, pools, 0, -1, in.x0);
  out.u0 = root.u;
  out.lower_bound = root.value;

  std::vector<SolveCache> cache(static_cast<std::size_t>(in.T) + 1);
  auto walk = [&](auto&& self, int t, int obs, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& u) -> void {
    if (t == in.T) return;
    auto descend = [&](int next_obs) {
      const Observation& o =
          in.support[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(next_obs)];
      Eigen::VectorXd xn = apply_dynamics(x, o, u);
      note_point(out.points, t + 1, xn);
      const Eigen::VectorXd* cached = cache[static_cast<std::size_t>(t) + 1].find(xn, next_obs);
      Eigen::VectorXd un;
      if (cached != nullptr) {
        un = *cached;
      } else {
        un = solve_node(in, pools, t + 1, next_obs, xn).u;
        cache[static_cast<std::size_t>(t) + 1].x.push_back(xn);
        cache[static_cast<std::size_t>(t) + 1].obs.push_back(next_obs);
        cache[static_cast<std::size_t>(t) + 1].u.push_back(un);
      }
      self(self, t + 1, next_obs, xn, un);
    };
    (void)obs;
    if (n_paths == 0) {
      for (std::size_t j = 0; j < in.support[static_cast<std::size_t>(t) + 1].size(); ++j)
        descend(static_cast<int>(j));
    }
  };

  if (n_paths == 0) {
    walk(walk, 0, -1, in.x0, root.u);
  } else {
    FiniteSupportSource src{&in, seed, 0};
    for (int j = 0; j < n_paths; ++j) {
      SamplePath path = src.path_at((iteration - 1) * n_paths + j + 1);
      Eigen::VectorXd x = in.x0;
      Eigen::VectorXd u = root.u;
      for (int t = 1; t <= in.T; ++t) {
        int o = path.obs[static_cast<std::size_t>(t)];
        x = apply_dynamics(x, in.support[static_cast<std::size_t>(t)][static_cast<std::size_t>(o)], u);
        note_point(out.points, t, x);
        if (t == in.T) break;
        const Eigen::VectorXd* cached = cache[static_cast<std::size_t>(t)].find(x, o);
        if (cached != nullptr) {
          u = *cached;
        } else {
          u = solve_node(in, pools, t, o, x).u;
          cache[static_cast<std::size_t>(t)].x.push_back(x);
          cache[static_cast<std::size_t>(t)].obs.push_back(o);
          cache[static_cast<std::size_t>(t)].u.push_back(u);
        }
      }
    }
  }
  return out;
}

void sddp_backward(const MslpInstance& in, CutPools& pools, const Trajectories& points,
                   int iteration) {
  for (int t = in.T; t >= 1; --t) {
    for (const Eigen::VectorXd& x : points[static_cast<std::size_t>(t)]) {
      for (std::size_t j = 0; j < in.support[static_cast<std::size_t>(t)].size(); ++j) {
        StageSolution sol = solve_node(in, pools, t, static_cast<int>(j), x);
        Piece cut;
        cut.beta = sol.g;
        cut.alpha = sol.value - sol.g.dot(x);
        cut.origin = iteration;
        pools.pieces_for(t, static_cast<int>(j)).push_back(std::move(cut));
      }
    }
  }
}

SddpResult sddp_run(const MslpInstance& in, const SddpConfig& cfg) {
  SddpResult res;
  res.pools = CutPools::make(in);
  auto start = std::chrono::steady_clock::now();
  int stall = 0;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    ForwardResult fwd = sddp_forward(in, res.pools, cfg.n_paths, cfg.seed, k);
    res.u0 = fwd.u0;
    res.lower_bounds.push_back(fwd.lower_bound);
    res.iterations = k;
    sddp_backward(in, res.pools, fwd.points, k);
    res.wall_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    std::size_t n = res.lower_bounds.size();
    if (n >= 2 && res.lower_bounds[n - 1] - res.lower_bounds[n - 2] < cfg.lb_tol)
      ++stall;
    else
      stall = 0;
    if (stall >= cfg.patience) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace mslp
