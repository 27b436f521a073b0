// Acceptance gate for the solver suite: ten pinned criteria, one printed
// line each, nonzero exit when any fails. Everything is judged against
// independent references (extensive-form oracle, brute-force LP/QP oracles,
// closed-form algebra) at desk scale, with tolerances fixed here before the
// runs they judge.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "desk3.hpp"
#include "lp_oracles.hpp"
#include "mslp/instance.hpp"
#include "mslp/io.hpp"
#include "mslp/lp.hpp"
#include "mslp/oracle.hpp"
#include "mslp/process.hpp"
#include "mslp/sddp.hpp"
#include "mslp/sdlp.hpp"
#include "mslp/stage.hpp"

using namespace mslp;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances and budgets ----
constexpr double tol_oracle_match = 1e-8;    // 1: extensive vs chained value
constexpr double wall_oracle = 1.0;          // 1: seconds
constexpr double tol_cut_rel = 1e-6;         // 2: relative bound gap
constexpr double tol_bound_drop = 1e-9;      // 2: nondecreasing slack
constexpr int cut_iter_cap = 200;            // 2
constexpr double wall_cut = 30.0;            // 2: seconds
constexpr double tol_seed_gap = 0.01;        // 3: relative true-objective gap
constexpr int seed_hits_needed = 4;          // 3: of 5 seeds
constexpr double tol_trace_range = 0.01;     // 3: last-100 range over optimum
constexpr double wall_seq = 300.0;           // 3: seconds, all seeds
constexpr double tol_upper = 1e-6;           // 4: h <= one-step reference
constexpr double tol_monotone = 1e-9;        // 4: scaled between-iteration drop
constexpr double tol_scale = 1e-12;          // 5
constexpr double tol_incumbent_feas = 1e-8;  // 6: emitted decision residual
constexpr double tol_affine = 1e-8;          // 6: reconstruction affinity
constexpr double tol_argmin = 1e-9;          // 6: pool argmin slack
constexpr double tol_gap = 1e-7;             // 8: LP duality gap
constexpr double tol_basis_rt = 1e-9;        // 8: basis round-trip
constexpr double tol_qp = 1e-6;              // 8: QP vs projected gradient
constexpr double stability_growth = 2.0;     // 9: ratio cap as steps shrink

struct Criterion {
  bool pass = false;
  std::string text;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// descent accounting pooled over every sequential-sampling run in this binary
long g_root_solves = 0;
long g_descent_violations = 0;
double g_descent_gap_max = 0.0;
int g_runs = 0;

void absorb(const SdlpRunState& run) {
  g_root_solves += run.k;
  g_descent_violations += run.descent_violations;
  g_descent_gap_max = std::max(g_descent_gap_max, run.descent_gap_max);
  ++g_runs;
}

// Random reachable states per stage: follow random-cost stage vertices
// through randomly drawn observations. Complete recourse keeps every visited
// stage problem solvable.
std::vector<std::vector<Eigen::VectorXd>> feasible_probes(const MslpInstance& in, int count,
                                                          std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0), sym(-1.0, 1.0);
  std::vector<std::vector<Eigen::VectorXd>> probes(static_cast<std::size_t>(in.T) + 1);
  const StageTerms none;
  for (int rep = 0; rep < count; ++rep) {
    Eigen::VectorXd x = in.x0;
    int prev = -1;
    for (int t = 1; t <= in.T; ++t) {
      const StageTemplate& st = in.stages[static_cast<std::size_t>(t) - 1];
      Eigen::VectorXd cr(st.nu);
      for (int j = 0; j < st.nu; ++j) cr(j) = sym(gen);
      StageProblem sp = build_stage(in, t - 1, prev, x, none, &cr);
      LpSolution sol = solve_lp(sp.lp);
      if (sol.status != SolveStatus::Optimal) {
        // a negative cost direction can be unbounded; the absolute cost is
        // bounded below over the nonnegative controls
        cr = cr.cwiseAbs();
        StageProblem sp2 = build_stage(in, t - 1, prev, x, none, &cr);
        sol = solve_lp(sp2.lp);
        if (sol.status != SolveStatus::Optimal)
          throw std::runtime_error("probe trajectory hit an unsolvable stage");
      }
      const Eigen::VectorXd u = sol.primal.head(st.nu);
      const auto nsup = in.support[static_cast<std::size_t>(t)].size();
      const auto j = std::min(nsup - 1, static_cast<std::size_t>(u01(gen) * nsup));
      x = apply_dynamics(x, in.support[static_cast<std::size_t>(t)][j], u);
      prev = static_cast<int>(j);
      probes[static_cast<std::size_t>(t)].push_back(x);
    }
  }
  return probes;
}

// Deterministic equivalent of a singleton-support instance as one LP over the
// stacked controls, states substituted through the dynamics. Assembled here,
// independently of the oracle's own path expansion.
double flat_deterministic_value(const MslpInstance& in) {
  int nz = 0;
  std::vector<int> off(in.stages.size(), 0);
  for (std::size_t t = 0; t < in.stages.size(); ++t) {
    off[t] = nz;
    nz += in.stages[t].nu;
  }
  Eigen::VectorXd lin = Eigen::VectorXd::Zero(nz);
  double fixed = 0.0;
  Eigen::VectorXd p = in.x0;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(in.x0.size(), nz);
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (int t = 0; t <= in.T; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    const StageTemplate& st = in.stages[ut];
    const int obs = t == 0 ? -1 : 0;
    const Eigen::VectorXd& b = stage_b(in, t, obs);
    const Eigen::MatrixXd& C = stage_C(in, t, obs);
    const Eigen::MatrixXd block = C * P;
    for (int i = 0; i < st.m; ++i) {
      Eigen::VectorXd row = block.row(i).transpose();
      row.segment(off[ut], st.nu) += st.D.row(i).transpose();
      rows.push_back(row);
      rhs.push_back(b(i) - C.row(i).dot(p));
    }
    fixed += st.c.dot(p) + st.cost_shift;
    lin += P.transpose() * st.c;
    lin.segment(off[ut], st.nu) += st.d;
    if (t < in.T) {
      const Observation& o = in.support[ut + 1][0];
      Eigen::MatrixXd Pn = o.A * P;
      Pn.middleCols(off[ut], st.nu) += o.B;
      p = o.a + o.A * p;
      P = std::move(Pn);
    }
  }
  LpProblem lp;
  lp.c = lin;
  lp.M.resize(static_cast<Eigen::Index>(rows.size()), nz);
  lp.r.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lp.M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    lp.r(static_cast<Eigen::Index>(i)) = rhs[i];
  }
  const LpSolution sol = solve_lp(lp);
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error("flat deterministic equivalent not optimal");
  return fixed + sol.objective;
}

// 1. On a deterministic instance the extensive tree collapses to the chained
// stage LPs: check against an independent stacked-control assembly, and, with
// decoupled controls, against a greedy stage-by-stage chain.
Criterion crit_oracle() {
  const auto t0 = Clock::now();
  MslpInstance det = make_desk3_raw();
  det.name = "desk3-det";
  for (int t = 1; t <= det.T; ++t) {
    det.support[static_cast<std::size_t>(t)].resize(1);
    det.prob[static_cast<std::size_t>(t)] = {1.0};
  }
  const TreeValue ext = solve_extensive(det, 0, -1, det.x0, ground_terms(det));
  const double d1 = std::abs(ext.value - flat_deterministic_value(det));

  MslpInstance dec = det;
  for (int t = 1; t <= dec.T; ++t) dec.support[static_cast<std::size_t>(t)][0].B.setZero();
  const TreeValue ext0 = solve_extensive(dec, 0, -1, dec.x0, ground_terms(dec));
  double greedy = 0.0;
  const StageTerms none;
  Eigen::VectorXd x = dec.x0;
  for (int t = 0; t <= dec.T; ++t) {
    const int obs = t == 0 ? -1 : 0;
    StageProblem sp = build_stage(dec, t, obs, x, none);
    const StageSolution sol = solve_stage(dec, t, obs, x, sp, none);
    if (sol.status != SolveStatus::Optimal) throw std::runtime_error("greedy chain stage failed");
    greedy += sol.value;
    if (t < dec.T) x = apply_dynamics(x, dec.support[static_cast<std::size_t>(t) + 1][0], sol.u);
  }
  const double d2 = std::abs(ext0.value - greedy);
  const double wall = since(t0);

  Criterion c;
  c.pass = d1 <= tol_oracle_match && d2 <= tol_oracle_match && wall < wall_oracle;
  c.text = "1 extensive oracle self-consistency: coupled diff " + fmt(d1) + ", decoupled diff " +
           fmt(d2) + ", " + fmt(wall) + " s";
  return c;
}

// 2. The cut baseline on the full support closes the gap to the oracle value
// with a nondecreasing bound.
Criterion crit_cut() {
  MslpInstance sh = make_desk3();
  const double V = solve_extensive(sh, 0, -1, sh.x0, ground_terms(sh)).value;
  SddpConfig cfg;  // full sweep, default stabilization stop
  cfg.max_iters = cut_iter_cap;
  const SddpResult res = sddp_run(sh, cfg);
  const double rel = std::abs(res.lower_bounds.back() - V) / std::abs(V);
  bool mono = true;
  for (std::size_t i = 0; i + 1 < res.lower_bounds.size(); ++i)
    if (res.lower_bounds[i + 1] < res.lower_bounds[i] - tol_bound_drop) mono = false;
  const double wall = res.wall_seconds.empty() ? 0.0 : res.wall_seconds.back();

  Criterion c;
  c.pass = rel <= tol_cut_rel && mono && res.iterations <= cut_iter_cap && wall < wall_cut;
  c.text = "2 cut baseline exactness: relative gap " + fmt(rel) + ", bound " +
           (mono ? "nondecreasing" : "NOT monotone") + ", " + std::to_string(res.iterations) +
           " iterations, " + fmt(wall) + " s";
  return c;
}

// 3. Sequential sampling lands within 1% of the true optimum on most seeds
// and its incumbent value trace settles.
Criterion crit_seq() {
  const auto t0 = Clock::now();
  const MslpInstance raw = make_desk3_raw();
  MslpInstance sh = make_desk3();
  const double Vraw = solve_extensive(raw, 0, -1, raw.x0, ground_terms(raw)).value;
  const double Vsh = solve_extensive(sh, 0, -1, sh.x0, ground_terms(sh)).value;

  int hits = 0;
  bool ranges_ok = true;
  double worst_gap = 0.0, worst_range = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    SdlpConfig cfg;
    cfg.iterations = 2000;
    cfg.seed = s;
    const SdlpRunState run = sdlp_run(sh, cfg);
    absorb(run);
    const double truev = true_root_value(raw, run.u0_hat);
    const double gap = std::abs(truev - Vraw) / std::abs(Vraw);
    worst_gap = std::max(worst_gap, gap);
    if (gap <= tol_seed_gap) ++hits;
    double lo = run.trace.back().f_incumbent, hi = lo;
    for (std::size_t i = run.trace.size() - 100; i < run.trace.size(); ++i) {
      lo = std::min(lo, run.trace[i].f_incumbent);
      hi = std::max(hi, run.trace[i].f_incumbent);
    }
    worst_range = std::max(worst_range, hi - lo);
    if (!(hi - lo < tol_trace_range * Vsh)) ranges_ok = false;
  }
  const double wall = since(t0);

  Criterion c;
  c.pass = hits >= seed_hits_needed && ranges_ok && wall < wall_seq;
  c.text = "3 sequential-sampling convergence: " + std::to_string(hits) +
           "/5 seeds within 1% (worst gap " + fmt(worst_gap) + "), last-100 range worst " +
           fmt(worst_range) + " (cap " + fmt(tol_trace_range * Vsh) + "), " + fmt(wall) + " s";
  return c;
}

struct PoolShot {
  std::vector<MinorantPool> minor;
  std::vector<ObservationPool> obs;
};

// 4. Approximation invariants at iteration checkpoints: each pooled stage
// approximation stays below its own one-step reference, never falls faster
// than the between-iteration scaling factor allows, and the terminal pool is
// pointwise monotone below the exact terminal LP.
Criterion crit_invariants() {
  MslpInstance sh = make_desk3();
  const auto probes = feasible_probes(sh, 20, 404);

  SdlpConfig cfg;
  cfg.iterations = 500;
  cfg.seed = 0;
  cfg.max_pieces = 0;  // unlimited pool: the invariants cover every piece
  SdlpRunState run = sdlp_init(sh, cfg);
  FiniteSupportSource src{&sh, cfg.seed, 0};
  const std::vector<int> marks = {9, 10, 49, 50, 99, 100, 499, 500};
  std::map<int, PoolShot> shot;
  for (int k = 1; k <= cfg.iterations; ++k) {
    sdlp_iterate(run, src);
    if (std::find(marks.begin(), marks.end(), k) != marks.end())
      shot[k] = {run.minorants, run.observed};
  }
  absorb(run);

  long checks = 0, viols = 0;
  for (const int k : {10, 50, 100, 500}) {
    const PoolShot& cur = shot.at(k);
    const PoolShot& prev = shot.at(k - 1);
    for (int t = 1; t <= sh.T; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      const ObservationPool& op = cur.obs[ut];
      const int nk = static_cast<int>(op.source.size());
      const int np = static_cast<int>(prev.obs[ut].source.size());

      StageTerms fut;
      std::vector<std::vector<Piece>> store;
      if (t < sh.T) {
        const ObservationPool& onext = cur.obs[ut + 1];
        const std::vector<double> w = weights(onext);
        store.resize(onext.source.size());
        for (std::size_t j2 = 0; j2 < onext.source.size(); ++j2) {
          store[j2] = render_pieces(cur.minor[ut + 1], static_cast<int>(j2));
          fut.push_back({w[j2],
                         &sh.support[ut + 1][static_cast<std::size_t>(onext.source[j2])],
                         &store[j2]});
        }
      }
      const double factor = std::pow((k - 1.0) / k, sh.T - t);
      for (const Eigen::VectorXd& x : probes[ut]) {
        for (int j = 0; j < nk; ++j) {
          const double h = cur.minor[ut].value(j, x);
          const double cap = one_step_value(sh, t, op.source[static_cast<std::size_t>(j)], x, fut);
          ++checks;
          if (h > cap + tol_upper) ++viols;
          if (j < np) {
            const double hp = prev.minor[ut].value(j, x);
            ++checks;
            if (h < factor * hp - tol_monotone) ++viols;
          }
        }
      }
    }
  }

  Criterion c;
  c.pass = viols == 0 && checks >= 400;
  c.text = "4 approximation invariant suite: " + std::to_string(checks) +
           " checks at k in {10,50,100,500}, violations " + std::to_string(viols);
  return c;
}

// 5. Piece scaling: an arbitrary chain of lazy refreshes from the creation
// iteration to k telescopes to the closed form (origin/k)^exponent, and a
// repeated refresh at the same iteration is bit-stable.
Criterion crit_scaling() {
  std::mt19937_64 gen(20250805);
  std::uniform_int_distribution<int> hor(0, 8), org(1, 1500), steps(1, 12), gap(1, 400);
  long checks = 0, viols = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 400; ++rep) {
    const int e = hor(gen);
    const int i = org(gen);
    MinorantPool pool;
    pool.t = 0;
    Minorant m;
    m.origin = i;
    m.scale = 1.0;
    m.alpha = {0.0};
    m.beta = {Eigen::VectorXd::Zero(1)};
    pool.pieces.push_back(m);
    int k = i;
    const int nstep = steps(gen);
    for (int sidx = 0; sidx < nstep; ++sidx) {
      k += gap(gen);
      scale_pool(pool, e, k);
    }
    const double want = std::pow(static_cast<double>(i) / k, e);
    const double err = std::abs(pool.pieces[0].scale - want);
    worst = std::max(worst, err);
    ++checks;
    if (err > tol_scale) ++viols;
    const double before = pool.pieces[0].scale;
    scale_pool(pool, e, k);
    ++checks;
    if (pool.pieces[0].scale != before) ++viols;
  }
  Criterion c;
  c.pass = viols == 0;
  c.text = "5 piece scaling algebra: " + std::to_string(checks) + " telescoping checks, worst err " +
           fmt(worst) + ", violations " + std::to_string(viols);
  return c;
}

// 6. Basis policy: every emitted incumbent decision is feasible at its stage
// state; each stored reconstruction map is affine in the state; the returned
// decision matches an exhaustive argmin over the pooled bases.
Criterion crit_bfp() {
  MslpInstance sh = make_desk3();
  SdlpConfig cfg;
  cfg.iterations = 400;
  cfg.seed = 11;
  SdlpRunState run = sdlp_init(sh, cfg);
  FiniteSupportSource src{&sh, cfg.seed, 0};

  auto resid_at = [&](int t, int obs, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const StageTemplate& st = sh.stages[static_cast<std::size_t>(t)];
    const Eigen::VectorXd rhs = stage_b(sh, t, obs) - stage_C(sh, t, obs) * x;
    double r = 0.0;
    if (u.size() > 0) r = std::max(r, -u.minCoeff());
    return std::max(r, (st.D * u - rhs).maxCoeff());
  };

  long feas_checks = 0, feas_viol = 0, arg_checks = 0, arg_viol = 0;
  double worst_resid = 0.0;
  for (int k = 1; k <= cfg.iterations; ++k) {
    sdlp_iterate(run, src);
    const SamplePath path = src.path_at(k);
    for (int t = 0; t < sh.T; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      const int obs = t == 0 ? -1 : path.obs[ut];
      const double r = resid_at(t, obs, run.x_hat[ut], run.u_hat[ut]);
      worst_resid = std::max(worst_resid, r);
      ++feas_checks;
      if (r > tol_incumbent_feas) ++feas_viol;
    }
    if (k > 300) {
      // exhaustive pool argmin at this iteration's incumbent stage state
      const int t = 1;
      const int obs = path.obs[1];
      const Eigen::VectorXd x = run.x_hat[1];
      const StageTemplate& st = sh.stages[1];
      const Eigen::VectorXd rhs = stage_b(sh, t, obs) - stage_C(sh, t, obs) * x;
      const std::vector<Basis> pool_before = run.bases[1].entries;
      const Eigen::VectorXd u = bfp_decision(run, t, obs, x, run.k);
      const double fu = objective_value(run, t, x, u);
      bool any = false;
      double best = 0.0;
      for (const Basis& bs : pool_before) {
        Eigen::VectorXd ub;
        try {
          ub = basis_reconstruct(bs, st.D, rhs);
        } catch (const solver_error&) {
          continue;
        }
        if (ub.size() > 0 && ub.minCoeff() < -1e-10) continue;
        if ((st.D * ub - rhs).maxCoeff() > 1e-8) continue;
        const double fb = objective_value(run, t, x, ub);
        if (!any || fb < best) {
          any = true;
          best = fb;
        }
      }
      ++arg_checks;
      if (any && fu > best + tol_argmin) ++arg_viol;
      if (!any && resid_at(t, obs, x, u) > tol_incumbent_feas) ++arg_viol;
    }
  }
  absorb(run);

  // affinity of every reconstructible stored map over random state pairs
  std::mt19937_64 gen(606);
  std::uniform_real_distribution<double> u01(0.0, 1.0), sym(-1.0, 1.0);
  const auto probes = feasible_probes(sh, 12, 707);
  const std::vector<Basis>& bases = run.bases[1].entries;
  const StageTemplate& st1 = sh.stages[1];
  long aff_viol = 0;
  int pairs_done = 0;
  for (int attempt = 0; pairs_done < 100 && attempt < 1000; ++attempt) {
    const int obs = attempt % static_cast<int>(sh.support[1].size());
    auto draw = [&]() {
      Eigen::VectorXd x = probes[1][static_cast<std::size_t>(u01(gen) * probes[1].size()) %
                                    probes[1].size()];
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += 0.3 * sym(gen);
      return x;
    };
    const Eigen::VectorXd x1 = draw(), x2 = draw();
    const double lam = 0.375;
    const Eigen::VectorXd xm = lam * x1 + (1.0 - lam) * x2;
    auto rhs_of = [&](const Eigen::VectorXd& x) {
      return (stage_b(sh, 1, obs) - stage_C(sh, 1, obs) * x).eval();
    };
    bool tested = false;
    for (const Basis& bs : bases) {
      Eigen::VectorXd a, b, m;
      try {
        a = basis_reconstruct(bs, st1.D, rhs_of(x1));
        b = basis_reconstruct(bs, st1.D, rhs_of(x2));
        m = basis_reconstruct(bs, st1.D, rhs_of(xm));
      } catch (const solver_error&) {
        continue;
      }
      tested = true;
      const Eigen::VectorXd blend = lam * a + (1.0 - lam) * b;
      const double diff = (m - blend).cwiseAbs().maxCoeff();
      const double scale = 1.0 + std::max(m.cwiseAbs().maxCoeff(), blend.cwiseAbs().maxCoeff());
      if (diff > tol_affine * scale) ++aff_viol;
    }
    if (tested) ++pairs_done;
  }

  Criterion c;
  c.pass = feas_viol == 0 && arg_viol == 0 && aff_viol == 0 && pairs_done >= 100 &&
           arg_checks == 100;
  c.text = "6 basis policy suite: " + std::to_string(feas_checks) +
           " incumbent decisions (worst residual " + fmt(worst_resid) + "), " +
           std::to_string(pairs_done) + " affinity pairs, " + std::to_string(arg_checks) +
           " exhaustive argmin checks, violations " +
           std::to_string(feas_viol + arg_viol + aff_viol);
  return c;
}

// 7. Every regularized root solve across every sequential-sampling run in
// this binary satisfied the descent inequality at the solver's KKT tolerance.
Criterion crit_descent() {
  Criterion c;
  c.pass = g_descent_violations == 0 && g_root_solves > 0;
  c.text = "7 root descent condition: " + std::to_string(g_root_solves) + " root solves over " +
           std::to_string(g_runs) + " runs, violations " + std::to_string(g_descent_violations) +
           ", worst excess " + fmt(g_descent_gap_max);
  return c;
}

// same bounded-optimum construction as the unit suite: feasible by a planted
// point, bounded by a dual-feasible cost
LpProblem random_bounded_lp(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> nd(1, 5), md(1, 8);
  std::uniform_real_distribution<double> u(-1.0, 1.0), u01(0.0, 1.0);
  const int n = nd(gen), m = md(gen);
  LpProblem p;
  p.M.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) p.M(i, j) = u(gen);
  Eigen::VectorXd z0(n);
  for (int j = 0; j < n; ++j) z0(j) = 2.0 * u01(gen);
  p.r.resize(m);
  for (int i = 0; i < m; ++i) {
    const double slack = u01(gen) < 0.3 ? 0.0 : 1.5 * u01(gen);
    p.r(i) = p.M.row(i).dot(z0) + slack;
  }
  Eigen::VectorXd y(m), s(n);
  for (int i = 0; i < m; ++i) y(i) = u01(gen) < 0.5 ? -u01(gen) : 0.0;
  for (int j = 0; j < n; ++j) s(j) = u01(gen) < 0.7 ? u01(gen) : 0.0;
  p.c = p.M.transpose() * y + s;
  return p;
}

// 8. LP/QP engine against brute force: duality gap and basis round-trip on
// 1000 random LPs, objective match on 200 box QPs vs projected gradient.
Criterion crit_core() {
  std::mt19937_64 gen(20250822);
  long nonterm = 0, gap_viol = 0, rt_viol = 0, qp_viol = 0;
  double worst_gap = 0.0, worst_rt = 0.0, worst_qp = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const LpProblem p = random_bounded_lp(gen);
    try {
      const LpSolution s = solve_lp(p);
      if (s.status != SolveStatus::Optimal) {
        ++nonterm;  // the family is feasible and bounded by construction
        continue;
      }
      const double gap = std::abs(s.objective - p.r.dot(s.dual));
      worst_gap = std::max(worst_gap, gap);
      if (gap > tol_gap) ++gap_viol;
      const Eigen::VectorXd z = basis_reconstruct(s.basis, p.M, p.r);
      const double rt = (z - s.primal).cwiseAbs().maxCoeff();
      worst_rt = std::max(worst_rt, rt);
      if (rt > tol_basis_rt) ++rt_viol;
    } catch (const std::exception&) {
      ++nonterm;
    }
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> nd(1, 6);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = nd(gen);
    std::uniform_int_distribution<int> pd(0, n);
    const int np = pd(gen);
    QpProblem qp;
    qp.sigma = 0.5 + 2.5 * u01(gen);
    qp.center.resize(np);
    for (int j = 0; j < np; ++j) qp.center(j) = -1.0 + 3.0 * u01(gen);
    qp.lp.c.resize(n);
    for (int j = 0; j < n; ++j) qp.lp.c(j) = -1.0 + 2.0 * u01(gen);
    qp.lp.M = Eigen::MatrixXd::Identity(n, n);
    qp.lp.r.resize(n);
    for (int j = 0; j < n; ++j) qp.lp.r(j) = 0.5 + 1.5 * u01(gen);
    try {
      const LpSolution s = solve_qp(qp);
      if (s.status != SolveStatus::Optimal) {
        ++nonterm;
        continue;
      }
      const oracle::Result ref = oracle::pg_box(qp);
      const double d = std::abs(s.objective - ref.objective);
      worst_qp = std::max(worst_qp, d);
      if (d > tol_qp) ++qp_viol;
    } catch (const std::exception&) {
      ++nonterm;
    }
  }
  Criterion c;
  c.pass = nonterm == 0 && gap_viol == 0 && rt_viol == 0 && qp_viol == 0;
  c.text = "8 LP/QP core vs brute force: 1000 LPs (worst gap " + fmt(worst_gap) +
           ", worst basis round-trip " + fmt(worst_rt) + "), 200 QPs (worst diff " + fmt(worst_qp) +
           "), non-terminations " + std::to_string(nonterm);
  return c;
}

// 9. Stage solution stability: the distance from one optimal decision to the
// perturbed problem's optimal set, relative to the state perturbation, stays
// bounded as the perturbation shrinks (no blow-up of the Lipschitz ratio).
Criterion crit_stability() {
  const MslpInstance raw = make_desk3_raw();
  const int T = raw.T;
  const auto uT = static_cast<std::size_t>(T);
  const StageTemplate& st = raw.stages[uT];
  const auto probes = feasible_probes(raw, 200, 909);
  std::mt19937_64 gen(910);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const std::vector<double> deltas = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<double> chi(deltas.size(), 0.0);
  long bad = 0, pairs = 0, resamples = 0;
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    for (int rep = 0; rep < 200; ++rep) {
      const Eigen::VectorXd x1 = probes[uT][static_cast<std::size_t>(rep)];
      const int obs = rep % static_cast<int>(raw.support[uT].size());
      LpProblem p1;
      p1.c = st.d;
      p1.M = st.D;
      p1.r = stage_b(raw, T, obs) - stage_C(raw, T, obs) * x1;
      LpSolution s1, s2;
      Eigen::VectorXd x2;
      bool have = false;
      for (int tries = 0; tries < 50 && !have; ++tries) {
        Eigen::VectorXd dir(x1.size());
        for (Eigen::Index j = 0; j < dir.size(); ++j) dir(j) = sym(gen);
        if (dir.norm() == 0.0) dir(0) = 1.0;
        dir /= dir.norm();
        x2 = x1 + delta * dir;
        LpProblem p2 = p1;
        p2.r = stage_b(raw, T, obs) - stage_C(raw, T, obs) * x2;
        try {
          s1 = solve_lp(p1);
          s2 = solve_lp(p2);
        } catch (const std::exception&) {
          ++bad;
          break;
        }
        if (s1.status != SolveStatus::Optimal) {
          ++bad;  // the base state is reachable, its stage LP must solve
          break;
        }
        if (s2.status != SolveStatus::Optimal) {
          ++resamples;  // perturbed state left the domain: draw a new direction
          continue;
        }
        have = true;
        // distance to the perturbed optimal set, via projection: the set is
        // the feasible region cut by the optimal value (two-sided)
        const double eps_v = 1e-9 * (1.0 + std::abs(s2.objective));
        QpProblem qp;
        qp.center = s1.primal;
        qp.sigma = 1.0;
        qp.lp.c = Eigen::VectorXd::Zero(st.nu);
        qp.lp.M.resize(st.m + 2, st.nu);
        qp.lp.M.topRows(st.m) = st.D;
        qp.lp.M.row(st.m) = st.d.transpose();
        qp.lp.M.row(st.m + 1) = -st.d.transpose();
        qp.lp.r.resize(st.m + 2);
        qp.lp.r.head(st.m) = p2.r;
        qp.lp.r(st.m) = s2.objective + eps_v;
        qp.lp.r(st.m + 1) = -s2.objective + eps_v;
        try {
          const LpSolution pr = solve_qp(qp);
          if (pr.status != SolveStatus::Optimal) {
            ++bad;
            break;
          }
          const double dist = std::sqrt(std::max(0.0, 2.0 * pr.objective));
          if (!std::isfinite(dist)) {
            ++bad;
            break;
          }
          chi[di] = std::max(chi[di], dist / (x2 - x1).norm());
          ++pairs;
        } catch (const std::exception&) {
          ++bad;
          break;
        }
      }
    }
  }
  bool stable = true;
  for (std::size_t di = 1; di < deltas.size(); ++di)
    if (chi[di] > stability_growth * chi[0] + 1e-9) stable = false;

  Criterion c;
  c.pass = bad == 0 && pairs == 1000 && stable;
  c.text = "9 stage solution stability: ratio " + fmt(chi[0]) + " at 1e-2 vs " + fmt(chi.back()) +
           " at 1e-6, " + std::to_string(pairs) + " pairs, " +
           (stable ? "growth within 2x" : "ratio GREW past 2x");
  return c;
}

// 10. Two CLI runs with the same instance, config, and seed write
// byte-identical traces (wall times live in a separate timing file).
Criterion crit_determinism() {
  const fs::path base = fs::temp_directory_path() / "mslp_acceptance";
  std::error_code ec;
  fs::remove_all(base, ec);
  fs::create_directories(base, ec);
  const std::string fix = std::string(FIXTURE_DIR) + "/desk3.msp";
  auto cli = [&](const std::string& args) {
    const std::string cmd = std::string(MSLP_CLI) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  const int r1 = cli("sdlp " + fix + " --iterations 60 --seed 7 --out " + (base / "a").string());
  const int r2 = cli("sdlp " + fix + " --iterations 60 --seed 7 --out " + (base / "b").string());
  const int r3 = cli("sddp " + fix + " --iterations 40 --out " + (base / "s1").string());
  const int r4 = cli("sddp " + fix + " --iterations 40 --out " + (base / "s2").string());
  const std::string ta = slurp(base / "a" / "trace.csv");
  const bool seq_same = !ta.empty() && ta == slurp(base / "b" / "trace.csv") &&
                        slurp(base / "a" / "state.json") == slurp(base / "b" / "state.json");
  const std::string ts = slurp(base / "s1" / "trace.csv");
  const bool cut_same = !ts.empty() && ts == slurp(base / "s2" / "trace.csv");
  fs::remove_all(base, ec);

  Criterion c;
  c.pass = r1 == 0 && r2 == 0 && r3 == 0 && r4 == 0 && seq_same && cut_same;
  c.text = std::string("10 trace determinism: repeated CLI runs ") +
           (seq_same && cut_same ? "byte-identical" : "DIFFER") + " (exits " + std::to_string(r1) +
           "," + std::to_string(r2) + "," + std::to_string(r3) + "," + std::to_string(r4) + ")";
  return c;
}

template <typename F>
Criterion guarded(F fn, const std::string& label) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {false, label + ": exception: " + e.what()};
  }
}

}  // namespace

int main() {
  std::vector<Criterion> cs(11);
  cs[1] = guarded(crit_oracle, "1 extensive oracle self-consistency");
  cs[2] = guarded(crit_cut, "2 cut baseline exactness");
  cs[3] = guarded(crit_seq, "3 sequential-sampling convergence");
  cs[4] = guarded(crit_invariants, "4 approximation invariant suite");
  cs[5] = guarded(crit_scaling, "5 piece scaling algebra");
  cs[6] = guarded(crit_bfp, "6 basis policy suite");
  cs[8] = guarded(crit_core, "8 LP/QP core vs brute force");
  cs[9] = guarded(crit_stability, "9 stage solution stability");
  cs[10] = guarded(crit_determinism, "10 trace determinism");
  cs[7] = guarded(crit_descent, "7 root descent condition");  // pools runs from 3, 4, 6

  int failed = 0;
  for (int i = 1; i <= 10; ++i) {
    std::printf("[%s] %s\n", cs[static_cast<std::size_t>(i)].pass ? "PASS" : "FAIL",
                cs[static_cast<std::size_t>(i)].text.c_str());
    if (!cs[static_cast<std::size_t>(i)].pass) ++failed;
  }
  std::printf("acceptance: %d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
