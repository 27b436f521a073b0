#include "mslp/sdlp.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mslp {

double MinorantPool::value(int j, const Eigen::VectorXd& x) const {
  double best = 0.0;  // the zero piece always bids
  if (j < 0) return best;
  for (const Minorant& p : pieces)
    if (j < static_cast<int>(p.alpha.size())) {
      const auto u = static_cast<std::size_t>(j);
      best = std::max(best, p.scale * (p.alpha[u] + p.beta[u].dot(x)));
    }
  return best;
}

int MinorantPool::argmax(int j, const Eigen::VectorXd& x) const {
  double best = 0.0;
  int pick = -1;  // append order is origin order, so >= keeps the newest tie
  if (j < 0) return pick;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Minorant& p = pieces[i];
    if (j >= static_cast<int>(p.alpha.size())) continue;
    const auto u = static_cast<std::size_t>(j);
    const double v = p.scale * (p.alpha[u] + p.beta[u].dot(x));
    if (v >= best) {
      best = v;
      pick = static_cast<int>(i);
    }
  }
  return pick;
}

std::vector<Piece> render_pieces(const MinorantPool& pool, int j) {
  std::vector<Piece> out;
  if (j < 0) return out;
  for (const Minorant& p : pool.pieces)
    if (j < static_cast<int>(p.alpha.size())) {
      const auto u = static_cast<std::size_t>(j);
      out.push_back({p.scale * p.alpha[u], p.scale * p.beta[u], p.origin});
    }
  return out;
}

namespace {

[[noreturn]] void recourse_failure(int t, const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << "stage " << t << " subproblem infeasible; complete recourse violated at state (";
  for (long i = 0; i < x.size(); ++i) os << (i > 0 ? ", " : "") << x[i];
  os << ")";
  throw std::runtime_error(os.str());
}

// emitted decisions must satisfy D u <= b - C x + 1e-8 and u >= -1e-10
constexpr double bfp_row_tol = 1e-8;
constexpr double bfp_sign_tol = 1e-10;

double discount(int origin, int k, int exponent) {
  return std::pow(static_cast<double>(origin) / static_cast<double>(k), exponent);
}

bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  for (long i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

// identical records are as if regenerated now, so the origin moves forward;
// anything else is a new vertex
void store_dual(DualVertexPool& pool, int k, const Eigen::VectorXd& pi,
                const FutureAggregate& agg) {
  for (DualVertex& e : pool.entries)
    if (e.alpha_bar == agg.alpha_bar && same_vector(e.pi, pi) &&
        same_vector(e.beta_bar, agg.beta_bar) && same_vector(e.rho_bar, agg.rho_bar)) {
      e.origin = k;
      return;
    }
  pool.entries.push_back({k, pi, agg.alpha_bar, agg.beta_bar, agg.rho_bar});
}

void harvest_basis(BasisPool& pool, const Basis& basis, int k) {
  if (basis.rows.empty() && basis.cols.empty()) return;
  for (const Basis& e : pool.entries)
    if (e == basis) return;
  pool.entries.push_back(basis);
  pool.origin.push_back(k);
}

LpSolution checked_stage_lp(const LpProblem& lp, int t, const Eigen::VectorXd& x) {
  LpSolution sol = solve_lp(lp);
  if (sol.status == SolveStatus::Infeasible) recourse_failure(t, x);
  if (sol.status != SolveStatus::Optimal) {
    std::ostringstream os;
    os << "stage " << t << " subproblem unbounded; decision set admits an unpriced ray";
    throw std::runtime_error(os.str());
  }
  return sol;
}

// coefficients of one new piece: exact dual for the path observation, scaled
// argmax picks for every other pooled observation at the backcast states
// reached from (xprev, uprev)
Minorant make_piece(const SdlpRunState& run, int t, int k, bool incumbent,
                    const Eigen::VectorXd& pi_exact, const FutureAggregate& agg,
                    const Eigen::VectorXd& xprev, const Eigen::VectorXd& uprev) {
  const MslpInstance& in = *run.in;
  const StageTemplate& st = in.stages[static_cast<std::size_t>(t)];
  const ObservationPool& pool = run.observed[static_cast<std::size_t>(t)];
  const int path_src = run.path.obs[static_cast<std::size_t>(t)];
  // terminal exponent is zero, where Scale coincides with the exact formulas
  const CostConvention conv = t == in.T ? CostConvention::Scale : run.cfg.argmax_cost;

  Minorant m;
  m.origin = k;
  m.incumbent = incumbent;
  const std::size_t n = pool.source.size();
  m.alpha.resize(n);
  m.beta.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const int src = pool.source[j];
    const Eigen::VectorXd& b = stage_b(in, t, src);
    const Eigen::MatrixXd& C = stage_C(in, t, src);
    if (src == path_src) {
      m.alpha[j] = pi_exact.dot(b) + agg.alpha_bar + st.cost_shift;
      m.beta[j] = st.c - C.transpose() * pi_exact + agg.beta_bar;
    } else {
      const Observation& o = in.support[static_cast<std::size_t>(t)][static_cast<std::size_t>(src)];
      const Eigen::VectorXd xj = apply_dynamics(xprev, o, uprev);
      ScaledPick pick = pick_scaled_dual(run.duals[static_cast<std::size_t>(t)], in.T, k, st, b,
                                         C, xj, conv);
      m.alpha[j] = pick.alpha;
      m.beta[j] = std::move(pick.beta);
    }
  }
  return m;
}

// Drop low-value pieces until the cap holds. The pool is consumed at the
// successor states of the incumbent and candidate trajectories, one state
// per pooled observation; the argmax winner at each of those states is
// protected (dropping it would dent the value estimate the winner supports),
// as is the newest incumbent piece. Among the rest, the piece whose best
// contribution over those states is smallest goes first.
void truncate_pool(SdlpRunState& run, int t) {
  const int cap = piece_capacity(run, t);
  if (cap == 0) return;
  auto& pieces = run.minorants[static_cast<std::size_t>(t)].pieces;
  if (static_cast<int>(pieces.size()) <= cap) return;

  const MslpInstance& in = *run.in;
  const auto ut = static_cast<std::size_t>(t);
  const ObservationPool& op = run.observed[ut];
  const std::size_t nj = op.source.size();
  std::vector<Eigen::VectorXd> states(2 * nj);
  for (std::size_t j = 0; j < nj; ++j) {
    const Observation& o = in.support[ut][static_cast<std::size_t>(op.source[j])];
    states[2 * j] = apply_dynamics(run.x_hat[ut - 1], o, run.u_hat[ut - 1]);
    states[2 * j + 1] = apply_dynamics(run.x_cand[ut - 1], o, run.u_cand[ut - 1]);
  }
  auto slice = [](const Minorant& p, std::size_t j, const Eigen::VectorXd& x) {
    return p.scale * (p.alpha[j] + p.beta[j].dot(x));
  };
  while (static_cast<int>(pieces.size()) > cap) {
    const std::size_t n = pieces.size();
    std::vector<bool> keep(n, false);
    for (std::size_t i = n; i-- > 0;)
      if (pieces[i].incumbent) {
        keep[i] = true;
        break;
      }
    for (std::size_t j = 0; j < nj; ++j)
      for (std::size_t s = 2 * j; s < 2 * j + 2; ++s) {
        double best = 0.0;  // the zero piece wins when every slice is negative
        int win = -1;
        for (std::size_t i = 0; i < n; ++i)
          if (j < pieces[i].alpha.size() && slice(pieces[i], j, states[s]) > best) {
            best = slice(pieces[i], j, states[s]);
            win = static_cast<int>(i);
          }
        if (win >= 0) keep[static_cast<std::size_t>(win)] = true;
      }
    int drop = -1;
    bool drop_kept = true;
    double low = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pieces[i].incumbent && keep[i]) continue;
      double v = 0.0;
      bool covered = false;
      for (std::size_t j = 0; j < std::min(nj, pieces[i].alpha.size()); ++j)
        for (std::size_t s = 2 * j; s < 2 * j + 2; ++s) {
          const double w = slice(pieces[i], j, states[s]);
          v = covered ? std::max(v, w) : w;
          covered = true;
        }
      const bool better = keep[i] == drop_kept ? (drop < 0 || v < low) : !keep[i];
      if (better) {
        drop = static_cast<int>(i);
        drop_kept = keep[i];
        low = v;
      }
    }
    if (drop < 0) break;  // only the incumbent piece is left above the cap
    pieces.erase(pieces.begin() + drop);
  }
}

}  // namespace

Eigen::VectorXd bfp_decision(SdlpRunState& run, int t, int obs, const Eigen::VectorXd& x,
                             int k) {
  const MslpInstance& in = *run.in;
  const StageTemplate& st = in.stages[static_cast<std::size_t>(t)];
  const Eigen::VectorXd rhs = stage_b(in, t, obs) - stage_C(in, t, obs) * x;
  BasisPool& pool = run.bases[static_cast<std::size_t>(t)];

  bool found = false;
  double best = 0.0;
  Eigen::VectorXd pick;
  for (const Basis& basis : pool.entries) {  // entry order is origin order
    Eigen::VectorXd u;
    try {
      u = basis_reconstruct(basis, st.D, rhs);
    } catch (const solver_error&) {
      continue;
    }
    if (u.size() > 0 && u.minCoeff() < -bfp_sign_tol) continue;
    if ((st.D * u - rhs).maxCoeff() > bfp_row_tol) continue;
    const double f = objective_value(run, t, x, u);
    if (!found || f < best) {  // strict improvement keeps the older basis on ties
      found = true;
      best = f;
      pick = u;
    }
  }
  if (found) return pick;

  ++run.bfp_fallbacks;
  const StageTerms none;
  StageProblem sp = build_stage(in, t, obs, x, none);
  LpSolution sol = checked_stage_lp(sp.lp, t, x);
  harvest_basis(pool, sol.basis, k);
  return sol.primal;
}

SdlpRunState sdlp_init(const MslpInstance& in, const SdlpConfig& cfg) {
  if (in.T < 1) throw std::invalid_argument("sdlp needs at least one recourse stage");
  SdlpRunState run;
  run.in = &in;
  run.cfg = cfg;
  const auto n = static_cast<std::size_t>(in.T) + 1;
  run.minorants.resize(n);
  run.duals.resize(n);
  run.bases.resize(n);
  run.observed.resize(n);
  for (int t = 0; t <= in.T; ++t) {
    const auto u = static_cast<std::size_t>(t);
    run.minorants[u].t = t;
    run.duals[u].t = t;
    run.bases[u].t = t;
    run.observed[u].t = t;
  }
  const StageTerms none;
  StageProblem sp = build_stage(in, 0, -1, in.x0, none);
  LpSolution sol = solve_lp(sp.lp);
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error("root stage LP is infeasible or unbounded");
  run.u0_hat = sol.primal;
  run.u0 = sol.primal;
  return run;
}

double objective_value(const SdlpRunState& run, int t, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& u) {
  const MslpInstance& in = *run.in;
  const StageTemplate& st = in.stages[static_cast<std::size_t>(t)];
  double v = st.c.dot(x) + st.cost_shift + st.d.dot(u);
  if (t == in.T) return v;
  const ObservationPool& pool = run.observed[static_cast<std::size_t>(t) + 1];
  const MinorantPool& mins = run.minorants[static_cast<std::size_t>(t) + 1];
  for (std::size_t j = 0; j < pool.source.size(); ++j) {
    const Observation& o =
        in.support[static_cast<std::size_t>(t) + 1][static_cast<std::size_t>(pool.source[j])];
    v += frequency(pool, static_cast<int>(j)) *
         mins.value(static_cast<int>(j), apply_dynamics(x, o, u));
  }
  return v;
}

StageTerms pool_terms(const SdlpRunState& run, int t, std::vector<std::vector<Piece>>& store) {
  const ObservationPool& pool = run.observed[static_cast<std::size_t>(t)];
  store.clear();
  store.reserve(pool.source.size());
  for (std::size_t j = 0; j < pool.source.size(); ++j)
    store.push_back(render_pieces(run.minorants[static_cast<std::size_t>(t)], static_cast<int>(j)));
  StageTerms terms;
  for (std::size_t j = 0; j < pool.source.size(); ++j)
    terms.push_back({frequency(pool, static_cast<int>(j)),
                     &run.in->support[static_cast<std::size_t>(t)]
                                     [static_cast<std::size_t>(pool.source[j])],
                     &store[j]});
  return terms;
}

int piece_capacity(const SdlpRunState& run, int t) {
  int limit = run.cfg.max_pieces;
  if (limit < 0) limit = run.in->stages[static_cast<std::size_t>(t)].nu + 3;
  return limit == 0 ? 0 : limit + 1;
}

void solve_root(SdlpRunState& run) {
  const MslpInstance& in = *run.in;
  std::vector<std::vector<Piece>> store;
  const StageTerms fut = pool_terms(run, 1, store);
  StageProblem sp = build_stage(in, 0, -1, in.x0, fut);
  QpProblem qp{sp.lp, run.u0_hat, run.cfg.sigma};
  // the incumbent with saturated epigraph values is a feasible start: the
  // control rows never change and each theta sits on its own piece maximum,
  // so the solver skips a fresh phase-1 pass as the pools grow
  Eigen::VectorXd z0(sp.lp.c.size());
  z0.head(in.stages[0].nu) = run.u0_hat;
  for (std::size_t i = 0; i < fut.size(); ++i) {
    const FutureTerm& f = fut[i];
    double theta = 0.0;
    if (f.pieces != nullptr)
      theta = piece_value(*f.pieces, apply_dynamics(in.x0, *f.obs, run.u0_hat));
    z0(in.stages[0].nu + static_cast<Eigen::Index>(i)) = theta;
  }
  LpSolution sol = solve_qp(qp, nullptr, &z0);
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error("regularized root solve failed");
  run.u0 = sol.primal.head(in.stages[0].nu);

  run.f_prev_cand = objective_value(run, 0, in.x0, run.u0);
  run.f_prev_inc = objective_value(run, 0, in.x0, run.u0_hat);
  const double gap =
      run.f_prev_cand - run.f_prev_inc + (run.u0 - run.u0_hat).squaredNorm();
  if (gap > kkt_tol) ++run.descent_violations;
  run.descent_gap_max = std::max(run.descent_gap_max, gap);
}

void prediction_pass(SdlpRunState& run, const SamplePath& path) {
  const MslpInstance& in = *run.in;
  const int k = run.k + 1;
  run.x_hat.assign(static_cast<std::size_t>(in.T) + 1, Eigen::VectorXd());
  run.u_hat.assign(static_cast<std::size_t>(in.T) + 1, Eigen::VectorXd());
  run.x_hat[0] = in.x0;
  run.u_hat[0] = run.u0_hat;
  for (int t = 1; t <= in.T; ++t) {
    const auto u = static_cast<std::size_t>(t);
    const int src = path.obs[u];
    const Observation& o = in.support[u][static_cast<std::size_t>(src)];
    run.x_hat[u] = apply_dynamics(run.x_hat[u - 1], o, run.u_hat[u - 1]);
    if (t < in.T) run.u_hat[u] = bfp_decision(run, t, src, run.x_hat[u], k);
  }
}

void optimization_pass(SdlpRunState& run, const SamplePath& path) {
  const MslpInstance& in = *run.in;
  run.x_cand.assign(static_cast<std::size_t>(in.T) + 1, Eigen::VectorXd());
  run.u_cand.assign(static_cast<std::size_t>(in.T) + 1, Eigen::VectorXd());
  run.x_cand[0] = in.x0;
  run.u_cand[0] = run.u0;
  for (int t = 1; t <= in.T; ++t) {
    const auto u = static_cast<std::size_t>(t);
    const int src = path.obs[u];
    const Observation& o = in.support[u][static_cast<std::size_t>(src)];
    run.x_cand[u] = apply_dynamics(run.x_cand[u - 1], o, run.u_cand[u - 1]);
    if (t == in.T) break;

    std::vector<std::vector<Piece>> store;
    const StageTerms fut = pool_terms(run, t + 1, store);
    StageProblem sp = build_stage(in, t, src, run.x_cand[u], fut);
    const int nu = in.stages[u].nu;
    // start from the incumbent decision with epigraph variables at their lows
    Eigen::VectorXd start(sp.lp.c.size());
    start.head(nu) = run.u_hat[u];
    for (std::size_t j = 0; j < fut.size(); ++j) {
      const Eigen::VectorXd xn =
          apply_dynamics(run.x_cand[u], *fut[j].obs, run.u_hat[u]);
      start[nu + static_cast<long>(j)] =
          run.minorants[u + 1].value(static_cast<int>(j), xn);
    }
    QpProblem qp{sp.lp, run.u_hat[u], run.cfg.sigma};
    LpSolution sol = solve_qp(qp, nullptr, &start);
    if (sol.status == SolveStatus::Infeasible) recourse_failure(t, run.x_cand[u]);
    if (sol.status != SolveStatus::Optimal)
      throw std::runtime_error("regularized stage solve failed");
    run.u_cand[u] = sol.primal.head(nu);
  }
  const auto uT = static_cast<std::size_t>(in.T);
  const StageTerms none;
  StageProblem sp = build_stage(in, in.T, path.obs[uT], run.x_cand[uT], none);
  run.terminal_cand = solve_stage(in, in.T, path.obs[uT], run.x_cand[uT], sp, none);
  if (run.terminal_cand.status == SolveStatus::Infeasible)
    recourse_failure(in.T, run.x_cand[uT]);
  if (run.terminal_cand.status != SolveStatus::Optimal)
    throw std::runtime_error("terminal stage solve failed");
  run.u_cand[uT] = run.terminal_cand.u;
}

FutureAggregate aggregate_future(const SdlpRunState& run, int t) {
  const MslpInstance& in = *run.in;
  const auto u = static_cast<std::size_t>(t);
  FutureAggregate agg;
  agg.beta_bar = Eigen::VectorXd::Zero(in.stages[u].nx);
  agg.rho_bar = in.stages[u].d;
  const ObservationPool& pool = run.observed[u + 1];
  const MinorantPool& mins = run.minorants[u + 1];
  for (std::size_t j = 0; j < pool.source.size(); ++j) {
    const Observation& o = in.support[u + 1][static_cast<std::size_t>(pool.source[j])];
    const Eigen::VectorXd xn = apply_dynamics(run.x_cand[u], o, run.u_cand[u]);
    const int pick = mins.argmax(static_cast<int>(j), xn);
    if (pick < 0) continue;  // the zero piece contributes nothing
    const Minorant& p = mins.pieces[static_cast<std::size_t>(pick)];
    const double w = frequency(pool, static_cast<int>(j));
    const double al = p.scale * p.alpha[j];
    const Eigen::VectorXd be = p.scale * p.beta[j];
    agg.alpha_bar += w * (al + be.dot(o.a));
    agg.beta_bar += w * (o.A.transpose() * be);
    agg.rho_bar += w * (o.B.transpose() * be);
  }
  return agg;
}

ScaledPick pick_scaled_dual(const DualVertexPool& duals, int horizon, int k,
                            const StageTemplate& st, const Eigen::VectorXd& b,
                            const Eigen::MatrixXd& C, const Eigen::VectorXd& x,
                            CostConvention conv) {
  ScaledPick out;
  out.beta = Eigen::VectorXd::Zero(C.cols());
  const int e = horizon - duals.t;
  const Eigen::VectorXd rhs = b - C * x;
  double best = 0.0;
  for (std::size_t i = 0; i < duals.entries.size(); ++i) {
    const DualVertex& v = duals.entries[i];
    const double val = discount(v.origin, k, e) * v.pi.dot(rhs);
    if (out.pick < 0 || val >= best) {  // >= keeps the newest on exact ties
      out.pick = static_cast<int>(i);
      best = val;
    }
  }
  if (out.pick < 0) return out;  // empty pool: the trivial zero coefficients
  const DualVertex& v = duals.entries[static_cast<std::size_t>(out.pick)];
  const double s = discount(v.origin, k, e);
  out.alpha = s * (v.pi.dot(b) + v.alpha_bar);
  out.beta = s * (v.beta_bar - C.transpose() * v.pi);
  switch (conv) {
    case CostConvention::Scale:
      out.alpha += s * st.cost_shift;
      out.beta += s * st.c;
      break;
    case CostConvention::AddUnscaled:
      out.alpha += st.cost_shift;
      out.beta += st.c;
      break;
    case CostConvention::Omit:
      break;
  }
  return out;
}

void terminal_update(SdlpRunState& run) {
  const MslpInstance& in = *run.in;
  const int T = in.T;
  const int k = run.k + 1;
  const auto uT = static_cast<std::size_t>(T);
  FutureAggregate agg;  // a terminal stage has no future
  agg.beta_bar = Eigen::VectorXd::Zero(in.stages[uT].nx);
  agg.rho_bar = in.stages[uT].d;

  store_dual(run.duals[uT], k, run.terminal_cand.pi, agg);
  const StageTerms none;
  StageProblem sp = build_stage(in, T, run.path.obs[uT], run.x_hat[uT], none);
  LpSolution inc = checked_stage_lp(sp.lp, T, run.x_hat[uT]);
  store_dual(run.duals[uT], k, inc.dual, agg);
  run.u_hat[uT] = inc.primal;

  MinorantPool& pool = run.minorants[uT];
  pool.pieces.push_back(make_piece(run, T, k, false, run.terminal_cand.pi, agg,
                                   run.x_cand[uT - 1], run.u_cand[uT - 1]));
  pool.pieces.push_back(
      make_piece(run, T, k, true, inc.dual, agg, run.x_hat[uT - 1], run.u_hat[uT - 1]));
  scale_pool(pool, T, k);  // exponent zero: terminal pieces never shrink
  truncate_pool(run, T);
}

void nonterminal_update(SdlpRunState& run, int t) {
  const MslpInstance& in = *run.in;
  const int k = run.k + 1;
  const auto u = static_cast<std::size_t>(t);
  const int src = run.path.obs[u];
  const FutureAggregate agg = aggregate_future(run, t);

  const StageTerms none;
  auto solve_at = [&](const Eigen::VectorXd& x) {
    StageProblem sp = build_stage(in, t, src, x, none, &agg.rho_bar);
    return checked_stage_lp(sp.lp, t, x);
  };
  LpSolution cand = solve_at(run.x_cand[u]);
  LpSolution inc = solve_at(run.x_hat[u]);
  store_dual(run.duals[u], k, cand.dual, agg);
  store_dual(run.duals[u], k, inc.dual, agg);
  harvest_basis(run.bases[u], cand.basis, k);
  harvest_basis(run.bases[u], inc.basis, k);

  MinorantPool& pool = run.minorants[u];
  pool.pieces.push_back(
      make_piece(run, t, k, false, cand.dual, agg, run.x_cand[u - 1], run.u_cand[u - 1]));
  pool.pieces.push_back(
      make_piece(run, t, k, true, inc.dual, agg, run.x_hat[u - 1], run.u_hat[u - 1]));
  scale_pool(pool, in.T, k);
  truncate_pool(run, t);
}

void scale_pool(MinorantPool& pool, int horizon, int k) {
  const int e = horizon - pool.t;
  for (Minorant& p : pool.pieces)
    if (p.origin < k) p.scale = discount(p.origin, k, e);
}

bool root_incumbent_test(SdlpRunState& run) {
  const MslpInstance& in = *run.in;
  run.f_root_cand = objective_value(run, 0, in.x0, run.u0);
  run.f_root_inc = objective_value(run, 0, in.x0, run.u0_hat);
  const bool accept =
      run.f_root_cand - run.f_root_inc <= run.cfg.q * (run.f_prev_cand - run.f_prev_inc);
  run.incumbent_changed = accept;
  if (accept) {
    run.u0_hat = run.u0;
    run.f_root_inc = run.f_root_cand;
    ++run.incumbent_changes;
  }
  return accept;
}

void sdlp_iterate_path(SdlpRunState& run, const SamplePath& path) {
  const auto t0 = std::chrono::steady_clock::now();
  const MslpInstance& in = *run.in;
  const int k = run.k + 1;

  solve_root(run);
  run.path = path;
  prediction_pass(run, path);
  optimization_pass(run, path);
  // the fresh path joins the empirical distribution before the backward pass
  for (int t = 1; t <= in.T; ++t)
    record(run.observed[static_cast<std::size_t>(t)], path.obs[static_cast<std::size_t>(t)]);
  terminal_update(run);
  for (int t = in.T - 1; t >= 1; --t) nonterminal_update(run, t);

  const double step = (run.u0 - run.u0_hat).norm();
  root_incumbent_test(run);
  run.k = k;
  run.wall_seconds +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  SdlpTraceRow row;
  row.k = k;
  row.f_incumbent = run.f_root_inc;
  row.f_candidate = run.f_root_cand;
  row.step_norm = step;
  row.incumbent_changed = run.incumbent_changed;
  for (int t = 1; t <= in.T; ++t)
    row.observed_sizes.push_back(
        static_cast<int>(run.observed[static_cast<std::size_t>(t)].source.size()));
  row.wall_seconds = run.wall_seconds;
  run.trace.push_back(row);
}

void sdlp_iterate(SdlpRunState& run, FiniteSupportSource& source) {
  sdlp_iterate_path(run, source.next());
}

SdlpRunState sdlp_run(const MslpInstance& in, const SdlpConfig& cfg) {
  SdlpRunState run = sdlp_init(in, cfg);
  FiniteSupportSource source{&in, cfg.seed};
  for (int i = 0; i < cfg.iterations; ++i) sdlp_iterate(run, source);
  return run;
}

}  // namespace mslp
