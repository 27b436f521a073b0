#include "mslp/stage.hpp"

namespace mslp {

StageProblem build_stage(const MslpInstance& in, int t, int obs, const Eigen::VectorXd& x,
                         const std::vector<FutureTerm>& future, const Eigen::VectorXd* cost) {
  const StageTemplate& st = in.stages[static_cast<std::size_t>(t)];
  if (x.size() != st.nx) throw model_error("stage state has wrong dimension");
  const Eigen::VectorXd& b = stage_b(in, t, obs);
  const Eigen::MatrixXd& C = stage_C(in, t, obs);

  int nt = static_cast<int>(future.size());
  int pieces = 0;
  for (const FutureTerm& f : future)
    if (f.pieces != nullptr) pieces += static_cast<int>(f.pieces->size());

  StageProblem sp;
  sp.t = t;
  sp.nu = st.nu;
  sp.fixed = st.c.dot(x) + st.cost_shift;

  int n = st.nu + nt;
  int m = st.m + pieces;
  sp.lp.c.resize(n);
  sp.lp.c.head(st.nu) = cost != nullptr ? *cost : st.d;
  for (int i = 0; i < nt; ++i) sp.lp.c[st.nu + i] = future[static_cast<std::size_t>(i)].weight;

  sp.lp.M = Eigen::MatrixXd::Zero(m, n);
  sp.lp.r.resize(m);
  sp.lp.M.topLeftCorner(st.m, st.nu) = st.D;
  sp.lp.r.head(st.m) = b - C * x;

  // piece rows: <beta, a + A x + B u> - theta <= -alpha
  sp.term_of_row.assign(static_cast<std::size_t>(pieces), -1);
  sp.piece_of_row.assign(static_cast<std::size_t>(pieces), -1);
  int row = st.m;
  for (int i = 0; i < nt; ++i) {
    const FutureTerm& f = future[static_cast<std::size_t>(i)];
    if (f.pieces == nullptr) continue;
    for (std::size_t j = 0; j < f.pieces->size(); ++j) {
      const Piece& pc = (*f.pieces)[j];
      sp.lp.M.row(row).head(st.nu) = pc.beta.transpose() * f.obs->B;
      sp.lp.M(row, st.nu + i) = -1.0;
      sp.lp.r[row] = -pc.alpha - pc.beta.dot(f.obs->a + f.obs->A * x);
      sp.term_of_row[static_cast<std::size_t>(row - st.m)] = i;
      sp.piece_of_row[static_cast<std::size_t>(row - st.m)] = static_cast<int>(j);
      ++row;
    }
  }
  return sp;
}

StageSolution unpack_stage(const MslpInstance& in, int t, int obs, const StageProblem& sp,
                           const std::vector<FutureTerm>& future, const LpSolution& sol) {
  const StageTemplate& st = in.stages[static_cast<std::size_t>(t)];
  StageSolution out;
  out.status = sol.status;
  out.basis = sol.basis;
  out.iterations = sol.iterations;
  if (sol.status != SolveStatus::Optimal) return out;
  out.u = sol.primal.head(st.nu);
  out.theta = sol.primal.tail(sol.primal.size() - st.nu);
  out.pi = sol.dual.head(st.m);
  out.value = sp.fixed + sol.objective;
  out.g = st.c - stage_C(in, t, obs).transpose() * out.pi;
  for (std::size_t i = 0; i < sp.term_of_row.size(); ++i) {
    double w = -sol.dual[st.m + static_cast<long>(i)];
    if (w <= 0.0) continue;
    const FutureTerm& f = future[static_cast<std::size_t>(sp.term_of_row[i])];
    const Piece& pc = (*f.pieces)[static_cast<std::size_t>(sp.piece_of_row[i])];
    out.g += w * (f.obs->A.transpose() * pc.beta);
  }
  return out;
}

StageSolution solve_stage(const MslpInstance& in, int t, int obs, const Eigen::VectorXd& x,
                          const StageProblem& sp, const std::vector<FutureTerm>& future) {
  long rows = sp.lp.M.rows();
  long cols = sp.lp.M.cols();
  LpSolution sol = rows > 4 * cols + 32 ? solve_lp_via_dual(sp.lp) : solve_lp(sp.lp);
  (void)x;
  return unpack_stage(in, t, obs, sp, future, sol);
}

double piece_value(const std::vector<Piece>& pieces, const Eigen::VectorXd& x) {
  double best = 0.0;
  for (const Piece& pc : pieces) best = std::max(best, pc.alpha + pc.beta.dot(x));
  return best;
}

int piece_argmax(const std::vector<Piece>& pieces, const Eigen::VectorXd& x) {
  int arg = -1;
  double best = 0.0;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    double v = pieces[j].alpha + pieces[j].beta.dot(x);
    if (v > best) {
      best = v;
      arg = static_cast<int>(j);
    }
  }
  return arg;
}

}  // namespace mslp
