#include "mslp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "mslp/lp.hpp"

namespace mslp {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

void fnv_int(std::uint64_t& h, std::int64_t v) { fnv_bytes(h, &v, sizeof v); }

void fnv_mat(std::uint64_t& h, const Eigen::MatrixXd& m) {
  fnv_int(h, m.rows());
  fnv_int(h, m.cols());
  fnv_bytes(h, m.data(), sizeof(double) * m.size());
}

void fnv_vec(std::uint64_t& h, const Eigen::VectorXd& v) {
  fnv_int(h, v.size());
  fnv_bytes(h, v.data(), sizeof(double) * v.size());
}

bool bits_equal(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() &&
         std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
}

bool bits_equal(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return x.size() == y.size() &&
         std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
}

}  // namespace

std::uint64_t Observation::key() const {
  std::uint64_t h = 14695981039346656037ULL;
  fnv_int(h, t);
  fnv_vec(h, a);
  fnv_mat(h, A);
  fnv_mat(h, B);
  fnv_int(h, has_rhs ? 1 : 0);
  if (has_rhs) {
    fnv_vec(h, b);
    fnv_mat(h, C);
  }
  return h;
}

bool same_content(const Observation& x, const Observation& y) {
  if (x.t != y.t || x.has_rhs != y.has_rhs) return false;
  if (!bits_equal(x.a, y.a) || !bits_equal(x.A, y.A) || !bits_equal(x.B, y.B))
    return false;
  if (x.has_rhs && (!bits_equal(x.b, y.b) || !bits_equal(x.C, y.C)))
    return false;
  return true;
}

const Eigen::VectorXd& stage_b(const MslpInstance& in, int t, int obs) {
  if (obs >= 0 && in.support[t][obs].has_rhs) return in.support[t][obs].b;
  return in.stages[t].b;
}

const Eigen::MatrixXd& stage_C(const MslpInstance& in, int t, int obs) {
  if (obs >= 0 && in.support[t][obs].has_rhs) return in.support[t][obs].C;
  return in.stages[t].C;
}

bool rhs_random(const MslpInstance& in, int t) {
  if (t == 0 || t >= static_cast<int>(in.support.size())) return false;
  for (const Observation& o : in.support[t])
    if (o.has_rhs) return true;
  return false;
}

Eigen::VectorXd apply_dynamics(const Eigen::VectorXd& x, const Observation& o,
                               const Eigen::VectorXd& u) {
  if (o.A.cols() != x.size() || o.B.cols() != u.size() ||
      o.a.size() != o.A.rows() || o.a.size() != o.B.rows())
    throw model_error("apply_dynamics: dimension mismatch");
  return o.a + o.A * x + o.B * u;
}

// ------------------------------------------------------------ shift_nonneg --

namespace {

struct ival {
  double lo = 0.0, hi = 0.0;
};

// w * [lo, hi] with an explicit zero guard so 0 * inf never appears.
ival iscale(double w, ival v) {
  if (w == 0.0) return {0.0, 0.0};
  const double a = w * v.lo, b = w * v.hi;
  return w > 0.0 ? ival{a, b} : ival{b, a};
}

// Upper bounds on u over a relaxation of every stage-t feasible set: the rhs
// is inflated to its largest value across observations and the x box.
std::vector<double> u_upper_box(const MslpInstance& in, int t,
                                const std::vector<ival>& xbox) {
  const StageTemplate& st = in.stages[t];
  const int n_obs = t >= 1 ? static_cast<int>(in.support[t].size()) : 0;
  Eigen::VectorXd rhat = Eigen::VectorXd::Constant(st.m, -inf);
  for (int o = t >= 1 ? 0 : -1; o < n_obs; ++o) {
    const Eigen::VectorXd& b = stage_b(in, t, o);
    const Eigen::MatrixXd& C = stage_C(in, t, o);
    for (int i = 0; i < st.m; ++i) {
      double cx_lo = 0.0;
      for (int j = 0; j < st.nx; ++j) cx_lo += iscale(C(i, j), xbox[j]).lo;
      rhat(i) = std::max(rhat(i), b(i) - cx_lo);
    }
    if (t == 0) break;
  }
  std::vector<double> uhi(st.nu);
  for (int j = 0; j < st.nu; ++j) {
    LpProblem p;
    p.c = Eigen::VectorXd::Zero(st.nu);
    p.c(j) = -1.0;
    p.M = st.D;
    p.r = rhat;
    const LpSolution s = solve_lp(p);
    if (s.status == SolveStatus::Infeasible) {
      uhi[j] = 0.0;  // relaxed set empty: stage never reached with any u
    } else if (s.status == SolveStatus::Unbounded) {
      uhi[j] = inf;
    } else {
      uhi[j] = std::max(0.0, -s.objective);
    }
  }
  return uhi;
}

}  // namespace

ShiftReport shift_nonneg(MslpInstance& in) {
  if (static_cast<int>(in.stages.size()) != in.T + 1 ||
      static_cast<int>(in.support.size()) != in.T + 1)
    throw model_error("shift_nonneg: malformed instance");
  for (int t = 1; t <= in.T; ++t)
    if (in.support[t].empty())
      throw model_error("shift_nonneg: stage " + std::to_string(t) +
                        " has no observations");
  ShiftReport rep;
  rep.per_stage.assign(in.T + 1, 0.0);

  std::vector<ival> xbox(in.stages[0].nx);
  for (int j = 0; j < in.stages[0].nx; ++j) xbox[j] = {in.x0(j), in.x0(j)};

  for (int t = 0; t <= in.T; ++t) {
    const StageTemplate& st = in.stages[t];
    const std::vector<double> uhi = u_upper_box(in, t, xbox);

    double lower = st.cost_shift;
    for (int j = 0; j < st.nx; ++j) lower += iscale(st.c(j), xbox[j]).lo;
    for (int j = 0; j < st.nu; ++j)
      lower += iscale(st.d(j), ival{0.0, uhi[j]}).lo;
    if (std::isnan(lower) || lower == -inf)
      throw model_error("shift_nonneg: stage " + std::to_string(t) +
                        " cost relaxation is unbounded below");
    // the slack keeps re-runs from chasing summation-order residue
    if (lower < -1e-12) {
      rep.per_stage[t] = -lower;
      in.stages[t].cost_shift += -lower;
      rep.total += -lower;
    }

    if (t == in.T) break;
    // propagate the box through every stage-(t+1) observation
    const int nx_next = in.stages[t + 1].nx;
    std::vector<ival> next(nx_next, ival{inf, -inf});
    for (const Observation& o : in.support[t + 1]) {
      for (int i = 0; i < nx_next; ++i) {
        ival v{o.a(i), o.a(i)};
        for (int j = 0; j < st.nx; ++j) {
          const ival w = iscale(o.A(i, j), xbox[j]);
          v.lo += w.lo;
          v.hi += w.hi;
        }
        for (int j = 0; j < st.nu; ++j) {
          const ival w = iscale(o.B(i, j), ival{0.0, uhi[j]});
          v.lo += w.lo;
          v.hi += w.hi;
        }
        next[i].lo = std::min(next[i].lo, v.lo);
        next[i].hi = std::max(next[i].hi, v.hi);
      }
    }
    xbox = std::move(next);
  }
  return rep;
}

// ---------------------------------------------------------------- validate --

namespace {

bool check_shapes(const MslpInstance& in, std::vector<std::string>& out) {
  bool ok = true;
  const auto bad = [&](const std::string& msg) {
    out.push_back("shape: " + msg);
    ok = false;
  };
  if (static_cast<int>(in.stages.size()) != in.T + 1) {
    bad("expected " + std::to_string(in.T + 1) + " stage templates");
    return false;
  }
  if (static_cast<int>(in.support.size()) != in.T + 1 ||
      static_cast<int>(in.prob.size()) != in.T + 1) {
    bad("support/probability lists must cover stages 0.." +
        std::to_string(in.T));
    return false;
  }
  if (in.x0.size() != in.stages[0].nx) bad("x0 length != stage-0 nx");
  for (int t = 0; t <= in.T; ++t) {
    const StageTemplate& st = in.stages[t];
    const std::string at = "stage " + std::to_string(t);
    if (st.c.size() != st.nx) bad(at + ": |c| != nx");
    if (st.d.size() != st.nu) bad(at + ": |d| != nu");
    if (st.D.rows() != st.m || st.D.cols() != st.nu) bad(at + ": D not m x nu");
    if (st.C.rows() != st.m || st.C.cols() != st.nx) bad(at + ": C not m x nx");
    if (st.b.size() != st.m) bad(at + ": |b| != m");
    if (t == 0) {
      if (!in.support[0].empty()) bad("stage 0 must not carry observations");
      continue;
    }
    if (in.support[t].size() != in.prob[t].size())
      bad(at + ": |support| != |prob|");
    for (std::size_t o = 0; o < in.support[t].size(); ++o) {
      const Observation& ob = in.support[t][o];
      const std::string ato = at + " observation " + std::to_string(o);
      if (ob.t != t) bad(ato + ": stage tag mismatch");
      if (ob.a.size() != st.nx) bad(ato + ": |a| != nx");
      if (ob.A.rows() != st.nx || ob.A.cols() != in.stages[t - 1].nx)
        bad(ato + ": A not nx_t x nx_{t-1}");
      if (ob.B.rows() != st.nx || ob.B.cols() != in.stages[t - 1].nu)
        bad(ato + ": B not nx_t x nu_{t-1}");
      if (ob.has_rhs) {
        if (ob.b.size() != st.m) bad(ato + ": |b| != m");
        if (ob.C.rows() != st.m || ob.C.cols() != st.nx)
          bad(ato + ": C not m x nx");
      }
    }
  }
  return ok;
}

}  // namespace

std::vector<std::string> validate(const MslpInstance& in, int probe_checks,
                                  std::uint64_t seed) {
  std::vector<std::string> out;
  if (!check_shapes(in, out)) return out;

  // A5: finite support with exact-enough probabilities, no duplicate content
  for (int t = 1; t <= in.T; ++t) {
    if (in.support[t].empty()) {
      out.push_back("A5: stage " + std::to_string(t) + " support is empty");
      continue;
    }
    double sum = 0.0;
    for (std::size_t o = 0; o < in.prob[t].size(); ++o) {
      if (in.prob[t][o] <= 0.0)
        out.push_back("A5: stage " + std::to_string(t) + " observation " +
                      std::to_string(o) + " has nonpositive probability");
      sum += in.prob[t][o];
    }
    if (std::abs(sum - 1.0) > 1e-12)
      out.push_back("A5: stage " + std::to_string(t) +
                    " probabilities sum to " + std::to_string(sum));
    for (std::size_t o = 0; o < in.support[t].size(); ++o)
      for (std::size_t o2 = o + 1; o2 < in.support[t].size(); ++o2)
        if (same_content(in.support[t][o], in.support[t][o2]))
          out.push_back("A5: stage " + std::to_string(t) + " observations " +
                        std::to_string(o) + " and " + std::to_string(o2) +
                        " are identical");
  }

  // A3: recourse matrices keep full row rank
  for (int t = 0; t <= in.T; ++t) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(in.stages[t].D);
    if (qr.rank() < in.stages[t].m)
      out.push_back("A3: stage " + std::to_string(t) + " D has row rank " +
                    std::to_string(qr.rank()) + " < " +
                    std::to_string(in.stages[t].m));
  }

  // A1: the root feasible set is bounded coordinate by coordinate
  {
    const StageTemplate& st = in.stages[0];
    LpProblem p;
    p.M = st.D;
    p.r = st.b - st.C * in.x0;
    bool empty_reported = false;
    for (int j = 0; j < st.nu; ++j) {
      p.c = Eigen::VectorXd::Zero(st.nu);
      p.c(j) = -1.0;
      const LpSolution s = solve_lp(p);
      if (s.status == SolveStatus::Infeasible) {
        if (!empty_reported)
          out.push_back("A1: root feasible set is empty");
        empty_reported = true;
        break;
      }
      if (s.status == SolveStatus::Unbounded)
        out.push_back("A1: root feasible set unbounded in u_0[" +
                      std::to_string(j) + "]");
    }
  }

  // A2 probe: random feasible trajectories must never strand a stage
  std::mt19937_64 gen(seed + 0x9E3779B97F4A7C15ULL);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<char> flagged(in.T + 1, 0);
  for (int rep = 0; rep < probe_checks; ++rep) {
    Eigen::VectorXd x = in.x0;
    int obs = -1;
    for (int t = 0; t <= in.T; ++t) {
      const StageTemplate& st = in.stages[t];
      LpProblem p;
      p.c.resize(st.nu);
      for (int j = 0; j < st.nu; ++j) p.c(j) = 2.0 * u01(gen) - 1.0;
      p.M = st.D;
      p.r = stage_b(in, t, obs) - stage_C(in, t, obs) * x;
      const LpSolution s = solve_lp(p);
      if (s.status == SolveStatus::Infeasible) {
        if (!flagged[t]) {
          flagged[t] = 1;
          out.push_back("A2: complete recourse not certified (stage " +
                        std::to_string(t) + " infeasible in probe)");
        }
        break;
      }
      if (t == in.T) break;
      // sample the next observation and step the dynamics
      double pick = u01(gen), acc = 0.0;
      obs = static_cast<int>(in.support[t + 1].size()) - 1;
      for (std::size_t o = 0; o < in.prob[t + 1].size(); ++o) {
        acc += in.prob[t + 1][o];
        if (pick <= acc) {
          obs = static_cast<int>(o);
          break;
        }
      }
      x = apply_dynamics(x, in.support[t + 1][obs], s.primal);
    }
  }
  return out;
}

}  // namespace mslp
