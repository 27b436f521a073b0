#include "mslp/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mslp/oracle.hpp"

namespace mslp {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

bool to_double(const std::string& s, double& v) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool to_int(const std::string& s, int& v) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::string join(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_double(v[i]);
  }
  return s;
}

// ---- instance text ----

struct Line {
  int no = 0;
  std::vector<std::string> w;
};

std::vector<Line> tokenize(const std::string& text) {
  std::vector<Line> out;
  int no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::size_t end = nl == std::string::npos ? text.size() : nl;
    std::string line = text.substr(pos, end - pos);
    ++no;
    if (std::size_t h = line.find('#'); h != std::string::npos) line.erase(h);
    Line l;
    l.no = no;
    std::istringstream is(line);
    for (std::string tok; is >> tok;) l.w.push_back(tok);
    if (!l.w.empty()) out.push_back(std::move(l));
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return out;
}

struct RowData {
  int line = -1;  // -1 = absent
  std::vector<double> v;
};

struct StageBlock {
  int line = -1;
  int t = -1;
  RowData shift, c, d, b;
  std::vector<RowData> D, C;
};

struct ObsBlock {
  int line = -1;
  int t = -1;
  double prob = 0.0;
  RowData a, b;
  std::vector<RowData> A, B, C;
};

struct Collector {
  std::vector<std::string> errors;

  void fail(int line, const std::string& msg) {
    if (errors.size() >= 50) return;
    errors.push_back(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg);
  }

  RowData numbers(const Line& l) {
    RowData r;
    r.line = l.no;
    for (std::size_t i = 1; i < l.w.size(); ++i) {
      double v = 0.0;
      if (!to_double(l.w[i], v)) {
        fail(l.no, "'" + l.w[i] + "' is not a number");
        v = 0.0;
      }
      r.v.push_back(v);
    }
    return r;
  }
};

// single numeric row checked against an expected length
bool want(Collector& cc, const RowData& r, int block_line, const char* key, int n,
          const char* owner) {
  if (r.line < 0) {
    cc.fail(block_line, std::string(owner) + " missing " + key);
    return false;
  }
  if (static_cast<int>(r.v.size()) != n) {
    cc.fail(r.line, std::string(key) + " expects " + std::to_string(n) + " entries, got " +
                        std::to_string(r.v.size()));
    return false;
  }
  return true;
}

bool want_rows(Collector& cc, const std::vector<RowData>& rows, int block_line, const char* key,
               int nrows, int ncols, const char* owner) {
  if (static_cast<int>(rows.size()) != nrows) {
    cc.fail(rows.empty() ? block_line : rows.back().line,
            std::string(owner) + " needs " + std::to_string(nrows) + " " + key + " rows, got " +
                std::to_string(rows.size()));
    return false;
  }
  bool ok = true;
  for (const RowData& r : rows)
    if (static_cast<int>(r.v.size()) != ncols) {
      cc.fail(r.line, std::string(key) + " row expects " + std::to_string(ncols) +
                          " entries, got " + std::to_string(r.v.size()));
      ok = false;
    }
  return ok;
}

Eigen::VectorXd as_vec(const std::vector<double>& v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
  return x;
}

Eigen::MatrixXd as_mat(const std::vector<RowData>& rows, int cols) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < cols; ++j)
      M(static_cast<Eigen::Index>(i), j) = rows[i].v[static_cast<std::size_t>(j)];
  return M;
}

}  // namespace

ParseResult parse_instance_text(const std::string& text) {
  ParseResult out;
  Collector cc;
  std::vector<Line> lines = tokenize(text);

  bool version_ok = false;
  std::string name;
  int name_line = -1;
  int T = -1, T_line = -1;
  std::vector<RowData> dims;
  RowData x0;
  std::vector<StageBlock> stages;
  std::vector<ObsBlock> obs;
  int cur_stage = -1, cur_obs = -1;  // at most one of the two is active

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const Line& l = lines[li];
    const std::string& key = l.w[0];
    if (li == 0) {
      if (key == "mslp" && l.w.size() == 2 && l.w[1] == "1") {
        version_ok = true;
        continue;
      }
      cc.fail(l.no, "expected format header 'mslp 1'");
      if (key == "mslp") continue;
    } else if (key == "mslp") {
      cc.fail(l.no, "duplicate format header");
      continue;
    }

    if (key == "name") {
      if (name_line >= 0) cc.fail(l.no, "duplicate name");
      name_line = l.no;
      for (std::size_t i = 1; i < l.w.size(); ++i) {
        if (i > 1) name += ' ';
        name += l.w[i];
      }
      cur_stage = cur_obs = -1;
    } else if (key == "T") {
      if (T_line >= 0) cc.fail(l.no, "duplicate T");
      T_line = l.no;
      if (l.w.size() != 2 || !to_int(l.w[1], T) || T < 1)
        cc.fail(l.no, "T expects one integer >= 1");
      cur_stage = cur_obs = -1;
    } else if (key == "dims") {
      dims.push_back(cc.numbers(l));
      cur_stage = cur_obs = -1;
    } else if (key == "x0") {
      if (x0.line >= 0) cc.fail(l.no, "duplicate x0");
      x0 = cc.numbers(l);
      cur_stage = cur_obs = -1;
    } else if (key == "stage") {
      StageBlock sb;
      sb.line = l.no;
      if (l.w.size() != 2 || !to_int(l.w[1], sb.t) || sb.t < 0)
        cc.fail(l.no, "stage expects one stage index");
      stages.push_back(std::move(sb));
      cur_stage = static_cast<int>(stages.size()) - 1;
      cur_obs = -1;
    } else if (key == "obs") {
      ObsBlock ob;
      ob.line = l.no;
      if (l.w.size() != 3 || !to_int(l.w[1], ob.t) || !to_double(l.w[2], ob.prob))
        cc.fail(l.no, "obs expects a stage index and a probability");
      obs.push_back(std::move(ob));
      cur_obs = static_cast<int>(obs.size()) - 1;
      cur_stage = -1;
    } else if (cur_stage >= 0) {
      StageBlock& sb = stages[static_cast<std::size_t>(cur_stage)];
      if (key == "shift") {
        if (sb.shift.line >= 0) cc.fail(l.no, "duplicate shift");
        sb.shift = cc.numbers(l);
      } else if (key == "c") {
        if (sb.c.line >= 0) cc.fail(l.no, "duplicate c");
        sb.c = cc.numbers(l);
      } else if (key == "d") {
        if (sb.d.line >= 0) cc.fail(l.no, "duplicate d");
        sb.d = cc.numbers(l);
      } else if (key == "D") {
        sb.D.push_back(cc.numbers(l));
      } else if (key == "b") {
        if (sb.b.line >= 0) cc.fail(l.no, "duplicate b");
        sb.b = cc.numbers(l);
      } else if (key == "C") {
        sb.C.push_back(cc.numbers(l));
      } else {
        cc.fail(l.no, "unknown keyword '" + key + "' in a stage block");
      }
    } else if (cur_obs >= 0) {
      ObsBlock& ob = obs[static_cast<std::size_t>(cur_obs)];
      if (key == "a") {
        if (ob.a.line >= 0) cc.fail(l.no, "duplicate a");
        ob.a = cc.numbers(l);
      } else if (key == "A") {
        ob.A.push_back(cc.numbers(l));
      } else if (key == "B") {
        ob.B.push_back(cc.numbers(l));
      } else if (key == "b") {
        if (ob.b.line >= 0) cc.fail(l.no, "duplicate b");
        ob.b = cc.numbers(l);
      } else if (key == "C") {
        ob.C.push_back(cc.numbers(l));
      } else {
        cc.fail(l.no, "unknown keyword '" + key + "' in an obs block");
      }
    } else {
      cc.fail(l.no, "unknown keyword '" + key + "' outside any block");
    }
  }

  if (!version_ok && lines.empty()) cc.fail(0, "empty document, expected 'mslp 1'");
  if (name_line < 0) cc.fail(0, "missing name");
  if (T_line < 0) cc.fail(0, "missing T");
  if (T < 1) {
    out.errors = std::move(cc.errors);
    return out;
  }

  // header dimensions
  struct Dim {
    int nx = 0, nu = 0, m = 0;
  };
  std::vector<Dim> dd(static_cast<std::size_t>(T) + 1);
  if (static_cast<int>(dims.size()) != T + 1) {
    cc.fail(dims.empty() ? T_line : dims.back().line,
            "expected " + std::to_string(T + 1) + " dims lines, got " +
                std::to_string(dims.size()));
    out.errors = std::move(cc.errors);
    return out;
  }
  bool dims_ok = true;
  for (int t = 0; t <= T; ++t) {
    const RowData& r = dims[static_cast<std::size_t>(t)];
    if (r.v.size() != 3) {
      cc.fail(r.line, "dims expects nx nu m");
      dims_ok = false;
      continue;
    }
    Dim& d = dd[static_cast<std::size_t>(t)];
    int* slot[3] = {&d.nx, &d.nu, &d.m};
    for (int i = 0; i < 3; ++i) {
      double v = r.v[static_cast<std::size_t>(i)];
      if (v != std::floor(v) || v < 0 || v > 1 << 20) {
        cc.fail(r.line, "dims entries must be small nonnegative integers");
        dims_ok = false;
      } else {
        *slot[i] = static_cast<int>(v);
      }
    }
    if (d.nx < 1 || d.nu < 1) {
      cc.fail(r.line, "each stage needs nx >= 1 and nu >= 1");
      dims_ok = false;
    }
  }
  if (!dims_ok) {
    out.errors = std::move(cc.errors);
    return out;
  }

  MslpInstance in;
  in.name = name;
  in.T = T;
  in.stages.resize(static_cast<std::size_t>(T) + 1);
  in.support.resize(static_cast<std::size_t>(T) + 1);
  in.prob.resize(static_cast<std::size_t>(T) + 1);

  if (want(cc, x0, T_line, "x0", dd[0].nx, "instance")) in.x0 = as_vec(x0.v);

  std::vector<int> stage_seen(static_cast<std::size_t>(T) + 1, -1);
  for (const StageBlock& sb : stages) {
    if (sb.t < 0 || sb.t > T) {
      cc.fail(sb.line, "stage index " + std::to_string(sb.t) + " outside 0.." + std::to_string(T));
      continue;
    }
    if (stage_seen[static_cast<std::size_t>(sb.t)] >= 0) {
      cc.fail(sb.line, "duplicate stage " + std::to_string(sb.t));
      continue;
    }
    stage_seen[static_cast<std::size_t>(sb.t)] = sb.line;
    const Dim& d = dd[static_cast<std::size_t>(sb.t)];
    StageTemplate& st = in.stages[static_cast<std::size_t>(sb.t)];
    st.nx = d.nx;
    st.nu = d.nu;
    st.m = d.m;
    const std::string owner = "stage " + std::to_string(sb.t);
    if (sb.shift.line >= 0 && want(cc, sb.shift, sb.line, "shift", 1, owner.c_str()))
      st.cost_shift = sb.shift.v[0];
    if (want(cc, sb.c, sb.line, "c", d.nx, owner.c_str())) st.c = as_vec(sb.c.v);
    if (want(cc, sb.d, sb.line, "d", d.nu, owner.c_str())) st.d = as_vec(sb.d.v);
    if (want_rows(cc, sb.D, sb.line, "D", d.m, d.nu, owner.c_str())) st.D = as_mat(sb.D, d.nu);
    if (d.m > 0) {
      if (want(cc, sb.b, sb.line, "b", d.m, owner.c_str())) st.b = as_vec(sb.b.v);
    } else if (sb.b.line >= 0) {
      cc.fail(sb.b.line, "b given but m is 0");
    }
    if (want_rows(cc, sb.C, sb.line, "C", d.m, d.nx, owner.c_str())) st.C = as_mat(sb.C, d.nx);
  }
  for (int t = 0; t <= T; ++t)
    if (stage_seen[static_cast<std::size_t>(t)] < 0)
      cc.fail(0, "stage " + std::to_string(t) + " block missing");

  std::vector<int> first_obs_line(static_cast<std::size_t>(T) + 1, -1);
  for (const ObsBlock& ob : obs) {
    if (ob.t < 1 || ob.t > T) {
      cc.fail(ob.line, "obs stage " + std::to_string(ob.t) + " outside 1.." + std::to_string(T));
      continue;
    }
    const Dim& here = dd[static_cast<std::size_t>(ob.t)];
    const Dim& prev = dd[static_cast<std::size_t>(ob.t) - 1];
    if (first_obs_line[static_cast<std::size_t>(ob.t)] < 0)
      first_obs_line[static_cast<std::size_t>(ob.t)] = ob.line;
    Observation o;
    o.t = ob.t;
    const std::string owner = "obs at stage " + std::to_string(ob.t);
    if (want(cc, ob.a, ob.line, "a", here.nx, owner.c_str())) o.a = as_vec(ob.a.v);
    if (want_rows(cc, ob.A, ob.line, "A", here.nx, prev.nx, owner.c_str()))
      o.A = as_mat(ob.A, prev.nx);
    if (want_rows(cc, ob.B, ob.line, "B", here.nx, prev.nu, owner.c_str()))
      o.B = as_mat(ob.B, prev.nu);
    const bool has_b = ob.b.line >= 0;
    const bool has_C = !ob.C.empty();
    if (has_b != has_C) {
      cc.fail(ob.line, "rhs override needs b and C together");
    } else if (has_b) {
      o.has_rhs = true;
      if (want(cc, ob.b, ob.line, "b", here.m, owner.c_str())) o.b = as_vec(ob.b.v);
      if (want_rows(cc, ob.C, ob.line, "C", here.m, here.nx, owner.c_str()))
        o.C = as_mat(ob.C, here.nx);
    }
    if (!(ob.prob > 0.0)) cc.fail(ob.line, "observation probability must be positive");
    in.support[static_cast<std::size_t>(ob.t)].push_back(std::move(o));
    in.prob[static_cast<std::size_t>(ob.t)].push_back(ob.prob);
  }
  for (int t = 1; t <= T; ++t) {
    const auto& p = in.prob[static_cast<std::size_t>(t)];
    if (p.empty()) {
      cc.fail(0, "stage " + std::to_string(t) + " has no observations");
      continue;
    }
    double sum = 0.0;
    for (double v : p) sum += v;
    if (std::abs(sum - 1.0) > 1e-12)
      cc.fail(first_obs_line[static_cast<std::size_t>(t)],
              "stage " + std::to_string(t) + " probabilities sum to " + format_double(sum));
  }

  out.errors = std::move(cc.errors);
  if (out.ok()) out.instance = std::move(in);
  return out;
}

ParseResult parse_instance_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    ParseResult out;
    out.errors.push_back("cannot open " + path);
    return out;
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_instance_text(ss.str());
}

std::string write_instance(const MslpInstance& in) {
  std::string s = "mslp 1\n";
  s += "name " + in.name + "\n";
  s += "T " + std::to_string(in.T) + "\n";
  for (const StageTemplate& st : in.stages)
    s += "dims " + std::to_string(st.nx) + " " + std::to_string(st.nu) + " " +
         std::to_string(st.m) + "\n";
  s += "x0 " + join(in.x0) + "\n";
  for (int t = 0; t <= in.T; ++t) {
    const StageTemplate& st = in.stages[static_cast<std::size_t>(t)];
    s += "\nstage " + std::to_string(t) + "\n";
    s += "  shift " + format_double(st.cost_shift) + "\n";
    s += "  c " + join(st.c) + "\n";
    s += "  d " + join(st.d) + "\n";
    for (int r = 0; r < st.m; ++r) s += "  D " + join(st.D.row(r).transpose()) + "\n";
    if (st.m > 0) s += "  b " + join(st.b) + "\n";
    for (int r = 0; r < st.m; ++r) s += "  C " + join(st.C.row(r).transpose()) + "\n";
  }
  for (int t = 1; t <= in.T; ++t)
    for (std::size_t o = 0; o < in.support[static_cast<std::size_t>(t)].size(); ++o) {
      const Observation& ob = in.support[static_cast<std::size_t>(t)][o];
      s += "\nobs " + std::to_string(t) + " " +
           format_double(in.prob[static_cast<std::size_t>(t)][o]) + "\n";
      s += "  a " + join(ob.a) + "\n";
      for (Eigen::Index r = 0; r < ob.A.rows(); ++r)
        s += "  A " + join(ob.A.row(r).transpose()) + "\n";
      for (Eigen::Index r = 0; r < ob.B.rows(); ++r)
        s += "  B " + join(ob.B.row(r).transpose()) + "\n";
      if (ob.has_rhs) {
        s += "  b " + join(ob.b) + "\n";
        for (Eigen::Index r = 0; r < ob.C.rows(); ++r)
          s += "  C " + join(ob.C.row(r).transpose()) + "\n";
      }
    }
  return s;
}

// ---- run state dumps ----

namespace {

const char* conv_name(CostConvention c) {
  switch (c) {
    case CostConvention::AddUnscaled:
      return "add_unscaled";
    case CostConvention::Omit:
      return "omit";
    default:
      return "scale";
  }
}

bool conv_parse(const std::string& s, CostConvention& c) {
  if (s == "scale") c = CostConvention::Scale;
  else if (s == "add_unscaled") c = CostConvention::AddUnscaled;
  else if (s == "omit") c = CostConvention::Omit;
  else return false;
  return true;
}

json to_j(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_j(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  Eigen::Index i = 0;
  for (const json& e : a) v[i++] = e.get<double>();
  return v;
}

json instance_tag(const MslpInstance& in) {
  json dims = json::array();
  for (const StageTemplate& st : in.stages) dims.push_back({st.nx, st.nu, st.m});
  return {{"name", in.name}, {"T", in.T}, {"dims", dims}};
}

constexpr const char* state_schema = "mslp.state.v1";

}  // namespace

std::string dump_state(const SdlpRunState& run) {
  const MslpInstance& in = *run.in;
  json doc;
  doc["schema"] = state_schema;
  doc["algorithm"] = "sdlp";
  doc["instance"] = instance_tag(in);
  doc["config"] = {{"iterations", run.cfg.iterations}, {"sigma", run.cfg.sigma},
                   {"q", run.cfg.q},                   {"max_pieces", run.cfg.max_pieces},
                   {"convention", conv_name(run.cfg.argmax_cost)},
                   {"seed", run.cfg.seed}};
  doc["k"] = run.k;
  // one path is drawn per iteration, so the source counter equals k
  doc["source"] = {{"seed", run.cfg.seed}, {"drawn", run.k}};
  doc["u0_hat"] = to_j(run.u0_hat);
  doc["u0"] = to_j(run.u0);
  doc["f_prev_cand"] = run.f_prev_cand;
  doc["f_prev_inc"] = run.f_prev_inc;
  doc["f_root_cand"] = run.f_root_cand;
  doc["f_root_inc"] = run.f_root_inc;
  doc["incumbent_changed"] = run.incumbent_changed;
  doc["incumbent_changes"] = run.incumbent_changes;
  doc["bfp_fallbacks"] = run.bfp_fallbacks;
  doc["descent_violations"] = run.descent_violations;
  doc["descent_gap_max"] = run.descent_gap_max;

  json mm = json::array();
  for (int t = 1; t <= in.T; ++t) {
    const MinorantPool& pool = run.minorants[static_cast<std::size_t>(t)];
    json pieces = json::array();
    for (const Minorant& p : pool.pieces) {
      json beta = json::array();
      for (const Eigen::VectorXd& b : p.beta) beta.push_back(to_j(b));
      pieces.push_back({{"origin", p.origin},
                        {"incumbent", p.incumbent},
                        {"scale", p.scale},
                        {"alpha", p.alpha},
                        {"beta", beta}});
    }
    mm.push_back({{"t", t}, {"pieces", pieces}});
  }
  doc["minorants"] = mm;

  json dv = json::array();
  for (int t = 1; t <= in.T; ++t) {
    const DualVertexPool& pool = run.duals[static_cast<std::size_t>(t)];
    json entries = json::array();
    for (const DualVertex& e : pool.entries)
      entries.push_back({{"origin", e.origin},
                         {"pi", to_j(e.pi)},
                         {"alpha_bar", e.alpha_bar},
                         {"beta_bar", to_j(e.beta_bar)},
                         {"rho_bar", to_j(e.rho_bar)}});
    dv.push_back({{"t", t}, {"entries", entries}});
  }
  doc["duals"] = dv;

  json bp = json::array();
  for (int t = 1; t < in.T; ++t) {
    const BasisPool& pool = run.bases[static_cast<std::size_t>(t)];
    json entries = json::array();
    for (const Basis& b : pool.entries) entries.push_back({{"rows", b.rows}, {"cols", b.cols}});
    bp.push_back({{"t", t}, {"entries", entries}, {"origin", pool.origin}});
  }
  doc["bases"] = bp;

  json op = json::array();
  for (int t = 1; t <= in.T; ++t) {
    const ObservationPool& pool = run.observed[static_cast<std::size_t>(t)];
    op.push_back(
        {{"t", t}, {"total", pool.total}, {"source", pool.source}, {"count", pool.count}});
  }
  doc["observed"] = op;

  return doc.dump(1) + "\n";
}

std::string dump_state(const SddpResult& res, const MslpInstance& in) {
  json doc;
  doc["schema"] = state_schema;
  doc["algorithm"] = "sddp";
  doc["instance"] = instance_tag(in);
  doc["u0"] = to_j(res.u0);
  doc["lower_bound"] = res.lower_bounds.empty() ? 0.0 : res.lower_bounds.back();
  doc["iterations"] = res.iterations;
  doc["converged"] = res.converged;
  json pools = json::array();
  for (const auto& lists : res.pools.at) {
    json jl = json::array();
    for (const auto& list : lists) {
      json jp = json::array();
      for (const Piece& p : list)
        jp.push_back({{"alpha", p.alpha}, {"beta", to_j(p.beta)}, {"origin", p.origin}});
      jl.push_back(jp);
    }
    pools.push_back(jl);
  }
  doc["pools"] = pools;
  return doc.dump(1) + "\n";
}

LoadedState load_state(const std::string& text, const MslpInstance& in,
                       std::vector<std::string>& errors) {
  LoadedState out;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    errors.push_back(std::string("state: ") + e.what());
    return out;
  }
  try {
    if (doc.at("schema").get<std::string>() != state_schema) {
      errors.push_back("state: unsupported schema");
      return out;
    }
    const json want_tag = instance_tag(in);
    if (doc.at("instance") != want_tag) {
      errors.push_back("state: instance identity mismatch (name, T, or dimensions)");
      return out;
    }
    out.algorithm = doc.at("algorithm").get<std::string>();
    if (out.algorithm == "sddp") {
      SddpState& s = out.sddp;
      s.u0 = vec_j(doc.at("u0"));
      s.lower_bound = doc.at("lower_bound").get<double>();
      s.iterations = doc.at("iterations").get<int>();
      s.converged = doc.at("converged").get<bool>();
      s.pools = CutPools::make(in);
      const json& pools = doc.at("pools");
      if (pools.size() != s.pools.at.size()) {
        errors.push_back("state: cut pool stage count mismatch");
        return out;
      }
      for (std::size_t t = 0; t < s.pools.at.size(); ++t) {
        const json& jl = pools[t];
        if (jl.size() != s.pools.at[t].size()) {
          errors.push_back("state: cut list count mismatch at stage " + std::to_string(t));
          return out;
        }
        for (std::size_t w = 0; w < s.pools.at[t].size(); ++w)
          for (const json& jp : jl[w]) {
            Piece p;
            p.alpha = jp.at("alpha").get<double>();
            p.beta = vec_j(jp.at("beta"));
            p.origin = jp.at("origin").get<int>();
            s.pools.at[t][w].push_back(std::move(p));
          }
      }
      return out;
    }
    if (out.algorithm != "sdlp") {
      errors.push_back("state: unknown algorithm '" + out.algorithm + "'");
      return out;
    }

    SdlpConfig cfg;
    const json& jc = doc.at("config");
    cfg.iterations = jc.at("iterations").get<int>();
    cfg.sigma = jc.at("sigma").get<double>();
    cfg.q = jc.at("q").get<double>();
    cfg.max_pieces = jc.at("max_pieces").get<int>();
    cfg.seed = jc.at("seed").get<std::uint64_t>();
    if (!conv_parse(jc.at("convention").get<std::string>(), cfg.argmax_cost)) {
      errors.push_back("state: unknown cost convention");
      return out;
    }
    SdlpRunState run = sdlp_init(in, cfg);
    run.k = doc.at("k").get<int>();
    out.source_seed = doc.at("source").at("seed").get<std::uint64_t>();
    out.source_drawn = doc.at("source").at("drawn").get<int>();
    run.u0_hat = vec_j(doc.at("u0_hat"));
    run.u0 = vec_j(doc.at("u0"));
    run.f_prev_cand = doc.at("f_prev_cand").get<double>();
    run.f_prev_inc = doc.at("f_prev_inc").get<double>();
    run.f_root_cand = doc.at("f_root_cand").get<double>();
    run.f_root_inc = doc.at("f_root_inc").get<double>();
    run.incumbent_changed = doc.at("incumbent_changed").get<bool>();
    run.incumbent_changes = doc.at("incumbent_changes").get<int>();
    run.bfp_fallbacks = doc.at("bfp_fallbacks").get<int>();
    run.descent_violations = doc.at("descent_violations").get<int>();
    run.descent_gap_max = doc.at("descent_gap_max").get<double>();

    for (const json& jm : doc.at("minorants")) {
      const int t = jm.at("t").get<int>();
      if (t < 1 || t > in.T) {
        errors.push_back("state: minorant pool stage out of range");
        return out;
      }
      MinorantPool& pool = run.minorants[static_cast<std::size_t>(t)];
      for (const json& jp : jm.at("pieces")) {
        Minorant p;
        p.origin = jp.at("origin").get<int>();
        p.incumbent = jp.at("incumbent").get<bool>();
        p.scale = jp.at("scale").get<double>();
        p.alpha = jp.at("alpha").get<std::vector<double>>();
        for (const json& jb : jp.at("beta")) p.beta.push_back(vec_j(jb));
        if (p.alpha.size() != p.beta.size()) {
          errors.push_back("state: piece coefficient arrays disagree");
          return out;
        }
        pool.pieces.push_back(std::move(p));
      }
    }
    for (const json& jd : doc.at("duals")) {
      const int t = jd.at("t").get<int>();
      if (t < 1 || t > in.T) {
        errors.push_back("state: dual pool stage out of range");
        return out;
      }
      DualVertexPool& pool = run.duals[static_cast<std::size_t>(t)];
      for (const json& je : jd.at("entries")) {
        DualVertex e;
        e.origin = je.at("origin").get<int>();
        e.pi = vec_j(je.at("pi"));
        e.alpha_bar = je.at("alpha_bar").get<double>();
        e.beta_bar = vec_j(je.at("beta_bar"));
        e.rho_bar = vec_j(je.at("rho_bar"));
        pool.entries.push_back(std::move(e));
      }
    }
    for (const json& jb : doc.at("bases")) {
      const int t = jb.at("t").get<int>();
      if (t < 1 || t >= in.T) {
        errors.push_back("state: basis pool stage out of range");
        return out;
      }
      BasisPool& pool = run.bases[static_cast<std::size_t>(t)];
      for (const json& je : jb.at("entries")) {
        Basis b;
        b.rows = je.at("rows").get<std::vector<int>>();
        b.cols = je.at("cols").get<std::vector<int>>();
        pool.entries.push_back(std::move(b));
      }
      pool.origin = jb.at("origin").get<std::vector<int>>();
      if (pool.origin.size() != pool.entries.size()) {
        errors.push_back("state: basis origins disagree with entries");
        return out;
      }
    }
    for (const json& jo : doc.at("observed")) {
      const int t = jo.at("t").get<int>();
      if (t < 1 || t > in.T) {
        errors.push_back("state: observation pool stage out of range");
        return out;
      }
      ObservationPool& pool = run.observed[static_cast<std::size_t>(t)];
      pool.total = jo.at("total").get<int>();
      pool.source = jo.at("source").get<std::vector<int>>();
      pool.count = jo.at("count").get<std::vector<int>>();
      if (pool.source.size() != pool.count.size()) {
        errors.push_back("state: observation pool arrays disagree");
        return out;
      }
      for (int src : pool.source)
        if (src < 0 || src >= static_cast<int>(in.support[static_cast<std::size_t>(t)].size())) {
          errors.push_back("state: pooled observation index out of range");
          return out;
        }
    }
    out.sdlp = std::move(run);
  } catch (const json::exception& e) {
    errors.push_back(std::string("state: ") + e.what());
  }
  return out;
}

// ---- CSV artifacts ----

std::string sdlp_trace_csv(const std::vector<SdlpTraceRow>& rows, int T) {
  std::string s = "# schema: mslp.sdlp.trace.v1\n";
  s += "k,f_incumbent,f_candidate,step_norm,incumbent_changed";
  for (int t = 1; t <= T; ++t) s += ",observed_" + std::to_string(t);
  s += "\n";
  for (const SdlpTraceRow& r : rows) {
    s += std::to_string(r.k) + "," + format_double(r.f_incumbent) + "," +
         format_double(r.f_candidate) + "," + format_double(r.step_norm) + "," +
         (r.incumbent_changed ? "1" : "0");
    for (int n : r.observed_sizes) s += "," + std::to_string(n);
    s += "\n";
  }
  return s;
}

std::string sdlp_timing_csv(const std::vector<SdlpTraceRow>& rows) {
  std::string s = "# schema: mslp.sdlp.timing.v1\nk,wall_seconds\n";
  for (const SdlpTraceRow& r : rows)
    s += std::to_string(r.k) + "," + format_double(r.wall_seconds) + "\n";
  return s;
}

std::string sddp_trace_csv(const std::vector<double>& lower_bounds) {
  std::string s = "# schema: mslp.sddp.trace.v1\niteration,lower_bound\n";
  for (std::size_t i = 0; i < lower_bounds.size(); ++i)
    s += std::to_string(i + 1) + "," + format_double(lower_bounds[i]) + "\n";
  return s;
}

std::string sddp_timing_csv(const std::vector<double>& wall_seconds) {
  std::string s = "# schema: mslp.sddp.timing.v1\niteration,wall_seconds\n";
  for (std::size_t i = 0; i < wall_seconds.size(); ++i)
    s += std::to_string(i + 1) + "," + format_double(wall_seconds[i]) + "\n";
  return s;
}

std::string paths_csv(const std::vector<SamplePath>& paths, int T) {
  std::string s = "# schema: mslp.paths.v1\nk";
  for (int t = 1; t <= T; ++t) s += ",obs_" + std::to_string(t);
  s += "\n";
  for (const SamplePath& p : paths) {
    s += std::to_string(p.k);
    for (std::size_t t = 1; t < p.obs.size(); ++t) s += "," + std::to_string(p.obs[t]);
    s += "\n";
  }
  return s;
}

// ---- diagnostics ----

ProbeReport probe_lower_bounds(const SdlpRunState& run, double tol) {
  ProbeReport rep;
  const MslpInstance& in = *run.in;
  if (run.k == 0 || static_cast<int>(run.x_hat.size()) <= in.T) return rep;
  for (int t = 1; t <= in.T; ++t) {
    const ObservationPool& pool = run.observed[static_cast<std::size_t>(t)];
    if (pool.total == 0) continue;
    std::vector<std::vector<Piece>> store;
    StageTerms future;
    if (t < in.T) future = pool_terms(run, t + 1, store);
    for (const Eigen::VectorXd* x :
         {&run.x_hat[static_cast<std::size_t>(t)], &run.x_cand[static_cast<std::size_t>(t)]}) {
      for (std::size_t j = 0; j < pool.source.size(); ++j) {
        const double h = run.minorants[static_cast<std::size_t>(t)].value(static_cast<int>(j), *x);
        const double H = one_step_value(in, t, pool.source[j], *x, future);
        ++rep.checks;
        if (h > H + tol) {
          ++rep.violations;
          rep.worst = std::max(rep.worst, h - H);
        }
      }
    }
  }
  return rep;
}

double true_root_value(const MslpInstance& in, const Eigen::VectorXd& u0) {
  const StageTemplate& s0 = in.stages[0];
  double v = s0.c.dot(in.x0) + s0.cost_shift + s0.d.dot(u0);
  const std::vector<StageTerms> terms = ground_terms(in);
  for (std::size_t o = 0; o < in.support[1].size(); ++o) {
    const Observation& ob = in.support[1][o];
    v += in.prob[1][o] *
         solve_extensive(in, 1, static_cast<int>(o), apply_dynamics(in.x0, ob, u0), terms).value;
  }
  return v;
}

// ---- command runner ----

std::vector<std::string> validate_config(const RunConfig& cfg) {
  std::vector<std::string> out;
  const bool known = cfg.algorithm == "sdlp" || cfg.algorithm == "sddp" ||
                     cfg.algorithm == "extensive" || cfg.algorithm == "evaluate";
  if (!known) out.push_back("unknown algorithm '" + cfg.algorithm + "'");
  if (cfg.instance_path.empty()) out.push_back("no instance file given");
  if (cfg.iterations < 1) out.push_back("iterations must be >= 1");
  if (!(cfg.sigma >= 1.0)) out.push_back("sigma must be >= 1");
  if (!(cfg.q > 0.0 && cfg.q < 1.0)) out.push_back("q must be inside (0, 1)");
  if (cfg.max_pieces < -1) out.push_back("max_pieces must be >= -1");
  if (cfg.n_paths < 0) out.push_back("n_paths must be >= 0");
  if (cfg.replications < 1) out.push_back("replications must be >= 1");
  if (cfg.replications > 1 && !cfg.path_log.empty())
    out.push_back("path-log supports a single replication");
  if (cfg.algorithm == "evaluate") {
    if (cfg.state_path.empty()) out.push_back("evaluate needs a state file");
    if (cfg.policy != "bfp" && cfg.policy != "greedy")
      out.push_back("policy must be bfp or greedy");
    if (cfg.rollouts < 1) out.push_back("rollouts must be >= 1");
  }
  return out;
}

namespace {

bool write_file(const fs::path& p, const std::string& content, std::ostream& err) {
  std::ofstream f(p, std::ios::binary);
  f << content;
  f.flush();
  if (!f) {
    err << "cannot write " << p.string() << "\n";
    return false;
  }
  return true;
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

fs::path resolve_out_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("MSLP_OUT_DIR"); env && *env) return env;
  return ".";
}

struct OracleFacts {
  double v_star = 0.0;
  double true_u0 = 0.0;
  double gap = 0.0;  // relative to |v_star|
};

OracleFacts oracle_facts(const MslpInstance& raw, const Eigen::VectorXd& u0) {
  OracleFacts f;
  f.v_star = solve_extensive(raw, 0, -1, raw.x0, ground_terms(raw)).value;
  f.true_u0 = true_root_value(raw, u0);
  f.gap = std::abs(f.true_u0 - f.v_star) / std::max(1e-12, std::abs(f.v_star));
  return f;
}

std::string oracle_lines(const OracleFacts& f) {
  return "exact optimum " + format_double(f.v_star) + "\ntrue objective of root decision " +
         format_double(f.true_u0) + "\nrelative gap " + format_double(f.gap) + "\n";
}

int run_extensive(const MslpInstance& raw, const fs::path& dir, std::ostream& out,
                  std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const TreeValue tv = solve_extensive(raw, 0, -1, raw.x0, ground_terms(raw));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::string csv = "# schema: mslp.extensive.report.v1\nvalue,paths";
  for (Eigen::Index i = 0; i < tv.u0.size(); ++i) csv += ",u0_" + std::to_string(i);
  csv += "\n" + format_double(tv.value) + "," + std::to_string(tv.paths);
  for (Eigen::Index i = 0; i < tv.u0.size(); ++i) csv += "," + format_double(tv.u0[i]);
  csv += "\n";
  if (!write_file(dir / "report.csv", csv, err)) return exit_solver;

  std::string summary = "extensive form of " + raw.name + " (T=" + std::to_string(raw.T) + ")\n";
  summary += "optimal value " + format_double(tv.value) + "\n";
  summary += "root decision " + join(tv.u0) + "\n";
  summary += "sample paths " + std::to_string(tv.paths) + "\n";
  summary += "wall " + fixed3(wall) + " s\n";
  if (!write_file(dir / "summary.txt", summary, err)) return exit_solver;
  out << summary;
  return exit_ok;
}

int run_sddp(const RunConfig& cfg, const MslpInstance& raw, const fs::path& dir, std::ostream& out,
             std::ostream& err) {
  MslpInstance sh = raw;
  const ShiftReport shift = shift_nonneg(sh);

  SddpConfig scfg;
  scfg.max_iters = cfg.iterations;
  scfg.n_paths = cfg.n_paths;
  scfg.seed = cfg.seed;
  const SddpResult res = sddp_run(sh, scfg);

  if (!write_file(dir / "trace.csv", sddp_trace_csv(res.lower_bounds), err)) return exit_solver;
  if (!write_file(dir / "timing.csv", sddp_timing_csv(res.wall_seconds), err)) return exit_solver;
  if (!write_file(dir / "state.json", dump_state(res, sh), err)) return exit_solver;

  const double lb = res.lower_bounds.empty() ? 0.0 : res.lower_bounds.back();
  std::string summary = "nested decomposition on " + raw.name + " (T=" + std::to_string(raw.T) +
                        ")\n";
  summary += "iterations " + std::to_string(res.iterations) +
             (res.converged ? " (lower bound stabilized)" : " (iteration cap hit)") + "\n";
  summary += "lower bound " + format_double(lb - shift.total) + " (shifted " + format_double(lb) +
             ", offset " + format_double(shift.total) + ")\n";
  summary += "root decision " + join(res.u0) + "\n";
  summary += "cuts stored " + std::to_string(res.pools.total_cuts()) + "\n";
  if (cfg.oracle_compare) summary += oracle_lines(oracle_facts(raw, res.u0));
  summary +=
      "wall " + fixed3(res.wall_seconds.empty() ? 0.0 : res.wall_seconds.back()) + " s\n";
  if (!write_file(dir / "summary.txt", summary, err)) return exit_solver;
  out << summary;
  return res.converged ? exit_ok : exit_not_converged;
}

int run_sdlp_one(const RunConfig& cfg, std::uint64_t seed, const MslpInstance& raw,
                 const MslpInstance& sh, double offset, const fs::path& dir, std::ostream& out,
                 std::ostream& err, double& final_objective, int& exit_code) {
  SdlpConfig scfg;
  scfg.iterations = cfg.iterations;
  scfg.sigma = cfg.sigma;
  scfg.q = cfg.q;
  scfg.max_pieces = cfg.max_pieces;
  scfg.argmax_cost = cfg.convention;
  scfg.seed = seed;

  SdlpRunState run = sdlp_init(sh, scfg);
  FiniteSupportSource source{&sh, seed};
  std::vector<SamplePath> paths;
  ProbeReport probes;
  for (int k = 0; k < cfg.iterations; ++k) {
    sdlp_iterate(run, source);
    if (!cfg.path_log.empty()) paths.push_back(run.path);
    if (cfg.probe_checks) {
      const ProbeReport r = probe_lower_bounds(run);
      probes.checks += r.checks;
      probes.violations += r.violations;
      probes.worst = std::max(probes.worst, r.worst);
    }
  }

  if (!write_file(dir / "trace.csv", sdlp_trace_csv(run.trace, sh.T), err)) return exit_solver;
  if (!write_file(dir / "timing.csv", sdlp_timing_csv(run.trace), err)) return exit_solver;
  if (!write_file(dir / "state.json", dump_state(run), err)) return exit_solver;
  if (!cfg.path_log.empty() && !write_file(cfg.path_log, paths_csv(paths, sh.T), err))
    return exit_solver;

  final_objective = run.f_root_inc - offset;
  exit_code = exit_ok;

  std::string summary = "sequential-sampling run on " + raw.name + " (T=" + std::to_string(raw.T) +
                        ")\n";
  summary += "iterations " + std::to_string(run.k) + "  seed " + std::to_string(seed) +
             "  sigma " + format_double(cfg.sigma) + "  q " + format_double(cfg.q) +
             "  max_pieces " + std::to_string(cfg.max_pieces) + "  convention " +
             conv_name(cfg.convention) + "\n";
  summary += "objective estimate " + format_double(final_objective) + " (shifted " +
             format_double(run.f_root_inc) + ", offset " + format_double(offset) + ")\n";
  summary += "root incumbent " + join(run.u0_hat) + "\n";
  summary += "incumbent changes " + std::to_string(run.incumbent_changes) + "  bfp fallbacks " +
             std::to_string(run.bfp_fallbacks) + "  descent violations " +
             std::to_string(run.descent_violations) + "\n";
  summary += "observed sizes";
  for (int t = 1; t <= sh.T; ++t)
    summary += " t" + std::to_string(t) + "=" +
               std::to_string(run.observed[static_cast<std::size_t>(t)].total > 0
                                  ? static_cast<int>(
                                        run.observed[static_cast<std::size_t>(t)].source.size())
                                  : 0);
  summary += "\npool sizes";
  for (int t = 1; t <= sh.T; ++t)
    summary += " t" + std::to_string(t) + "=" +
               std::to_string(run.minorants[static_cast<std::size_t>(t)].pieces.size());
  summary += "\n";
  if (cfg.probe_checks)
    summary += "probe checks " + std::to_string(probes.checks) + ", violations " +
               std::to_string(probes.violations) + ", worst excess " +
               format_double(probes.worst) + "\n";
  if (cfg.oracle_compare) {
    const OracleFacts f = oracle_facts(raw, run.u0_hat);
    summary += oracle_lines(f);
    if (f.gap > 0.01) exit_code = exit_not_converged;
  }
  summary += "wall " + fixed3(run.wall_seconds) + " s\n";
  if (!write_file(dir / "summary.txt", summary, err)) return exit_solver;
  out << summary;
  return exit_code;
}

int run_sdlp(const RunConfig& cfg, const MslpInstance& raw, const fs::path& dir, std::ostream& out,
             std::ostream& err) {
  MslpInstance sh = raw;
  const ShiftReport shift = shift_nonneg(sh);

  if (cfg.replications == 1) {
    double f = 0.0;
    int code = exit_ok;
    const int r = run_sdlp_one(cfg, cfg.seed, raw, sh, shift.total, dir, out, err, f, code);
    return r == exit_solver ? r : code;
  }

  std::string csv = "# schema: mslp.replications.v1\nreplication,seed,objective\n";
  int worst = exit_ok;
  for (int r = 0; r < cfg.replications; ++r) {
    char sub[16];
    std::snprintf(sub, sizeof sub, "rep%03d", r);
    const fs::path rep_dir = dir / sub;
    fs::create_directories(rep_dir);
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    out << "--- replication " << r << " (seed " << seed << ") ---\n";
    double f = 0.0;
    int code = exit_ok;
    const int rc = run_sdlp_one(cfg, seed, raw, sh, shift.total, rep_dir, out, err, f, code);
    if (rc == exit_solver) return rc;
    worst = std::max(worst, code);
    csv += std::to_string(r) + "," + std::to_string(seed) + "," + format_double(f) + "\n";
  }
  if (!write_file(dir / "replications.csv", csv, err)) return exit_solver;
  return worst;
}

int run_evaluate(const RunConfig& cfg, const MslpInstance& raw, const fs::path& dir,
                 std::ostream& out, std::ostream& err) {
  std::ifstream f(cfg.state_path, std::ios::binary);
  if (!f) {
    err << "cannot open " << cfg.state_path << "\n";
    return exit_invalid;
  }
  std::ostringstream ss;
  ss << f.rdbuf();

  MslpInstance sh = raw;
  shift_nonneg(sh);

  std::vector<std::string> errors;
  LoadedState state = load_state(ss.str(), sh, errors);
  if (!errors.empty()) {
    for (const std::string& e : errors) err << e << "\n";
    return exit_invalid;
  }
  if (state.algorithm == "sddp" && cfg.policy == "bfp") {
    err << "bfp policy needs a sequential-sampling state (no stored bases in a cut dump)\n";
    return exit_invalid;
  }

  // decisions come from the trained approximations on the shifted model;
  // costs accumulate on the instance as parsed, so the report is in original
  // units (the decisions agree: stage argmins are unchanged by constants)
  Policy policy;
  if (state.algorithm == "sddp") {
    const SddpState& s = state.sddp;
    policy = [&sh, &s](int t, int obs, const Eigen::VectorXd& x) -> Eigen::VectorXd {
      if (t == 0) return s.u0;
      try {
        const StageTerms future = t < sh.T ? cut_terms(sh, s.pools, t + 1) : StageTerms{};
        const StageProblem sp = build_stage(sh, t, obs, x, future);
        const StageSolution sol = solve_stage(sh, t, obs, x, sp, future);
        if (sol.status != SolveStatus::Optimal) return Eigen::VectorXd();
        return sol.u;
      } catch (const std::exception&) {
        return Eigen::VectorXd();
      }
    };
  } else if (cfg.policy == "greedy") {
    SdlpRunState& run = state.sdlp;
    policy = [&sh, &run](int t, int obs, const Eigen::VectorXd& x) -> Eigen::VectorXd {
      if (t == 0) return run.u0_hat;
      try {
        std::vector<std::vector<Piece>> store;
        const StageTerms future = t < sh.T ? pool_terms(run, t + 1, store) : StageTerms{};
        const StageProblem sp = build_stage(sh, t, obs, x, future);
        const StageSolution sol = solve_stage(sh, t, obs, x, sp, future);
        if (sol.status != SolveStatus::Optimal) return Eigen::VectorXd();
        return sol.u;
      } catch (const std::exception&) {
        return Eigen::VectorXd();
      }
    };
  } else {
    SdlpRunState& run = state.sdlp;
    policy = [&sh, &run](int t, int obs, const Eigen::VectorXd& x) -> Eigen::VectorXd {
      if (t == 0) return run.u0_hat;
      try {
        if (t == sh.T) {
          const StageTerms none;
          const StageProblem sp = build_stage(sh, t, obs, x, none);
          const StageSolution sol = solve_stage(sh, t, obs, x, sp, none);
          if (sol.status != SolveStatus::Optimal) return Eigen::VectorXd();
          return sol.u;
        }
        return bfp_decision(run, t, obs, x, std::max(run.k, 1));
      } catch (const std::exception&) {
        return Eigen::VectorXd();
      }
    };
  }

  FiniteSupportSource source{&raw, cfg.seed};
  const auto t0 = std::chrono::steady_clock::now();
  const PolicyEvalReport rep = evaluate_policy(raw, policy, cfg.rollouts, source);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::string csv = "# schema: mslp.evaluate.report.v1\nmean,std_error,rollouts,discarded";
  for (int t = 0; t <= raw.T; ++t) csv += ",violations_" + std::to_string(t);
  csv += "\n" + format_double(rep.mean) + "," + format_double(rep.std_error) + "," +
         std::to_string(rep.rollouts) + "," + std::to_string(rep.discarded);
  for (int v : rep.violations) csv += "," + std::to_string(v);
  csv += "\n";
  if (!write_file(dir / "report.csv", csv, err)) return exit_solver;

  std::string summary = "policy rollout on " + raw.name + " (" + state.algorithm + " state, " +
                        cfg.policy + " policy)\n";
  summary += "mean cost " + format_double(rep.mean) + "  std error " +
             format_double(rep.std_error) + "\n";
  summary += "rollouts " + std::to_string(rep.rollouts) + "  discarded " +
             std::to_string(rep.discarded) + "\n";
  if (cfg.oracle_compare) {
    const double v_star = solve_extensive(raw, 0, -1, raw.x0, ground_terms(raw)).value;
    summary += "exact optimum " + format_double(v_star) + "  mean excess " +
               format_double(rep.mean - v_star) + "\n";
  }
  summary += "wall " + fixed3(wall) + " s\n";
  if (!write_file(dir / "summary.txt", summary, err)) return exit_solver;
  out << summary;
  return exit_ok;
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> cfg_errors = validate_config(cfg);
  if (!cfg_errors.empty()) {
    for (const std::string& e : cfg_errors) err << e << "\n";
    return exit_invalid;
  }

  ParseResult parsed = parse_instance_file(cfg.instance_path);
  if (!parsed.ok()) {
    for (const std::string& e : parsed.errors) err << cfg.instance_path << ": " << e << "\n";
    return exit_invalid;
  }
  const MslpInstance& raw = parsed.instance;

  const std::vector<std::string> violations = validate(raw);
  if (!violations.empty()) {
    for (const std::string& v : violations) err << cfg.instance_path << ": " << v << "\n";
    return exit_invalid;
  }

  const fs::path dir = resolve_out_dir(cfg);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "cannot create output directory " << dir.string() << "\n";
    return exit_invalid;
  }

  try {
    if (cfg.algorithm == "extensive") return run_extensive(raw, dir, out, err);
    if (cfg.algorithm == "sddp") return run_sddp(cfg, raw, dir, out, err);
    if (cfg.algorithm == "sdlp") return run_sdlp(cfg, raw, dir, out, err);
    return run_evaluate(cfg, raw, dir, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_solver;
  }
}

}  // namespace mslp
