#ifndef MSLP_IO_HPP
#define MSLP_IO_HPP

// Plumbing around the solvers: the sectioned text instance format, JSON run
// state dumps, versioned CSV traces, and the command runner behind the CLI.
//
// Numeric text is shortest round-trip decimal everywhere, so write -> read is
// bit-exact and identical inputs produce byte-identical artifacts. Wall-clock
// times are kept out of the deterministic artifacts (trace, state, report)
// and live in a timing sidecar and the human summary only.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mslp/instance.hpp"
#include "mslp/sddp.hpp"
#include "mslp/sdlp.hpp"

namespace mslp {

// shortest decimal that parses back to exactly v
std::string format_double(double v);

// ---- instance files ----
//
// Line-oriented, '#' comments, blank lines free. Canonical layout:
//
//   mslp 1
//   name <string>
//   T <int>
//   dims <nx> <nu> <m>        one line per stage, 0..T
//   x0 <nx_0 numbers>
//
//   stage <t>                 numerics of stage t
//     shift <number>
//     c <nx numbers>
//     d <nu numbers>
//     D <nu numbers>          m rows, row-major
//     b <m numbers>
//     C <nx numbers>          m rows
//
//   obs <t> <probability>     one block per stage-t observation, t >= 1
//     a <nx_t numbers>
//     A <nx_{t-1} numbers>    nx_t rows
//     B <nu_{t-1} numbers>    nx_t rows
//     b <m_t numbers>         optional rhs override; b and C together or
//     C <nx_t numbers>        not at all

struct ParseResult {
  MslpInstance instance;
  std::vector<std::string> errors;  // "line N: ..." or instance-level messages
  bool ok() const { return errors.empty(); }
};

ParseResult parse_instance_text(const std::string& text);
ParseResult parse_instance_file(const std::string& path);

// canonical form; write(parse(write(x))) == write(x) byte for byte
std::string write_instance(const MslpInstance& in);

// ---- run state dumps ----
//
// JSON documents tagged with schema "mslp.state.v1" and an "algorithm"
// discriminator; they carry everything the iteration loop reads across
// iterations, so a reloaded state reproduces the continuation bit for bit.
// The instance itself is not embedded: loading binds a caller-supplied
// instance after checking name and dimensions.

std::string dump_state(const SdlpRunState& run);
std::string dump_state(const SddpResult& res, const MslpInstance& in);

struct SddpState {
  Eigen::VectorXd u0;
  CutPools pools;
  double lower_bound = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct LoadedState {
  std::string algorithm;  // "sdlp" or "sddp"
  SdlpRunState sdlp;      // bound to the passed instance when algorithm == "sdlp"
  SddpState sddp;
  std::uint64_t source_seed = 0;  // sampling stream position for continuation
  int source_drawn = 0;
};

// errors collects mismatches (schema, instance identity, shapes); on any
// error the returned state must not be used
LoadedState load_state(const std::string& text, const MslpInstance& in,
                       std::vector<std::string>& errors);

// ---- versioned CSV artifacts ----

std::string sdlp_trace_csv(const std::vector<SdlpTraceRow>& rows, int T);
std::string sdlp_timing_csv(const std::vector<SdlpTraceRow>& rows);
std::string sddp_trace_csv(const std::vector<double>& lower_bounds);
std::string sddp_timing_csv(const std::vector<double>& wall_seconds);
std::string paths_csv(const std::vector<SamplePath>& paths, int T);

// ---- diagnostics ----

// compares each non-terminal pool against a fresh one-step solve over the
// pooled observations at the latest trajectory states; terminal pieces are
// checked against exact terminal LPs
struct ProbeReport {
  int checks = 0;
  int violations = 0;
  double worst = 0.0;  // largest pool-over-truth excess seen
};
ProbeReport probe_lower_bounds(const SdlpRunState& run, double tol = 1e-6);

// stage-0 cost of u0 plus the exact expected remaining-horizon value
double true_root_value(const MslpInstance& in, const Eigen::VectorXd& u0);

// ---- command runner ----

inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 2;        // config or instance rejected
inline constexpr int exit_solver = 3;         // solver failure mid-run
inline constexpr int exit_not_converged = 4;  // advisory, see README

struct RunConfig {
  std::string algorithm;  // sdlp | sddp | extensive | evaluate
  std::string instance_path;
  std::string out_dir;  // empty: $MSLP_OUT_DIR, else "."
  std::uint64_t seed = 0;

  int iterations = 2000;  // sdlp iterations / sddp iteration cap
  double sigma = 1.0;
  double q = 0.2;
  int max_pieces = -1;
  CostConvention convention = CostConvention::Scale;
  int n_paths = 0;  // sddp forward paths per iteration, 0 = full sweep
  bool probe_checks = false;
  bool oracle_compare = false;
  int replications = 1;
  std::string path_log;  // sdlp: record every sampled path here

  std::string state_path;     // evaluate: dump to load
  std::string policy = "bfp"; // evaluate: bfp | greedy
  int rollouts = 1000;        // evaluate
};

std::vector<std::string> validate_config(const RunConfig& cfg);

// runs one command end to end, writing artifacts under the output directory
// and the human summary to out; returns the process exit code
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace mslp

#endif
