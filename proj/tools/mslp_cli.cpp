// Command-line front end: subcommands map one-to-one onto run_command
// configurations; all real work lives in the library.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "mslp/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"multistage stochastic LP solver suite"};
  app.require_subcommand(1);

  mslp::RunConfig cfg;
  std::string convention = "scale";

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("instance", cfg.instance_path, "instance file")->required();
    sub->add_option("--out", cfg.out_dir, "output directory (default $MSLP_OUT_DIR, else .)");
  };

  CLI::App* sdlp = app.add_subcommand("sdlp", "sequential-sampling solver");
  add_common(sdlp);
  sdlp->add_option("--iterations", cfg.iterations, "iteration count");
  sdlp->add_option("--seed", cfg.seed, "sampling seed");
  sdlp->add_option("--sigma", cfg.sigma, "proximal weight, >= 1");
  sdlp->add_option("--q", cfg.q, "incumbent acceptance fraction, in (0, 1)");
  sdlp->add_option("--max-pieces", cfg.max_pieces, "piece cap per stage, -1 default, 0 unlimited");
  sdlp->add_option("--convention", convention, "argmax stage-cost handling: scale|add_unscaled|omit");
  sdlp->add_flag("--probe-checks", cfg.probe_checks, "check pool lower bounds every iteration");
  sdlp->add_flag("--oracle", cfg.oracle_compare, "compare against the exact optimum");
  sdlp->add_option("--replications", cfg.replications, "independent seeds, one run state each");
  sdlp->add_option("--path-log", cfg.path_log, "record every sampled path to this file");

  CLI::App* sddp = app.add_subcommand("sddp", "nested decomposition baseline");
  add_common(sddp);
  sddp->add_option("--iterations", cfg.iterations, "iteration cap");
  sddp->add_option("--seed", cfg.seed, "forward sampling seed");
  sddp->add_option("--n-paths", cfg.n_paths, "forward paths per iteration, 0 = full sweep");
  sddp->add_flag("--oracle", cfg.oracle_compare, "compare against the exact optimum");

  CLI::App* ext = app.add_subcommand("extensive", "exact deterministic equivalent");
  add_common(ext);

  CLI::App* ev = app.add_subcommand("evaluate", "policy rollouts from a state dump");
  add_common(ev);
  ev->add_option("--state", cfg.state_path, "state.json from a solver run")->required();
  ev->add_option("--policy", cfg.policy, "bfp|greedy");
  ev->add_option("--rollouts", cfg.rollouts, "rollout count");
  ev->add_option("--seed", cfg.seed, "rollout sampling seed");
  ev->add_flag("--oracle", cfg.oracle_compare, "compare against the exact optimum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mslp::exit_invalid;
  }

  if (convention == "scale") cfg.convention = mslp::CostConvention::Scale;
  else if (convention == "add_unscaled") cfg.convention = mslp::CostConvention::AddUnscaled;
  else if (convention == "omit") cfg.convention = mslp::CostConvention::Omit;
  else {
    std::cerr << "unknown convention '" << convention << "'\n";
    return mslp::exit_invalid;
  }

  cfg.algorithm = app.get_subcommands().front()->get_name();
  return mslp::run_command(cfg, std::cout, std::cerr);
}
