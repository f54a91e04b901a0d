#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cfg/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Constrained functional gradient sampler"};
  app.require_subcommand(1);

  cfg::RunCommand run;
  std::uint64_t run_seed = 0;
  std::string run_out;
  auto* run_cmd = app.add_subcommand("run", "Run the sampler from a JSON config");
  run_cmd->add_option("--config", run.config_path, "Config file")->required();
  auto* seed_opt = run_cmd->add_option("--seed", run_seed, "Override the seed");
  auto* out_opt = run_cmd->add_option("--out-dir", run_out, "Override the output directory");
  run_cmd->add_option("--override", run.overrides, "key=value, repeatable (dotted keys allowed)");
  run_cmd->add_flag("--progress", run.progress, "Print progress to stderr");

  cfg::VerifyBoundaryCommand verify;
  double max_n = 1e6;
  auto* verify_cmd = app.add_subcommand("verify-boundary", "Boundary-integral estimator study on the block");
  verify_cmd->add_option("--max-n", max_n, "Largest sample size (decades from 100)");
  verify_cmd->add_option("--trials", verify.trials, "Trials per sample size");
  verify_cmd->add_flag("--fixed-h", verify.fixed_h, "Compare against frozen bandwidths");
  verify_cmd->add_option("--out-dir", verify.out_dir, "Output directory");
  verify_cmd->add_option("--seed", verify.seed, "Base seed");
  verify_cmd->add_option("--resolution", verify.resolution, "Quadrature nodes per face");

  cfg::MetricsCommand metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "Compare a snapshot file against a truth file");
  metrics_cmd->add_option("--snapshot", metrics.snapshot_path, "Snapshot CSV (last iteration used)")->required();
  metrics_cmd->add_option("--truth", metrics.truth_path, "Reference sample CSV")->required();
  metrics_cmd->add_option("--domain", metrics.domain, "Domain name for ratio_out");
  metrics_cmd->add_option("--eps-rel", metrics.eps_rel, "Sinkhorn regularization (fraction of mean cost)");
  metrics_cmd->add_flag("!--plain-sinkhorn", metrics.debiased, "Report the plain entropic transport cost");
  metrics_cmd->add_option("--seed", metrics.seed, "Subsampling seed");

  cfg::OracleSampleCommand oracle;
  auto* oracle_cmd = app.add_subcommand("oracle-sample", "Rejection-sample the config's target to a CSV");
  oracle_cmd->add_option("--config", oracle.config_path, "Config file")->required();
  oracle_cmd->add_option("--override", oracle.overrides, "key=value, repeatable");
  oracle_cmd->add_option("--n", oracle.n, "Number of samples");
  oracle_cmd->add_option("--seed", oracle.seed, "Seed");
  oracle_cmd->add_option("--out", oracle.out_path, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cfg::kExitUsage;
  }

  if (*run_cmd) {
    if (*seed_opt) run.seed = run_seed;
    if (*out_opt) run.out_dir = run_out;
    return cfg::cmd_run(run, std::cout, std::cerr);
  }
  if (*verify_cmd) {
    verify.max_n = static_cast<long>(max_n);
    return cfg::cmd_verify_boundary(verify, std::cout, std::cerr);
  }
  if (*metrics_cmd) return cfg::cmd_metrics(metrics, std::cout, std::cerr);
  return cfg::cmd_oracle_sample(oracle, std::cout, std::cerr);
}
