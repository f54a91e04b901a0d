#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cfg {

/// Process exit codes shared by all subcommands.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitNumerical = 3 };

struct RunCommand {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> overrides;
  bool progress = false;
};

/// Runs the sampler and writes snapshots.csv, metrics.csv and manifest.json
/// (last) under out_dir.
int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err);

struct VerifyBoundaryCommand {
  long max_n = 1'000'000;
  int trials = 10;
  bool fixed_h = false;
  std::string out_dir = "verify_boundary";
  std::uint64_t seed = 0;
  int resolution = 2000;
  /// h0 d^(-1/3).
  double h_scale = 0.5;
};

/// Band-wise boundary estimator study on the block (3 densities x 3 velocities).
int cmd_verify_boundary(const VerifyBoundaryCommand& cmd, std::ostream& out, std::ostream& err);

struct MetricsCommand {
  std::string snapshot_path;
  std::string truth_path;
  /// Optional domain for ratio_out ("" to skip).
  std::string domain;
  double eps_rel = 0.01;
  /// Sinkhorn divergence (true) or the plain entropic transport cost.
  bool debiased = true;
  std::uint64_t seed = 0;
};

/// Prints the metric report of the last snapshot against the truth file as JSON.
int cmd_metrics(const MetricsCommand& cmd, std::ostream& out, std::ostream& err);

struct OracleSampleCommand {
  std::string config_path;
  std::vector<std::string> overrides;
  long n = 10000;
  std::uint64_t seed = 0;
  std::string out_path;
};

/// Rejection samples from the config's target and writes a snapshot-format CSV.
int cmd_oracle_sample(const OracleSampleCommand& cmd, std::ostream& out, std::ostream& err);

}  // namespace cfg
