#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfg/domains.hpp"
#include "cfg/flow.hpp"
#include "cfg/metrics.hpp"
#include "cfg/net.hpp"
#include "cfg/targets.hpp"
#include "cfg/types.hpp"

namespace cfg {

struct DomainSpec {
  std::string name = "ring";
  std::optional<double> q;
  std::optional<double> r;
  std::optional<int> dim;
};

struct TargetSpec {
  std::string name = "trunc_gauss";
  // lasso only
  std::uint64_t seed = 0;
  double s = 1.0;
  double q = 1.0;
};

struct InitSpec {
  enum class Kind { Gaussian, Uniform };
  Kind kind = Kind::Gaussian;
  Vec mean;       // gaussian; broadcast when of size 1
  double std = 1.0;
  Vec low, high;  // uniform box; broadcast when of size 1
};

struct BandwidthSpec {
  bool adaptive = false;
  double h = 0.05;   // fixed bandwidth
  double h0 = 0.1;   // adaptive: h = h0 (d N)^(-1/3)
};

struct RunConfig {
  DomainSpec domain;
  TargetSpec target;
  long N = 1000;
  InitSpec init;
  std::vector<int> f_hidden{128, 128};
  std::vector<int> z_hidden{128, 128};
  double lambda = 1.0;
  BandwidthSpec bandwidth;
  long L = 2000;
  long L_inner = 10;
  double alpha = 0.005;
  double eta = 0.002;
  std::uint64_t seed = 0;
  long snapshot_every = 100;
  std::string out_dir = "out";
  /// Optional reference sample file enabling the w2/energy metric columns.
  std::string truth_path;
  bool use_boundary_term = true;
  bool use_z_net = true;
  /// Reset the Adam moments at every outer iteration.
  bool reset_adam = false;
  AdamOptions adam;
  SinkhornOptions sinkhorn;

  /// Throws ConfigError naming the first violated field.
  void validate() const;
};

/// Domain and target materialized from a config.
struct Problem {
  ConstraintDomain domain;
  TargetDistribution target;
  std::optional<LassoProblem> lasso;
};

Problem build_problem(const RunConfig& config);

/// Bandwidth in effect for the config (fixed, or adaptive in d and N).
double effective_bandwidth(const RunConfig& config, int dim);

struct Ensemble {
  Points positions;
  long iteration = 0;
  std::uint64_t seed = 0;
};

Ensemble init_ensemble(const RunConfig& config, int dim);

using VelocityClosure = std::function<Points(const Points&)>;

/// x <- x + alpha v(x) for every particle, with v evaluated once on the
/// current positions.
Ensemble step_particles(const Ensemble& ensemble, const VelocityClosure& velocity, double alpha);

struct Snapshot {
  long iter = 0;
  Points positions;
};

struct MetricsRow {
  long iter = 0;
  std::optional<double> rsd_loss;
  double ratio_out = 0.0;
  std::optional<double> w2_sinkhorn;
  std::optional<double> energy;
};

struct RunArtifacts {
  std::vector<Snapshot> snapshots;
  std::vector<MetricsRow> metrics;
  /// Fraction of particles with g <= 0 before the first and after every step.
  std::vector<double> inside_fraction;
  Points final_positions;
  MlpParams f;
  MlpParams z;
  double bandwidth = 0.0;
};

struct RunHooks {
  /// Reference samples for the w2/energy columns; metrics are skipped when empty.
  std::optional<Points> truth;
  /// Called after every outer iteration with the iteration count.
  std::function<void(long)> progress;
};

/// Constrained functional gradient sampler: alternate L_inner Adam steps on the
/// empirical RSD over inside particles with one Euler step of every particle.
/// Throws NumericalError on non-finite positions or loss.
RunArtifacts cfg_run(const RunConfig& config, const RunHooks& hooks = {});

}  // namespace cfg
