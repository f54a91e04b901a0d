#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cfg/domains.hpp"
#include "cfg/targets.hpp"
#include "cfg/types.hpp"

namespace cfg {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct RejectionStats {
  long accepted = 0;
  long drawn = 0;
  double acceptance_rate() const { return drawn ? static_cast<double>(accepted) / drawn : 0.0; }
};

/// Draws from the proposal and keeps draws with g <= 0 until n are accepted.
/// Aborts when the acceptance rate is below 1e-6 after 1e7 draws.
Points rejection_sample(const TargetDistribution& target, long n, std::uint64_t seed,
                        const ProposalSpec& proposal, RejectionStats* stats = nullptr);

/// Uses the target's own proposal.
Points rejection_sample(const TargetDistribution& target, long n, std::uint64_t seed,
                        RejectionStats* stats = nullptr);

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;
using Sampler = std::function<Points(Rng&, long)>;

/// Surface integral of p (v . n) over the boundary of the block domain, with p
/// normalized over the block. Composite midpoint rule: `resolution` nodes per
/// face and resolution^2 cells for the normalizer.
double boundary_quadrature(const ConstraintDomain& domain, const ScalarField& density_unnorm,
                           const VectorField& velocity, int resolution);

/// Band-wise estimate (1 / (n_in h)) sum_band v(x) . grad g / |grad g| over n
/// draws from `sampler`; n_in counts draws with g <= 0.
double boundary_mc_estimate(const ConstraintDomain& domain, const Sampler& sampler,
                            const VectorField& velocity, long n, double h, std::uint64_t seed);

/// Same estimator on a fixed sample set.
double boundary_mc_estimate(const ConstraintDomain& domain, const Points& samples,
                            const VectorField& velocity, double h);

struct MseRow {
  long n = 0;
  double h = 0.0;
  int trial = 0;
  double estimate = 0.0;
  double true_value = 0.0;
  double squared_error = 0.0;
};

struct MseExperiment {
  std::vector<long> n_list;
  std::vector<double> mse;
  std::vector<MseRow> rows;
  double slope = 0.0;
  double true_value = 0.0;
};

struct MseOptions {
  std::vector<long> n_list{100, 1000, 10000, 100000};
  /// Base bandwidth; h = h0 (d N)^(-1/3).
  double h0 = 0.5 * std::cbrt(2.0);
  int trials = 10;
  std::uint64_t seed = 0;
  /// Freeze h at its value for the first entry of n_list.
  bool fixed_h = false;
  int quadrature_resolution = 2000;
};

MseExperiment mse_slope_experiment(const ConstraintDomain& domain, const ScalarField& density,
                                   const Sampler& sampler, const VectorField& velocity,
                                   const MseOptions& opts);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Densities p1..p3 on the block: uniform, N(0, I), N((0, -2), I).
ScalarField block_density(int which);
/// Exact samplers for the truncated block densities.
Sampler block_sampler(int which);
/// Velocities v1..v3: outward unit normal, (x2, x1), (x2^2, x1^2).
VectorField block_velocity(int which);

/// Central differences of a scalar function.
Vec finite_diff_gradient(const ScalarField& fn, const Vec& x, double step);

/// Central differences of a vector function; column k holds d fn / d x_k.
Mat finite_diff_jacobian(const VectorField& fn, const Vec& x, double step);

}  // namespace cfg
