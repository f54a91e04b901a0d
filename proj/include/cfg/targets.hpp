#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "cfg/domains.hpp"
#include "cfg/types.hpp"

namespace cfg {

/// N(mean, L L^T); the untruncated base of a Gaussian target.
struct GaussianProposal {
  Vec mean;
  Mat chol;  // lower-triangular factor
};

/// Equal-weight isotropic mixture; the untruncated base of a mixture target.
struct MixtureProposal {
  std::vector<Vec> centers;
  double stddev = 1.0;
};

/// Uniform on [low, high]; a draw x is kept with probability
/// exp(log_density(x) - log_bound) before the constraint test.
struct UniformBoxProposal {
  Vec low;
  Vec high;
  double log_bound = 0.0;
};

using ProposalSpec = std::variant<GaussianProposal, MixtureProposal, UniformBoxProposal>;

/// Unnormalized target on a constrained domain. The score is the smooth
/// extension of grad log p* to all of R^d.
struct TargetDistribution {
  std::string name;
  int dim = 0;
  std::function<double(const Vec&)> log_density_unnorm;
  std::function<Vec(const Vec&)> score;
  ConstraintDomain domain;
  ProposalSpec proposal;
};

struct LassoProblem {
  Mat X;            // n_obs x d design
  Vec y;            // responses
  double sigma2 = 25.0;
  Vec beta_true;
  Vec beta_ols;
  Vec beta_star;    // (X^T X + I)^-1 X^T y
  Mat precision;    // (X^T X + I) / sigma2
  double q = 1.0;
  double r = 1.0;
  double shrink = 1.0;
  std::uint64_t seed = 0;
};

TargetDistribution truncated_std_gaussian(const ConstraintDomain& domain);

/// Nine-component N(c, 0.2^2 I) mixture with centers {-1.7, 0, 1.7}^2 on the block.
TargetDistribution block_gaussian_mixture();

/// p* proportional to q on the double-moon domain.
TargetDistribution double_moon_target();

struct LassoOptions {
  int n_obs = 1000;
  int dim = 20;
  double sigma2 = 25.0;
  double shrink = 1.0;
  double q = 1.0;
  /// Test hook: drop the observation noise.
  bool noiseless = false;
};

/// y = X beta_true + eps with X_ij ~ N(0, 1), eps ~ N(0, sigma2 I) and
/// beta_true = (10, ..., 10, 0, ..., 0). The radius is shrink * ||beta_ols||_q.
LassoProblem make_synthetic_lasso(std::uint64_t seed, const LassoOptions& opts = {});

/// Posterior N(beta*, sigma2 (X^T X + I)^-1) restricted to ||beta||_q <= r.
TargetDistribution lasso_posterior(const LassoProblem& problem);

}  // namespace cfg
