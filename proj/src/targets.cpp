#include "cfg/targets.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace cfg {

TargetDistribution truncated_std_gaussian(const ConstraintDomain& domain) {
  TargetDistribution t;
  t.name = "trunc_gauss";
  t.dim = domain.dim;
  t.log_density_unnorm = [](const Vec& x) { return -0.5 * x.squaredNorm(); };
  t.score = [](const Vec& x) -> Vec { return -x; };
  t.domain = domain;
  t.proposal = GaussianProposal{Vec::Zero(domain.dim), Mat::Identity(domain.dim, domain.dim)};
  return t;
}

TargetDistribution block_gaussian_mixture() {
  std::vector<Vec> centers;
  for (double a : {-1.7, 0.0, 1.7}) {
    for (double b : {-1.7, 0.0, 1.7}) centers.push_back((Vec(2) << a, b).finished());
  }
  static constexpr double kStd = 0.2;
  static constexpr double kVar = kStd * kStd;

  // Log-sum-exp over components; returns the responsibilities in `resp` when given.
  auto log_mix = [centers](const Vec& x, std::vector<double>* resp) {
    std::vector<double> logits(centers.size());
    for (std::size_t j = 0; j < centers.size(); ++j) {
      logits[j] = -0.5 * (x - centers[j]).squaredNorm() / kVar;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& l : logits) {
      l = std::exp(l - mx);
      sum += l;
    }
    if (resp) {
      resp->resize(logits.size());
      for (std::size_t j = 0; j < logits.size(); ++j) (*resp)[j] = logits[j] / sum;
    }
    return mx + std::log(sum);
  };

  TargetDistribution t;
  t.name = "block_mixture";
  t.dim = 2;
  t.log_density_unnorm = [log_mix](const Vec& x) { return log_mix(x, nullptr); };
  t.score = [log_mix, centers](const Vec& x) -> Vec {
    std::vector<double> resp;
    log_mix(x, &resp);
    Vec s = Vec::Zero(2);
    for (std::size_t j = 0; j < centers.size(); ++j) s += resp[j] * (centers[j] - x);
    return s / kVar;
  };
  t.domain = make_block();
  t.proposal = MixtureProposal{centers, kStd};
  return t;
}

TargetDistribution double_moon_target() {
  TargetDistribution t;
  t.name = "double_moon";
  t.dim = 2;
  t.log_density_unnorm = [](const Vec& x) { return double_moon_log_q(x); };
  t.score = [](const Vec& x) -> Vec { return double_moon_grad_log_q(x); };
  t.domain = make_double_moon();
  // The domain requires |(|x| - 3)| <= 1, so it sits inside [-4, 4]^2, and
  // log q never exceeds log(1 + e^-72).
  t.proposal = UniformBoxProposal{Vec::Constant(2, -4.0), Vec::Constant(2, 4.0), 1e-9};
  return t;
}

LassoProblem make_synthetic_lasso(std::uint64_t seed, const LassoOptions& opts) {
  if (opts.n_obs < opts.dim || opts.dim < 1) {
    throw std::invalid_argument("lasso needs n_obs >= dim >= 1");
  }
  if (!(opts.shrink > 0.0 && opts.shrink <= 1.0)) {
    throw std::invalid_argument("lasso shrinkage factor must lie in (0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  LassoProblem p;
  p.seed = seed;
  p.sigma2 = opts.sigma2;
  p.q = opts.q;
  p.shrink = opts.shrink;
  p.X.resize(opts.n_obs, opts.dim);
  for (int j = 0; j < opts.dim; ++j) {
    for (int i = 0; i < opts.n_obs; ++i) p.X(i, j) = normal(rng);
  }
  p.beta_true = Vec::Zero(opts.dim);
  p.beta_true.head(opts.dim / 2).setConstant(10.0);
  Vec noise(opts.n_obs);
  const double sd = std::sqrt(opts.sigma2);
  for (int i = 0; i < opts.n_obs; ++i) noise[i] = sd * normal(rng);
  if (opts.noiseless) noise.setZero();
  p.y = p.X * p.beta_true + noise;

  const Mat gram = p.X.transpose() * p.X;
  const Vec xty = p.X.transpose() * p.y;
  p.beta_ols = gram.ldlt().solve(xty);
  const Mat ridge = gram + Mat::Identity(opts.dim, opts.dim);
  p.beta_star = ridge.ldlt().solve(xty);
  p.precision = ridge / opts.sigma2;

  const double norm = opts.q == 1.0
                          ? p.beta_ols.lpNorm<1>()
                          : std::pow(p.beta_ols.cwiseAbs().array().pow(opts.q).sum(), 1.0 / opts.q);
  p.r = opts.shrink * norm;
  return p;
}

TargetDistribution lasso_posterior(const LassoProblem& problem) {
  const int d = static_cast<int>(problem.beta_star.size());
  TargetDistribution t;
  t.name = "lasso";
  t.dim = d;
  const Vec mean = problem.beta_star;
  const Mat prec = problem.precision;
  t.log_density_unnorm = [mean, prec](const Vec& b) {
    const Vec diff = b - mean;
    return -0.5 * diff.dot(prec * diff);
  };
  t.score = [mean, prec](const Vec& b) -> Vec { return -prec * (b - mean); };
  t.domain = make_lq_ball(problem.q, problem.r, d);
  // Covariance sigma2 (X^T X + I)^-1 = prec^-1.
  const Mat cov = prec.inverse();
  t.proposal = GaussianProposal{mean, cov.llt().matrixL()};
  return t;
}

}  // namespace cfg
