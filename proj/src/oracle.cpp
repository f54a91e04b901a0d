#include "cfg/oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "cfg/parallel.hpp"

namespace cfg {

namespace {

constexpr long kDrawBudget = 10'000'000;
constexpr double kMinAcceptance = 1e-6;

Vec standard_normal(Rng& rng, int d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec z(d);
  for (int i = 0; i < d; ++i) z[i] = normal(rng);
  return z;
}

// One draw from the proposal; `keep` reports the within-proposal acceptance
// step used by the uniform-box proposal.
Vec draw(const ProposalSpec& proposal, const TargetDistribution& target, Rng& rng, bool& keep) {
  keep = true;
  return std::visit(
      [&](const auto& p) -> Vec {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GaussianProposal>) {
          return p.mean + p.chol * standard_normal(rng, static_cast<int>(p.mean.size()));
        } else if constexpr (std::is_same_v<P, MixtureProposal>) {
          std::uniform_int_distribution<std::size_t> pick(0, p.centers.size() - 1);
          const Vec& c = p.centers[pick(rng)];
          return c + p.stddev * standard_normal(rng, static_cast<int>(c.size()));
        } else {
          std::uniform_real_distribution<double> unif(0.0, 1.0);
          Vec x(p.low.size());
          for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = p.low[i] + (p.high[i] - p.low[i]) * unif(rng);
          keep = std::log(unif(rng)) < target.log_density_unnorm(x) - p.log_bound;
          return x;
        }
      },
      proposal);
}

double truncated_normal(Rng& rng, double mean, double lo, double hi) {
  std::normal_distribution<double> normal(mean, 1.0);
  for (;;) {
    const double v = normal(rng);
    if (v >= lo && v <= hi) return v;
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Points rejection_sample(const TargetDistribution& target, long n, std::uint64_t seed,
                        const ProposalSpec& proposal, RejectionStats* stats) {
  if (n < 0) throw std::invalid_argument("rejection_sample needs n >= 0");
  Rng rng(seed);
  Points out(target.dim, n);
  RejectionStats st;
  while (st.accepted < n) {
    bool keep = true;
    Vec x = draw(proposal, target, rng, keep);
    ++st.drawn;
    if (keep && target.domain.g(x) <= 0.0) out.col(st.accepted++) = x;
    if (st.drawn >= kDrawBudget && st.acceptance_rate() < kMinAcceptance) {
      std::ostringstream msg;
      msg << "rejection sampling for '" << target.name << "' accepted " << st.accepted << " of "
          << st.drawn << " draws (rate " << st.acceptance_rate() << " < " << kMinAcceptance << ")";
      throw std::runtime_error(msg.str());
    }
  }
  if (stats) *stats = st;
  return out;
}

Points rejection_sample(const TargetDistribution& target, long n, std::uint64_t seed,
                        RejectionStats* stats) {
  return rejection_sample(target, n, seed, target.proposal, stats);
}

double boundary_quadrature(const ConstraintDomain& domain, const ScalarField& density_unnorm,
                           const VectorField& velocity, int resolution) {
  if (domain.name != "block") {
    throw std::invalid_argument("boundary_quadrature supports the block domain only");
  }
  if (resolution < 1) throw std::invalid_argument("quadrature resolution must be positive");
  constexpr double kHalf = 2.0;
  const double step = 2.0 * kHalf / resolution;
  auto node = [&](int k) { return -kHalf + (k + 0.5) * step; };

  std::vector<double> column_mass(static_cast<std::size_t>(resolution), 0.0);
  parallel_for(static_cast<std::size_t>(resolution), [&](std::size_t lo, std::size_t hi) {
    Vec x(2);
    for (std::size_t i = lo; i < hi; ++i) {
      x[0] = node(static_cast<int>(i));
      double s = 0.0;
      for (int j = 0; j < resolution; ++j) {
        x[1] = node(j);
        s += density_unnorm(x);
      }
      column_mass[i] = s;
    }
  });
  double mass = 0.0;
  for (double c : column_mass) mass += c;
  mass *= step * step;

  double flux = 0.0;
  Vec x(2), normal(2);
  for (int axis = 0; axis < 2; ++axis) {
    for (double side : {-1.0, 1.0}) {
      normal.setZero();
      normal[axis] = side;
      for (int k = 0; k < resolution; ++k) {
        x[axis] = side * kHalf;
        x[1 - axis] = node(k);
        flux += density_unnorm(x) * velocity(x).dot(normal);
      }
    }
  }
  return flux * step / mass;
}

double boundary_mc_estimate(const ConstraintDomain& domain, const Points& samples,
                            const VectorField& velocity, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  long n_in = 0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    const Vec x = samples.col(i);
    if (domain.g(x) > 0.0) continue;
    ++n_in;
    if (in_band(domain, x, h)) sum += velocity(x).dot(domain.unit_normal(x));
  }
  if (n_in == 0) throw std::invalid_argument("no samples inside the domain");
  return sum / (static_cast<double>(n_in) * h);
}

double boundary_mc_estimate(const ConstraintDomain& domain, const Sampler& sampler,
                            const VectorField& velocity, long n, double h, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("boundary_mc_estimate needs n >= 1");
  Rng rng(seed);
  return boundary_mc_estimate(domain, sampler(rng, n), velocity, h);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope needs two equal-length series of length >= 2");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

MseExperiment mse_slope_experiment(const ConstraintDomain& domain, const ScalarField& density,
                                   const Sampler& sampler, const VectorField& velocity,
                                   const MseOptions& opts) {
  if (opts.n_list.size() < 2 || opts.trials < 1) {
    throw std::invalid_argument("mse_slope_experiment needs >= 2 sample sizes and >= 1 trial");
  }
  MseExperiment ex;
  ex.n_list = opts.n_list;
  ex.true_value = boundary_quadrature(domain, density, velocity, opts.quadrature_resolution);
  const double h_fixed = adaptive_bandwidth(opts.h0, domain.dim, opts.n_list.front());
  for (std::size_t ni = 0; ni < opts.n_list.size(); ++ni) {
    const long n = opts.n_list[ni];
    const double h = opts.fixed_h ? h_fixed : adaptive_bandwidth(opts.h0, domain.dim, n);
    std::vector<double> est(static_cast<std::size_t>(opts.trials));
    parallel_for(est.size(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t t = lo; t < hi; ++t) {
        const std::uint64_t seed = derive_seed(derive_seed(opts.seed, ni), t);
        est[t] = boundary_mc_estimate(domain, sampler, velocity, n, h, seed);
      }
    });
    double mse = 0.0;
    for (std::size_t t = 0; t < est.size(); ++t) {
      const double se = (est[t] - ex.true_value) * (est[t] - ex.true_value);
      mse += se;
      ex.rows.push_back({n, h, static_cast<int>(t), est[t], ex.true_value, se});
    }
    ex.mse.push_back(mse / static_cast<double>(opts.trials));
  }
  std::vector<double> ns(opts.n_list.begin(), opts.n_list.end());
  ex.slope = loglog_slope(ns, ex.mse);
  return ex;
}

ScalarField block_density(int which) {
  switch (which) {
    case 1:
      return [](const Vec&) { return 1.0; };
    case 2:
      return [](const Vec& x) { return std::exp(-0.5 * x.squaredNorm()); };
    case 3:
      return [](const Vec& x) {
        return std::exp(-0.5 * (x[0] * x[0] + (x[1] + 2.0) * (x[1] + 2.0)));
      };
    default:
      throw std::invalid_argument("block density index must be 1, 2 or 3");
  }
}

Sampler block_sampler(int which) {
  if (which < 1 || which > 3) throw std::invalid_argument("block sampler index must be 1, 2 or 3");
  return [which](Rng& rng, long n) {
    Points out(2, n);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (long i = 0; i < n; ++i) {
      if (which == 1) {
        out(0, i) = unif(rng);
        out(1, i) = unif(rng);
      } else {
        out(0, i) = truncated_normal(rng, 0.0, -2.0, 2.0);
        out(1, i) = truncated_normal(rng, which == 2 ? 0.0 : -2.0, -2.0, 2.0);
      }
    }
    return out;
  };
}

VectorField block_velocity(int which) {
  switch (which) {
    case 1: {
      const ConstraintDomain block = make_block();
      return [block](const Vec& x) -> Vec { return block.unit_normal(x); };
    }
    case 2:
      return [](const Vec& x) -> Vec { return (Vec(2) << x[1], x[0]).finished(); };
    case 3:
      return [](const Vec& x) -> Vec { return (Vec(2) << x[1] * x[1], x[0] * x[0]).finished(); };
    default:
      throw std::invalid_argument("block velocity index must be 1, 2 or 3");
  }
}

Vec finite_diff_gradient(const ScalarField& fn, const Vec& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  Vec grad(x.size());
  Vec xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    xm[i] = x[i] - step;
    grad[i] = (fn(xp) - fn(xm)) / (2.0 * step);
    xp[i] = xm[i] = x[i];
  }
  return grad;
}

Mat finite_diff_jacobian(const VectorField& fn, const Vec& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  Vec xp = x, xm = x;
  Mat jac;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    xm[i] = x[i] - step;
    const Vec col = (fn(xp) - fn(xm)) / (2.0 * step);
    if (i == 0) jac.resize(col.size(), x.size());
    jac.col(i) = col;
    xp[i] = xm[i] = x[i];
  }
  return jac;
}

}  // namespace cfg
