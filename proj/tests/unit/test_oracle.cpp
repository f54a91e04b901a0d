#include <cmath>
#include <random>

#include "cfg/oracle.hpp"
#include "doctest.h"

using namespace cfg;

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("finite differences") {
  Vec x(3);
  x << 0.3, -1.2, 2.0;
  const Vec g = finite_diff_gradient([](const Vec& y) { return 0.5 * y.squaredNorm(); }, x, 1e-4);
  CHECK((g - x).norm() < 1e-9);
  Mat a(2, 3);
  a << 1, 2, 3, -4, 5, 0.5;
  const Mat j = finite_diff_jacobian([&](const Vec& y) -> Vec { return a * y; }, x, 1e-3);
  CHECK((j - a).norm() < 1e-10);
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 10, 100}, {3, 3, 3}) == doctest::Approx(0.0));
  CHECK(loglog_slope({1, 10, 100, 1000}, {1, 0.01, 1e-4, 1e-6}) == doctest::Approx(-2.0));
  CHECK_THROWS(loglog_slope({1}, {1}));
}

TEST_CASE("block boundary quadrature reproduces the reference table") {
  const auto block = make_block();
  const double ref[3][3] = {{1.0, 0.0, 0.0}, {0.226259, 0.0, 0.0}, {0.911333, 0.0, -0.617187}};
  for (int p = 1; p <= 3; ++p) {
    for (int v = 1; v <= 3; ++v) {
      CAPTURE(p);
      CAPTURE(v);
      const double q = boundary_quadrature(block, block_density(p), block_velocity(v), 2000);
      CHECK(q == doctest::Approx(ref[p - 1][v - 1]).epsilon(1e-4));
    }
  }
}

TEST_CASE("quadrature converges at second order") {
  const auto block = make_block();
  for (auto [p, v] : {std::pair{2, 1}, std::pair{3, 3}, std::pair{3, 1}}) {
    const double fine = boundary_quadrature(block, block_density(p), block_velocity(v), 4096);
    const double e1 = std::abs(boundary_quadrature(block, block_density(p), block_velocity(v), 16) - fine);
    const double e2 = std::abs(boundary_quadrature(block, block_density(p), block_velocity(v), 32) - fine);
    CAPTURE(p);
    CAPTURE(v);
    CHECK(e1 / e2 >= 3.0);
    CHECK(e1 / e2 <= 5.0);
  }
}

TEST_CASE("block samplers stay in the block and match the densities' moments") {
  const auto block = make_block();
  for (int p = 1; p <= 3; ++p) {
    Rng rng(static_cast<std::uint64_t>(p));
    const Points x = block_sampler(p)(rng, 40000);
    CHECK(x.cwiseAbs().maxCoeff() <= 2.0);
    // E[x2] under the density by quadrature on a midpoint grid
    const auto dens = block_density(p);
    const int n = 400;
    double z = 0.0, m = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Vec y(2);
        y << -2.0 + 4.0 * (i + 0.5) / n, -2.0 + 4.0 * (j + 0.5) / n;
        z += dens(y);
        m += dens(y) * y[1];
      }
    }
    const double mean = x.row(1).mean();
    const double se = std::sqrt((x.row(1).array() - mean).square().mean() / x.cols());
    CHECK(std::abs(mean - m / z) < 4.0 * se);
  }
}

TEST_CASE("band estimator") {
  const auto block = make_block();
  // one sample inside but outside the band
  Points one = Points::Zero(2, 1);
  CHECK(boundary_mc_estimate(block, one, block_velocity(1), 0.1) == 0.0);
  CHECK_THROWS(boundary_mc_estimate(block, Points::Constant(2, 1, 5.0), block_velocity(1), 0.1));
  // uniform density, outward normal: estimate is close to 1 at large N
  const long n = 1'000'000;
  const double h = adaptive_bandwidth(0.5 * std::cbrt(2.0), 2, n);
  CHECK(h == doctest::Approx(0.5 * std::pow(2e6, -1.0 / 3.0) * std::cbrt(2.0)));
  const double est = boundary_mc_estimate(block, block_sampler(1), block_velocity(1), n, h, 7);
  CHECK(est == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("band estimator is consistent") {
  const auto block = make_block();
  int wins = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const double small = boundary_mc_estimate(block, block_sampler(2), block_velocity(1), 1000,
                                              adaptive_bandwidth(0.5 * std::cbrt(2.0), 2, 1000), s);
    const double large = boundary_mc_estimate(block, block_sampler(2), block_velocity(1), 1'000'000,
                                              adaptive_bandwidth(0.5 * std::cbrt(2.0), 2, 1'000'000), s + 100);
    if (std::abs(large - 0.226259) < std::abs(small - 0.226259)) ++wins;
  }
  CHECK(wins >= 9);
}

TEST_CASE("mse experiment") {
  const auto block = make_block();
  MseOptions o;
  o.n_list = {100, 1000, 10000};
  o.trials = 6;
  o.quadrature_resolution = 400;
  o.seed = 3;
  const auto ex = mse_slope_experiment(block, block_density(1), block_sampler(1), block_velocity(1), o);
  CHECK(ex.rows.size() == 18);
  CHECK(ex.mse.size() == 3);
  CHECK(ex.true_value == doctest::Approx(1.0));
  CHECK(ex.slope < -0.3);
  for (const auto& r : ex.rows) {
    CHECK(r.squared_error == doctest::Approx((r.estimate - r.true_value) * (r.estimate - r.true_value)));
  }
  // reproducible
  const auto again = mse_slope_experiment(block, block_density(1), block_sampler(1), block_velocity(1), o);
  CHECK(again.mse == ex.mse);
  // frozen bandwidth
  o.fixed_h = true;
  const auto fixed = mse_slope_experiment(block, block_density(1), block_sampler(1), block_velocity(1), o);
  for (const auto& r : fixed.rows) CHECK(r.h == fixed.rows.front().h);
}

TEST_CASE("rejection sampling") {
  const auto target = block_gaussian_mixture();
  RejectionStats stats;
  const Points x = rejection_sample(target, 20000, 5, &stats);
  CHECK(x.cols() == 20000);
  CHECK(stats.accepted == 20000);
  CHECK(stats.drawn >= stats.accepted);
  for (Eigen::Index i = 0; i < x.cols(); ++i) REQUIRE(target.domain.contains(x.col(i)));
  // moments of the mixture restricted to the block by quadrature
  const int n = 600;
  double z = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vec y(2);
      y << -2.0 + 4.0 * (i + 0.5) / n, -2.0 + 4.0 * (j + 0.5) / n;
      const double w = std::exp(target.log_density_unnorm(y));
      z += w;
      m2 += w * y[0] * y[0];
    }
  }
  // pooled over five seeds so a single 3-sigma draw does not decide the check
  Eigen::ArrayXd sq(5 * x.cols());
  for (int s = 0; s < 5; ++s) {
    const Points xs = s == 0 ? x : rejection_sample(target, 20000, 5 + static_cast<std::uint64_t>(s));
    sq.segment(s * x.cols(), x.cols()) = xs.row(0).array().square();
  }
  const double se = std::sqrt((sq - sq.mean()).square().mean() / static_cast<double>(sq.size()));
  CHECK(std::abs(sq.mean() - m2 / z) < 3.5 * se);
  // same seed, same draws
  CHECK(rejection_sample(target, 100, 5) == rejection_sample(target, 100, 5));
}

TEST_CASE("rejection sampling on the other targets") {
  const auto ring = truncated_std_gaussian(make_ring());
  const Points r = rejection_sample(ring, 5000, 1);
  for (Eigen::Index i = 0; i < r.cols(); ++i) REQUIRE(ring.domain.contains(r.col(i)));
  const auto moon = double_moon_target();
  const Points m = rejection_sample(moon, 2000, 2);
  for (Eigen::Index i = 0; i < m.cols(); ++i) REQUIRE(moon.domain.contains(m.col(i)));
}
