#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cfg/metrics.hpp"
#include "doctest.h"

using namespace cfg;

namespace {

Points cloud(int d, int n, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(shift, 1.0);
  Points x(d, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  return x;
}

// W2 by enumerating every permutation.
double brute_force_w2(const Points& x, const Points& y) {
  std::vector<int> perm(static_cast<std::size_t>(x.cols()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      c += (x.col(static_cast<Eigen::Index>(i)) - y.col(perm[i])).squaredNorm();
    }
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / static_cast<double>(x.cols()));
}

}  // namespace

TEST_CASE("energy distance examples") {
  const Points x = cloud(2, 50, 1);
  CHECK(energy_distance(x, x) == doctest::Approx(0.0).epsilon(1e-14));
  Points a(1, 1), b(1, 1);
  a << 0.0;
  b << 2.0;
  CHECK(energy_distance(a, b) == doctest::Approx(4.0));
  Points c(1, 2);
  c << 0.0, 1.0;
  CHECK(energy_distance(c, c) == doctest::Approx(0.0));
  CHECK_THROWS(energy_distance(Points(2, 0), x));
  CHECK_THROWS(energy_distance(cloud(3, 5, 1), x));
}

TEST_CASE("energy distance is symmetric and detects differences") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Points x = cloud(2, 8, s);
    const Points y = cloud(2, 6, s + 100, 0.3);
    CHECK(energy_distance(x, y) == doctest::Approx(energy_distance(y, x)));
    CHECK(energy_distance(x, y) > 0.0);
    // permuted copy is the same multiset
    Points xp = x;
    xp.col(0).swap(xp.col(5));
    CHECK(std::abs(energy_distance(x, xp)) < 1e-12);
  }
}

TEST_CASE("sinkhorn examples") {
  Points a(2, 1), b(2, 1);
  a << 0.0, 0.0;
  b << 3.0, 4.0;
  CHECK(sinkhorn_w2(a, b).value == doctest::Approx(5.0));
  const Points x = cloud(2, 300, 2);
  // alternating updates on a cloud against itself converge slowly, the
  // divergence is already at its floor
  const auto self = sinkhorn_w2(x, x);
  CHECK(self.marginal_violation < 1e-3);
  CHECK(self.value < 0.05);
  CHECK(self.epsilon > 0.0);
  CHECK_THROWS(sinkhorn_w2(x, x, SinkhornOptions{0.0, 100, 1e-6}));
}

TEST_CASE("sinkhorn is symmetric and approaches exact W2") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Points x = cloud(2, 30, s);
    const Points y = cloud(2, 30, s + 50, 0.5);
    SinkhornOptions o;
    o.max_iter = 20000;
    o.tol = 1e-10;
    const double xy = sinkhorn_w2(x, y, o).value;
    const double yx = sinkhorn_w2(y, x, o).value;
    CHECK(xy == doctest::Approx(yx).epsilon(1e-5));
    const double exact = exact_w2_small(x, y);
    double prev_gap = std::numeric_limits<double>::infinity();
    for (double eps : {0.1, 0.03, 0.01, 0.003}) {
      o.eps_rel = eps;
      const auto r = sinkhorn_w2(x, y, o);
      CHECK(r.marginal_violation < 1e-4);
      const double gap = std::abs(r.value - exact);
      CHECK(gap <= prev_gap + 1e-9);
      prev_gap = gap;
    }
    CHECK(prev_gap < 0.02);
  }
}

TEST_CASE("sinkhorn on 8-point sets is close to exact W2") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Points x = cloud(2, 8, 300 + s);
    const Points y = cloud(2, 8, 400 + s, 0.5);
    const double exact = exact_w2_small(x, y);
    CHECK(std::abs(sinkhorn_w2(x, y).value - exact) <= 0.05 * exact);
  }
}

TEST_CASE("plain and debiased sinkhorn") {
  const Points x = cloud(2, 200, 5);
  SinkhornOptions plain;
  plain.debiased = false;
  const auto p = sinkhorn_w2(x, x, plain);
  const auto d = sinkhorn_w2(x, x);
  // the plain cost keeps the entropic blur, the divergence removes it
  CHECK(p.value > 0.05);
  CHECK(d.value < 1e-3);
  CHECK(d.plan_cost == doctest::Approx(p.value));
}

TEST_CASE("exact W2 on small sets") {
  Points a(2, 1), b(2, 1);
  a << 0.0, 0.0;
  b << 1.0, 0.0;
  CHECK(exact_w2_small(a, b) == doctest::Approx(1.0));
  const Points x = cloud(2, 12, 3);
  Points perm = x;
  perm.col(0).swap(perm.col(7));
  perm.col(2).swap(perm.col(11));
  CHECK(exact_w2_small(x, perm) == doctest::Approx(0.0).epsilon(1e-14));
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Points p = cloud(2, 5, s);
    const Points q = cloud(2, 5, s + 20, 0.7);
    CHECK(exact_w2_small(p, q) == doctest::Approx(brute_force_w2(p, q)).epsilon(1e-12));
  }
  CHECK_THROWS(exact_w2_small(cloud(2, 3, 1), cloud(2, 4, 1)));
  CHECK_THROWS(exact_w2_small(cloud(2, 65, 1), cloud(2, 65, 2)));
}

TEST_CASE("exact W2 satisfies the triangle inequality") {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const Points a = cloud(2, 7, 3 * s);
    const Points b = cloud(2, 7, 3 * s + 1, 0.4);
    const Points c = cloud(2, 7, 3 * s + 2, -0.4);
    CHECK(exact_w2_small(a, c) <= exact_w2_small(a, b) + exact_w2_small(b, c) + 1e-9);
  }
}

TEST_CASE("assignment solver is optimal on random costs") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Mat cost(6, 6);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = u(rng);
    const auto a = solve_assignment(cost);
    double got = 0.0;
    for (int i = 0; i < 6; ++i) got += cost(i, a[static_cast<std::size_t>(i)]);
    std::vector<int> perm{0, 1, 2, 3, 4, 5};
    double best = 1e9;
    do {
      double c = 0.0;
      for (int i = 0; i < 6; ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("ratio out") {
  const auto block = make_block();
  CHECK(ratio_out(block, Points::Zero(2, 10)) == 0.0);
  CHECK(ratio_out(block, Points::Constant(2, 10, 3.0)) == 1.0);
  Points half(2, 4);
  half << 0, 3, 0, 3, 0, 3, 0, 3;
  CHECK(ratio_out(block, half) == 0.5);
  // the boundary itself counts as inside
  Points edge(2, 1);
  edge << 2.0, 0.0;
  CHECK(ratio_out(block, edge) == 0.0);
}

TEST_CASE("report subsamples to a common size") {
  const Points s = cloud(2, 200, 1);
  const Points t = cloud(2, 1000, 2);
  const auto rep = compute_report(make_block(), s, t, {}, 4);
  CHECK(rep.n_samples == 200);
  CHECK(rep.eps_rel == 0.01);
  CHECK(rep.energy == doctest::Approx(energy_distance(s, t)));
  CHECK(rep.w2_sinkhorn > 0.0);
  CHECK(rep.ratio_out == doctest::Approx(ratio_out(make_block(), s)));
  const auto again = compute_report(make_block(), s, t, {}, 4);
  CHECK(again.w2_sinkhorn == rep.w2_sinkhorn);
}
