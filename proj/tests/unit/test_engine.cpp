#include <cmath>

#include "cfg/engine.hpp"
#include "cfg/oracle.hpp"
#include "doctest.h"

using namespace cfg;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.domain.name = "ring";
  c.target.name = "trunc_gauss";
  c.N = 80;
  c.init.mean = Vec::Zero(1);
  c.init.std = 1.0;
  c.f_hidden = {16, 16};
  c.z_hidden = {16, 16};
  c.L = 30;
  c.L_inner = 2;
  c.alpha = 0.01;
  c.eta = 0.005;
  c.bandwidth.h = 0.05;
  c.snapshot_every = 10;
  c.seed = 3;
  return c;
}

// Block run with every particle on the face x1 = 3 and no training.
RunConfig pure_push(long steps) {
  RunConfig c;
  c.domain.name = "block";
  c.target.name = "block_mixture";
  c.N = 50;
  c.init.kind = InitSpec::Kind::Uniform;
  c.init.low = (Vec(2) << 3.0, -1.5).finished();
  c.init.high = (Vec(2) << 3.0 + 1e-12, 1.5).finished();
  c.f_hidden = {8, 8};
  c.z_hidden = {8, 8};
  c.L = steps;
  c.L_inner = 0;
  c.alpha = 0.005;
  c.lambda = 1.0;
  c.bandwidth.h = 0.001;
  c.snapshot_every = 1;
  return c;
}

}  // namespace

TEST_CASE("init ensemble") {
  RunConfig c = small_config();
  const auto a = init_ensemble(c, 2);
  const auto b = init_ensemble(c, 2);
  CHECK(a.positions == b.positions);
  CHECK(a.positions.cols() == 80);
  c.seed = 4;
  CHECK(init_ensemble(c, 2).positions != a.positions);

  RunConfig u = small_config();
  u.init.kind = InitSpec::Kind::Uniform;
  u.init.low = Vec::Constant(1, -2.0);
  u.init.high = Vec::Constant(1, 2.0);
  const auto e = init_ensemble(u, 2);
  const auto block = make_block();
  for (Eigen::Index i = 0; i < e.positions.cols(); ++i) CHECK(block.contains(e.positions.col(i)));

  u.init.low = Vec::Constant(3, 0.0);
  CHECK_THROWS_AS(init_ensemble(u, 2), ConfigError);
}

TEST_CASE("step particles") {
  Ensemble e;
  e.positions = Points::Ones(2, 3);
  const auto next = step_particles(e, [](const Points& x) { return Points(-x); }, 0.5);
  CHECK(next.positions.isApprox(Points::Constant(2, 3, 0.5)));
  CHECK(next.iteration == 1);
  CHECK_THROWS(step_particles(e, [](const Points& x) { return x; }, 0.0));
}

TEST_CASE("pure push enters the block on schedule") {
  const long bound = static_cast<long>(std::ceil(1.0 / (1.0 * 0.005))) + 2;
  const auto art = cfg_run(pure_push(bound + 5));
  const auto block = make_block();
  std::vector<long> entered(50, -1);
  for (const auto& snap : art.snapshots) {
    for (Eigen::Index i = 0; i < snap.positions.cols(); ++i) {
      if (entered[static_cast<std::size_t>(i)] < 0 && block.contains(snap.positions.col(i))) {
        entered[static_cast<std::size_t>(i)] = snap.iter;
      }
    }
  }
  for (long t : entered) {
    CHECK(t >= 0);
    CHECK(t <= bound);
  }
  // Until entry the trajectory moves lambda * alpha per step straight at the face.
  CHECK(art.snapshots[100].positions.row(0).array().isApprox(Eigen::ArrayXd::Constant(50, 2.5).transpose(), 1e-9));
}

TEST_CASE("runs are deterministic and record snapshots") {
  const auto a = cfg_run(small_config());
  const auto b = cfg_run(small_config());
  REQUIRE(a.snapshots.size() == 4);  // 0, 10, 20, 30
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    CHECK(a.snapshots[i].iter == b.snapshots[i].iter);
    CHECK(a.snapshots[i].positions == b.snapshots[i].positions);
  }
  CHECK(a.metrics.size() == 4);
  CHECK_FALSE(a.metrics[0].rsd_loss.has_value());
  CHECK(a.metrics[1].rsd_loss.has_value());
  CHECK_FALSE(a.metrics[1].energy.has_value());
  CHECK(a.inside_fraction.size() == 31);
  CHECK(a.bandwidth == 0.05);

  RunConfig odd = small_config();
  odd.L = 25;
  const auto c = cfg_run(odd);
  CHECK(c.snapshots.back().iter == 25);
}

TEST_CASE("truth hook fills the metric columns") {
  RunConfig c = small_config();
  c.L = 5;
  c.snapshot_every = 5;
  RunHooks hooks;
  hooks.truth = rejection_sample(truncated_std_gaussian(make_ring()), 200, 1);
  long calls = 0;
  hooks.progress = [&](long) { ++calls; };
  const auto art = cfg_run(c, hooks);
  CHECK(calls == 5);
  CHECK(art.metrics.back().energy.has_value());
  CHECK(art.metrics.back().w2_sinkhorn.has_value());
}

TEST_CASE("z net stays at zero when disabled") {
  RunConfig c = small_config();
  c.use_z_net = false;
  const auto art = cfg_run(c);
  CHECK(art.z.flatten().isZero());
}

TEST_CASE("adaptive bandwidth in the run") {
  RunConfig c = small_config();
  c.bandwidth.adaptive = true;
  c.bandwidth.h0 = 0.5;
  CHECK(effective_bandwidth(c, 2) == doctest::Approx(adaptive_bandwidth(0.5, 2, 80)));
}

TEST_CASE("lasso problem from config") {
  RunConfig c = small_config();
  c.domain = DomainSpec{"lq_ball", 1.0, std::nullopt, 20};
  c.target.name = "lasso";
  c.target.seed = 4;
  const Problem p = build_problem(c);
  REQUIRE(p.lasso.has_value());
  CHECK(p.domain.dim == 20);
  CHECK(p.domain.g(Vec::Zero(20)) == doctest::Approx(-p.lasso->r));
  c.domain.r = 5.0;
  CHECK(build_problem(c).domain.g(Vec::Zero(20)) == doctest::Approx(-5.0));
  c.domain.name = "ring";
  CHECK_THROWS_AS(build_problem(c), ConfigError);
}

TEST_CASE("invalid configs") {
  RunConfig c = small_config();
  c.alpha = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.target.name = "block_mixture";
  CHECK_THROWS_AS(build_problem(c), ConfigError);
  c = small_config();
  c.domain.name = "sphere";
  CHECK_THROWS_AS(build_problem(c), ConfigError);
}

TEST_CASE("numerical blow-up aborts") {
  RunConfig c = small_config();
  c.lambda = 1e308;
  c.alpha = 1e10;
  CHECK_THROWS_AS(cfg_run(c), NumericalError);
}
