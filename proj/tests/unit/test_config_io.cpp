#include <filesystem>
#include <fstream>
#include <random>

#include "cfg/config.hpp"
#include "cfg/io.hpp"
#include "doctest.h"

using namespace cfg;
namespace fs = std::filesystem;

namespace {

Json ring_json() {
  return Json::parse(R"({
    "domain": {"name": "ring"},
    "target": {"name": "trunc_gauss"},
    "N": 100,
    "init": {"gaussian": {"mean": [0.0], "std": 1.0}},
    "f_hidden": 32,
    "lambda": 1.0,
    "bandwidth": 0.05,
    "L": 10,
    "L_inner": 3,
    "alpha": 0.01,
    "eta": 0.005,
    "seed": 7
  })");
}

std::string field_of(const Json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cfg_unit_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("parse a config") {
  const RunConfig c = config_from_json(ring_json());
  CHECK(c.domain.name == "ring");
  CHECK(c.N == 100);
  CHECK(c.f_hidden == std::vector<int>{32, 32});
  CHECK(c.z_hidden == std::vector<int>{32, 32});
  CHECK(c.bandwidth.h == 0.05);
  CHECK_FALSE(c.bandwidth.adaptive);
  CHECK(c.seed == 7);
  CHECK(c.use_boundary_term);
  CHECK(c.sinkhorn.eps_rel == 0.01);
}

TEST_CASE("config round trip is a fixed point") {
  Json j = ring_json();
  j["z_hidden"] = {8, 4};
  j["bandwidth"] = {{"h0", 0.3}, {"adaptive", true}};
  j["reset_adam"] = true;
  const RunConfig a = config_from_json(j);
  const Json once = config_to_json(a);
  const Json twice = config_to_json(config_from_json(once));
  CHECK(once == twice);
  CHECK(config_from_json(once).z_hidden == std::vector<int>{8, 4});

  Json lasso = ring_json();
  lasso["domain"] = {{"name", "lq_ball"}, {"q", 1.0}, {"dim", 20}};
  lasso["target"] = {{"name", "lasso"}, {"seed", 3}, {"s", 0.5}, {"q", 1.0}};
  lasso["init"] = {{"uniform", {{"low", -1.0}, {"high", 1.0}}}};
  const Json l1 = config_to_json(config_from_json(lasso));
  CHECK(l1 == config_to_json(config_from_json(l1)));
  CHECK(l1["target"]["s"] == 0.5);
}

TEST_CASE("schema errors name the field") {
  Json j = ring_json();
  j.erase("alpha");
  CHECK(field_of(j) == "alpha");
  j = ring_json();
  j["alhpa"] = 0.1;
  CHECK(field_of(j) == "alhpa");
  j = ring_json();
  j["domain"]["radius"] = 2;
  CHECK(field_of(j) == "domain.radius");
  j = ring_json();
  j["N"] = "many";
  CHECK(field_of(j) == "N");
  j = ring_json();
  j["N"] = 0;
  CHECK(field_of(j) == "N");
  j = ring_json();
  j["init"] = {{"gaussian", {{"mean", 0.0}, {"std", 1.0}}}, {"uniform", {{"low", 0}, {"high", 1}}}};
  CHECK(field_of(j) == "init");
  j = ring_json();
  j["target"]["seed"] = 2;
  CHECK(field_of(j) == "target.seed");
  j = ring_json();
  j["sinkhorn"] = {{"eps", 0.1}};
  CHECK(field_of(j) == "sinkhorn.eps");
  j = ring_json();
  j["seed"] = -1;
  CHECK(field_of(j) == "seed");
}

TEST_CASE("overrides") {
  Json j = ring_json();
  apply_override(j, "alpha=0.02");
  apply_override(j, "domain.name=cardioid");
  CHECK_THROWS_AS(apply_override(j, "bandwidth.h0=0.2"), ConfigError);
  apply_override(j, "bandwidth={\"adaptive\": true}");
  apply_override(j, "bandwidth.h0=0.2");
  CHECK(j["alpha"] == 0.02);
  CHECK(j["domain"]["name"] == "cardioid");
  CHECK(j["bandwidth"]["h0"] == 0.2);
  apply_override(j, "bandwidth=0.1");
  apply_override(j, "f_hidden=[8,8,8]");
  const RunConfig c = config_from_json(j);
  CHECK(c.alpha == 0.02);
  CHECK(c.f_hidden.size() == 3);
  CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
}

TEST_CASE("snapshot files round trip exactly") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  std::vector<Snapshot> snaps;
  for (long it : {0L, 100L, 137L}) {
    Points p(3, 25);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = nd(rng) * std::pow(10.0, static_cast<double>(i % 7) - 3.0);
    snaps.push_back({it, p});
  }
  const auto path = scratch("snap.csv").string();
  write_snapshots(path, snaps);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,particle,x0,x1,x2");
  const auto back = read_snapshots(path);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].iter == snaps[i].iter);
    CHECK(back[i].positions == snaps[i].positions);
  }
  CHECK(read_last_snapshot(path) == snaps.back().positions);
}

TEST_CASE("format keeps 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("malformed snapshot files") {
  auto write = [](const std::string& name, const std::string& body) {
    const auto p = scratch(name).string();
    std::ofstream(p) << body;
    return p;
  };
  auto line_of = [](const std::string& path) -> long {
    try {
      read_snapshots(path);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of(write("bad1.csv", "iter,particle,x0\n0,0,1.0\n0,1,abc\n")) == 3);
  CHECK(line_of(write("bad2.csv", "iter,particle,x0,x1\n0,0,1.0,2.0\n0,1,1.0\n")) == 3);
  CHECK(line_of(write("bad3.csv", "it,particle,x0\n")) == 1);
  CHECK(line_of(write("bad4.csv", "iter,particle,x0\n0,1,1.0\n")) == 2);
  CHECK(line_of(write("bad5.csv", "")) == 1);
}

TEST_CASE("metrics and mse files") {
  const auto mpath = scratch("metrics.csv").string();
  MetricsRow a;
  a.iter = 0;
  a.ratio_out = 0.5;
  MetricsRow b;
  b.iter = 10;
  b.rsd_loss = -1.25;
  b.ratio_out = 0.0;
  b.w2_sinkhorn = 0.1;
  b.energy = 0.002;
  write_metrics(mpath, {a, b});
  std::ifstream in(mpath);
  std::string l0, l1, l2;
  std::getline(in, l0);
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(l0 == "iter,rsd_loss,ratio_out,w2_sinkhorn,energy");
  CHECK(l1 == "0,,0.5,,");
  CHECK(l2 == "10,-1.25,0,0.10000000000000001,0.002");

  const auto path = scratch("mse.csv").string();
  write_mse_rows(path, {MseRow{100, 0.1, 0, 1.1, 1.0, 0.01}}, false);
  write_mse_rows(path, {MseRow{1000, 0.05, 1, 0.9, 1.0, 0.01}}, true);
  std::ifstream mse(path);
  std::string h, r1, r2;
  std::getline(mse, h);
  std::getline(mse, r1);
  std::getline(mse, r2);
  CHECK(h == "N,h,trial,estimate,true_value,squared_error");
  CHECK(r1.rfind("100,0.10000000000000001,0,", 0) == 0);
  CHECK(r2.rfind("1000,", 0) == 0);
}
