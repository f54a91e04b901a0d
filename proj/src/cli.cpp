#include "cfg/cli.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cfg/config.hpp"
#include "cfg/engine.hpp"
#include "cfg/io.hpp"
#include "cfg/metrics.hpp"
#include "cfg/oracle.hpp"

#ifndef CFG_BUILD_ID
#define CFG_BUILD_ID "unknown"
#endif

namespace cfg {

namespace fs = std::filesystem;

namespace {

// Reference boundary integrals on the block, rows p1..p3, columns v1..v3.
constexpr std::array<std::array<double, 3>, 3> kBlockReference{{
    {1.0, 0.0, 0.0},
    {0.226259, 0.0, 0.0},
    {0.911333, 0.0, -0.617187},
}};
constexpr double kReferenceTol = 1e-3;
constexpr double kSlopeLow = -0.85;
constexpr double kSlopeHigh = -0.50;

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

Json report_json(const MetricReport& r, bool with_ratio) {
  Json j{{"w2_sinkhorn", r.w2_sinkhorn}, {"energy", r.energy}, {"n_samples", r.n_samples},
         {"eps_rel", r.eps_rel}, {"debiased", r.debiased}, {"sinkhorn_converged", r.sinkhorn_converged}};
  j["ratio_out"] = with_ratio ? Json(r.ratio_out) : Json(nullptr);
  return j;
}

std::vector<long> decades_up_to(long max_n) {
  std::vector<long> ns;
  for (long n = 100; n <= max_n; n *= 10) ns.push_back(n);
  return ns;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  Json j = load_json_file(path);
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

}  // namespace

int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err) {
  const std::string started = iso_now();
  RunConfig config;
  try {
    Json j = load_json_file(cmd.config_path);
    for (const auto& o : cmd.overrides) apply_override(j, o);
    if (cmd.seed) j["seed"] = *cmd.seed;
    if (cmd.out_dir) j["out_dir"] = *cmd.out_dir;
    config = config_from_json(j);
    build_problem(config);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    RunHooks hooks;
    if (!config.truth_path.empty()) hooks.truth = read_last_snapshot(config.truth_path);
    if (cmd.progress) {
      hooks.progress = [&](long k) {
        if (k % 100 == 0 || k == config.L) err << "iteration " << k << '/' << config.L << '\n';
      };
    }
    const RunArtifacts art = cfg_run(config, hooks);

    fs::create_directories(config.out_dir);
    const fs::path dir(config.out_dir);
    const std::string snap_path = (dir / "snapshots.csv").string();
    const std::string metrics_path = (dir / "metrics.csv").string();
    write_snapshots(snap_path, art.snapshots);
    write_metrics(metrics_path, art.metrics);

    Json manifest;
    manifest["config"] = config_to_json(config);
    manifest["build"] = CFG_BUILD_ID;
    manifest["start"] = started;
    manifest["end"] = iso_now();
    manifest["bandwidth"] = art.bandwidth;
    manifest["files"] = {"snapshots.csv", "metrics.csv", "manifest.json"};
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << '\n';
    if (!mf) throw std::runtime_error("cannot write manifest.json");

    const MetricsRow& last = art.metrics.back();
    out << "finished " << config.L << " iterations; ratio_out " << last.ratio_out;
    if (last.energy) out << ", energy " << *last.energy << ", w2 " << *last.w2_sinkhorn;
    out << "\n";
    return kExitOk;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_verify_boundary(const VerifyBoundaryCommand& cmd, std::ostream& out, std::ostream& err) {
  if (cmd.max_n < 1000 || cmd.trials < 2) {
    err << "verify-boundary needs --max-n >= 1000 and --trials >= 2\n";
    return kExitUsage;
  }
  try {
    fs::create_directories(cmd.out_dir);
    const fs::path dir(cmd.out_dir);
    const ConstraintDomain block = make_block();
    MseOptions opts;
    opts.n_list = decades_up_to(cmd.max_n);
    opts.trials = cmd.trials;
    opts.h0 = cmd.h_scale * std::cbrt(static_cast<double>(block.dim));
    opts.quadrature_resolution = cmd.resolution;

    Json summary;
    summary["n_list"] = opts.n_list;
    summary["trials"] = cmd.trials;
    summary["h_scale"] = cmd.h_scale;
    summary["fixed_h"] = cmd.fixed_h;
    std::vector<std::string> failures;

    if (cmd.fixed_h) {
      // Adaptive bandwidth against h frozen at its first and last sweep values.
      const auto density = block_density(1);
      const auto sampler = block_sampler(1);
      const auto velocity = block_velocity(1);
      opts.seed = cmd.seed;
      const MseExperiment adaptive = mse_slope_experiment(block, density, sampler, velocity, opts);
      MseOptions large = opts;
      large.fixed_h = true;
      const MseExperiment fixed_large = mse_slope_experiment(block, density, sampler, velocity, large);
      MseOptions small = opts;
      small.fixed_h = true;
      small.n_list = std::vector<long>(opts.n_list.rbegin(), opts.n_list.rend());
      MseExperiment fixed_small = mse_slope_experiment(block, density, sampler, velocity, small);
      std::reverse(fixed_small.mse.begin(), fixed_small.mse.end());

      write_mse_rows((dir / "fixed_h_adaptive.csv").string(), adaptive.rows, false);
      write_mse_rows((dir / "fixed_h_large.csv").string(), fixed_large.rows, false);
      write_mse_rows((dir / "fixed_h_small.csv").string(), fixed_small.rows, false);
      summary["adaptive_mse"] = adaptive.mse;
      summary["fixed_large_mse"] = fixed_large.mse;
      summary["fixed_small_mse"] = fixed_small.mse;
      summary["adaptive_slope"] = adaptive.slope;
      summary["fixed_large_slope"] = fixed_large.slope;

      bool degraded = false;
      for (std::size_t i = 0; i < adaptive.mse.size(); ++i) {
        if (fixed_large.mse[i] >= 1.5 * adaptive.mse[i] || fixed_small.mse[i] >= 1.5 * adaptive.mse[i]) {
          degraded = true;
        }
      }
      out << "p1/v1 adaptive slope " << adaptive.slope << ", fixed (large h) slope "
          << fixed_large.slope << "\n";
      for (std::size_t i = 0; i < adaptive.mse.size(); ++i) {
        out << "  N=" << opts.n_list[i] << "  adaptive " << adaptive.mse[i] << "  fixed-large "
            << fixed_large.mse[i] << "  fixed-small " << fixed_small.mse[i] << "\n";
      }
      if (!degraded) failures.push_back("fixed bandwidths never worse than adaptive by 1.5x");
    } else {
      Json cells = Json::array();
      for (int p = 1; p <= 3; ++p) {
        for (int v = 1; v <= 3; ++v) {
          MseOptions cell_opts = opts;
          cell_opts.seed = derive_seed(cmd.seed, static_cast<std::uint64_t>(10 * p + v));
          const MseExperiment ex = mse_slope_experiment(block, block_density(p), block_sampler(p),
                                                        block_velocity(v), cell_opts);
          const std::string name = "p" + std::to_string(p) + "_v" + std::to_string(v);
          write_mse_rows((dir / ("boundary_" + name + ".csv")).string(), ex.rows, false);

          const double reference = kBlockReference[p - 1][v - 1];
          const double rmse = std::sqrt(ex.mse.back());
          double mean_est = 0.0;
          int count = 0;
          for (const MseRow& r : ex.rows) {
            if (r.n == opts.n_list.back()) {
              mean_est += r.estimate;
              ++count;
            }
          }
          mean_est /= count;
          const bool slope_ok = ex.slope >= kSlopeLow && ex.slope <= kSlopeHigh;
          const bool quad_ok = std::abs(ex.true_value - reference) <= kReferenceTol;
          const bool mc_ok = std::abs(mean_est - ex.true_value) <= 3.0 * rmse;
          if (!slope_ok) failures.push_back(name + ": slope " + std::to_string(ex.slope));
          if (!quad_ok) failures.push_back(name + ": quadrature " + std::to_string(ex.true_value));
          if (!mc_ok) failures.push_back(name + ": estimate mean " + std::to_string(mean_est));
          cells.push_back({{"cell", name},
                           {"slope", ex.slope},
                           {"true_value", ex.true_value},
                           {"reference", reference},
                           {"mse", ex.mse},
                           {"mean_estimate_at_max_n", mean_est},
                           {"pass", slope_ok && quad_ok && mc_ok}});
          out << name << ": true " << std::setprecision(7) << ex.true_value << " (ref " << reference
              << "), slope " << std::setprecision(4) << ex.slope << ", mean@" << opts.n_list.back()
              << " " << std::setprecision(7) << mean_est << (slope_ok && quad_ok && mc_ok ? "  ok" : "  FAIL")
              << "\n";
        }
      }
      summary["cells"] = cells;
    }
    summary["failures"] = failures;
    summary["pass"] = failures.empty();
    std::ofstream sf(dir / "summary.json");
    sf << summary.dump(2) << '\n';
    for (const auto& f : failures) err << "FAIL " << f << '\n';
    return failures.empty() ? kExitOk : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_metrics(const MetricsCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    const Points samples = read_last_snapshot(cmd.snapshot_path);
    const Points truth = read_last_snapshot(cmd.truth_path);
    if (samples.rows() != truth.rows()) {
      err << "dimension mismatch: " << samples.rows() << " vs " << truth.rows() << '\n';
      return kExitUsage;
    }
    SinkhornOptions opts;
    opts.eps_rel = cmd.eps_rel;
    opts.debiased = cmd.debiased;
    MetricReport rep;
    if (cmd.domain.empty()) {
      rep = compute_report(samples, truth, opts, cmd.seed);
    } else {
      rep = compute_report(make_domain(cmd.domain, 1.0, 1.0, static_cast<int>(samples.rows())), samples,
                           truth, opts, cmd.seed);
    }
    out << report_json(rep, !cmd.domain.empty()).dump() << '\n';
    return kExitOk;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_oracle_sample(const OracleSampleCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig config = load_config(cmd.config_path, cmd.overrides);
    const Problem problem = build_problem(config);
    RejectionStats stats;
    const Points samples = rejection_sample(problem.target, cmd.n, cmd.seed, &stats);
    const std::string path = cmd.out_path.empty() ? "truth.csv" : cmd.out_path;
    if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    write_snapshots(path, {Snapshot{0, samples}});
    out << "wrote " << cmd.n << " samples to " << path << " (acceptance rate "
        << stats.acceptance_rate() << ")\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace cfg
