#include "cfg/engine.hpp"

#include <cmath>
#include <random>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "cfg/oracle.hpp"

namespace cfg {

namespace {

// Seed streams derived from RunConfig::seed.
enum SeedStream : std::uint64_t { kInitStream = 0, kFNetStream = 1, kZNetStream = 2, kMetricStream = 3 };

Vec broadcast(const Vec& v, int dim, double fill, const std::string& field) {
  if (v.size() == 0) return Vec::Constant(dim, fill);
  if (v.size() == 1) return Vec::Constant(dim, v[0]);
  if (v.size() != dim) {
    throw ConfigError(field, "has length " + std::to_string(v.size()) + ", expected 1 or " +
                                 std::to_string(dim));
  }
  return v;
}

// The batched passes allocate and free megabyte-sized matrices every inner
// step. glibc would return each one to the OS and fault the pages back in.
void keep_heap_pages() {
#if defined(__GLIBC__)
  static const bool once = [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    return true;
  }();
  (void)once;
#endif
}

double inside_fraction(const ConstraintDomain& domain, const Points& x) {
  return 1.0 - ratio_out(domain, x);
}

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

void RunConfig::validate() const {
  if (N < 1) throw ConfigError("N", "must be >= 1");
  if (L < 1) throw ConfigError("L", "must be >= 1");
  if (L_inner < 0) throw ConfigError("L_inner", "must be >= 0");
  if (!(alpha > 0.0)) throw ConfigError("alpha", "must be > 0");
  if (!(eta > 0.0)) throw ConfigError("eta", "must be > 0");
  if (!(lambda > 0.0)) throw ConfigError("lambda", "must be > 0");
  if (snapshot_every < 1) throw ConfigError("snapshot_every", "must be >= 1");
  if (bandwidth.adaptive ? !(bandwidth.h0 > 0.0) : !(bandwidth.h > 0.0)) {
    throw ConfigError("bandwidth", "must be positive");
  }
  for (int w : f_hidden) {
    if (w < 1) throw ConfigError("f_hidden", "widths must be positive");
  }
  for (int w : z_hidden) {
    if (w < 1) throw ConfigError("z_hidden", "widths must be positive");
  }
  if (init.kind == InitSpec::Kind::Gaussian && !(init.std > 0.0)) {
    throw ConfigError("init.gaussian.std", "must be > 0");
  }
}

Problem build_problem(const RunConfig& config) {
  const DomainSpec& ds = config.domain;
  const TargetSpec& ts = config.target;
  Problem p;
  if (ts.name == "lasso") {
    if (ds.name != "lq_ball") throw ConfigError("domain.name", "lasso target needs domain lq_ball");
    if (ds.q && *ds.q != ts.q) throw ConfigError("domain.q", "must match target.q");
    LassoOptions lo;
    lo.shrink = ts.s;
    lo.q = ts.q;
    if (ds.dim) lo.dim = *ds.dim;
    try {
      p.lasso = make_synthetic_lasso(ts.seed, lo);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("target", e.what());
    }
    if (ds.r) p.lasso->r = *ds.r;
    p.target = lasso_posterior(*p.lasso);
    p.domain = p.target.domain;
    return p;
  }
  try {
    p.domain = make_domain(ds.name, ds.q.value_or(1.0), ds.r.value_or(1.0), ds.dim.value_or(2));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("domain", e.what());
  }
  if (ts.name == "trunc_gauss") {
    p.target = truncated_std_gaussian(p.domain);
  } else if (ts.name == "block_mixture") {
    if (ds.name != "block") throw ConfigError("domain.name", "block_mixture target needs domain block");
    p.target = block_gaussian_mixture();
  } else if (ts.name == "double_moon") {
    if (ds.name != "double_moon") {
      throw ConfigError("domain.name", "double_moon target needs domain double_moon");
    }
    p.target = double_moon_target();
  } else {
    throw ConfigError("target.name", "unknown target '" + ts.name + "'");
  }
  return p;
}

double effective_bandwidth(const RunConfig& config, int dim) {
  if (config.bandwidth.adaptive) return adaptive_bandwidth(config.bandwidth.h0, dim, config.N);
  return config.bandwidth.h;
}

Ensemble init_ensemble(const RunConfig& config, int dim) {
  Ensemble e;
  e.seed = derive_seed(config.seed, kInitStream);
  Rng rng(e.seed);
  e.positions.resize(dim, config.N);
  if (config.init.kind == InitSpec::Kind::Gaussian) {
    const Vec mean = broadcast(config.init.mean, dim, 0.0, "init.gaussian.mean");
    std::normal_distribution<double> normal(0.0, 1.0);
    for (long i = 0; i < config.N; ++i) {
      for (int k = 0; k < dim; ++k) e.positions(k, i) = mean[k] + config.init.std * normal(rng);
    }
  } else {
    const Vec low = broadcast(config.init.low, dim, -1.0, "init.uniform.low");
    const Vec high = broadcast(config.init.high, dim, 1.0, "init.uniform.high");
    if ((high.array() <= low.array()).any()) throw ConfigError("init.uniform", "needs low < high");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (long i = 0; i < config.N; ++i) {
      for (int k = 0; k < dim; ++k) e.positions(k, i) = low[k] + (high[k] - low[k]) * unif(rng);
    }
  }
  return e;
}

Ensemble step_particles(const Ensemble& ensemble, const VelocityClosure& velocity, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("step size must be positive");
  const Points v = velocity(ensemble.positions);
  Ensemble next = ensemble;
  next.positions += alpha * v;
  next.iteration = ensemble.iteration + 1;
  return next;
}

RunArtifacts cfg_run(const RunConfig& config, const RunHooks& hooks) {
  config.validate();
  keep_heap_pages();
  const Problem problem = build_problem(config);
  const ConstraintDomain& domain = problem.domain;
  const int dim = domain.dim;
  const double h = effective_bandwidth(config, dim);

  Ensemble ens = init_ensemble(config, dim);
  MlpParams fp = init_mlp(layer_sizes(dim, config.f_hidden, dim), derive_seed(config.seed, kFNetStream));
  MlpParams zp = init_mlp(layer_sizes(dim, config.z_hidden, 1), derive_seed(config.seed, kZNetStream));
  if (!config.use_z_net) zp = MlpParams::zeros_like(zp);  // z == 0 everywhere
  AdamState f_adam = adam_init(fp, config.adam);
  AdamState z_adam = adam_init(zp, config.adam);

  FlowOptions flow_opts;
  flow_opts.boundary_term = config.use_boundary_term;
  flow_opts.train_z = config.use_z_net;

  RunArtifacts art;
  art.bandwidth = h;
  art.inside_fraction.push_back(inside_fraction(domain, ens.positions));

  auto record = [&](long iter, std::optional<double> loss) {
    art.snapshots.push_back({iter, ens.positions});
    MetricsRow row;
    row.iter = iter;
    row.rsd_loss = loss;
    row.ratio_out = ratio_out(domain, ens.positions);
    if (hooks.truth) {
      const MetricReport rep = compute_report(ens.positions, *hooks.truth, config.sinkhorn,
                                              derive_seed(config.seed, kMetricStream));
      row.w2_sinkhorn = rep.w2_sinkhorn;
      row.energy = rep.energy;
    }
    art.metrics.push_back(row);
  };
  record(0, std::nullopt);

  for (long k = 0; k < config.L; ++k) {
    const ParticlePartition part = partition(domain, ens.positions, h);
    std::optional<double> loss;
    if (part.m() >= 1 && config.L_inner > 0) {
      if (config.reset_adam) {
        f_adam = adam_init(fp, config.adam);
        z_adam = adam_init(zp, config.adam);
      }
      for (long t = 0; t < config.L_inner; ++t) {
        const RsdGradient g =
            rsd_loss_grad(fp, zp, domain, problem.target, part, ens.positions, h, flow_opts);
        if (!std::isfinite(g.loss)) {
          std::ostringstream msg;
          msg << "non-finite training loss at iteration " << k << " (inner step " << t << ")";
          throw NumericalError(msg.str(), k);
        }
        adam_step(fp, g.f, f_adam, config.eta);
        if (config.use_z_net) adam_step(zp, g.z, z_adam, config.eta);
        loss = g.loss;
      }
    }
    ens = step_particles(
        ens, [&](const Points& x) { return velocity_batch(fp, zp, domain, config.lambda, x); },
        config.alpha);
    if (!ens.positions.allFinite()) {
      throw NumericalError("non-finite particle positions at iteration " + std::to_string(k), k);
    }
    art.inside_fraction.push_back(inside_fraction(domain, ens.positions));
    const long done = k + 1;
    if (done % config.snapshot_every == 0 || done == config.L) record(done, loss);
    if (hooks.progress) hooks.progress(done);
  }
  art.final_positions = ens.positions;
  art.f = std::move(fp);
  art.z = std::move(zp);
  return art;
}

}  // namespace cfg
