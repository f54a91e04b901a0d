#include "cfg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cfg/parallel.hpp"

namespace cfg {

namespace {

void require_nonempty(const Points& x, const Points& y) {
  if (x.cols() == 0 || y.cols() == 0) throw std::invalid_argument("sample sets must be nonempty");
  if (x.rows() != y.rows()) throw std::invalid_argument("sample sets differ in dimension");
}

// Mean of |a_i - b_j| over all pairs.
double mean_pair_distance(const Points& a, const Points& b) {
  const auto n = static_cast<std::size_t>(a.cols());
  std::vector<double> row_sums(n, 0.0);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto ai = a.col(static_cast<Eigen::Index>(i));
      row_sums[i] = (b.colwise() - ai).colwise().norm().sum();
    }
  });
  const double total = std::accumulate(row_sums.begin(), row_sums.end(), 0.0);
  return total / (static_cast<double>(a.cols()) * static_cast<double>(b.cols()));
}

Mat squared_distances(const Points& x, const Points& y) {
  Mat c(x.cols(), y.cols());
  parallel_for(static_cast<std::size_t>(y.cols()), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      const auto yj = y.col(static_cast<Eigen::Index>(j));
      c.col(static_cast<Eigen::Index>(j)) = (x.colwise() - yj).colwise().squaredNorm().transpose();
    }
  });
  return c;
}

// log sum_k exp(v_k)
double log_sum_exp(const Eigen::ArrayXd& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v - mx).exp().sum());
}

Points subsample(const Points& x, Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.cols()));
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  Points out(x.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) out.col(k) = x.col(idx[static_cast<std::size_t>(k)]);
  return out;
}

}  // namespace

double energy_distance(const Points& x, const Points& y) {
  require_nonempty(x, y);
  return 2.0 * mean_pair_distance(x, y) - mean_pair_distance(x, x) - mean_pair_distance(y, y);
}

namespace {

struct OtSolution {
  double value = 0.0;      // entropic OT objective at the optimum (dual value)
  double plan_cost = 0.0;  // <plan, cost>
  double violation = 0.0;  // L1 row-marginal error
  int iterations = 0;
};

// Log-domain Sinkhorn for uniform weights at regularization eps. Potentials are
// warm-started through a halving schedule of coarser problems, which leaves the
// fixed point unchanged and cuts the iteration count at small eps. With
// `symmetric` the cost is that of a cloud against itself and the update is the
// averaged fixed-point map on a single potential.
OtSolution solve_ot(const Mat& cost, double eps, bool symmetric, int max_iter, double tol) {
  const Mat cost_t = cost.transpose();
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  Eigen::ArrayXd f = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd g = Eigen::ArrayXd::Zero(m);

  auto row_update = [&](const Eigen::ArrayXd& pot, Eigen::Index i, double e) {
    return -e * log_sum_exp((pot - cost_t.col(i).array()) / e + log_b);
  };
  auto sweep = [&](double e, int iters, double stop, int& used) {
    double violation = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= iters; ++it) {
      violation = 0.0;
      if (symmetric) {
        Eigen::ArrayXd next(n);
        for (Eigen::Index i = 0; i < n; ++i) next[i] = row_update(f, i, e);
        for (Eigen::Index i = 0; i < n; ++i) {
          violation += std::exp(log_a) * std::abs(std::exp((f[i] - next[i]) / e) - 1.0);
        }
        f = 0.5 * (f + next);
      } else {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double f_new = row_update(g, i, e);
          violation += std::exp(log_a) * std::abs(std::exp((f[i] - f_new) / e) - 1.0);
          f[i] = f_new;
        }
        for (Eigen::Index j = 0; j < m; ++j) {
          g[j] = -e * log_sum_exp((f - cost.col(j).array()) / e + log_a);
        }
      }
      used = it;
      if (it > 1 && violation < stop) break;
    }
    return violation;
  };

  const double mean_cost = cost.mean();
  int stage_iters = 0;
  for (double e = mean_cost; e > 4.0 * eps; e *= 0.5) sweep(e, 200, 1e-3, stage_iters);
  OtSolution out;
  out.violation = sweep(eps, max_iter, tol, out.iterations);
  if (symmetric) g = f;

  double plan_cost = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::ArrayXd c = cost.col(j).array();
    plan_cost += ((f + g[j] - c) / eps + log_a + log_b).exp().cwiseProduct(c).sum();
  }
  out.plan_cost = plan_cost;
  out.value = f.mean() + g.mean();
  return out;
}

}  // namespace

SinkhornResult sinkhorn_w2(const Points& x, const Points& y, const SinkhornOptions& opts) {
  require_nonempty(x, y);
  if (!(opts.eps_rel > 0.0) || opts.max_iter < 1) {
    throw std::invalid_argument("sinkhorn needs eps_rel > 0 and max_iter >= 1");
  }
  const Mat cost = squared_distances(x, y);
  SinkhornResult res;
  const double mean_cost = cost.mean();
  if (mean_cost <= 0.0) {
    res.converged = true;
    return res;
  }
  const double eps = opts.eps_rel * mean_cost;
  res.epsilon = eps;
  const OtSolution xy = solve_ot(cost, eps, false, opts.max_iter, opts.tol);
  res.iterations = xy.iterations;
  res.marginal_violation = xy.violation;
  res.converged = xy.iterations > 1 && xy.violation < opts.tol;
  res.plan_cost = std::sqrt(std::max(xy.plan_cost, 0.0));
  if (!opts.debiased) {
    res.value = res.plan_cost;
    return res;
  }
  const OtSolution xx = solve_ot(squared_distances(x, x), eps, true, opts.max_iter, opts.tol);
  const OtSolution yy = solve_ot(squared_distances(y, y), eps, true, opts.max_iter, opts.tol);
  res.converged = res.converged && xx.violation < opts.tol && yy.violation < opts.tol;
  res.value = std::sqrt(std::max(xy.value - 0.5 * (xx.value + yy.value), 0.0));
  return res;
}

std::vector<int> solve_assignment(const Mat& cost) {
  // Shortest augmenting path with potentials (Kuhn-Munkres), O(n^3).
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("assignment cost must be square");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int r = match[col0];
      double delta = kInf;
      int col1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(r - 1, j - 1) - u[r] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(n);
  for (int j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  return assignment;
}

double exact_w2_small(const Points& x, const Points& y) {
  require_nonempty(x, y);
  if (x.cols() != y.cols()) throw std::invalid_argument("exact_w2_small needs equal-size sets");
  if (x.cols() > 64) throw std::invalid_argument("exact_w2_small supports at most 64 points");
  const Mat cost = squared_distances(x, y);
  const auto assignment = solve_assignment(cost);
  double total = 0.0;
  for (Eigen::Index i = 0; i < cost.rows(); ++i) total += cost(i, assignment[static_cast<std::size_t>(i)]);
  return std::sqrt(total / static_cast<double>(cost.rows()));
}

double ratio_out(const ConstraintDomain& domain, const Points& x) {
  if (x.cols() == 0) return 0.0;
  long out = 0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    if (domain.g(x.col(i)) > 0.0) ++out;
  }
  return static_cast<double>(out) / static_cast<double>(x.cols());
}

MetricReport compute_report(const Points& samples, const Points& truth, const SinkhornOptions& opts,
                            std::uint64_t seed) {
  MetricReport rep;
  rep.n_samples = static_cast<long>(samples.cols());
  rep.eps_rel = opts.eps_rel;
  rep.debiased = opts.debiased;
  rep.energy = energy_distance(samples, truth);
  const Eigen::Index n = std::min(samples.cols(), truth.cols());
  const Points a = samples.cols() > n ? subsample(samples, n, seed) : samples;
  const Points b = truth.cols() > n ? subsample(truth, n, seed + 1) : truth;
  const SinkhornResult s = sinkhorn_w2(a, b, opts);
  rep.w2_sinkhorn = s.value;
  rep.sinkhorn_converged = s.converged;
  return rep;
}

MetricReport compute_report(const ConstraintDomain& domain, const Points& samples,
                            const Points& truth, const SinkhornOptions& opts, std::uint64_t seed) {
  MetricReport rep = compute_report(samples, truth, opts, seed);
  rep.ratio_out = ratio_out(domain, samples);
  return rep;
}

}  // namespace cfg
