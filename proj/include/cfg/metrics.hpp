#pragma once

#include <cstdint>

#include "cfg/domains.hpp"
#include "cfg/types.hpp"

namespace cfg {

/// V-statistic energy distance 2 E|X - Y| - E|X - X'| - E|Y - Y'|.
double energy_distance(const Points& x, const Points& y);

struct SinkhornOptions {
  /// Regularization as a fraction of the mean pairwise squared distance.
  double eps_rel = 0.01;
  int max_iter = 1000;
  /// L1 violation of the row marginal that counts as converged.
  double tol = 1e-6;
  /// Report the Sinkhorn divergence OT(x,y) - (OT(x,x) + OT(y,y)) / 2 instead
  /// of the plain transport cost of the entropic plan.
  bool debiased = true;
};

struct SinkhornResult {
  double value = 0.0;      // sqrt of the divergence, or plan_cost when not debiased
  double plan_cost = 0.0;  // sqrt(<plan, cost>) of the cross problem
  double epsilon = 0.0;
  double marginal_violation = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Entropic W2 between uniform empirical measures, log-domain iterations.
/// Singletons give |a - b| and identical clouds give 0 in the debiased form.
SinkhornResult sinkhorn_w2(const Points& x, const Points& y, const SinkhornOptions& opts = {});

/// Exact W2 between equal-size clouds (at most 64 points) via optimal assignment.
double exact_w2_small(const Points& x, const Points& y);

/// Minimal-cost assignment for a square cost matrix; returns the column
/// assigned to each row.
std::vector<int> solve_assignment(const Mat& cost);

/// Fraction of columns with g(x) > 0.
double ratio_out(const ConstraintDomain& domain, const Points& x);

struct MetricReport {
  double w2_sinkhorn = 0.0;
  double energy = 0.0;
  double ratio_out = 0.0;
  long n_samples = 0;
  double eps_rel = 0.0;
  bool debiased = true;
  bool sinkhorn_converged = false;
};

/// Full report of samples against a reference set. The larger set is
/// subsampled (seeded) to the smaller size before the Sinkhorn computation.
MetricReport compute_report(const ConstraintDomain& domain, const Points& samples,
                            const Points& truth, const SinkhornOptions& opts = {},
                            std::uint64_t seed = 0);

/// Same, without a domain (ratio_out left at 0).
MetricReport compute_report(const Points& samples, const Points& truth,
                            const SinkhornOptions& opts = {}, std::uint64_t seed = 0);

}  // namespace cfg
