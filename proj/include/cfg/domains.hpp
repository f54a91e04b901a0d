#pragma once

#include <functional>
#include <string>

#include "cfg/types.hpp"

namespace cfg {

/// Inequality-constrained domain {x : g(x) <= 0} together with the first and
/// second derivative information the sampler needs.
struct ConstraintDomain {
  std::string name;
  int dim = 0;
  std::function<double(const Vec&)> g;
  std::function<Vec(const Vec&)> grad_g;
  std::function<double(const Vec&)> laplacian_g;
  /// Lower bound applied to ||grad g|| before normalizing.
  double grad_floor = 1e-12;

  bool contains(const Vec& x) const { return g(x) <= 0.0; }

  /// grad g / max(||grad g||, grad_floor).
  Vec unit_normal(const Vec& x) const;
};

/// {1 <= |x|^2 <= 4} encoded as (|x|^2 - 2.5)^2 - 2.25.
ConstraintDomain make_ring();

/// {x1^2 + (1.2 x2 - |x1|^(2/3))^2 <= 4}.
ConstraintDomain make_cardioid();

/// {-log q(x) <= 2}, q(x) = (exp(-2(x1-3)^2) + exp(-2(x1+3)^2)) * exp(-2(|x|-3)^2).
ConstraintDomain make_double_moon();

/// {max(|x1|, |x2|) <= 2}.
ConstraintDomain make_block();

/// {||x||_q <= r} in dimension d. Requires q >= 1.
ConstraintDomain make_lq_ball(double q, double r, int d);

/// log q(x) for the double-moon density, with |x| clamped at 1e-8.
double double_moon_log_q(const Vec& x);
Vec double_moon_grad_log_q(const Vec& x);

/// Band proxy: g(x) <= 0 and g(x + h * grad g / |grad g|) >= 0. A true result
/// implies dist(x, boundary) <= h.
bool in_band(const ConstraintDomain& domain, const Vec& x, double h);

/// h0 * (d * N)^(-1/3).
double adaptive_bandwidth(double h0, int d, long n);

/// Builds a domain from its config key: "ring", "cardioid", "double_moon",
/// "block", "lq_ball" (the latter needs q, r, dim).
ConstraintDomain make_domain(const std::string& name, double q = 1.0, double r = 1.0,
                             int dim = 2);

}  // namespace cfg
