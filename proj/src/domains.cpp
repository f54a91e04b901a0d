#include "cfg/domains.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cfg {

namespace {

constexpr double kRadiusClamp = 1e-8;
constexpr double kCardioidClamp = 1e-8;
constexpr double kLqClamp = 1e-10;

void check_dim(const Vec& x, int d) {
  if (x.size() != d) {
    throw std::invalid_argument("point dimension " + std::to_string(x.size()) +
                                " does not match domain dimension " + std::to_string(d));
  }
}

// Index of the largest |x_i|; lowest index wins ties.
Eigen::Index argmax_abs(const Vec& x) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    if (std::abs(x[i]) > std::abs(x[best])) best = i;
  }
  return best;
}

// Softmax weights of the two moon exponents a+ = -2(x1-3)^2, a- = -2(x1+3)^2.
std::pair<double, double> moon_weights(double x1) {
  const double ap = -2.0 * (x1 - 3.0) * (x1 - 3.0);
  const double am = -2.0 * (x1 + 3.0) * (x1 + 3.0);
  const double mx = std::max(ap, am);
  const double ep = std::exp(ap - mx);
  const double em = std::exp(am - mx);
  return {ep / (ep + em), em / (ep + em)};
}

}  // namespace

Vec ConstraintDomain::unit_normal(const Vec& x) const {
  Vec n = grad_g(x);
  return n / std::max(n.norm(), grad_floor);
}

ConstraintDomain make_ring() {
  ConstraintDomain d;
  d.name = "ring";
  d.dim = 2;
  d.g = [](const Vec& x) {
    check_dim(x, 2);
    const double s = x.squaredNorm() - 2.5;
    return s * s - 2.25;
  };
  d.grad_g = [](const Vec& x) -> Vec {
    check_dim(x, 2);
    return 4.0 * (x.squaredNorm() - 2.5) * x;
  };
  d.laplacian_g = [](const Vec& x) {
    check_dim(x, 2);
    const double r2 = x.squaredNorm();
    return 8.0 * r2 + 4.0 * 2.0 * (r2 - 2.5);
  };
  return d;
}

ConstraintDomain make_cardioid() {
  // c(x1) = (x1^2)^(1/3); derivatives use |x1| clamped at kCardioidClamp.
  struct Parts {
    double c, dc, ddc;
  };
  auto parts = [](double x1) {
    const double a = std::max(std::abs(x1), kCardioidClamp);
    const double sgn = x1 >= 0.0 ? 1.0 : -1.0;
    return Parts{std::cbrt(x1 * x1), (2.0 / 3.0) * sgn * std::pow(a, -1.0 / 3.0),
                 -(2.0 / 9.0) * std::pow(a, -4.0 / 3.0)};
  };
  ConstraintDomain d;
  d.name = "cardioid";
  d.dim = 2;
  d.g = [parts](const Vec& x) {
    check_dim(x, 2);
    const double u = 1.2 * x[1] - parts(x[0]).c;
    return x[0] * x[0] + u * u - 4.0;
  };
  d.grad_g = [parts](const Vec& x) -> Vec {
    check_dim(x, 2);
    const Parts p = parts(x[0]);
    const double u = 1.2 * x[1] - p.c;
    Vec out(2);
    out << 2.0 * x[0] - 2.0 * u * p.dc, 2.4 * u;
    return out;
  };
  d.laplacian_g = [parts](const Vec& x) {
    check_dim(x, 2);
    const Parts p = parts(x[0]);
    const double u = 1.2 * x[1] - p.c;
    return 2.0 + 2.0 * p.dc * p.dc - 2.0 * u * p.ddc + 2.88;
  };
  return d;
}

double double_moon_log_q(const Vec& x) {
  check_dim(x, 2);
  const double ap = -2.0 * (x[0] - 3.0) * (x[0] - 3.0);
  const double am = -2.0 * (x[0] + 3.0) * (x[0] + 3.0);
  const double mx = std::max(ap, am);
  const double lse = mx + std::log(std::exp(ap - mx) + std::exp(am - mx));
  const double r = std::max(x.norm(), kRadiusClamp);
  return lse - 2.0 * (r - 3.0) * (r - 3.0);
}

Vec double_moon_grad_log_q(const Vec& x) {
  check_dim(x, 2);
  const auto [wp, wm] = moon_weights(x[0]);
  const double r = std::max(x.norm(), kRadiusClamp);
  Vec out = -4.0 * (r - 3.0) / r * x;
  out[0] += -4.0 * (wp * (x[0] - 3.0) + wm * (x[0] + 3.0));
  return out;
}

ConstraintDomain make_double_moon() {
  ConstraintDomain d;
  d.name = "double_moon";
  d.dim = 2;
  d.g = [](const Vec& x) { return -double_moon_log_q(x) - 2.0; };
  d.grad_g = [](const Vec& x) -> Vec { return -double_moon_grad_log_q(x); };
  d.laplacian_g = [](const Vec& x) {
    check_dim(x, 2);
    const auto [wp, wm] = moon_weights(x[0]);
    const double r = std::max(x.norm(), kRadiusClamp);
    // -log-sum-exp part only depends on x1; radial part is 2(r-3)^2 in 2-D.
    return (4.0 - 576.0 * wp * wm) + (4.0 + 4.0 * (r - 3.0) / r);
  };
  return d;
}

ConstraintDomain make_block() {
  ConstraintDomain d;
  d.name = "block";
  d.dim = 2;
  d.g = [](const Vec& x) {
    check_dim(x, 2);
    return x.cwiseAbs().maxCoeff() - 2.0;
  };
  d.grad_g = [](const Vec& x) -> Vec {
    check_dim(x, 2);
    const Eigen::Index i = argmax_abs(x);
    Vec out = Vec::Zero(2);
    out[i] = x[i] >= 0.0 ? 1.0 : -1.0;
    return out;
  };
  d.laplacian_g = [](const Vec& x) {
    check_dim(x, 2);
    return 0.0;
  };
  return d;
}

ConstraintDomain make_lq_ball(double q, double r, int dim) {
  if (!(q >= 1.0)) throw std::invalid_argument("lq_ball requires q >= 1");
  if (!(r > 0.0)) throw std::invalid_argument("lq_ball requires r > 0");
  if (dim < 1) throw std::invalid_argument("lq_ball requires dim >= 1");
  ConstraintDomain d;
  d.name = "lq_ball";
  d.dim = dim;
  auto norm_q = [q](const Vec& x) {
    if (q == 1.0) return x.lpNorm<1>();
    return std::pow(x.cwiseAbs().array().pow(q).sum(), 1.0 / q);
  };
  d.g = [norm_q, r, dim](const Vec& x) {
    check_dim(x, dim);
    return norm_q(x) - r;
  };
  d.grad_g = [norm_q, q, dim](const Vec& x) -> Vec {
    check_dim(x, dim);
    if (q == 1.0) {
      return x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    }
    const double n = norm_q(x);
    if (n <= 0.0) return Vec::Zero(dim);
    Vec out(dim);
    for (int i = 0; i < dim; ++i) {
      const double sgn = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
      out[i] = sgn * std::pow(std::abs(x[i]) / n, q - 1.0);
    }
    return out;
  };
  d.laplacian_g = [q, dim](const Vec& x) {
    check_dim(x, dim);
    if (q == 1.0) return 0.0;
    Vec a = x.cwiseAbs().cwiseMax(kLqClamp);
    const double n = std::pow(a.array().pow(q).sum(), 1.0 / q);
    double lap = 0.0;
    for (int i = 0; i < dim; ++i) {
      lap += std::pow(n, 1.0 - q) * std::pow(a[i], q - 2.0) -
             std::pow(n, 1.0 - 2.0 * q) * std::pow(a[i], 2.0 * q - 2.0);
    }
    return (q - 1.0) * lap;
  };
  return d;
}

bool in_band(const ConstraintDomain& domain, const Vec& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("in_band requires h > 0");
  const double gx = domain.g(x);
  if (gx > 0.0) return false;
  const Vec grad = domain.grad_g(x);
  const double nrm = grad.norm();
  if (nrm < domain.grad_floor) return false;
  return domain.g(x + (h / nrm) * grad) >= 0.0;
}

double adaptive_bandwidth(double h0, int d, long n) {
  if (!(h0 > 0.0) || d < 1 || n < 1) {
    throw std::invalid_argument("adaptive_bandwidth requires positive inputs");
  }
  return h0 * std::pow(static_cast<double>(d) * static_cast<double>(n), -1.0 / 3.0);
}

ConstraintDomain make_domain(const std::string& name, double q, double r, int dim) {
  if (name == "ring") return make_ring();
  if (name == "cardioid") return make_cardioid();
  if (name == "double_moon") return make_double_moon();
  if (name == "block") return make_block();
  if (name == "lq_ball") return make_lq_ball(q, r, dim);
  throw std::invalid_argument("unknown domain '" + name + "'");
}

}  // namespace cfg
