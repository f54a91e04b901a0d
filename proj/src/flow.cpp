#include "cfg/flow.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "cfg/parallel.hpp"

namespace cfg {

namespace {

Vec push_direction(const ConstraintDomain& domain, double lambda, const Vec& x) {
  const Vec grad = domain.grad_g(x);
  return -lambda * grad / std::max(grad.norm(), domain.grad_floor);
}

// Columns of x selected by idx.
Points gather(const Points& x, const std::vector<Eigen::Index>& idx) {
  Points out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(idx[k]);
  return out;
}

}  // namespace

Vec velocity(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
             double lambda, const Vec& x) {
  if (domain.g(x) < 0.0) return h_net_eval(fp, zp, domain, x);
  return push_direction(domain, lambda, x);
}

Points velocity_batch(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
                      double lambda, const Points& x) {
  const auto n = static_cast<std::size_t>(x.cols());
  Points v(x.rows(), x.cols());
  std::vector<char> inside(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      inside[i] = domain.g(x.col(c)) < 0.0;
      if (!inside[i]) v.col(c) = push_direction(domain, lambda, x.col(c));
    }
  });
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (inside[i]) idx.push_back(static_cast<Eigen::Index>(i));
  }
  if (idx.empty()) return v;
  const Points xin = gather(x, idx);
  const MlpBatch fb = mlp_forward_batch(fp, xin);
  const MlpBatch zb = mlp_forward_batch(zp, xin);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    const double z = zb.output()(0, c);
    v.col(idx[k]) = fb.output().col(c) - z * z * domain.grad_g(xin.col(c));
  }
  return v;
}

ParticlePartition partition(const ConstraintDomain& domain, const Points& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("partition requires h > 0");
  const auto n = static_cast<std::size_t>(x.cols());
  std::vector<char> is_inside(n), is_band(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Vec xi = x.col(static_cast<Eigen::Index>(i));
      is_inside[i] = domain.g(xi) < 0.0;
      is_band[i] = in_band(domain, xi, h);
    }
  });
  ParticlePartition p;
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    (is_inside[i] ? p.inside : p.outside).push_back(c);
    if (is_band[i]) p.band.push_back(c);
  }
  return p;
}

double boundary_term(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
                     const ParticlePartition& part, const Points& x, double h) {
  if (part.m() == 0) throw NoInsideParticles();
  double sum = 0.0;
  for (Eigen::Index j : part.band) {
    const Vec xj = x.col(j);
    sum += h_net_eval(fp, zp, domain, xj).dot(domain.unit_normal(xj));
  }
  return sum / (static_cast<double>(part.m()) * h);
}

double rsd_loss(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
                const TargetDistribution& target, const ParticlePartition& part,
                const Points& x, double h, const FlowOptions& opts) {
  if (part.m() == 0) throw NoInsideParticles();
  double sum = 0.0;
  for (Eigen::Index r : part.inside) {
    const Vec xr = x.col(r);
    const Vec hv = h_net_eval(fp, zp, domain, xr);
    sum += -target.score(xr).dot(hv) - divergence_h(fp, zp, domain, xr) + 0.5 * hv.squaredNorm();
  }
  double loss = sum / static_cast<double>(part.m());
  if (opts.boundary_term) loss += boundary_term(fp, zp, domain, part, x, h);
  return loss;
}

RsdGradient rsd_loss_grad(const MlpParams& fp, const MlpParams& zp,
                          const ConstraintDomain& domain, const TargetDistribution& target,
                          const ParticlePartition& part, const Points& x, double h,
                          const FlowOptions& opts) {
  if (part.m() == 0) throw NoInsideParticles();
  const double inv_m = 1.0 / static_cast<double>(part.m());
  const double band_w = opts.boundary_term ? inv_m / h : 0.0;

  // Active set: inside particles followed by band particles that are not inside
  // (g == 0 exactly). Band members that are inside share a column.
  std::vector<Eigen::Index> cols = part.inside;
  std::vector<double> w_in(cols.size(), inv_m), w_band(cols.size(), 0.0);
  if (opts.boundary_term) {
    std::unordered_map<Eigen::Index, std::size_t> slot;
    for (std::size_t i = 0; i < part.inside.size(); ++i) slot.emplace(part.inside[i], i);
    for (Eigen::Index j : part.band) {
      if (auto it = slot.find(j); it != slot.end()) {
        w_band[it->second] = band_w;
      } else {
        cols.push_back(j);
        w_in.push_back(0.0);
        w_band.push_back(band_w);
      }
    }
  }

  const Eigen::Index d = x.rows();
  const auto k = static_cast<Eigen::Index>(cols.size());
  const Points xa = gather(x, cols);
  Points grad_g(d, k), normal(d, k), score(d, k);
  Vec lap(k);
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto c = static_cast<Eigen::Index>(i);
      const Vec xi = xa.col(c);
      grad_g.col(c) = domain.grad_g(xi);
      normal.col(c) = grad_g.col(c) / std::max(grad_g.col(c).norm(), domain.grad_floor);
      if (w_in[i] != 0.0) {
        score.col(c) = target.score(xi);
        lap[c] = domain.laplacian_g(xi);
      } else {
        score.col(c).setZero();
        lap[c] = 0.0;
      }
    }
  });
  const Vec win = Eigen::Map<const Vec>(w_in.data(), k);
  const Vec wband = Eigen::Map<const Vec>(w_band.data(), k);

  const MlpBatch fb = mlp_forward_batch(fp, xa);
  const MlpBatch zb = mlp_forward_batch(zp, xa);
  const auto z_tangent = mlp_tangent_batch(zp, zb, grad_g);
  const Eigen::RowVectorXd z = zb.output().row(0);
  const Eigen::RowVectorXd dz = z_tangent.back().row(0);  // grad z . grad g
  const Vec trace_f = mlp_trace_batch(fp, fb);

  const Points hv = fb.output() - grad_g * z.cwiseAbs2().asDiagonal();
  const Eigen::RowVectorXd z2 = z.cwiseAbs2();

  RsdGradient out;
  double loss = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    const double div = trace_f[c] - 2.0 * z[c] * dz[c] - z2[c] * lap[c];
    loss += win[c] * (-score.col(c).dot(hv.col(c)) - div + 0.5 * hv.col(c).squaredNorm());
    loss += wband[c] * hv.col(c).dot(normal.col(c));
  }
  out.loss = loss;

  // dL/dh for every active column.
  const Points adj_h = (hv - score) * win.asDiagonal() + normal * wband.asDiagonal();

  out.f = MlpParams::zeros_like(fp);
  mlp_backward_batch(fp, fb, adj_h, out.f);
  mlp_trace_backward(fp, fb, -win, out.f);

  out.z = MlpParams::zeros_like(zp);
  if (opts.train_z) {
    Mat adj_z(1, k), adj_dz(1, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      adj_z(0, c) = -2.0 * z[c] * adj_h.col(c).dot(grad_g.col(c)) +
                    win[c] * (2.0 * dz[c] + 2.0 * z[c] * lap[c]);
      adj_dz(0, c) = 2.0 * z[c] * win[c];
    }
    mlp_backward_batch(zp, zb, adj_z, out.z);
    mlp_tangent_backward(zp, zb, z_tangent, adj_dz, out.z);
  }
  return out;
}

}  // namespace cfg
