#pragma once

#include <stdexcept>
#include <vector>

#include "cfg/domains.hpp"
#include "cfg/net.hpp"
#include "cfg/targets.hpp"
#include "cfg/types.hpp"

namespace cfg {

/// Signals that no particle lies strictly inside the domain, so the training
/// objective is undefined for this iteration.
class NoInsideParticles : public std::runtime_error {
 public:
  NoInsideParticles() : std::runtime_error("no particles strictly inside the domain") {}
};

struct ParticlePartition {
  std::vector<Eigen::Index> inside;   // g < 0
  std::vector<Eigen::Index> band;     // in_band true
  std::vector<Eigen::Index> outside;  // g >= 0
  long m() const { return static_cast<long>(inside.size()); }
  long n() const { return static_cast<long>(band.size()); }
};

struct FlowOptions {
  /// Include the band-wise boundary integral in the objective.
  bool boundary_term = true;
  /// Produce gradients for the z network; when false its gradient is left zero.
  bool train_z = true;
};

/// h_net(x) where g(x) < 0, otherwise -lambda grad g / max(|grad g|, floor).
Vec velocity(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
             double lambda, const Vec& x);

/// velocity() for every column of x, with the networks evaluated in one batch.
Points velocity_batch(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
                      double lambda, const Points& x);

ParticlePartition partition(const ConstraintDomain& domain, const Points& x, double h);

/// (1 / (m h)) sum over band particles of h_net(x)^T grad g / |grad g|.
double boundary_term(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
                     const ParticlePartition& part, const Points& x, double h);

/// Empirical regularized Stein discrepancy, evaluated point by point:
/// (1/m) sum_inside [-s^T h - div h + |h|^2 / 2] + boundary_term.
double rsd_loss(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
                const TargetDistribution& target, const ParticlePartition& part,
                const Points& x, double h, const FlowOptions& opts = {});

struct RsdGradient {
  double loss = 0.0;
  MlpParams f;
  MlpParams z;
};

/// Loss and its exact (a.e.) gradient with respect to both networks, computed
/// on batched activations.
RsdGradient rsd_loss_grad(const MlpParams& fp, const MlpParams& zp,
                          const ConstraintDomain& domain, const TargetDistribution& target,
                          const ParticlePartition& part, const Points& x, double h,
                          const FlowOptions& opts = {});

}  // namespace cfg
