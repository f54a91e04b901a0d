#pragma once

#include <cstdint>
#include <vector>

#include "cfg/domains.hpp"
#include "cfg/types.hpp"

namespace cfg {

/// LeakyReLU negative slope used on every hidden layer.
inline constexpr double kLeakySlope = 0.1;

/// Fully connected network with LeakyReLU hidden layers and a linear output.
/// weights[l] maps layer l (size layer_sizes[l]) to layer l + 1.
struct MlpParams {
  std::vector<int> layer_sizes;
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }

  std::size_t num_params() const;
  Vec flatten() const;
  void unflatten(const Vec& flat);

  /// Same shapes, all entries zero.
  static MlpParams zeros_like(const MlpParams& other);
  bool same_shape(const MlpParams& other) const;
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases, final layer
/// scaled by 0.1. Deterministic per seed.
MlpParams init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Standard forward pass. Throws on input dimension mismatch.
Vec mlp_forward(const MlpParams& params, const Vec& x);

/// Exact input Jacobian (output_dim x input_dim) at x.
Mat mlp_jacobian(const MlpParams& params, const Vec& x);

/// The f network, R^d -> R^d.
inline Vec forward_f(const MlpParams& fp, const Vec& x) { return mlp_forward(fp, x); }

/// The z network, R^d -> R.
double forward_z(const MlpParams& zp, const Vec& x);

/// h(x) = f(x) - z(x)^2 grad g(x).
Vec h_net_eval(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
               const Vec& x);

/// Exact div h = tr J_f - 2 z grad z . grad g - z^2 lap g.
double divergence_h(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
                    const Vec& x);

// Batched evaluation. Points are columns; everything below is used by the
// training objective and needs no per-point allocation.

/// Activations of a forward pass over a batch. act[0] is the input, act.back()
/// the (linear) output, pre[l] the pre-activation of layer l + 1.
struct MlpBatch {
  std::vector<Mat> pre;
  std::vector<Mat> act;
  const Mat& output() const { return act.back(); }
};

MlpBatch mlp_forward_batch(const MlpParams& params, const Points& x);

/// Accumulates d/dparams of sum_i adjoint(:, i) . output(:, i) into grad.
void mlp_backward_batch(const MlpParams& params, const MlpBatch& batch, const Mat& adjoint,
                        MlpParams& grad);

/// Forward-mode tangents J_i u_i for input directions u_i (columns of dirs).
/// tangents[0] = dirs; tangents.back() holds the output tangents.
std::vector<Mat> mlp_tangent_batch(const MlpParams& params, const MlpBatch& batch,
                                   const Mat& dirs);

/// Accumulates d/dparams of sum_i adjoint(:, i) . J_i u_i into grad with the
/// activation pattern held fixed (exact almost everywhere for LeakyReLU).
void mlp_tangent_backward(const MlpParams& params, const MlpBatch& batch,
                          const std::vector<Mat>& tangents, const Mat& adjoint, MlpParams& grad);

/// tr J(x_i) for every column; requires output_dim == input_dim. Uses the
/// cyclic-trace identity for nets with two hidden layers, forward-mode
/// tangents otherwise.
Vec mlp_trace_batch(const MlpParams& params, const MlpBatch& batch);

/// Accumulates d/dparams of sum_i weights_i tr J(x_i) into grad.
void mlp_trace_backward(const MlpParams& params, const MlpBatch& batch, const Vec& weights,
                        MlpParams& grad);

/// Forward-mode versions of the two functions above, valid for any depth.
Vec mlp_trace_batch_tangent(const MlpParams& params, const MlpBatch& batch);
void mlp_trace_backward_tangent(const MlpParams& params, const MlpBatch& batch,
                                const Vec& weights, MlpParams& grad);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  MlpParams first_moment;
  MlpParams second_moment;
  long step = 0;
  AdamOptions options;
};

AdamState adam_init(const MlpParams& params, const AdamOptions& options = {});

/// One bias-corrected Adam update of params in place.
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, double lr);

}  // namespace cfg
