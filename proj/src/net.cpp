#include "cfg/net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace cfg {

namespace {

Mat leaky(const Mat& a) {
  // max(v, slope v) equals the branchy form for 0 < slope < 1 and vectorizes.
  return a.cwiseMax(kLeakySlope * a);
}

// Elementwise activation derivative (the diagonal of D).
Mat leaky_slope(const Mat& a) {
  return ((a.array() > 0.0).cast<double>() * (1.0 - kLeakySlope) + kLeakySlope).matrix();
}

void check_input(const MlpParams& params, Eigen::Index rows) {
  if (rows != params.input_dim()) {
    throw std::invalid_argument("network input has dimension " + std::to_string(rows) +
                                ", expected " + std::to_string(params.input_dim()));
  }
}

bool is_three_layer_square(const MlpParams& p) {
  return p.num_layers() == 3 && p.input_dim() == p.output_dim();
}

}  // namespace

std::size_t MlpParams::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

Vec MlpParams::flatten() const {
  Vec flat(static_cast<Eigen::Index>(num_params()));
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    flat.segment(pos, weights[l].size()) = weights[l].reshaped();
    pos += weights[l].size();
    flat.segment(pos, biases[l].size()) = biases[l];
    pos += biases[l].size();
  }
  return flat;
}

void MlpParams::unflatten(const Vec& flat) {
  if (flat.size() != static_cast<Eigen::Index>(num_params())) {
    throw std::invalid_argument("flat parameter vector has the wrong length");
  }
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l].reshaped() = flat.segment(pos, weights[l].size());
    pos += weights[l].size();
    biases[l] = flat.segment(pos, biases[l].size());
    pos += biases[l].size();
  }
}

MlpParams MlpParams::zeros_like(const MlpParams& other) {
  MlpParams z;
  z.layer_sizes = other.layer_sizes;
  for (std::size_t l = 0; l < other.weights.size(); ++l) {
    z.weights.push_back(Mat::Zero(other.weights[l].rows(), other.weights[l].cols()));
    z.biases.push_back(Vec::Zero(other.biases[l].size()));
  }
  return z;
}

bool MlpParams::same_shape(const MlpParams& other) const {
  if (layer_sizes != other.layer_sizes || weights.size() != other.weights.size() ||
      biases.size() != other.biases.size()) {
    return false;
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != other.weights[l].rows() ||
        weights[l].cols() != other.weights[l].cols() ||
        biases[l].size() != other.biases[l].size()) {
      return false;
    }
  }
  return true;
}

MlpParams init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("an MLP needs at least two layer sizes");
  for (int s : layer_sizes) {
    if (s < 1) throw std::invalid_argument("layer sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  MlpParams p;
  p.layer_sizes = layer_sizes;
  const std::size_t n_layers = layer_sizes.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int fan_in = layer_sizes[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> unif(-bound, bound);
    Mat w(layer_sizes[l + 1], fan_in);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = unif(rng);
    }
    if (l + 1 == n_layers) w *= 0.1;
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vec::Zero(layer_sizes[l + 1]));
  }
  return p;
}

Vec mlp_forward(const MlpParams& params, const Vec& x) {
  check_input(params, x.size());
  Vec a = x;
  const int n = params.num_layers();
  for (int l = 0; l < n; ++l) {
    Vec pre = params.weights[l] * a + params.biases[l];
    a = (l + 1 < n) ? Vec(leaky(pre)) : pre;
  }
  return a;
}

Mat mlp_jacobian(const MlpParams& params, const Vec& x) {
  check_input(params, x.size());
  Vec a = x;
  Mat jac = Mat::Identity(x.size(), x.size());
  const int n = params.num_layers();
  for (int l = 0; l < n; ++l) {
    Vec pre = params.weights[l] * a + params.biases[l];
    jac = params.weights[l] * jac;
    if (l + 1 < n) {
      jac = leaky_slope(pre).asDiagonal() * jac;
      a = leaky(pre);
    }
  }
  return jac;
}

double forward_z(const MlpParams& zp, const Vec& x) {
  if (zp.output_dim() != 1) throw std::invalid_argument("z network must have scalar output");
  return mlp_forward(zp, x)[0];
}

Vec h_net_eval(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
               const Vec& x) {
  const double z = forward_z(zp, x);
  return forward_f(fp, x) - z * z * domain.grad_g(x);
}

double divergence_h(const MlpParams& fp, const MlpParams& zp, const ConstraintDomain& domain,
                    const Vec& x) {
  const double trace_f = mlp_jacobian(fp, x).trace();
  const double z = forward_z(zp, x);
  const Vec grad_z = mlp_jacobian(zp, x).row(0).transpose();
  return trace_f - 2.0 * z * grad_z.dot(domain.grad_g(x)) - z * z * domain.laplacian_g(x);
}

MlpBatch mlp_forward_batch(const MlpParams& params, const Points& x) {
  check_input(params, x.rows());
  MlpBatch b;
  const int n = params.num_layers();
  b.pre.reserve(n);
  b.act.reserve(n + 1);
  b.act.push_back(x);
  for (int l = 0; l < n; ++l) {
    Mat pre = params.weights[l] * b.act.back();
    pre.colwise() += params.biases[l];
    b.act.push_back(l + 1 < n ? leaky(pre) : pre);
    b.pre.push_back(std::move(pre));
  }
  return b;
}

void mlp_backward_batch(const MlpParams& params, const MlpBatch& batch, const Mat& adjoint,
                        MlpParams& grad) {
  Mat adj = adjoint;
  for (int l = params.num_layers() - 1; l >= 0; --l) {
    grad.weights[l].noalias() += adj * batch.act[l].transpose();
    grad.biases[l] += adj.rowwise().sum();
    if (l > 0) {
      Mat back = params.weights[l].transpose() * adj;
      adj = back.cwiseProduct(leaky_slope(batch.pre[l - 1]));
    }
  }
}

std::vector<Mat> mlp_tangent_batch(const MlpParams& params, const MlpBatch& batch,
                                   const Mat& dirs) {
  check_input(params, dirs.rows());
  const int n = params.num_layers();
  std::vector<Mat> t;
  t.reserve(n + 1);
  t.push_back(dirs);
  for (int l = 0; l < n; ++l) {
    Mat next = params.weights[l] * t.back();
    if (l + 1 < n) next = next.cwiseProduct(leaky_slope(batch.pre[l]));
    t.push_back(std::move(next));
  }
  return t;
}

void mlp_tangent_backward(const MlpParams& params, const MlpBatch& batch,
                          const std::vector<Mat>& tangents, const Mat& adjoint, MlpParams& grad) {
  Mat adj = adjoint;
  for (int l = params.num_layers() - 1; l >= 0; --l) {
    grad.weights[l].noalias() += adj * tangents[l].transpose();
    if (l > 0) {
      Mat back = params.weights[l].transpose() * adj;
      adj = back.cwiseProduct(leaky_slope(batch.pre[l - 1]));
    }
  }
}

Vec mlp_trace_batch_tangent(const MlpParams& params, const MlpBatch& batch) {
  const Eigen::Index d = params.input_dim();
  const Eigen::Index m = batch.act[0].cols();
  Vec tr = Vec::Zero(m);
  for (Eigen::Index k = 0; k < d; ++k) {
    Mat dirs = Mat::Zero(d, m);
    dirs.row(k).setOnes();
    const auto t = mlp_tangent_batch(params, batch, dirs);
    tr += t.back().row(k).transpose();
  }
  return tr;
}

void mlp_trace_backward_tangent(const MlpParams& params, const MlpBatch& batch,
                                const Vec& weights, MlpParams& grad) {
  const Eigen::Index d = params.input_dim();
  const Eigen::Index m = batch.act[0].cols();
  for (Eigen::Index k = 0; k < d; ++k) {
    Mat dirs = Mat::Zero(d, m);
    dirs.row(k).setOnes();
    const auto t = mlp_tangent_batch(params, batch, dirs);
    Mat adj = Mat::Zero(params.output_dim(), m);
    adj.row(k) = weights.transpose();
    mlp_tangent_backward(params, batch, t, adj, grad);
  }
}

// For three weight layers W1 (H1 x d), W2 (H2 x H1), W3 (d x H2):
//   tr(W3 D2 W2 D1 W1) = tr(D1 M D2 W2) = delta1^T (M o W2^T) delta2,  M = W1 W3,
// so the trace costs one H1 x H2 product per batch regardless of d.
Vec mlp_trace_batch(const MlpParams& params, const MlpBatch& batch) {
  if (params.input_dim() != params.output_dim()) {
    throw std::invalid_argument("trace needs a square Jacobian");
  }
  if (!is_three_layer_square(params)) return mlp_trace_batch_tangent(params, batch);
  const Mat& w1 = params.weights[0];
  const Mat& w2 = params.weights[1];
  const Mat& w3 = params.weights[2];
  const Mat q = (w1 * w3).cwiseProduct(w2.transpose());
  const Mat d1 = leaky_slope(batch.pre[0]);
  const Mat d2 = leaky_slope(batch.pre[1]);
  const Mat qd2 = q * d2;
  return d1.cwiseProduct(qd2).colwise().sum().transpose();
}

void mlp_trace_backward(const MlpParams& params, const MlpBatch& batch, const Vec& weights,
                        MlpParams& grad) {
  if (params.input_dim() != params.output_dim()) {
    throw std::invalid_argument("trace needs a square Jacobian");
  }
  if (!is_three_layer_square(params)) {
    mlp_trace_backward_tangent(params, batch, weights, grad);
    return;
  }
  const Mat& w1 = params.weights[0];
  const Mat& w2 = params.weights[1];
  const Mat& w3 = params.weights[2];
  const Mat m = w1 * w3;
  const Mat d1 = leaky_slope(batch.pre[0]) * weights.asDiagonal();
  const Mat d2 = leaky_slope(batch.pre[1]);
  const Mat s = d1 * d2.transpose();  // sum_i w_i delta1_i delta2_i^T
  grad.weights[1] += m.cwiseProduct(s).transpose();
  const Mat dm = w2.transpose().cwiseProduct(s);
  grad.weights[0].noalias() += dm * w3.transpose();
  grad.weights[2].noalias() += w1.transpose() * dm;
}

AdamState adam_init(const MlpParams& params, const AdamOptions& options) {
  return AdamState{MlpParams::zeros_like(params), MlpParams::zeros_like(params), 0, options};
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, double lr) {
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment) ||
      !params.same_shape(state.second_moment)) {
    throw std::invalid_argument("adam_step: parameter, gradient and state shapes differ");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: learning rate must be positive");
  const AdamOptions& o = state.options;
  ++state.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + o.eps);
  };
  for (int l = 0; l < params.num_layers(); ++l) {
    update(params.weights[l], grads.weights[l], state.first_moment.weights[l],
           state.second_moment.weights[l]);
    update(params.biases[l], grads.biases[l], state.first_moment.biases[l],
           state.second_moment.biases[l]);
  }
}

}  // namespace cfg
