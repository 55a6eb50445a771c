#include "geese/netcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace geese {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Tanh: return std::tanh(z);
    case Activation::Identity: return z;
  }
  return z;
}

// Derivative in terms of the pre-activation z.
double activate_prime(Activation a, double z) {
  switch (a) {
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

}  // namespace

std::size_t expected_weight_count(const std::vector<int>& layer_sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    n += static_cast<std::size_t>(layer_sizes[l]) * layer_sizes[l + 1] + layer_sizes[l + 1];
  return n;
}

DenseNet::DenseNet(std::vector<int> layer_sizes, Activation activation)
    : layer_sizes_(std::move(layer_sizes)), activation_(activation) {
  if (layer_sizes_.size() < 2)
    throw std::invalid_argument("DenseNet needs at least input and output layers");
  for (int n : layer_sizes_)
    if (n <= 0) throw std::invalid_argument("layer sizes must be positive");
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    w_off_.push_back(off);
    off += static_cast<std::size_t>(layer_sizes_[l]) * layer_sizes_[l + 1];
    b_off_.push_back(off);
    off += layer_sizes_[l + 1];
  }
  weights_.assign(off, 0.0);
}

DenseNet DenseNet::init_random(std::vector<int> layer_sizes, Rng& rng, Activation activation) {
  DenseNet net(std::move(layer_sizes), activation);
  for (std::size_t l = 0; l + 1 < net.layer_sizes_.size(); ++l) {
    int fan_in = net.layer_sizes_[l];
    int fan_out = net.layer_sizes_[l + 1];
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::size_t n = static_cast<std::size_t>(fan_in) * fan_out;
    for (std::size_t i = 0; i < n; ++i)
      net.weights_[net.w_off_[l] + i] = rng.uniform(-bound, bound);
    // biases stay zero
  }
  return net;
}

void DenseNet::run_forward(const Vec& x, std::vector<Vec>& acts,
                           std::vector<Vec>& preacts) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw DimensionMismatch("DenseNet::forward: input has size " +
                            std::to_string(x.size()) + ", expected " +
                            std::to_string(input_dim()));
  std::size_t n_layers = layer_sizes_.size() - 1;
  acts.assign(n_layers + 1, {});
  preacts.assign(n_layers, {});
  acts[0] = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    int in = layer_sizes_[l];
    int out = layer_sizes_[l + 1];
    Vec& z = preacts[l];
    z.assign(out, 0.0);
    const double* W = weights_.data() + w_off_[l];
    const double* b = weights_.data() + b_off_[l];
    const Vec& a = acts[l];
    for (int r = 0; r < out; ++r) {
      double s = b[r];
      const double* row = W + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) s += row[c] * a[c];
      z[r] = s;
    }
    bool last = (l + 1 == n_layers);
    Vec& an = acts[l + 1];
    an.resize(out);
    for (int r = 0; r < out; ++r) an[r] = last ? z[r] : activate(activation_, z[r]);
  }
}

Vec DenseNet::forward(const Vec& x) const {
  std::vector<Vec> acts, preacts;
  run_forward(x, acts, preacts);
  return acts.back();
}

void DenseNet::backward(const std::vector<Vec>& acts, const std::vector<Vec>& preacts,
                        const Vec& cotangent, Vec* grad_x, Vec* grad_w) const {
  std::size_t n_layers = layer_sizes_.size() - 1;
  Vec delta = cotangent;  // output layer is linear
  for (std::size_t li = n_layers; li-- > 0;) {
    int in = layer_sizes_[li];
    int out = layer_sizes_[li + 1];
    const Vec& a = acts[li];
    if (grad_w) {
      double* gW = grad_w->data() + w_off_[li];
      double* gb = grad_w->data() + b_off_[li];
      for (int r = 0; r < out; ++r) {
        double d = delta[r];
        double* row = gW + static_cast<std::size_t>(r) * in;
        for (int c = 0; c < in; ++c) row[c] += d * a[c];
        gb[r] += d;
      }
    }
    bool need_prev = (li > 0) || grad_x;
    if (!need_prev) break;
    Vec prev(in, 0.0);
    const double* W = weights_.data() + w_off_[li];
    for (int r = 0; r < out; ++r) {
      double d = delta[r];
      const double* row = W + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) prev[c] += d * row[c];
    }
    if (li > 0) {
      const Vec& z = preacts[li - 1];
      for (int c = 0; c < in; ++c) prev[c] *= activate_prime(activation_, z[c]);
    }
    delta = std::move(prev);
  }
  if (grad_x) *grad_x = std::move(delta);
}

DenseNet::Pullback DenseNet::vjp(const Vec& x, const Vec& cotangent) const {
  if (static_cast<int>(cotangent.size()) != output_dim())
    throw DimensionMismatch("vjp: cotangent size mismatch");
  std::vector<Vec> acts, preacts;
  run_forward(x, acts, preacts);
  Pullback pb;
  pb.output = acts.back();
  pb.grad_w.assign(weights_.size(), 0.0);
  backward(acts, preacts, cotangent, &pb.grad_x, &pb.grad_w);
  return pb;
}

void DenseNet::vjp_input_only(const Vec& x, const Vec& cotangent, Vec& output,
                              Vec& grad_x) const {
  if (static_cast<int>(cotangent.size()) != output_dim())
    throw DimensionMismatch("vjp: cotangent size mismatch");
  std::vector<Vec> acts, preacts;
  run_forward(x, acts, preacts);
  output = acts.back();
  backward(acts, preacts, cotangent, &grad_x, nullptr);
}

bool DenseNet::near_activation_kink(const std::vector<Vec>& inputs, double tol) const {
  if (activation_ != Activation::Relu) return false;
  std::vector<Vec> acts, preacts;
  for (const Vec& x : inputs) {
    run_forward(x, acts, preacts);
    for (std::size_t l = 0; l + 1 < preacts.size(); ++l)  // hidden layers only
      for (double z : preacts[l])
        if (std::abs(z) < tol) return true;
  }
  return false;
}

BatchGrads loss_and_grads(const DenseNet& net, const Batch& batch) {
  if (batch.empty()) throw std::invalid_argument("loss_and_grads: empty batch");
  BatchGrads out;
  out.grad_w.assign(net.weight_count(), 0.0);
  out.grad_x.reserve(batch.size());
  double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& [x, target] : batch) {
    if (static_cast<int>(target.size()) != net.output_dim())
      throw DimensionMismatch("loss_and_grads: target size mismatch");
    Vec y = net.forward(x);
    Vec cot(y.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double r = y[i] - target[i];
      sq += r * r;
      cot[i] = 2.0 * r * inv_b;
    }
    out.loss += sq * inv_b;
    auto pb = net.vjp(x, cot);
    for (std::size_t i = 0; i < out.grad_w.size(); ++i) out.grad_w[i] += pb.grad_w[i];
    out.grad_x.push_back(std::move(pb.grad_x));
  }
  return out;
}

double batch_loss(const DenseNet& net, const Batch& batch) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  double loss = 0.0;
  for (const auto& [x, target] : batch) {
    Vec y = net.forward(x);
    double sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double r = y[i] - target[i];
      sq += r * r;
    }
    loss += sq;
  }
  return loss / static_cast<double>(batch.size());
}

void AdamState::step(Vec& w, const Vec& grad, double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t;
  double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
    v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
    w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

namespace {

Batch draw_batch(const Batch& data, int batch_size, Rng& rng) {
  if (static_cast<std::size_t>(batch_size) >= data.size()) return data;
  Batch out;
  out.reserve(batch_size);
  for (int i = 0; i < batch_size; ++i) out.push_back(data[rng.index(data.size())]);
  return out;
}

}  // namespace

TrainResult train(DenseNet& net, const Batch& data, const TrainConfig& cfg, Rng& rng) {
  if (data.empty()) throw std::invalid_argument("train: empty data");
  cfg.validate();
  AdamState opt(net.weight_count());
  TrainResult res;
  for (int it = 0; it < cfg.max_iters; ++it) {
    Batch batch = draw_batch(data, cfg.batch_size, rng);
    BatchGrads bg = loss_and_grads(net, batch);
    if (!std::isfinite(bg.loss)) throw TrainingDiverged(it);
    if (bg.loss < cfg.early_stop_threshold) {
      res.early_stopped = true;
      res.final_loss = bg.loss;
      res.iters_run = it;
      return res;
    }
    opt.step(net.weights(), bg.grad_w, cfg.learning_rate);
    res.iters_run = it + 1;
  }
  res.final_loss = batch_loss(net, data);
  if (!std::isfinite(res.final_loss)) throw TrainingDiverged(res.iters_run);
  return res;
}

Vec finite_diff_grad(const DenseNet& net, const Batch& batch, double step) {
  if (step <= 0.0) throw std::invalid_argument("finite_diff_grad: step must be > 0");
  DenseNet probe = net;
  Vec grad(net.weight_count(), 0.0);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    double w0 = probe.weights()[i];
    probe.weights()[i] = w0 + step;
    double up = batch_loss(probe, batch);
    probe.weights()[i] = w0 - step;
    double down = batch_loss(probe, batch);
    probe.weights()[i] = w0;
    grad[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

GradCheckReport check_gradients(const DenseNet& net, const Batch& batch, double step) {
  BatchGrads bg = loss_and_grads(net, batch);
  Vec fd = finite_diff_grad(net, batch, step);
  GradCheckReport rep;
  rep.per_weight_errors.resize(fd.size());
  for (std::size_t i = 0; i < fd.size(); ++i) {
    double denom = std::max({1.0, std::abs(bg.grad_w[i]), std::abs(fd[i])});
    rep.per_weight_errors[i] = std::abs(bg.grad_w[i] - fd[i]) / denom;
    rep.max_relative_error = std::max(rep.max_relative_error, rep.per_weight_errors[i]);
  }
  return rep;
}

}  // namespace geese
