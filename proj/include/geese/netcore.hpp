#pragma once

#include <utility>
#include <vector>

#include "geese/common.hpp"

namespace geese {

enum class Activation { Relu, Tanh, Identity };

// Training hyperparameters for a single net. max_iters is the per-call step
// cap (T_e); early_stop_threshold is the loss level below which training
// stops (eps_e). A threshold of 0 disables early stopping.
struct TrainConfig {
  double learning_rate = 1e-4;
  int max_iters = 40;
  double early_stop_threshold = 1e-4;
  int batch_size = 64;

  void validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
    if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
    if (early_stop_threshold < 0.0)
      throw std::invalid_argument("early_stop_threshold must be >= 0");
    if (batch_size <= 0) throw std::invalid_argument("batch_size must be > 0");
  }
};

// Dense feed-forward net with a flat weight vector. Layout per layer l:
// weight matrix W_l (out x in, row-major) followed by bias b_l. Hidden layers
// use `activation`; the output layer is linear.
class DenseNet {
 public:
  DenseNet(std::vector<int> layer_sizes, Activation activation = Activation::Relu);

  // Glorot-uniform weight init (+-sqrt(6/(fan_in+fan_out))), zero biases.
  static DenseNet init_random(std::vector<int> layer_sizes, Rng& rng,
                              Activation activation = Activation::Relu);

  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  Activation activation() const { return activation_; }

  std::size_t weight_count() const { return weights_.size(); }
  const Vec& weights() const { return weights_; }
  Vec& weights() { return weights_; }

  Vec forward(const Vec& x) const;

  // Vector-Jacobian product for L = cotangent . f(x): returns f(x) together
  // with dL/dx and dL/dw in one backward pass.
  struct Pullback {
    Vec output;
    Vec grad_x;
    Vec grad_w;
  };
  Pullback vjp(const Vec& x, const Vec& cotangent) const;

  // As vjp but skips the weight gradient (candidate scoring path).
  void vjp_input_only(const Vec& x, const Vec& cotangent, Vec& output, Vec& grad_x) const;

  // True if any hidden pre-activation at any batch input lies within tol of a
  // rectifier kink; gradient-check sampling re-draws such batches.
  bool near_activation_kink(const std::vector<Vec>& inputs, double tol = 1e-6) const;

 private:
  std::vector<int> layer_sizes_;
  Activation activation_;
  Vec weights_;
  // per-layer offsets into weights_: [W_0, b_0, W_1, b_1, ...]
  std::vector<std::size_t> w_off_;
  std::vector<std::size_t> b_off_;

  void backward(const std::vector<Vec>& acts, const std::vector<Vec>& preacts,
                const Vec& cotangent, Vec* grad_x, Vec* grad_w) const;
  void run_forward(const Vec& x, std::vector<Vec>& acts, std::vector<Vec>& preacts) const;

  friend std::size_t expected_weight_count(const std::vector<int>&);
};

std::size_t expected_weight_count(const std::vector<int>& layer_sizes);

using Batch = std::vector<std::pair<Vec, Vec>>;  // (input, target)

// Mean over the batch of squared L2 distance between net output and target,
// with exact gradients w.r.t. weights and each input.
struct BatchGrads {
  double loss = 0.0;
  Vec grad_w;
  std::vector<Vec> grad_x;
};
BatchGrads loss_and_grads(const DenseNet& net, const Batch& batch);

double batch_loss(const DenseNet& net, const Batch& batch);

// Adam with (0.9, 0.999, eps 1e-8).
struct AdamState {
  Vec m;
  Vec v;
  long t = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
  void step(Vec& w, const Vec& grad, double lr);
};

struct TrainResult {
  bool early_stopped = false;
  double final_loss = 0.0;
  int iters_run = 0;
};

// Runs at most cfg.max_iters Adam steps; stops early as soon as the step's
// batch loss drops below the early-stop threshold (before applying the
// update, so a net already at the optimum is untouched).
TrainResult train(DenseNet& net, const Batch& data, const TrainConfig& cfg, Rng& rng);

// Central-difference estimate of the weight gradient of batch_loss.
Vec finite_diff_grad(const DenseNet& net, const Batch& batch, double step);

struct GradCheckReport {
  double max_relative_error = 0.0;
  Vec per_weight_errors;
};

// Compares loss_and_grads against finite_diff_grad. Error metric per weight:
// |bp - fd| / max(1, |bp|, |fd|).
GradCheckReport check_gradients(const DenseNet& net, const Batch& batch, double step = 1e-5);

}  // namespace geese
