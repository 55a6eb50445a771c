#include <doctest.h>

#include <cmath>

#include "geese/netcore.hpp"

using namespace geese;

namespace {

DenseNet random_net(std::vector<int> sizes, Rng& rng, Activation act = Activation::Relu) {
  DenseNet net = DenseNet::init_random(std::move(sizes), rng, act);
  for (double& w : net.weights()) w += rng.uniform(-0.3, 0.3);  // nonzero biases too
  return net;
}

Batch random_batch(const DenseNet& net, int n, Rng& rng) {
  Batch batch;
  for (int i = 0; i < n; ++i) {
    Vec x(net.input_dim()), t(net.output_dim());
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    for (double& v : t) v = rng.uniform(-1.0, 1.0);
    batch.emplace_back(std::move(x), std::move(t));
  }
  return batch;
}

// Batch whose inputs keep every rectifier pre-activation away from the kink,
// so central differences stay trustworthy.
Batch gradcheck_batch(const DenseNet& net, int n, Rng& rng) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Batch batch = random_batch(net, n, rng);
    std::vector<Vec> inputs;
    for (const auto& [x, t] : batch) inputs.push_back(x);
    if (!net.near_activation_kink(inputs, 1e-6)) return batch;
  }
  FAIL("could not draw a kink-free batch");
  return {};
}

}  // namespace

TEST_CASE("weight layout size") {
  DenseNet net({3, 5, 2});
  CHECK(net.weight_count() == expected_weight_count({3, 5, 2}));
  CHECK(net.weight_count() == 3 * 5 + 5 + 5 * 2 + 2);
}

TEST_CASE("forward: zero weights annihilate any input") {
  DenseNet net({4, 8, 3});
  Vec y = net.forward({1.0, -2.0, 0.5, 3.0});
  REQUIRE(y.size() == 3);
  for (double v : y) CHECK(v == 0.0);
}

TEST_CASE("forward: identity single layer") {
  DenseNet net({2, 2});
  // W row-major then bias
  net.weights() = {1.0, 0.0, 0.0, 1.0, 0.0, 0.0};
  Vec y = net.forward({0.3, -0.2});
  CHECK(y[0] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(-0.2).epsilon(1e-15));
}

TEST_CASE("forward: 2-3-1 net matches a hand-rolled oracle") {
  Rng rng(77);
  DenseNet net = random_net({2, 3, 1}, rng);
  Vec x{0.5, 0.5};

  // independent re-computation straight off the flat weight layout
  const Vec& w = net.weights();
  double h[3];
  for (int r = 0; r < 3; ++r) {
    double z = w[6 + r] + w[r * 2] * x[0] + w[r * 2 + 1] * x[1];
    h[r] = z > 0.0 ? z : 0.0;
  }
  double expect = w[9 + 3];
  for (int r = 0; r < 3; ++r) expect += w[9 + r] * h[r];

  CHECK(net.forward(x)[0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("forward: dimension mismatch throws") {
  DenseNet net({3, 2});
  CHECK_THROWS_AS(net.forward({1.0, 2.0}), DimensionMismatch);
}

TEST_CASE("loss: zero at the global minimum, with zero weight gradient") {
  Rng rng(5);
  DenseNet net = random_net({2, 4, 2}, rng);
  Batch batch;
  for (int i = 0; i < 3; ++i) {
    Vec x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    batch.emplace_back(x, net.forward(x));
  }
  BatchGrads bg = loss_and_grads(net, batch);
  CHECK(bg.loss == doctest::Approx(0.0).epsilon(1e-18));
  for (double g : bg.grad_w) CHECK(std::abs(g) < 1e-12);
}

TEST_CASE("loss: zero net against unit target") {
  DenseNet net({1, 1});
  BatchGrads bg = loss_and_grads(net, {{{0.5}, {1.0}}});
  CHECK(bg.loss == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("loss: empty batch is invalid") {
  DenseNet net({1, 1});
  CHECK_THROWS_AS(loss_and_grads(net, {}), std::invalid_argument);
}

TEST_CASE("backprop matches central finite differences") {
  Rng rng(2024);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<int> sizes{2 + static_cast<int>(rng.index(3)),
                           2 + static_cast<int>(rng.index(6)),
                           1 + static_cast<int>(rng.index(3))};
    if (trial % 2 == 0) sizes.insert(sizes.begin() + 1, 3 + static_cast<int>(rng.index(4)));
    DenseNet net = random_net(sizes, rng, trial % 3 == 2 ? Activation::Tanh
                                                         : Activation::Relu);
    Batch batch = gradcheck_batch(net, 3, rng);
    GradCheckReport rep = check_gradients(net, batch, 1e-5);
    CHECK(rep.max_relative_error < 1e-4);
  }
}

TEST_CASE("grad check report: max equals the max of per-weight errors") {
  Rng rng(3);
  DenseNet net = random_net({2, 3, 1}, rng);
  Batch batch = gradcheck_batch(net, 2, rng);
  GradCheckReport rep = check_gradients(net, batch, 1e-5);
  double expected = 0.0;
  for (double e : rep.per_weight_errors) expected = std::max(expected, e);
  CHECK(rep.max_relative_error == expected);
}

TEST_CASE("finite differences: zero-loss configuration gives a near-zero vector") {
  Rng rng(11);
  DenseNet net = random_net({2, 3, 2}, rng);
  Batch batch;
  Vec x{0.4, -0.6};
  batch.emplace_back(x, net.forward(x));
  Vec fd = finite_diff_grad(net, batch, 1e-5);
  for (double g : fd) CHECK(std::abs(g) < 1e-8);
}

TEST_CASE("finite differences: quadratic single-weight net matches 2w") {
  DenseNet net({1, 1});
  net.weights() = {0.7, 0.0};  // y = 0.7 x, loss(x=1,t=0) = w^2
  Vec fd = finite_diff_grad(net, {{{1.0}, {0.0}}}, 1e-6);
  CHECK(fd[0] == doctest::Approx(2.0 * 0.7).epsilon(1e-6));
}

TEST_CASE("train: already-fit data early-stops before any update") {
  Rng rng(21);
  DenseNet net = random_net({1, 4, 1}, rng);
  Batch data;
  for (int i = 0; i < 5; ++i) {
    Vec x{rng.uniform(-1, 1)};
    data.emplace_back(x, net.forward(x));
  }
  Vec before = net.weights();
  Rng train_rng(1);
  TrainResult res = train(net, data, TrainConfig{1e-3, 50, 1e-4, 8}, train_rng);
  CHECK(res.early_stopped);
  CHECK(res.iters_run == 0);
  CHECK(net.weights() == before);
}

TEST_CASE("train: max_iters=0 leaves the net unchanged") {
  Rng rng(22);
  DenseNet net = random_net({1, 3, 1}, rng);
  Vec before = net.weights();
  Batch data{{{0.2}, {5.0}}};
  Rng train_rng(1);
  TrainResult res = train(net, data, TrainConfig{1e-3, 0, 1e-4, 8}, train_rng);
  CHECK_FALSE(res.early_stopped);
  CHECK(net.weights() == before);
}

TEST_CASE("train: loss decreases on a 1-d regression") {
  Rng rng(23);
  DenseNet net = random_net({1, 8, 1}, rng);
  Batch data;
  for (int i = 0; i < 32; ++i) {
    double x = rng.uniform(-1.0, 1.0);
    data.push_back({{x}, {2.0 * x}});
  }
  double initial = batch_loss(net, data);
  Rng train_rng(9);
  TrainResult res = train(net, data, TrainConfig{1e-2, 200, 1e-12, 32}, train_rng);
  CHECK(res.final_loss < initial);
}

TEST_CASE("train: early stop implies final loss under the threshold") {
  Rng rng(24);
  for (int trial = 0; trial < 5; ++trial) {
    DenseNet net = random_net({1, 6, 1}, rng);
    Batch data;
    for (int i = 0; i < 16; ++i) {
      double x = rng.uniform(-1.0, 1.0);
      data.push_back({{x}, {0.3 * x}});
    }
    Rng train_rng(static_cast<std::uint64_t>(trial));
    TrainConfig cfg{1e-2, 400, 1e-3, 16};
    TrainResult res = train(net, data, cfg, train_rng);
    if (res.early_stopped) CHECK(res.final_loss < cfg.early_stop_threshold);
  }
}

TEST_CASE("train: deterministic given identical seed, data and config") {
  auto run_once = [] {
    Rng rng(31);
    DenseNet net = random_net({2, 6, 1}, rng);
    Batch data;
    for (int i = 0; i < 10; ++i) {
      Vec x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      data.emplace_back(x, Vec{x[0] - x[1]});
    }
    Rng train_rng(7);
    train(net, data, TrainConfig{1e-3, 60, 0.0, 4}, train_rng);
    return net.weights();
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("train: non-finite loss raises a diverged error with the iteration") {
  DenseNet net({1, 1});
  Batch data{{{1.0}, {std::numeric_limits<double>::infinity()}}};
  Rng rng(1);
  try {
    train(net, data, TrainConfig{1e-2, 10, 1e-9, 4}, rng);
    FAIL("expected TrainingDiverged");
  } catch (const TrainingDiverged& e) {
    CHECK(e.iteration == 0);
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((TrainConfig{-1.0, 10, 1e-4, 4}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((TrainConfig{1e-3, 10, 1e-4, 0}.validate()), std::invalid_argument);
  CHECK_NOTHROW((TrainConfig{1e-3, 0, 0.0, 4}.validate()));
}
