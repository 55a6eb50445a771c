#include "geese/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geese {

double diversity_regularizer(const std::vector<Vec>& batch_states, double sigma_min) {
  if (batch_states.size() < 2)
    throw std::invalid_argument("diversity_regularizer: needs a batch of >= 2 states");
  double n = static_cast<double>(batch_states.size());
  double mu = 0.0;
  for (const Vec& x : batch_states) mu += x.front();
  mu /= n;
  double var = 0.0;
  for (const Vec& x : batch_states) var += (x.front() - mu) * (x.front() - mu);
  double sigma1 = std::sqrt(var / n);
  return std::max(sigma_min - sigma1, 0.0);
}

ExploitGenerator ExploitGenerator::make_network(const LatentSpec& latent, int state_dim,
                                                const std::vector<int>& hidden, Rng& rng) {
  latent.validate();
  ExploitGenerator gen;
  gen.mode = ExploitMode::Network;
  std::vector<int> sizes;
  sizes.push_back(latent.dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(state_dim);
  gen.net = DenseNet::init_random(sizes, rng, Activation::Relu);
  gen.opt = AdamState(gen.net->weight_count());
  gen.fixed_latents.reserve(latent.n_exploit);
  for (int i = 0; i < latent.n_exploit; ++i) {
    Vec z(latent.dim);
    for (double& v : z) v = rng.uniform(-latent.range, latent.range);
    gen.fixed_latents.push_back(std::move(z));
  }
  return gen;
}

ExploitGenerator ExploitGenerator::make_direct(int n_states, const Bounds& bounds, Rng& rng) {
  if (n_states < 1) throw std::invalid_argument("direct generator needs >= 1 state");
  ExploitGenerator gen;
  gen.mode = ExploitMode::DirectState;
  gen.states.reserve(n_states);
  for (int i = 0; i < n_states; ++i) gen.states.push_back(bounds.sample_uniform(rng));
  gen.fixed_latents = gen.states;  // Z_IT doubles as the initial state set
  return gen;
}

std::vector<Vec> ExploitGenerator::candidates() const {
  if (mode == ExploitMode::DirectState) return states;
  std::vector<Vec> out;
  out.reserve(fixed_latents.size());
  for (const Vec& z : fixed_latents) out.push_back(net->forward(z));
  return out;
}

void train_exploit(ExploitGenerator& gen, const HybridErrorModel& model, int steps,
                   double lr, const DiversityReg* reg) {
  if (gen.mode != ExploitMode::Network)
    throw std::invalid_argument("train_exploit: generator is not in network mode");
  if (steps < 0) throw std::invalid_argument("train_exploit: steps must be >= 0");
  std::size_t n = gen.fixed_latents.size();
  double inv_n = 1.0 / static_cast<double>(n);

  for (int step = 0; step < steps; ++step) {
    std::vector<Vec> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = gen.net->forward(gen.fixed_latents[i]);

    double loss = 0.0;
    std::vector<Vec> dloss_dx(n);
    for (std::size_t i = 0; i < n; ++i) {
      HybridEval ev = hybrid_error(model, xs[i]);
      loss += ev.value * inv_n;
      dloss_dx[i] = ev.grad_x;
      for (double& g : dloss_dx[i]) g *= inv_n;
    }

    if (reg && n >= 2) {
      double mu = 0.0;
      for (const Vec& x : xs) mu += x.front();
      mu *= inv_n;
      double var = 0.0;
      for (const Vec& x : xs) var += (x.front() - mu) * (x.front() - mu);
      double sigma1 = std::sqrt(var * inv_n);
      if (sigma1 < reg->sigma_min) {
        loss += reg->sigma_min - sigma1;
        if (sigma1 > 0.0)
          for (std::size_t i = 0; i < n; ++i)
            dloss_dx[i][0] -= (xs[i].front() - mu) * inv_n / sigma1;
      }
    }

    if (!std::isfinite(loss)) throw TrainingDiverged(step);

    Vec grad_theta(gen.net->weight_count(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto pb = gen.net->vjp(gen.fixed_latents[i], dloss_dx[i]);
      for (std::size_t w = 0; w < grad_theta.size(); ++w) grad_theta[w] += pb.grad_w[w];
    }
    gen.opt.step(gen.net->weights(), grad_theta, lr);
  }
}

void direct_state_step(ExploitGenerator& gen, const HybridErrorModel& model, int steps,
                       double lr, const Bounds& bounds) {
  if (gen.mode != ExploitMode::DirectState)
    throw std::invalid_argument("direct_state_step: generator is not in direct mode");
  if (steps < 0) throw std::invalid_argument("direct_state_step: steps must be >= 0");
  for (int step = 0; step < steps; ++step) {
    for (Vec& x : gen.states) {
      HybridEval ev = hybrid_error(model, x);
      if (!std::isfinite(ev.value)) throw TrainingDiverged(step);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr * ev.grad_x[i];
      x = bounds.clip(x);
    }
  }
}

Selection select_exploit(const ExploitGenerator& gen, const HybridErrorModel& model) {
  std::vector<Vec> cands = gen.candidates();
  if (cands.empty()) throw std::invalid_argument("select_exploit: empty candidate set");
  Selection best;
  best.score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    double v = hybrid_error_value(model, cands[i]);
    if (v < best.score) {
      best.score = v;
      best.index = i;
      best.state = cands[i];
    }
  }
  return best;
}

ExploreGenerator ExploreGenerator::make(int state_dim, int hidden, int n_candidates,
                                        double latent_range) {
  if (n_candidates < 1) throw std::invalid_argument("explore generator: n_candidates >= 1");
  return ExploreGenerator{DenseNet({1, hidden, state_dim}, Activation::Tanh), latent_range,
                          n_candidates};
}

void resample_explore(ExploreGenerator& gen, Rng& rng) {
  for (double& w : gen.net.weights()) w = rng.normal();
}

namespace {

std::vector<Vec> explore_candidates(const ExploreGenerator& gen, Rng& rng) {
  std::vector<Vec> out;
  out.reserve(gen.n_candidates);
  for (int i = 0; i < gen.n_candidates; ++i) {
    Vec z{rng.uniform(-gen.latent_range, gen.latent_range)};
    out.push_back(gen.net.forward(z));
  }
  return out;
}

}  // namespace

Selection select_explore(const ExploreGenerator& gen, const Ensemble& ens,
                         const Vec& w_implicit, Rng& rng) {
  if (ens.size() < 2) throw InvalidEnsemble("select_explore needs L >= 2");
  std::vector<Vec> cands = explore_candidates(gen, rng);
  Selection best;
  best.score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    double s = weighted_disagreement(ens, cands[i], w_implicit);
    if (s > best.score) {
      best.score = s;
      best.index = i;
      best.state = cands[i];
    }
  }
  return best;
}

void train_explore(ExploreGenerator& gen, const Ensemble& ens, const Vec& w_implicit,
                   int steps, double lr, Rng& rng) {
  if (ens.size() < 2) throw InvalidEnsemble("train_explore needs L >= 2");
  AdamState opt(gen.net.weight_count());
  std::size_t n_lat = static_cast<std::size_t>(gen.n_candidates);
  double inv_l = 1.0 / static_cast<double>(ens.size());
  for (int step = 0; step < steps; ++step) {
    std::vector<Vec> latents(n_lat);
    for (Vec& z : latents) z = {rng.uniform(-gen.latent_range, gen.latent_range)};

    Vec grad_theta(gen.net.weight_count(), 0.0);
    double score = 0.0;
    for (const Vec& z : latents) {
      Vec x = gen.net.forward(z);
      // member predictions and per-element stats
      std::vector<Vec> preds(ens.size());
      for (int m = 0; m < ens.size(); ++m) preds[m] = ens.members[m].forward(x);
      Vec mu(ens.implicit_count, 0.0), sigma(ens.implicit_count, 0.0);
      for (int j = 0; j < ens.implicit_count; ++j) {
        for (const Vec& p : preds) mu[j] += p[j];
        mu[j] *= inv_l;
        double var = 0.0;
        for (const Vec& p : preds) var += (p[j] - mu[j]) * (p[j] - mu[j]);
        sigma[j] = std::sqrt(var * inv_l);
        score += w_implicit[j] * sigma[j];
      }
      // d(sum_j w_j sigma_j)/dx via member backward passes
      Vec dscore_dx(x.size(), 0.0);
      Vec out, gx;
      for (int m = 0; m < ens.size(); ++m) {
        Vec cot(ens.implicit_count, 0.0);
        for (int j = 0; j < ens.implicit_count; ++j)
          if (sigma[j] > 0.0)
            cot[j] = w_implicit[j] * (preds[m][j] - mu[j]) * inv_l / sigma[j];
        ens.members[m].vjp_input_only(x, cot, out, gx);
        for (std::size_t i = 0; i < gx.size(); ++i) dscore_dx[i] += gx[i];
      }
      auto pb = gen.net.vjp(z, dscore_dx);
      for (std::size_t w = 0; w < grad_theta.size(); ++w) grad_theta[w] += pb.grad_w[w];
    }
    if (!std::isfinite(score)) throw TrainingDiverged(step);
    // ascent on disagreement
    for (double& g : grad_theta) g = -g / static_cast<double>(n_lat);
    opt.step(gen.net.weights(), grad_theta, lr);
  }
}

}  // namespace geese
