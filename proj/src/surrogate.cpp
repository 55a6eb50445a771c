#include "geese/surrogate.hpp"

#include <algorithm>
#include <cmath>

namespace geese {

Ensemble Ensemble::create(int L, int state_dim, int implicit_count,
                          const std::vector<int>& hidden, Rng& rng, Activation activation) {
  if (L < 1) throw std::invalid_argument("ensemble size must be >= 1");
  if (state_dim < 1 || implicit_count < 1)
    throw std::invalid_argument("ensemble dims must be >= 1");
  Ensemble ens;
  ens.state_dim = state_dim;
  ens.implicit_count = implicit_count;
  std::vector<int> sizes;
  sizes.push_back(state_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(implicit_count);
  for (int i = 0; i < L; ++i) {
    Rng member_rng = rng.split(static_cast<std::uint64_t>(i) + 1);
    ens.members.push_back(DenseNet::init_random(sizes, member_rng, activation));
  }
  return ens;
}

Vec predict_implicit(const Ensemble& ens, const Vec& x) {
  if (ens.members.empty()) throw InvalidEnsemble("empty ensemble");
  if (static_cast<int>(x.size()) != ens.state_dim)
    throw DimensionMismatch("predict_implicit: state size mismatch");
  Vec mean(ens.implicit_count, 0.0);
  for (const DenseNet& net : ens.members) {
    Vec y = net.forward(x);
    for (int j = 0; j < ens.implicit_count; ++j) mean[j] += y[j];
  }
  double inv_l = 1.0 / static_cast<double>(ens.members.size());
  for (double& v : mean) v *= inv_l;
  return mean;
}

Vec disagreement(const Ensemble& ens, const Vec& x) {
  if (ens.size() < 2) throw InvalidEnsemble("disagreement needs L >= 2");
  std::vector<Vec> preds;
  preds.reserve(ens.members.size());
  for (const DenseNet& net : ens.members) preds.push_back(net.forward(x));
  double inv_l = 1.0 / static_cast<double>(ens.members.size());
  Vec sigma(ens.implicit_count, 0.0);
  for (int j = 0; j < ens.implicit_count; ++j) {
    double lo = preds[0][j], hi = preds[0][j];
    double mu = 0.0;
    for (const Vec& p : preds) {
      lo = std::min(lo, p[j]);
      hi = std::max(hi, p[j]);
      mu += p[j];
    }
    if (lo == hi) continue;  // exact agreement -> exact zero
    mu *= inv_l;
    double var = 0.0;
    for (const Vec& p : preds) {
      double d = p[j] - mu;
      var += d * d;
    }
    sigma[j] = std::sqrt(var * inv_l);  // population convention
  }
  return sigma;
}

double weighted_disagreement(const Ensemble& ens, const Vec& x, const Vec& w_implicit) {
  if (static_cast<int>(w_implicit.size()) != ens.implicit_count)
    throw DimensionMismatch("weighted_disagreement: weight size mismatch");
  return dot(disagreement(ens, x), w_implicit);
}

void HybridErrorModel::validate() const {
  if (!ensemble) throw std::invalid_argument("hybrid model: missing ensemble");
  if (implicit_count != ensemble->implicit_count)
    throw std::invalid_argument("hybrid model: implicit count mismatch");
  if (weights.size() != static_cast<std::size_t>(implicit_count) + explicit_terms.size())
    throw std::invalid_argument("hybrid model: |weights| must equal h");
  for (double w : weights)
    if (w < 0.0) throw std::invalid_argument("hybrid model: weights must be >= 0");
}

HybridEval hybrid_error(const HybridErrorModel& model, const Vec& x) {
  model.validate();
  const Ensemble& ens = *model.ensemble;
  if (static_cast<int>(x.size()) != ens.state_dim)
    throw DimensionMismatch("hybrid_error: state size mismatch");

  HybridEval out;
  out.grad_x.assign(x.size(), 0.0);

  // Implicit part: each member contributes w_implicit/L through its own
  // backward pass; the cotangent bakes in the weighting.
  double inv_l = 1.0 / static_cast<double>(ens.members.size());
  Vec cot(ens.implicit_count);
  for (int j = 0; j < ens.implicit_count; ++j) cot[j] = model.weights[j] * inv_l;
  Vec y, gx;
  for (const DenseNet& net : ens.members) {
    net.vjp_input_only(x, cot, y, gx);
    for (int j = 0; j < ens.implicit_count; ++j) out.value += cot[j] * y[j];
    for (std::size_t i = 0; i < gx.size(); ++i) out.grad_x[i] += gx[i];
  }

  for (std::size_t e = 0; e < model.explicit_terms.size(); ++e) {
    const ExplicitTerm& term = model.explicit_terms[e];
    double w = model.weights[model.implicit_count + e];
    double v = term.value(x);
    if (!std::isfinite(v))
      throw EvaluatorFault("explicit term '" + term.name + "' returned non-finite value");
    out.value += w * v;
    if (w != 0.0) {
      Vec g = term.grad(x);
      for (std::size_t i = 0; i < g.size(); ++i) out.grad_x[i] += w * g[i];
    }
  }
  return out;
}

double hybrid_error_value(const HybridErrorModel& model, const Vec& x) {
  model.validate();
  const Ensemble& ens = *model.ensemble;
  Vec mean = predict_implicit(ens, x);
  double value = 0.0;
  for (int j = 0; j < ens.implicit_count; ++j) value += model.weights[j] * mean[j];
  for (std::size_t e = 0; e < model.explicit_terms.size(); ++e) {
    double v = model.explicit_terms[e].value(x);
    if (!std::isfinite(v))
      throw EvaluatorFault("explicit term '" + model.explicit_terms[e].name +
                           "' returned non-finite value");
    value += model.weights[model.implicit_count + e] * v;
  }
  return value;
}

TargetFn implicit_prefix_target(int k) {
  return [k](const Vec& e) { return Vec(e.begin(), e.begin() + k); };
}

TargetFn weighted_sum_target(Vec w_implicit) {
  return [w = std::move(w_implicit)](const Vec& e) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * e[j];
    return Vec{s};
  };
}

namespace {

Batch to_batch(const Dataset& data, const TargetFn& target) {
  Batch out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    out.emplace_back(data.states[i], target(data.errors[i]));
  return out;
}

}  // namespace

int fit_ensemble_initial(Ensemble& ens, const Dataset& data, const TrainConfig& cfg,
                         std::uint64_t seed, const TargetFn& target) {
  if (data.empty()) throw std::invalid_argument("fit_ensemble_initial: empty dataset");
  TargetFn tf = target ? target : implicit_prefix_target(ens.implicit_count);
  Batch full = to_batch(data, tf);
  Rng root(seed);
  int n_early = 0;
  for (int i = 0; i < ens.size(); ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i) + 1);
    Batch boot;
    boot.reserve(full.size());
    for (std::size_t s = 0; s < full.size(); ++s) boot.push_back(full[rng.index(full.size())]);
    TrainResult res = train(ens.members[i], boot, cfg, rng);
    if (res.early_stopped) ++n_early;
  }
  return n_early;
}

Batch sample_update_set(const Batch& new_pairs, const Batch& archive, int n_sampled, Rng& rng) {
  if (n_sampled < 0) throw std::invalid_argument("sample_update_set: n_sampled < 0");
  if (new_pairs.empty() && n_sampled == 0)
    throw std::invalid_argument("sample_update_set: empty training set");
  Batch out = new_pairs;
  if (n_sampled > 0) {
    if (archive.empty()) throw std::invalid_argument("sample_update_set: empty archive");
    out.reserve(out.size() + n_sampled);
    for (int s = 0; s < n_sampled; ++s) out.push_back(archive[rng.index(archive.size())]);
  }
  return out;
}

int fit_ensemble_update(Ensemble& ens, const Dataset& new_pairs, const Dataset& archive,
                        int n_sampled, const TrainConfig& cfg, std::uint64_t seed,
                        const TargetFn& target, bool reinit_members) {
  if (archive.empty()) throw std::invalid_argument("fit_ensemble_update: empty archive");
  TargetFn tf = target ? target : implicit_prefix_target(ens.implicit_count);
  Batch fresh = to_batch(new_pairs, tf);
  Batch arch = to_batch(archive, tf);
  Rng root(seed);
  int n_early = 0;
  for (int i = 0; i < ens.size(); ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i) + 1);
    Batch set = sample_update_set(fresh, arch, n_sampled, rng);
    if (reinit_members)
      ens.members[i] = DenseNet::init_random(ens.members[i].layer_sizes(), rng,
                                             ens.members[i].activation());
    TrainResult res = train(ens.members[i], set, cfg, rng);
    if (res.early_stopped) ++n_early;
  }
  return n_early;
}

}  // namespace geese
