#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geese/common.hpp"
#include "geese/netcore.hpp"

namespace geese {

// L base nets, each mapping the D-dimensional state to the k implicit error
// elements. Prediction is the member mean.
struct Ensemble {
  std::vector<DenseNet> members;
  int implicit_count = 0;
  int state_dim = 0;

  static Ensemble create(int L, int state_dim, int implicit_count,
                         const std::vector<int>& hidden, Rng& rng,
                         Activation activation = Activation::Relu);

  int size() const { return static_cast<int>(members.size()); }
};

// Element-wise mean of the member predictions.
Vec predict_implicit(const Ensemble& ens, const Vec& x);

// Per-element population standard deviation of the member predictions.
// Requires L >= 2.
Vec disagreement(const Ensemble& ens, const Vec& x);

// Dot product of the disagreement vector with the implicit error weights.
double weighted_disagreement(const Ensemble& ens, const Vec& x, const Vec& w_implicit);

// A cheap analytically differentiable error component.
struct ExplicitTerm {
  std::string name;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
};

// Weighted mix of ensemble-estimated implicit errors and exact explicit
// terms. `weights` has length h = implicit_count + explicit_terms.size(),
// implicit weights first.
struct HybridErrorModel {
  const Ensemble* ensemble = nullptr;
  std::vector<ExplicitTerm> explicit_terms;
  Vec weights;
  int implicit_count = 0;

  void validate() const;
  Vec implicit_weights() const {
    return Vec(weights.begin(), weights.begin() + implicit_count);
  }
};

struct HybridEval {
  double value = 0.0;
  Vec grad_x;
};

// value = sum_{j<=k} w_j * mean_i phi_j(x, w_i) + sum_{j>k} w_j * E_j(x),
// with the exact gradient w.r.t. x (backprop through members plus analytic
// explicit gradients).
HybridEval hybrid_error(const HybridErrorModel& model, const Vec& x);

double hybrid_error_value(const HybridErrorModel& model, const Vec& x);

// Maps a full h-dimensional collected error vector to a member training
// target. Default: the implicit prefix e_{1:k}.
using TargetFn = std::function<Vec(const Vec&)>;

TargetFn implicit_prefix_target(int k);
// Single-output target sum_{j<=k} w_j e_j (error-sum surrogate ablation).
TargetFn weighted_sum_target(Vec w_implicit);

// Trains each member independently on a bootstrap resample of `data` (with
// replacement, same size). Returns the number of early-stopped members.
int fit_ensemble_initial(Ensemble& ens, const Dataset& data, const TrainConfig& cfg,
                         std::uint64_t seed, const TargetFn& target = {});

// Per-member update set: new_pairs plus N archive pairs sampled uniformly
// with replacement. Exposed for inspection in tests.
Batch sample_update_set(const Batch& new_pairs, const Batch& archive, int n_sampled,
                        Rng& rng);

// Fine-tunes every member on new_pairs plus N archive samples (no re-init
// unless reinit_members is set). Throws invalid_argument when the update set
// would be empty.
int fit_ensemble_update(Ensemble& ens, const Dataset& new_pairs, const Dataset& archive,
                        int n_sampled, const TrainConfig& cfg, std::uint64_t seed,
                        const TargetFn& target = {}, bool reinit_members = false);

}  // namespace geese
