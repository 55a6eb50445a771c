#pragma once

#include <optional>
#include <vector>

#include "geese/common.hpp"
#include "geese/netcore.hpp"
#include "geese/surrogate.hpp"

namespace geese {

enum class ExploitMode { Network, DirectState };

// Latent sampling layout shared by both generators. `dim`/`range` describe
// the exploitation latent z ~ U([-a,a]^d); exploration always uses a scalar
// latent on [-explore_range, explore_range].
struct LatentSpec {
  int dim = 1;
  double range = 5.0;
  int n_exploit = 64;   // N_IT
  int n_explore = 64;   // N_R
  double explore_range = 5.0;

  void validate() const {
    if (dim < 1 || n_exploit < 1 || n_explore < 1)
      throw std::invalid_argument("latent spec: counts and dim must be >= 1");
    if (range <= 0.0 || explore_range <= 0.0)
      throw std::invalid_argument("latent spec: ranges must be > 0");
  }
};

struct DiversityReg {
  double sigma_min = 0.0288;
};

// Hinge penalty max(sigma_min - sigma_1, 0) where sigma_1 is the population
// std of the first state coordinate across the batch.
double diversity_regularizer(const std::vector<Vec>& batch_states,
                             double sigma_min = 0.0288);

// Exploitation state proposer. Network mode maps a fixed latent set Z_IT
// through a trainable net; direct-state mode stores the candidate states
// themselves and moves them by gradient descent.
struct ExploitGenerator {
  ExploitMode mode = ExploitMode::Network;
  std::optional<DenseNet> net;         // network mode
  std::vector<Vec> states;             // direct-state mode candidates
  std::vector<Vec> fixed_latents;      // Z_IT, sampled once and never changed
  AdamState opt;

  static ExploitGenerator make_network(const LatentSpec& latent, int state_dim,
                                       const std::vector<int>& hidden, Rng& rng);
  static ExploitGenerator make_direct(int n_states, const Bounds& bounds, Rng& rng);

  std::vector<Vec> candidates() const;
};

// Trains the network-mode generator `steps` Adam updates on the mean hybrid
// error over Z_IT (plus the optional diversity penalty). The surrogate is
// read-only here.
void train_exploit(ExploitGenerator& gen, const HybridErrorModel& model, int steps,
                   double lr, const DiversityReg* reg = nullptr);

// Direct-state analogue: plain gradient descent on each stored state,
// clipped to the search box after every step.
void direct_state_step(ExploitGenerator& gen, const HybridErrorModel& model, int steps,
                       double lr, const Bounds& bounds);

struct Selection {
  Vec state;
  double score = 0.0;   // surrogate value (exploit) or disagreement (explore)
  std::size_t index = 0;
};

// Argmin of the hybrid error over the candidate set; ties break to the
// lowest index.
Selection select_exploit(const ExploitGenerator& gen, const HybridErrorModel& model);

// Exploration proposer: a single-hidden-layer net with throwaway weights.
struct ExploreGenerator {
  DenseNet net;
  double latent_range = 5.0;
  int n_candidates = 64;

  static ExploreGenerator make(int state_dim, int hidden, int n_candidates,
                               double latent_range = 5.0);
};

// Redraws every weight (and bias) i.i.d. standard normal.
void resample_explore(ExploreGenerator& gen, Rng& rng);

// Maps n_candidates fresh scalar latents through the net and returns the
// candidate maximizing weighted disagreement; ties break to the lowest
// index. Requires an ensemble with L >= 2.
Selection select_explore(const ExploreGenerator& gen, const Ensemble& ens,
                         const Vec& w_implicit, Rng& rng);

// Ablation-only: gradient-ascends the exploration weights on mean weighted
// disagreement of generated candidates.
void train_explore(ExploreGenerator& gen, const Ensemble& ens, const Vec& w_implicit,
                   int steps, double lr, Rng& rng);

}  // namespace geese
