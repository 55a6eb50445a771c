#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "geese/common.hpp"
#include "geese/evaluators.hpp"
#include "geese/generators.hpp"
#include "geese/surrogate.hpp"

namespace geese {

// Full configuration of one corrective run. Defaults follow the common
// setting (T_e=40, eps_e=1e-4, N=64, generator/base learning rates
// 1e-2/1e-4); focus coefficient and training frequency are per-problem.
struct GeeseConfig {
  int budget = 1000;                  // T
  int max_train_iters = 40;           // T_e
  double early_stop = 1e-4;           // eps_e (0 disables early stopping)
  int init_size = 64;                 // N
  double focus_coefficient = 1.5;     // c   (infinity disables the filter)
  int train_freq_coeff = 1;           // delta_G
  int ensemble_size = 4;              // L
  double lr_generator = 1e-2;
  double lr_base = 1e-4;
  LatentSpec latent;
  ExploitMode exploit_mode = ExploitMode::DirectState;
  bool regularizer_on = false;
  std::uint64_t seed = 0;

  std::vector<int> surrogate_hidden = {64, 128, 64};
  std::vector<int> generator_hidden = {64, 128, 64};
  int explore_hidden = 32;
  int init_train_iters = 0;           // 0: reuse max_train_iters

  // ablation switches
  bool sum_error_mode = false;        // single-output error-sum surrogate
  bool train_exploration = false;     // train G_R instead of resampling only

  void validate() const;
};

// delta_G * floor(2*n_early/L + 1): more generator training when more base
// nets early-stopped.
int tg_schedule(int delta_G, int n_early, int L);

// Query the exploitation candidate only when its estimated error is within
// c * epsilon (boundary inclusive).
bool focus_filter(double surrogate_value, double c, double epsilon);

struct IterationTrace {
  int iteration = 0;  // t, 1-based
  int tg_used = 0;
  bool exploit_skipped = true;
  Vec exploit_state;
  double exploit_estimate = 0.0;
  std::optional<double> exploit_true_error;
  std::optional<Vec> explore_state;
  std::optional<double> explore_true_error;
  int n_early = 0;
  std::size_t archive_size = 0;
  int queries = 0;
};

struct RunOutcome {
  bool success = false;
  Vec final_state;
  double final_accumulated_error = std::numeric_limits<double>::infinity();
  int total_queries = 0;
  int queries_excluding_init = 0;
  std::vector<IterationTrace> traces;
};

// State produced by the initialization phase: the queried archive D_0, the
// bootstrap-fitted ensemble and both generators.
struct InitState {
  Dataset archive;
  Ensemble ensemble;
  ExploitGenerator exploit_gen;
  ExploreGenerator explore_gen;
  int n_early = 0;
};

InitState initialize(const ProblemSpec& spec, const GeeseConfig& cfg, QueryLedger& ledger,
                     Rng& rng);

// One complete corrective run. Budget exhaustion is reported as a failed
// outcome, never as an exception.
RunOutcome run(const ProblemSpec& spec, const GeeseConfig& cfg);

// Per-problem defaults for the built-in problems (focus coefficient,
// training frequency, exploitation mode and candidate counts).
GeeseConfig default_config_for(const std::string& problem_name);

}  // namespace geese
