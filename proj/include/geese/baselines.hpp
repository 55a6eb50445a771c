#pragma once

#include <string>

#include "geese/evaluators.hpp"
#include "geese/loop.hpp"

namespace geese {

enum class BaselineAlgo { Random, Ga, Pso };

BaselineAlgo baseline_from_name(const std::string& name);
std::string baseline_name(BaselineAlgo algo);

struct BaselineConfig {
  BaselineAlgo algo = BaselineAlgo::Random;
  int population = 64;
  // GA
  int tournament_size = 2;
  double crossover_prob = 0.9;
  double mutation_std_fraction = 0.1;  // of the per-dimension range
  // PSO (constriction-equivalent constants)
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  std::uint64_t seed = 0;

  void validate() const;
};

// Query-budgeted reference optimizers with the same outcome contract as the
// main loop: stop at the first feasible state or when the ledger is spent.
RunOutcome run_baseline(const ProblemSpec& spec, const BaselineConfig& cfg, int budget);

}  // namespace geese
