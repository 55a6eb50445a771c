#pragma once

#include <map>
#include <string>
#include <vector>

#include "geese/baselines.hpp"
#include "geese/evaluators.hpp"
#include "geese/loop.hpp"

namespace geese {

// One experimental case: an independent seed plus the failed starting
// estimation it stands for (always infeasible at the problem's threshold).
struct CaseSpec {
  int index = 0;
  std::uint64_t seed = 0;
  Vec start_state;
};

struct ExperimentConfig {
  std::string problem = "S1";
  std::vector<std::string> algorithms = {"geese", "random", "ga", "pso"};
  int n_cases = 100;
  int budget = 1000;
  std::vector<double> epsilons = {0.05, 0.075, 0.1};
  std::vector<int> init_sizes = {16, 32, 64};
  std::uint64_t master_seed = 42;
  std::string out_dir = "results";
  std::string fixture_dir;  // empty: default resolution
  int jobs = 0;             // worker pool size; 0 = hardware concurrency

  // GEESE template; per-problem defaults are applied first, then any
  // explicit overrides below.
  std::string exploit_mode;        // "", "network", "direct"
  std::vector<int> net_hidden;     // surrogate hidden widths
  int ensemble_size = 0;           // 0: default
  int n_exploit = 0;               // N_IT override
  double lr_generator = 0.0;
  double lr_base = 0.0;
  double early_stop = -1.0;        // <0: default
  int max_train_iters = 0;
  int init_train_iters = -1;       // <0: default
  int train_freq_coeff = 0;
  double focus_coefficient = 0.0;
  int explore_hidden = 0;
  int n_explore = 0;

  std::vector<int> ablations = {1, 2, 3, 4};
  std::vector<std::string> sensitivity_grids = {"L", "NIT", "lr", "eps_e"};
  std::vector<int> grid_ensemble = {2, 4, 8};
  std::vector<int> grid_n_exploit = {1, 32, 64, 128};
  std::vector<double> grid_lr_gen = {1e-1, 1e-2, 1e-3};
  std::vector<double> grid_eps_e = {1e-3, 1e-4, 1e-5};

  void validate() const;
};

struct MetricsRow {
  std::string algorithm;
  std::string problem;
  double epsilon = 0.0;
  int init_size = 0;
  int failure_times = 0;
  double query_mean = 0.0;
  double query_std = 0.0;
  double query_mean_excl_init = 0.0;
  int n_cases = 0;
  std::uint64_t seed = 0;
};

// Case seeds depend only on (problem, master seed, index), so every
// algorithm and ablation arm sees identical cases. Start states are re-drawn
// until infeasible; throws if the problem admits no infeasible state.
std::vector<CaseSpec> generate_cases(const ProblemSpec& spec, int n_cases,
                                     std::uint64_t master_seed);

// Builds the effective GEESE configuration for one case of one named
// algorithm arm ("geese", "geese_sum_error", "geese_trained_explore",
// "geese_no_earlystop", "geese_no_focus").
GeeseConfig geese_config_for_arm(const ExperimentConfig& cfg, const std::string& arm,
                                 double epsilon, int init_size, std::uint64_t case_seed);

RunOutcome run_case(const ProblemSpec& spec, const ExperimentConfig& cfg,
                    const std::string& algorithm, const CaseSpec& kase, int init_size);

// Failure convention: failed cases contribute budget T to the query stats
// (and T - init to the excl-init column).
MetricsRow aggregate(const std::string& algorithm, const ProblemSpec& spec, int init_size,
                     std::uint64_t master_seed, const std::vector<RunOutcome>& outcomes,
                     int budget);

// Runs every (algorithm, epsilon, init_size) cell over all cases. Writes
// summary.csv, one JSONL trace file per cell and a case-seed metadata file;
// returns the summary rows.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg);

// Paired ablation arms on identical case seeds; writes ablation_summary.csv.
std::vector<MetricsRow> run_ablations(const ExperimentConfig& cfg);

// One-at-a-time hyperparameter grids; writes sensitivity_summary.csv.
std::vector<MetricsRow> run_sensitivity(const ExperimentConfig& cfg);

std::string csv_header();
std::string csv_line(const MetricsRow& row);
void write_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_csv(const std::string& path);

// Bar charts of query statistics per algorithm, one SVG per
// (problem, epsilon, init_size) group. Returns the written paths.
std::vector<std::string> emit_plots(const std::string& csv_path);

}  // namespace geese
