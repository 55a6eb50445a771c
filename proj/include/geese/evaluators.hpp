#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geese/common.hpp"
#include "geese/surrogate.hpp"

namespace geese {

struct InvalidState : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// --- error formula primitives ---------------------------------------------

// Mean relative reconstruction error: sum_i |F_i - y_i| / (m * |y_i|).
double reconstruction_error(const Vec& forward_obs, const Vec& target_obs);

// Mean over dimensions of how far the min-max normalized coordinate exceeds
// [0,1]: max(xt-1, 0) + max(-xt, 0).
double feasible_domain_error(const Vec& x, const Bounds& bounds);

// Population standard deviation of the normalized coordinates (D >= 2).
double balance_error(const Vec& x, const Bounds& bounds);

// Mean of max(c_i, 0) over constraint values.
double inequality_error(const Vec& c_values);

// Monotone reshaping: out_1 = x_1, out_i = x_1 + sigmoid(sum_{j<=i} x_j) *
// (1 - x_1). Strictly increasing whenever the raw coordinates are positive
// (and x_1 < 1); raw coordinates are expected in [0,1].
Vec postprocess_monotone(const Vec& x_raw);

// ExplicitTerm factories with analytic gradients (0 exactly at hinge kinks).
ExplicitTerm make_boundary_term(const Bounds& bounds);
ExplicitTerm make_balance_term(const Bounds& bounds);
// Adjacent-order violation mean((x_i - x_{i+1})_+) over i < D-1.
ExplicitTerm make_monotone_gap_term(int state_dim);

// --- problem definition -----------------------------------------------------

// Full description of one inverse problem: the forward model and any extra
// implicit errors are black boxes to the optimizer; only the explicit terms
// expose gradients.
struct ProblemSpec {
  std::string name;
  int state_dim = 0;      // D
  int obs_dim = 0;        // m
  int implicit_count = 0; // k
  int total_errors = 0;   // h
  Vec weights;            // length h, implicit entries first
  Bounds bounds;
  Vec target_observation; // y
  double feasibility_threshold = 0.0; // epsilon
  bool monotone_constraints = false;

  std::function<Vec(const Vec&)> forward_model;                 // R^D -> R^m
  std::vector<std::function<double(const Vec&)>> implicit_extra; // k-1 entries
  std::vector<ExplicitTerm> explicit_terms;                      // h-k entries

  void validate() const;
  Vec implicit_weights() const {
    return Vec(weights.begin(), weights.begin() + implicit_count);
  }
};

struct EvalResult {
  Vec error_vector;
  double accumulated = 0.0;
  bool feasible = false;
};

struct QueryRecord {
  int index = 0;
  Vec state;
  Vec error_vector;
};

// Strict query accounting: count can never pass the budget, and the log
// keeps every query in order.
class QueryLedger {
 public:
  explicit QueryLedger(int budget) : budget_(budget) {
    if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  }

  int count() const { return static_cast<int>(log_.size()); }
  int budget() const { return budget_; }
  int remaining() const { return budget_ - count(); }
  bool exhausted() const { return count() >= budget_; }
  const std::vector<QueryRecord>& log() const { return log_; }

  void append(Vec state, Vec error) {
    if (exhausted()) throw BudgetExceeded("query budget exhausted");
    log_.push_back({count(), std::move(state), std::move(error)});
  }

 private:
  int budget_;
  std::vector<QueryRecord> log_;
};

// Assembles the full error vector without touching any ledger (case setup
// and offline re-checks).
EvalResult evaluate_unledgered(const ProblemSpec& spec, const Vec& x);

// The physical evaluation: one ledger increment per call, throws
// BudgetExceeded (count unchanged) when the budget is spent.
EvalResult evaluate(const ProblemSpec& spec, QueryLedger& ledger, const Vec& x);

// --- built-in synthetic problems -------------------------------------------

// Fixture directory resolution: explicit argument, then $GEESE_FIXTURES,
// then the compiled-in default.
std::string default_fixture_dir();

// Whitespace-separated numeric table, first line "rows cols".
std::vector<Vec> load_fixture_table(const std::string& path);
void save_fixture_table(const std::string& path, const std::vector<Vec>& rows);

// name in {S1, S2, S3}. S1: D=11, errors [reconstruction | boundary,
// balance], weights [1, 0.1, 0.1]. S2: D=20, errors [reconstruction,
// constraint | boundary], weights [1, 1, 0.1]. S3: D=30 with a
// monotone-reshaped forward model, errors [reconstruction | boundary,
// adjacent-order], weights [1, 0.1, 10].
ProblemSpec builtin_problem(const std::string& name, const std::string& fixture_dir = "");

// The feasible reference state recorded in the fixtures (target_observation
// = forward(x_star)).
Vec builtin_reference_state(const std::string& name, const std::string& fixture_dir = "");

}  // namespace geese
