#include <doctest.h>

#include <cmath>

#include "geese/loop.hpp"

using namespace geese;

namespace {

// Small synthetic problem family for loop fuzzing: linear-in-normalized-state
// forward model, boundary + balance explicit terms.
ProblemSpec fuzz_problem(Rng& rng, double epsilon) {
  int d = 2 + static_cast<int>(rng.index(4));
  ProblemSpec spec;
  spec.name = "fuzz";
  spec.state_dim = d;
  spec.obs_dim = 2;
  spec.implicit_count = 1;
  spec.total_errors = 3;
  spec.weights = {1.0, 0.1, 0.1};
  spec.bounds.lo.assign(d, 0.0);
  spec.bounds.hi.assign(d, 1.0);
  for (int i = 0; i < d; ++i) {
    spec.bounds.lo[i] = rng.uniform(-1.0, 0.0);
    spec.bounds.hi[i] = spec.bounds.lo[i] + rng.uniform(0.5, 2.0);
  }
  std::vector<Vec> A(2, Vec(d));
  for (Vec& row : A)
    for (double& v : row) v = rng.uniform(-2.0, 2.0);
  Vec b{rng.uniform(3.0, 6.0), rng.uniform(-8.0, -4.0)};
  Bounds bounds = spec.bounds;
  spec.forward_model = [A, b, bounds](const Vec& x) {
    Vec xt = bounds.normalize(x);
    Vec obs = b;
    for (int j = 0; j < 2; ++j)
      for (std::size_t i = 0; i < xt.size(); ++i) obs[j] += A[j][i] * xt[i];
    return obs;
  };
  spec.explicit_terms = {make_boundary_term(spec.bounds), make_balance_term(spec.bounds)};
  Vec xstar = spec.bounds.sample_uniform(rng);
  spec.target_observation = spec.forward_model(xstar);
  spec.feasibility_threshold = epsilon;
  spec.validate();
  return spec;
}

GeeseConfig tiny_config(Rng& rng, int budget) {
  GeeseConfig cfg;
  cfg.budget = budget;
  cfg.max_train_iters = 3;
  cfg.init_size = 3 + static_cast<int>(rng.index(3));
  cfg.ensemble_size = 2;
  cfg.surrogate_hidden = {6};
  cfg.generator_hidden = {6};
  cfg.explore_hidden = 4;
  cfg.latent.dim = 2;
  cfg.latent.n_exploit = 4;
  cfg.latent.n_explore = 4;
  cfg.lr_base = 1e-2;
  cfg.lr_generator = 1e-2;
  cfg.exploit_mode = rng.index(2) == 0 ? ExploitMode::DirectState : ExploitMode::Network;
  cfg.focus_coefficient = 1.0 + rng.uniform(0.0, 2.0);
  if (rng.index(4) == 0) cfg.focus_coefficient = std::numeric_limits<double>::infinity();
  cfg.train_freq_coeff = 1 + static_cast<int>(rng.index(2));
  cfg.sum_error_mode = rng.index(4) == 0;
  cfg.train_exploration = rng.index(6) == 0;
  cfg.regularizer_on = rng.index(3) == 0;
  cfg.seed = rng.next();
  return cfg;
}

void check_loop_contract(const ProblemSpec& spec, const GeeseConfig& cfg,
                         const RunOutcome& out) {
  CHECK(out.total_queries <= cfg.budget);
  CHECK(out.queries_excluding_init == std::max(0, out.total_queries - cfg.init_size));
  std::size_t prev_archive = static_cast<std::size_t>(cfg.init_size);
  for (std::size_t i = 0; i < out.traces.size(); ++i) {
    const IterationTrace& tr = out.traces[i];
    CHECK(tr.queries >= 1);
    CHECK(tr.queries <= 2);
    CHECK(tr.n_early >= 0);
    CHECK(tr.n_early <= cfg.ensemble_size);
    // the archive grows by exactly the queries made that iteration
    CHECK(tr.archive_size == prev_archive + static_cast<std::size_t>(tr.queries));
    prev_archive = tr.archive_size;
    bool terminal = (i + 1 == out.traces.size());
    if (!terminal) CHECK((tr.queries == 1) == tr.exploit_skipped);
    CHECK(tr.exploit_true_error.has_value() == !tr.exploit_skipped);
  }
  if (out.success) {
    EvalResult recheck = evaluate_unledgered(spec, out.final_state);
    CHECK(recheck.accumulated <= spec.feasibility_threshold);
    CHECK(out.final_accumulated_error <= spec.feasibility_threshold);
  }
}

}  // namespace

TEST_CASE("tg schedule: floor arithmetic") {
  CHECK(tg_schedule(1, 0, 4) == 1);
  CHECK(tg_schedule(5, 0, 8) == 5);
  CHECK(tg_schedule(7, 4, 4) == 21);
  CHECK(tg_schedule(1, 2, 4) == 2);
  CHECK(tg_schedule(2, 3, 4) == 4);  // floor(2.5) = 2
  CHECK_THROWS_AS(tg_schedule(1, 5, 4), std::invalid_argument);
}

TEST_CASE("focus filter: boundary inclusive") {
  CHECK(focus_filter(0.1, 1.5, 0.075));
  CHECK_FALSE(focus_filter(0.2, 1.5, 0.075));
  CHECK(focus_filter(1.5 * 0.075, 1.5, 0.075));
  CHECK(focus_filter(123.0, std::numeric_limits<double>::infinity(), 0.075));
}

TEST_CASE("initialize: queries exactly N states and fits the ensemble") {
  Rng prng(1);
  ProblemSpec spec = fuzz_problem(prng, 0.5);
  GeeseConfig cfg;
  cfg.init_size = 64;
  cfg.budget = 100;
  cfg.ensemble_size = 2;
  cfg.surrogate_hidden = {4};
  cfg.max_train_iters = 1;
  cfg.latent.dim = spec.state_dim;
  cfg.latent.n_exploit = 4;
  QueryLedger ledger(cfg.budget);
  Rng rng(7);
  InitState st = initialize(spec, cfg, ledger, rng);
  CHECK(ledger.count() == 64);
  CHECK(st.archive.size() == 64);
  CHECK(st.ensemble.size() == 2);
  CHECK(st.exploit_gen.states.size() == 4);  // direct mode default
}

TEST_CASE("initialize: N=1 gives a singleton archive") {
  Rng prng(2);
  ProblemSpec spec = fuzz_problem(prng, 0.5);
  GeeseConfig cfg;
  cfg.init_size = 1;
  cfg.budget = 10;
  cfg.ensemble_size = 2;
  cfg.surrogate_hidden = {4};
  cfg.max_train_iters = 1;
  cfg.latent.n_exploit = 2;
  QueryLedger ledger(cfg.budget);
  Rng rng(8);
  InitState st = initialize(spec, cfg, ledger, rng);
  CHECK(st.archive.size() == 1);
}

TEST_CASE("initialize: identical seeds draw identical archives") {
  Rng prng(3);
  ProblemSpec spec = fuzz_problem(prng, 0.5);
  GeeseConfig cfg;
  cfg.init_size = 8;
  cfg.budget = 20;
  cfg.ensemble_size = 2;
  cfg.surrogate_hidden = {4};
  cfg.max_train_iters = 1;
  cfg.latent.n_exploit = 2;
  auto draw = [&] {
    QueryLedger ledger(cfg.budget);
    Rng rng(99);
    return initialize(spec, cfg, ledger, rng).archive.states;
  };
  CHECK(draw() == draw());
}

TEST_CASE("initialize: budget below N is refused") {
  Rng prng(4);
  ProblemSpec spec = fuzz_problem(prng, 0.5);
  GeeseConfig cfg;
  cfg.init_size = 16;
  cfg.budget = 8;
  QueryLedger ledger(cfg.budget);
  Rng rng(1);
  CHECK_THROWS_AS(initialize(spec, cfg, ledger, rng), BudgetExceeded);
}

TEST_CASE("run: a threshold above the worst error succeeds on the first accepted query") {
  Rng prng(5);
  ProblemSpec spec = fuzz_problem(prng, 1e6);  // everything feasible
  Rng crng(6);
  GeeseConfig cfg = tiny_config(crng, 50);
  cfg.focus_coefficient = 1.5;
  RunOutcome out = run(spec, cfg);
  CHECK(out.success);
  REQUIRE(out.traces.size() == 1);
  CHECK(out.traces[0].queries == 1);
  CHECK_FALSE(out.traces[0].exploit_skipped);
  CHECK(out.total_queries == cfg.init_size + 1);
  check_loop_contract(spec, cfg, out);
}

TEST_CASE("run: budget equal to N leaves zero iterations and a failure") {
  Rng prng(7);
  ProblemSpec spec = fuzz_problem(prng, 1e-9);  // nothing feasible
  Rng crng(8);
  GeeseConfig cfg = tiny_config(crng, 50);
  cfg.budget = cfg.init_size;
  RunOutcome out = run(spec, cfg);
  CHECK_FALSE(out.success);
  CHECK(out.traces.empty());
  CHECK(out.total_queries == cfg.init_size);
}

TEST_CASE("run: trace replay is deterministic for a fixed seed") {
  Rng prng(9);
  ProblemSpec spec = fuzz_problem(prng, 0.05);
  Rng crng(10);
  GeeseConfig cfg = tiny_config(crng, 40);
  RunOutcome a = run(spec, cfg);
  RunOutcome b = run(spec, cfg);
  CHECK(a.success == b.success);
  CHECK(a.total_queries == b.total_queries);
  CHECK(a.final_state == b.final_state);
  REQUIRE(a.traces.size() == b.traces.size());
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    CHECK(a.traces[i].exploit_state == b.traces[i].exploit_state);
    CHECK(a.traces[i].explore_state == b.traces[i].explore_state);
    CHECK(a.traces[i].exploit_estimate == b.traces[i].exploit_estimate);
    CHECK(a.traces[i].queries == b.traces[i].queries);
  }
}

TEST_CASE("run: fuzzed mini-runs hold the loop contract") {
  Rng rng(2025);
  int successes = 0, failures = 0;
  for (int trial = 0; trial < 60; ++trial) {
    double eps = rng.uniform(0.0, 1.0) < 0.3 ? 1e-9 : rng.uniform(0.05, 0.6);
    ProblemSpec spec = fuzz_problem(rng, eps);
    GeeseConfig cfg = tiny_config(rng, 10 + static_cast<int>(rng.index(41)));
    if (cfg.budget < cfg.init_size + 1) cfg.budget = cfg.init_size + 1;
    RunOutcome out = run(spec, cfg);
    check_loop_contract(spec, cfg, out);
    (out.success ? successes : failures) += 1;
  }
  // the fuzz mix must exercise both outcomes
  CHECK(successes > 0);
  CHECK(failures > 0);
}

TEST_CASE("run: schedule reacts to fully early-stopped ensembles") {
  Rng prng(11);
  ProblemSpec spec = fuzz_problem(prng, 1e-9);
  Rng crng(12);
  GeeseConfig cfg = tiny_config(crng, 30);
  cfg.early_stop = 1e9;  // every member early-stops immediately
  cfg.exploit_mode = ExploitMode::DirectState;
  cfg.focus_coefficient = 1.5;
  RunOutcome out = run(spec, cfg);
  REQUIRE(out.traces.size() >= 2);
  for (std::size_t i = 0; i + 1 < out.traces.size(); ++i) {
    if (out.traces[i].n_early == cfg.ensemble_size)
      CHECK(out.traces[i + 1].tg_used == cfg.train_freq_coeff * 3);
  }
  // with a huge eps_e every update early-stops all members
  for (const IterationTrace& tr : out.traces) CHECK(tr.n_early == cfg.ensemble_size);
}

TEST_CASE("run: disabling early stopping reports zero early-stopped members") {
  Rng prng(13);
  ProblemSpec spec = fuzz_problem(prng, 1e-9);
  Rng crng(14);
  GeeseConfig cfg = tiny_config(crng, 25);
  cfg.early_stop = 0.0;
  RunOutcome out = run(spec, cfg);
  for (const IterationTrace& tr : out.traces) CHECK(tr.n_early == 0);
}

TEST_CASE("run: disabling the focus filter never skips exploitation") {
  Rng prng(15);
  ProblemSpec spec = fuzz_problem(prng, 1e-9);
  Rng crng(16);
  GeeseConfig cfg = tiny_config(crng, 25);
  cfg.focus_coefficient = std::numeric_limits<double>::infinity();
  RunOutcome out = run(spec, cfg);
  CHECK_FALSE(out.traces.empty());
  for (const IterationTrace& tr : out.traces) CHECK_FALSE(tr.exploit_skipped);
}

TEST_CASE("config validation rejects degenerate values") {
  GeeseConfig cfg;
  cfg.focus_coefficient = 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GeeseConfig{};
  cfg.ensemble_size = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GeeseConfig{};
  cfg.train_freq_coeff = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(GeeseConfig{}.validate());
}

TEST_CASE("per-problem defaults follow the built-in presets") {
  GeeseConfig s1 = default_config_for("S1");
  CHECK(s1.focus_coefficient == 1.5);
  CHECK(s1.train_freq_coeff == 1);
  CHECK(s1.exploit_mode == ExploitMode::DirectState);
  GeeseConfig s3 = default_config_for("S3");
  CHECK(s3.focus_coefficient == 5.0);
  CHECK(s3.train_freq_coeff == 7);
  CHECK(s3.exploit_mode == ExploitMode::Network);
  CHECK(s3.regularizer_on);
  CHECK_THROWS_AS(default_config_for("nope"), std::invalid_argument);
}
