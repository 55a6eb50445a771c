#include "geese/loop.hpp"

#include <algorithm>
#include <cmath>

namespace geese {

void GeeseConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("geese: budget must be >= 1");
  if (max_train_iters < 0) throw std::invalid_argument("geese: T_e must be >= 0");
  if (early_stop < 0.0) throw std::invalid_argument("geese: eps_e must be >= 0");
  if (init_size < 1) throw std::invalid_argument("geese: init size must be >= 1");
  if (focus_coefficient < 1.0) throw std::invalid_argument("geese: focus coefficient >= 1");
  if (train_freq_coeff < 1) throw std::invalid_argument("geese: delta_G must be >= 1");
  if (ensemble_size < 2) throw std::invalid_argument("geese: ensemble size must be >= 2");
  if (lr_generator <= 0.0 || lr_base <= 0.0)
    throw std::invalid_argument("geese: learning rates must be > 0");
  if (explore_hidden < 1) throw std::invalid_argument("geese: explore hidden width >= 1");
  if (init_train_iters < 0) throw std::invalid_argument("geese: init train iters >= 0");
  latent.validate();
}

int tg_schedule(int delta_G, int n_early, int L) {
  if (L < 1 || n_early < 0 || n_early > L)
    throw std::invalid_argument("tg_schedule: need 0 <= n_early <= L");
  return delta_G * (2 * n_early / L + 1);
}

bool focus_filter(double surrogate_value, double c, double epsilon) {
  return surrogate_value <= c * epsilon;
}

namespace {

struct SurrogateSetup {
  TargetFn target;
  Vec w_implicit;       // weights applied to ensemble outputs
  int model_outputs;    // k of the ensemble (1 in sum mode)
};

SurrogateSetup surrogate_setup(const ProblemSpec& spec, const GeeseConfig& cfg) {
  SurrogateSetup s;
  if (cfg.sum_error_mode) {
    // ablation (1): one net swallows the whole accumulated error, so the
    // exact explicit terms and the per-element structure are both lost
    s.target = weighted_sum_target(spec.weights);
    s.w_implicit = {1.0};
    s.model_outputs = 1;
  } else {
    s.target = implicit_prefix_target(spec.implicit_count);
    s.w_implicit = spec.implicit_weights();
    s.model_outputs = spec.implicit_count;
  }
  return s;
}

HybridErrorModel make_model(const ProblemSpec& spec, const Ensemble& ens,
                            const SurrogateSetup& setup, bool sum_mode) {
  HybridErrorModel model;
  model.ensemble = &ens;
  model.implicit_count = setup.model_outputs;
  model.weights = setup.w_implicit;
  if (!sum_mode) {
    model.explicit_terms = spec.explicit_terms;
    model.weights.insert(model.weights.end(), spec.weights.begin() + spec.implicit_count,
                         spec.weights.end());
  }
  return model;
}

TrainConfig base_train_config(const GeeseConfig& cfg, bool initial) {
  TrainConfig tc;
  tc.learning_rate = cfg.lr_base;
  tc.max_iters = (initial && cfg.init_train_iters > 0) ? cfg.init_train_iters
                                                       : cfg.max_train_iters;
  tc.early_stop_threshold = cfg.early_stop;
  tc.batch_size = cfg.init_size;
  return tc;
}

}  // namespace

InitState initialize(const ProblemSpec& spec, const GeeseConfig& cfg, QueryLedger& ledger,
                     Rng& rng) {
  if (ledger.remaining() < cfg.init_size)
    throw BudgetExceeded("initialize: budget smaller than init size");
  SurrogateSetup setup = surrogate_setup(spec, cfg);

  Rng rng_states = rng.split(0x1111);
  Rng rng_ensemble = rng.split(0x2222);
  Rng rng_exploit = rng.split(0x3333);
  std::uint64_t fit_seed = rng.next();

  InitState st{Dataset{},
               Ensemble::create(cfg.ensemble_size, spec.state_dim, setup.model_outputs,
                                cfg.surrogate_hidden, rng_ensemble),
               ExploitGenerator{},
               ExploreGenerator::make(spec.state_dim, cfg.explore_hidden,
                                      cfg.latent.n_explore, cfg.latent.explore_range)};

  for (int i = 0; i < cfg.init_size; ++i) {
    Vec x = spec.bounds.sample_uniform(rng_states);
    EvalResult res = evaluate(spec, ledger, x);
    st.archive.add(std::move(x), res.error_vector);
  }

  st.n_early = fit_ensemble_initial(st.ensemble, st.archive, base_train_config(cfg, true),
                                    fit_seed, setup.target);

  if (cfg.exploit_mode == ExploitMode::Network)
    st.exploit_gen = ExploitGenerator::make_network(cfg.latent, spec.state_dim,
                                                    cfg.generator_hidden, rng_exploit);
  else
    st.exploit_gen = ExploitGenerator::make_direct(cfg.latent.n_exploit, spec.bounds,
                                                   rng_exploit);
  return st;
}

RunOutcome run(const ProblemSpec& spec, const GeeseConfig& cfg) {
  spec.validate();
  cfg.validate();

  QueryLedger ledger(cfg.budget);
  Rng root(cfg.seed);
  RunOutcome out;

  Vec best_state;
  double best_acc = std::numeric_limits<double>::infinity();
  auto note_query = [&](const Vec& x, double acc) {
    if (acc < best_acc) {
      best_acc = acc;
      best_state = x;
    }
  };

  auto finish = [&](bool success, const Vec& state, double acc) {
    out.success = success;
    out.final_state = state;
    out.final_accumulated_error = acc;
    out.total_queries = ledger.count();
    out.queries_excluding_init = std::max(0, ledger.count() - cfg.init_size);
    return out;
  };

  std::optional<InitState> init;
  try {
    init = initialize(spec, cfg, ledger, root);
  } catch (const BudgetExceeded&) {
    return finish(false, best_state, best_acc);
  }
  InitState& st = *init;
  for (std::size_t i = 0; i < st.archive.size(); ++i)
    note_query(st.archive.states[i], dot(spec.weights, st.archive.errors[i]));

  SurrogateSetup setup = surrogate_setup(spec, cfg);
  HybridErrorModel model = make_model(spec, st.ensemble, setup, cfg.sum_error_mode);
  TrainConfig update_cfg = base_train_config(cfg, false);
  DiversityReg reg;
  bool use_reg = cfg.regularizer_on && spec.monotone_constraints &&
                 cfg.exploit_mode == ExploitMode::Network;

  Rng rng_explore = root.split(0x4444);
  bool explore_seeded = false;

  std::optional<std::pair<Vec, double>> x_star;  // last accepted exploitation query
  int n_early = st.n_early;

  for (int t = 1; !ledger.exhausted(); ++t) {
    IterationTrace tr;
    tr.iteration = t;
    tr.n_early = n_early;
    tr.tg_used = tg_schedule(cfg.train_freq_coeff, n_early, cfg.ensemble_size);

    if (cfg.exploit_mode == ExploitMode::Network)
      train_exploit(st.exploit_gen, model, tr.tg_used, cfg.lr_generator,
                    use_reg ? &reg : nullptr);
    else
      direct_state_step(st.exploit_gen, model, tr.tg_used, cfg.lr_generator, spec.bounds);

    Selection sel = select_exploit(st.exploit_gen, model);
    tr.exploit_state = sel.state;
    tr.exploit_estimate = sel.score;

    Dataset delta;
    if (focus_filter(sel.score, cfg.focus_coefficient, spec.feasibility_threshold)) {
      if (ledger.exhausted()) break;
      EvalResult res = evaluate(spec, ledger, sel.state);
      note_query(sel.state, res.accumulated);
      delta.add(sel.state, res.error_vector);
      tr.exploit_skipped = false;
      tr.exploit_true_error = res.accumulated;
      x_star = {sel.state, res.accumulated};
    }

    if (x_star && x_star->second <= spec.feasibility_threshold) {
      tr.queries = static_cast<int>(delta.size());
      tr.archive_size = st.archive.size() + delta.size();
      out.traces.push_back(std::move(tr));
      return finish(true, x_star->first, x_star->second);
    }

    // Exploration queries unconditionally unless the budget is spent (the
    // exploitation side had priority on the last slot).
    if (!ledger.exhausted()) {
      if (cfg.train_exploration) {
        // ablation arm: keep one persistent explorer and push its weights
        // toward higher disagreement instead of redrawing them
        if (!explore_seeded) {
          resample_explore(st.explore_gen, rng_explore);
          explore_seeded = true;
        }
        train_explore(st.explore_gen, st.ensemble, setup.w_implicit, 5, cfg.lr_generator,
                      rng_explore);
      } else {
        resample_explore(st.explore_gen, rng_explore);
      }
      Selection ex = select_explore(st.explore_gen, st.ensemble, setup.w_implicit,
                                    rng_explore);
      EvalResult res = evaluate(spec, ledger, ex.state);
      note_query(ex.state, res.accumulated);
      delta.add(ex.state, res.error_vector);
      tr.explore_state = ex.state;
      tr.explore_true_error = res.accumulated;
    }

    if (delta.empty()) break;  // budget starved before any query this iteration

    std::uint64_t fit_seed = root.next();
    n_early = fit_ensemble_update(st.ensemble, delta, st.archive, cfg.init_size, update_cfg,
                                  fit_seed, setup.target);
    for (std::size_t i = 0; i < delta.size(); ++i)
      st.archive.add(std::move(delta.states[i]), std::move(delta.errors[i]));

    tr.n_early = n_early;
    tr.queries = static_cast<int>(delta.size());
    tr.archive_size = st.archive.size();
    out.traces.push_back(std::move(tr));
  }

  return finish(false, best_state, best_acc);
}

GeeseConfig default_config_for(const std::string& problem_name) {
  GeeseConfig cfg;
  if (problem_name == "S1") {
    cfg.focus_coefficient = 1.5;
    cfg.train_freq_coeff = 1;
    cfg.exploit_mode = ExploitMode::DirectState;
    cfg.latent.dim = 11;
    cfg.latent.n_exploit = 64;
  } else if (problem_name == "S2") {
    cfg.focus_coefficient = 2.0;
    cfg.train_freq_coeff = 1;
    cfg.exploit_mode = ExploitMode::DirectState;
    cfg.latent.dim = 20;
    cfg.latent.n_exploit = 128;
  } else if (problem_name == "S3") {
    cfg.focus_coefficient = 5.0;
    cfg.train_freq_coeff = 7;
    cfg.exploit_mode = ExploitMode::Network;
    cfg.regularizer_on = true;
    cfg.latent.dim = 30;
    cfg.latent.n_exploit = 256;
  } else {
    throw std::invalid_argument("unknown problem: " + problem_name);
  }
  return cfg;
}

}  // namespace geese
