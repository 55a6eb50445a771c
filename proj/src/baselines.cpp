#include "geese/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geese {

BaselineAlgo baseline_from_name(const std::string& name) {
  if (name == "random") return BaselineAlgo::Random;
  if (name == "ga") return BaselineAlgo::Ga;
  if (name == "pso") return BaselineAlgo::Pso;
  throw std::invalid_argument("unknown baseline: " + name);
}

std::string baseline_name(BaselineAlgo algo) {
  switch (algo) {
    case BaselineAlgo::Random: return "random";
    case BaselineAlgo::Ga: return "ga";
    case BaselineAlgo::Pso: return "pso";
  }
  return "?";
}

void BaselineConfig::validate() const {
  if (algo != BaselineAlgo::Random && population < 2)
    throw std::invalid_argument("baseline: population must be >= 2 for ga/pso");
  if (tournament_size < 1) throw std::invalid_argument("baseline: tournament size >= 1");
  if (crossover_prob < 0.0 || crossover_prob > 1.0)
    throw std::invalid_argument("baseline: crossover prob in [0,1]");
  if (mutation_std_fraction <= 0.0)
    throw std::invalid_argument("baseline: mutation std must be > 0");
}

namespace {

struct Tracker {
  Vec best_state;
  double best_acc = std::numeric_limits<double>::infinity();
  bool found = false;
  Vec feasible_state;
  double feasible_acc = 0.0;

  // Returns true once a feasible state has been queried.
  bool note(const Vec& x, const EvalResult& r) {
    if (r.accumulated < best_acc) {
      best_acc = r.accumulated;
      best_state = x;
    }
    if (r.feasible && !found) {
      found = true;
      feasible_state = x;
      feasible_acc = r.accumulated;
    }
    return found;
  }
};

RunOutcome finish(const Tracker& trk, const QueryLedger& ledger, int init_queries) {
  RunOutcome out;
  out.success = trk.found;
  out.final_state = trk.found ? trk.feasible_state : trk.best_state;
  out.final_accumulated_error = trk.found ? trk.feasible_acc : trk.best_acc;
  out.total_queries = ledger.count();
  out.queries_excluding_init = std::max(0, ledger.count() - init_queries);
  return out;
}

RunOutcome run_random(const ProblemSpec& spec, const BaselineConfig& cfg, int budget) {
  QueryLedger ledger(budget);
  Rng rng(cfg.seed);
  Tracker trk;
  while (!ledger.exhausted()) {
    Vec x = spec.bounds.sample_uniform(rng);
    if (trk.note(x, evaluate(spec, ledger, x))) break;
  }
  return finish(trk, ledger, 0);
}

RunOutcome run_ga(const ProblemSpec& spec, const BaselineConfig& cfg, int budget) {
  if (budget < cfg.population)
    throw std::invalid_argument("ga: budget smaller than population");
  QueryLedger ledger(budget);
  Rng rng(cfg.seed);
  Tracker trk;
  std::size_t dim = spec.bounds.dim();

  std::vector<Vec> pop;
  Vec fitness;
  for (int i = 0; i < cfg.population; ++i) {
    Vec x = spec.bounds.sample_uniform(rng);
    EvalResult r = evaluate(spec, ledger, x);
    if (trk.note(x, r)) return finish(trk, ledger, cfg.population);
    pop.push_back(std::move(x));
    fitness.push_back(r.accumulated);
  }

  auto tournament = [&]() -> const Vec& {
    std::size_t winner = rng.index(pop.size());
    for (int k = 1; k < cfg.tournament_size; ++k) {
      std::size_t rival = rng.index(pop.size());
      if (fitness[rival] < fitness[winner]) winner = rival;
    }
    return pop[winner];
  };

  double mut_prob = 1.0 / static_cast<double>(dim);
  while (!ledger.exhausted()) {
    // elitism: best individual survives untouched
    std::size_t elite = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
      if (fitness[i] < fitness[elite]) elite = i;
    std::vector<Vec> next{pop[elite]};
    Vec next_fit{fitness[elite]};

    while (static_cast<int>(next.size()) < cfg.population && !ledger.exhausted()) {
      const Vec& pa = tournament();
      const Vec& pb = tournament();
      Vec child(dim);
      if (rng.uniform(0.0, 1.0) < cfg.crossover_prob) {
        for (std::size_t d = 0; d < dim; ++d)
          child[d] = rng.uniform(0.0, 1.0) < 0.5 ? pa[d] : pb[d];
      } else {
        child = pa;
      }
      for (std::size_t d = 0; d < dim; ++d) {
        if (rng.uniform(0.0, 1.0) < mut_prob) {
          double range = spec.bounds.hi[d] - spec.bounds.lo[d];
          child[d] += rng.normal() * cfg.mutation_std_fraction * range;
        }
      }
      child = spec.bounds.clip(child);
      EvalResult r = evaluate(spec, ledger, child);
      if (trk.note(child, r)) return finish(trk, ledger, cfg.population);
      next_fit.push_back(r.accumulated);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    fitness = std::move(next_fit);
  }
  return finish(trk, ledger, cfg.population);
}

RunOutcome run_pso(const ProblemSpec& spec, const BaselineConfig& cfg, int budget) {
  if (budget < cfg.population)
    throw std::invalid_argument("pso: budget smaller than population");
  QueryLedger ledger(budget);
  Rng rng(cfg.seed);
  Tracker trk;
  std::size_t dim = spec.bounds.dim();
  int p = cfg.population;

  std::vector<Vec> x(p), v(p), pbest(p);
  Vec pbest_fit(p);
  Vec gbest;
  double gbest_fit = std::numeric_limits<double>::infinity();

  for (int i = 0; i < p; ++i) {
    x[i] = spec.bounds.sample_uniform(rng);
    v[i].assign(dim, 0.0);
    EvalResult r = evaluate(spec, ledger, x[i]);
    if (trk.note(x[i], r)) return finish(trk, ledger, p);
    pbest[i] = x[i];
    pbest_fit[i] = r.accumulated;
    if (r.accumulated < gbest_fit) {
      gbest_fit = r.accumulated;
      gbest = x[i];
    }
  }

  while (!ledger.exhausted()) {
    for (int i = 0; i < p && !ledger.exhausted(); ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        double r1 = rng.uniform(0.0, 1.0);
        double r2 = rng.uniform(0.0, 1.0);
        v[i][d] = cfg.inertia * v[i][d] + cfg.cognitive * r1 * (pbest[i][d] - x[i][d]) +
                  cfg.social * r2 * (gbest[d] - x[i][d]);
        x[i][d] += v[i][d];
        // reflect at the box walls
        double lo = spec.bounds.lo[d], hi = spec.bounds.hi[d];
        while (x[i][d] < lo || x[i][d] > hi) {
          if (x[i][d] < lo) x[i][d] = 2.0 * lo - x[i][d];
          if (x[i][d] > hi) x[i][d] = 2.0 * hi - x[i][d];
          v[i][d] = -v[i][d];
        }
      }
      EvalResult r = evaluate(spec, ledger, x[i]);
      if (trk.note(x[i], r)) return finish(trk, ledger, p);
      if (r.accumulated < pbest_fit[i]) {
        pbest_fit[i] = r.accumulated;
        pbest[i] = x[i];
      }
      if (r.accumulated < gbest_fit) {
        gbest_fit = r.accumulated;
        gbest = x[i];
      }
    }
  }
  return finish(trk, ledger, p);
}

}  // namespace

RunOutcome run_baseline(const ProblemSpec& spec, const BaselineConfig& cfg, int budget) {
  spec.validate();
  cfg.validate();
  if (budget < 1) throw std::invalid_argument("baseline: budget must be >= 1");
  switch (cfg.algo) {
    case BaselineAlgo::Random: return run_random(spec, cfg, budget);
    case BaselineAlgo::Ga: return run_ga(spec, cfg, budget);
    case BaselineAlgo::Pso: return run_pso(spec, cfg, budget);
  }
  throw std::logic_error("unreachable");
}

}  // namespace geese
