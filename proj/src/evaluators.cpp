#include "geese/evaluators.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef GEESE_FIXTURE_DIR
#define GEESE_FIXTURE_DIR "data/fixtures"
#endif

namespace geese {

double reconstruction_error(const Vec& forward_obs, const Vec& target_obs) {
  if (target_obs.empty() || forward_obs.size() != target_obs.size())
    throw DimensionMismatch("reconstruction_error: observation size mismatch");
  double m = static_cast<double>(target_obs.size());
  double err = 0.0;
  for (std::size_t i = 0; i < target_obs.size(); ++i) {
    if (target_obs[i] == 0.0)
      throw std::invalid_argument("reconstruction_error: zero target component");
    err += std::abs(forward_obs[i] - target_obs[i]) / (m * std::abs(target_obs[i]));
  }
  return err;
}

double feasible_domain_error(const Vec& x, const Bounds& bounds) {
  bounds.validate();
  if (x.size() != bounds.dim())
    throw DimensionMismatch("feasible_domain_error: dimension mismatch");
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double xt = (x[i] - bounds.lo[i]) / (bounds.hi[i] - bounds.lo[i]);
    err += std::max(xt - 1.0, 0.0) + std::max(-xt, 0.0);
  }
  return err / static_cast<double>(x.size());
}

double balance_error(const Vec& x, const Bounds& bounds) {
  if (x.size() < 2) throw std::invalid_argument("balance_error: needs D >= 2");
  bounds.validate();
  if (x.size() != bounds.dim())
    throw DimensionMismatch("balance_error: dimension mismatch");
  double d = static_cast<double>(x.size());
  double mu = 0.0;
  Vec xt(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xt[i] = (x[i] - bounds.lo[i]) / (bounds.hi[i] - bounds.lo[i]);
    mu += xt[i];
  }
  mu /= d;
  double var = 0.0;
  for (double v : xt) var += (v - mu) * (v - mu);
  return std::sqrt(var / d);
}

double inequality_error(const Vec& c_values) {
  if (c_values.empty()) throw std::invalid_argument("inequality_error: empty constraints");
  double s = 0.0;
  for (double c : c_values) s += std::max(c, 0.0);
  return s / static_cast<double>(c_values.size());
}

Vec postprocess_monotone(const Vec& x_raw) {
  Vec out(x_raw.size());
  if (x_raw.empty()) return out;
  out[0] = x_raw[0];
  double partial = x_raw[0];
  for (std::size_t i = 1; i < x_raw.size(); ++i) {
    partial += x_raw[i];
    double sig = 1.0 / (1.0 + std::exp(-partial));
    out[i] = x_raw[0] + sig * (1.0 - x_raw[0]);
  }
  return out;
}

ExplicitTerm make_boundary_term(const Bounds& bounds) {
  ExplicitTerm term;
  term.name = "boundary";
  term.value = [bounds](const Vec& x) { return feasible_domain_error(x, bounds); };
  term.grad = [bounds](const Vec& x) {
    Vec g(x.size(), 0.0);
    double inv_d = 1.0 / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double range = bounds.hi[i] - bounds.lo[i];
      double xt = (x[i] - bounds.lo[i]) / range;
      if (xt > 1.0)
        g[i] = inv_d / range;
      else if (xt < 0.0)
        g[i] = -inv_d / range;
    }
    return g;
  };
  return term;
}

ExplicitTerm make_balance_term(const Bounds& bounds) {
  ExplicitTerm term;
  term.name = "balance";
  term.value = [bounds](const Vec& x) { return balance_error(x, bounds); };
  term.grad = [bounds](const Vec& x) {
    double d = static_cast<double>(x.size());
    Vec xt(x.size());
    double mu = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xt[i] = (x[i] - bounds.lo[i]) / (bounds.hi[i] - bounds.lo[i]);
      mu += xt[i];
    }
    mu /= d;
    double var = 0.0;
    for (double v : xt) var += (v - mu) * (v - mu);
    double sigma = std::sqrt(var / d);
    Vec g(x.size(), 0.0);
    if (sigma == 0.0) return g;
    for (std::size_t i = 0; i < x.size(); ++i)
      g[i] = (xt[i] - mu) / (d * sigma * (bounds.hi[i] - bounds.lo[i]));
    return g;
  };
  return term;
}

ExplicitTerm make_monotone_gap_term(int state_dim) {
  if (state_dim < 2) throw std::invalid_argument("monotone gap term needs D >= 2");
  ExplicitTerm term;
  term.name = "adjacent_order";
  double inv_n = 1.0 / static_cast<double>(state_dim - 1);
  term.value = [inv_n](const Vec& x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += std::max(x[i] - x[i + 1], 0.0);
    return s * inv_n;
  };
  term.grad = [inv_n](const Vec& x) {
    Vec g(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      if (x[i] - x[i + 1] > 0.0) {
        g[i] += inv_n;
        g[i + 1] -= inv_n;
      }
    }
    return g;
  };
  return term;
}

void ProblemSpec::validate() const {
  if (state_dim < 1 || obs_dim < 1) throw std::invalid_argument("problem: bad dimensions");
  if (feasibility_threshold <= 0.0)
    throw std::invalid_argument("problem: feasibility threshold must be > 0");
  bounds.validate();
  if (static_cast<int>(bounds.dim()) != state_dim)
    throw std::invalid_argument("problem: bounds dimension mismatch");
  if (implicit_count != 1 + static_cast<int>(implicit_extra.size()))
    throw std::invalid_argument("problem: implicit count mismatch");
  if (total_errors != implicit_count + static_cast<int>(explicit_terms.size()))
    throw std::invalid_argument("problem: total error count mismatch");
  if (static_cast<int>(weights.size()) != total_errors)
    throw std::invalid_argument("problem: weight count mismatch");
  for (double w : weights)
    if (w < 0.0) throw std::invalid_argument("problem: weights must be >= 0");
  if (static_cast<int>(target_observation.size()) != obs_dim)
    throw std::invalid_argument("problem: target observation size mismatch");
  if (!forward_model) throw std::invalid_argument("problem: missing forward model");
}

EvalResult evaluate_unledgered(const ProblemSpec& spec, const Vec& x) {
  if (static_cast<int>(x.size()) != spec.state_dim)
    throw DimensionMismatch("evaluate: state size mismatch");
  if (!all_finite(x)) throw InvalidState("evaluate: non-finite state");
  EvalResult res;
  res.error_vector.reserve(spec.total_errors);
  Vec obs = spec.forward_model(x);
  res.error_vector.push_back(reconstruction_error(obs, spec.target_observation));
  for (const auto& f : spec.implicit_extra) res.error_vector.push_back(f(x));
  for (const auto& term : spec.explicit_terms) res.error_vector.push_back(term.value(x));
  if (!all_finite(res.error_vector))
    throw EvaluatorFault("evaluate: non-finite error component");
  res.accumulated = dot(spec.weights, res.error_vector);
  res.feasible = res.accumulated <= spec.feasibility_threshold;
  return res;
}

EvalResult evaluate(const ProblemSpec& spec, QueryLedger& ledger, const Vec& x) {
  if (ledger.exhausted()) throw BudgetExceeded("query budget exhausted");
  EvalResult res = evaluate_unledgered(spec, x);
  ledger.append(x, res.error_vector);
  return res;
}

// --- fixtures ---------------------------------------------------------------

std::string default_fixture_dir() {
  if (const char* env = std::getenv("GEESE_FIXTURES"); env && *env) return env;
  return GEESE_FIXTURE_DIR;
}

std::vector<Vec> load_fixture_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file: " + path);
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows == 0 || cols == 0)
    throw std::runtime_error("bad fixture header in " + path);
  std::vector<Vec> table(rows, Vec(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (!(in >> table[r][c])) throw std::runtime_error("truncated fixture: " + path);
  return table;
}

void save_fixture_table(const std::string& path, const std::vector<Vec>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fixture file: " + path);
  out.precision(17);
  out << rows.size() << " " << rows.front().size() << "\n";
  for (const Vec& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? " " : "") << r[c];
    out << "\n";
  }
}

namespace {

struct FixtureSet {
  std::vector<Vec> A;   // m x D
  Vec b;                // m
  Vec xstar;            // D
  std::vector<Vec> C;   // optional constraint table
};

FixtureSet load_problem_fixtures(const std::string& name, const std::string& dir,
                                 bool with_constraints) {
  FixtureSet fx;
  fx.A = load_fixture_table(dir + "/" + name + ".A");
  fx.b = load_fixture_table(dir + "/" + name + ".b").front();
  fx.xstar = load_fixture_table(dir + "/" + name + ".xstar").front();
  if (with_constraints) fx.C = load_fixture_table(dir + "/" + name + ".C");
  return fx;
}

Vec sine_forward(const std::vector<Vec>& A, const Vec& b, const Vec& xt) {
  Vec obs(A.size());
  constexpr double half_pi = 1.5707963267948966;
  for (std::size_t j = 0; j < A.size(); ++j) {
    double s = b[j];
    for (std::size_t i = 0; i < xt.size(); ++i) s += A[j][i] * std::sin(half_pi * xt[i]);
    obs[j] = s;
  }
  return obs;
}

Bounds builtin_bounds(const std::string& name) {
  if (name == "S1") {
    // heterogeneous O(1) ranges
    return Bounds{{0.0, -0.5, 0.2, 0.0, -1.0, 0.5, 0.0, -0.3, 0.1, 0.0, -0.8},
                  {1.0, 1.5, 1.2, 2.0, 1.0, 2.5, 0.9, 0.7, 1.1, 1.6, 1.2}};
  }
  if (name == "S2") {
    Bounds b;
    b.lo.assign(20, -1.0);
    b.hi.assign(20, 1.0);
    return b;
  }
  if (name == "S3") {
    Bounds b;
    b.lo.assign(30, 0.0);
    b.hi.assign(30, 1.0);
    return b;
  }
  throw std::invalid_argument("unknown builtin problem: " + name);
}

}  // namespace

ProblemSpec builtin_problem(const std::string& name, const std::string& fixture_dir) {
  std::string dir = fixture_dir.empty() ? default_fixture_dir() : fixture_dir;
  Bounds bounds = builtin_bounds(name);
  FixtureSet fx = load_problem_fixtures(name, dir, name == "S2");

  ProblemSpec spec;
  spec.name = name;
  spec.state_dim = static_cast<int>(bounds.dim());
  spec.obs_dim = static_cast<int>(fx.A.size());
  spec.bounds = bounds;
  spec.feasibility_threshold = 0.075;

  if (name == "S1") {
    spec.implicit_count = 1;
    spec.total_errors = 3;
    spec.weights = {1.0, 0.1, 0.1};
    spec.forward_model = [A = fx.A, b = fx.b, bounds](const Vec& x) {
      return sine_forward(A, b, bounds.normalize(x));
    };
    spec.explicit_terms = {make_boundary_term(bounds), make_balance_term(bounds)};
  } else if (name == "S2") {
    spec.implicit_count = 2;
    spec.total_errors = 3;
    spec.weights = {1.0, 1.0, 0.1};
    spec.forward_model = [A = fx.A, b = fx.b, bounds](const Vec& x) {
      return sine_forward(A, b, bounds.normalize(x));
    };
    // Opaque smooth constraints c_i(x) = g_i . xt - t_i on normalized
    // coordinates; row i of the C table is [g_i, t_i].
    spec.implicit_extra.push_back([C = fx.C, bounds](const Vec& x) {
      Vec xt = bounds.normalize(x);
      Vec c(C.size());
      for (std::size_t i = 0; i < C.size(); ++i) {
        double v = -C[i].back();
        for (std::size_t d = 0; d < xt.size(); ++d) v += C[i][d] * xt[d];
        c[i] = v;
      }
      return inequality_error(c);
    });
    spec.explicit_terms = {make_boundary_term(bounds)};
  } else if (name == "S3") {
    spec.implicit_count = 1;
    spec.total_errors = 3;
    spec.weights = {1.0, 0.1, 10.0};
    spec.monotone_constraints = true;
    spec.forward_model = [A = fx.A, b = fx.b, bounds](const Vec& x) {
      return sine_forward(A, b, postprocess_monotone(bounds.normalize(x)));
    };
    spec.explicit_terms = {make_boundary_term(bounds),
                           make_monotone_gap_term(static_cast<int>(bounds.dim()))};
  }

  spec.target_observation = spec.forward_model(fx.xstar);
  spec.validate();
  return spec;
}

Vec builtin_reference_state(const std::string& name, const std::string& fixture_dir) {
  std::string dir = fixture_dir.empty() ? default_fixture_dir() : fixture_dir;
  return load_fixture_table(dir + "/" + name + ".xstar").front();
}

}  // namespace geese
