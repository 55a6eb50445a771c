#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace geese {

using Vec = std::vector<double>;

// Thrown when an input vector does not match a declared dimension.
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when an optimizer step produces a non-finite loss.
struct TrainingDiverged : std::runtime_error {
  int iteration;
  explicit TrainingDiverged(int iter)
      : std::runtime_error("training diverged at iteration " + std::to_string(iter)),
        iteration(iter) {}
};

// Thrown when a ledger would exceed its query budget.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a physical evaluation returns a non-finite value.
struct EvaluatorFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an ensemble operation requires at least two members.
struct InvalidEnsemble : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// FNV-1a; stable across builds, used to derive per-algorithm seed tags.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Seeded random stream. split() derives decorrelated child streams so that
// unrelated consumers (ensemble members, cases, batching) do not share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(gen_);
  }

  double normal() {
    std::normal_distribution<double> d(0.0, 1.0);
    return d(gen_);
  }

  std::size_t index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(gen_);
  }

  std::uint64_t next() { return gen_(); }

  Rng split(std::uint64_t tag) { return Rng(mix64(gen_() ^ mix64(tag))); }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// Axis-aligned search box.
struct Bounds {
  Vec lo;
  Vec hi;

  std::size_t dim() const { return lo.size(); }

  void validate() const {
    if (lo.size() != hi.size() || lo.empty())
      throw std::invalid_argument("bounds: lo/hi size mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i])) throw std::invalid_argument("bounds: lo must be < hi");
  }

  Vec clip(const Vec& x) const {
    Vec out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i] < lo[i]) out[i] = lo[i];
      if (out[i] > hi[i]) out[i] = hi[i];
    }
    return out;
  }

  // Min-max normalization to [0,1] on the box interior.
  Vec normalize(const Vec& x) const {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - lo[i]) / (hi[i] - lo[i]);
    return out;
  }

  Vec sample_uniform(Rng& rng) const {
    Vec out(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) out[i] = rng.uniform(lo[i], hi[i]);
    return out;
  }
};

// Archive of state-error pairs; errors keep the full h-dimensional vector.
struct Dataset {
  std::vector<Vec> states;
  std::vector<Vec> errors;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }

  void add(Vec x, Vec e) {
    states.push_back(std::move(x));
    errors.push_back(std::move(e));
  }
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace geese
