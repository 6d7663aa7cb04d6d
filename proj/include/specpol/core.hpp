#pragma once

// Shared error types, deterministic RNG, and the thread pool helper used by
// the per-band loops. Everything downstream includes this first.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace specpol {

/// Bad configuration (invalid sizes, unknown keys, out-of-range options).
/// The CLI maps this to exit code 2.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension / grid mismatch between operands.
class shape_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent file content.
class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure (singular spectrum, non-finite objective, ...).
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double sqr(double x) { return x * x; }

// ---------------------------------------------------------------------------
// Deterministic RNG. Fixed algorithms (splitmix64 core, Box-Muller normals)
// so that seeded outputs are stable across standard library versions.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive a stream seed from a master seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0xa0761d6478bd642fULL + stream * 0xe7037ed1a0b428dbULL);
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x2545f4914f6cdd1dULL) {
    // burn-in so that small seeds do not yield near-zero first draws
    splitmix64(state_);
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Poisson draw; Knuth for small means, rounded normal approximation above.
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 50.0) {
      const double limit = std::exp(-mean);
      double p = 1.0;
      std::uint64_t k = 0;
      do {
        ++k;
        p *= uniform01();
      } while (p > limit);
      return k - 1;
    }
    const double v = mean + std::sqrt(mean) * normal();
    return v <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(v));
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Parallel map over an index range. Work items must be independent; callers
// that need a reduction collect per-index slots and combine sequentially so
// results stay deterministic.
// ---------------------------------------------------------------------------

inline int& max_threads_ref() {
  static int value = static_cast<int>(std::thread::hardware_concurrency());
  return value;
}

inline void set_max_threads(int n) { max_threads_ref() = n < 1 ? 1 : n; }
inline int max_threads() { return max_threads_ref() < 1 ? 1 : max_threads_ref(); }

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(max_threads()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::size_t> next{0};
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace specpol
