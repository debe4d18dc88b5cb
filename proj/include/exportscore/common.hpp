#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace exportscore {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Errors. One exception type with a machine-readable kind; the CLI prints
// "error: kind=<kind> msg=..." and maps any throw to a nonzero exit.
// ---------------------------------------------------------------------------

enum class ErrorKind {
  schema,
  parse,
  duplicate_key,
  parameter,
  missing_data,
  degenerate_outcome,
  alignment,
  undefined_metric,
  collinearity,
  incomplete_timeline,
  spec,
  config,
  io,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

// ---------------------------------------------------------------------------
// Deterministic RNG. All stochastic modules draw through this wrapper so that
// a given seed reproduces bit-identical streams; per-module seeds are derived
// from the master seed via derive_seed(master, purpose).
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose) {
  return splitmix64(master ^ fnv1a64(purpose));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                                 std::uint64_t index) {
  return splitmix64(splitmix64(master ^ fnv1a64(purpose)) + index);
}

// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Standard normal quantile (Acklam's rational approximation polished by one
// Halley step; |error| < 1e-15 over (0,1)).
double norm_quantile(double p);

inline double norm_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed == 0 ? 0x853c49e6748fea9bULL : seed) {
    // warm up so that nearby seeds decorrelate
    for (int i = 0; i < 4; ++i) next();
  }

  std::uint64_t next() {
    state_ = splitmix64_state(state_);
    return mix(state_);
  }

  // uniform on (0,1), never returns 0 or 1
  double uniform() {
    double u = (next() >> 11) * 0x1.0p-53;
    return u < 0x1.0p-53 ? 0x1.0p-53 : u;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  double normal() { return norm_quantile(uniform()); }
  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // N(mean,1) truncated to (0, inf) when positive, (-inf, 0) otherwise,
  // sampled by inverse CDF on the truncated interval. The far-wrong-side case
  // is evaluated through the small tail so the sign constraint survives out
  // to the limit of double precision.
  double truncated_normal_unit_var(double mean, bool positive) {
    double z = positive ? positive_truncated(mean) : -positive_truncated(-mean);
    return positive ? std::max(z, 1e-12) : std::min(z, -1e-12);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  // z ~ N(mean, 1) conditioned on z > 0
  double positive_truncated(double mean) {
    double u = uniform();
    if (mean >= 0.0) {
      double a = norm_cdf(-mean);  // P(z <= 0), at most one half
      return mean + norm_quantile(clamp_prob(a + u * (1.0 - a)));
    }
    // deep truncation: P(z > 0) = norm_cdf(mean) is small; map through the
    // accurate lower tail of the mirrored variable
    double tail = clamp_prob(norm_cdf(mean));
    return mean - norm_quantile(clamp_prob(u * tail));
  }

  static std::uint64_t splitmix64_state(std::uint64_t s) {
    return s + 0x9e3779b97f4a7c15ULL;
  }
  static std::uint64_t mix(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }
  static double clamp_prob(double p) {
    if (p < 1e-300) return 1e-300;
    if (p > 1.0 - 1e-16) return 1.0 - 1e-16;
    return p;
  }

  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Deterministic chunked parallel map: f(i) is called once for each
// i in [0, n); results must be written to per-index slots by the caller.
// Thread count comes from the global cap (config --threads / env var).
// ---------------------------------------------------------------------------

int effective_threads();
void set_thread_cap(int cap);

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn,
                  std::size_t grain = 256);

}  // namespace exportscore
