#include "exportscore/common.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>

namespace exportscore {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::schema: return "schema";
    case ErrorKind::parse: return "parse";
    case ErrorKind::duplicate_key: return "duplicate_key";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::missing_data: return "missing_data";
    case ErrorKind::degenerate_outcome: return "degenerate_outcome";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::undefined_metric: return "undefined_metric";
    case ErrorKind::collinearity: return "collinearity";
    case ErrorKind::incomplete_timeline: return "incomplete_timeline";
    case ErrorKind::spec: return "spec";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

double norm_quantile(double p) {
  // Acklam's algorithm, then one Halley refinement step.
  if (p <= 0.0) p = 1e-300;
  if (p >= 1.0) p = 1.0 - 1e-16;

  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley step against the exact CDF.
  double e = norm_cdf(x) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {
std::atomic<int> g_thread_cap{0};  // 0 = use hardware concurrency
}

void set_thread_cap(int cap) { g_thread_cap.store(cap < 0 ? 0 : cap); }

int effective_threads() {
  int cap = g_thread_cap.load();
  if (cap == 0) {
    if (const char* env = std::getenv("EXPORTSCORE_THREADS")) {
      cap = std::atoi(env);
    }
  }
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (cap <= 0 || cap > hw) cap = hw;
  return cap;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn,
                  std::size_t grain) {
  if (n == 0) return;
  std::size_t nthreads = static_cast<std::size_t>(effective_threads());
  if (nthreads <= 1 || n < std::max<std::size_t>(grain, 2)) {
    chunk_fn(0, n);
    return;
  }
  nthreads = std::min(nthreads, n);
  std::size_t chunk = (n + nthreads - 1) / nthreads;
  std::vector<std::thread> workers;
  workers.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&, lo, hi] { chunk_fn(lo, hi); });
  }
  for (auto& w : workers) w.join();
}

}  // namespace exportscore
