#include "cbflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace cbflow {

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a,
                     double fa, double b, double fb, double fm, double whole,
                     double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, flm);
  const double right = simpson(f, m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson(f, a, fa, b, fb, fm);
  return adaptive_step(f, a, fa, b, fb, fm, whole, tol, 48);
}

// ---------------------------------------------------------------------------
// Hitting-time law

HittingDensity::HittingDensity(double delta) : delta_(delta) {
  if (!(delta < 0.0)) {
    throw std::invalid_argument("HittingDensity: delta must be < 0");
  }
  nu_ = 1.0 - 0.5 * delta;
  upper_ = 60.0 + 20.0 * nu_;
  // In u = 1/(2t) the full mass is 2^nu * int_0^inf u^(nu-1) e^-u du.
  auto kernel = [this](double u) {
    return u <= 0.0 ? 0.0 : std::pow(u, nu_ - 1.0) * std::exp(-u);
  };
  const double total = adaptive_simpson(kernel, 0.0, upper_, 1e-12);
  c_ = 1.0 / (std::pow(2.0, nu_) * total);
}

double HittingDensity::pdf(double t) const {
  if (!(t > 0.0)) {
    throw std::invalid_argument("hitting_pdf: t must be positive");
  }
  const double log_pdf = (0.5 * delta_ - 2.0) * std::log(t) - 0.5 / t;
  return c_ * std::exp(log_pdf);
}

double HittingDensity::cdf(double t) const {
  if (!(t > 0.0)) return 0.0;
  const double x = 0.5 / t;
  if (x >= upper_) return 0.0;
  auto kernel = [this](double u) {
    return u <= 0.0 ? 0.0 : std::pow(u, nu_ - 1.0) * std::exp(-u);
  };
  const double tail = adaptive_simpson(kernel, x, upper_, 1e-12);
  const double v = c_ * std::pow(2.0, nu_) * tail;
  return std::min(1.0, std::max(0.0, v));
}

namespace {
const HittingDensity& cached_density(double delta) {
  static std::mutex mu;
  static std::unordered_map<std::uint64_t, HittingDensity*> cache;
  std::uint64_t key;
  static_assert(sizeof(key) == sizeof(delta));
  std::memcpy(&key, &delta, sizeof(key));
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, new HittingDensity(delta)).first;
  }
  return *it->second;
}
}  // namespace

double hitting_pdf(double delta, double t) {
  return cached_density(delta).pdf(t);
}

double hitting_cdf(double delta, double t) {
  return cached_density(delta).cdf(t);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.0) {
    // Jacobi-theta form, accurate for small arguments.
    const double pi = 3.14159265358979323846;
    double s = 0.0;
    for (int k = 1; k <= 5; k += 2) {
      s += std::exp(-(k * k) * pi * pi / (8.0 * x * x));
    }
    return std::max(0.0, 1.0 - std::sqrt(2.0 * pi) / x * s);
  }
  double s = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 12; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += sign * term;
    sign = -sign;
    if (term < 1e-18) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * s));
}

KsResult ks_test(std::vector<double> samples,
                 const std::function<double(double)>& cdf) {
  if (samples.size() < 8) {
    throw std::invalid_argument("ks_test: need at least 8 samples");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double hi = (static_cast<double>(i) + 1.0) / n - f;
    const double lo = f - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  KsResult r;
  r.d = d;
  r.n = samples.size();
  r.p_value = kolmogorov_sf(std::sqrt(n) * d);
  return r;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_two_sample: empty sample set");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

TailEstimate empirical_tail(const std::vector<double>& samples, double K) {
  TailEstimate e;
  if (samples.empty()) return e;
  std::size_t hits = 0;
  for (double v : samples) {
    if (v >= K) ++hits;
  }
  const double n = static_cast<double>(samples.size());
  e.p_hat = hits / n;
  e.stderr_ = std::sqrt(e.p_hat * (1.0 - e.p_hat) / n);
  return e;
}

double martingale_drift_test(const std::vector<double>& increments) {
  if (increments.size() < 2) {
    throw std::invalid_argument("martingale_drift_test: need >= 2 samples");
  }
  const double n = static_cast<double>(increments.size());
  double mean = 0.0;
  for (double v : increments) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : increments) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) return 0.0;
  return mean / (sd / std::sqrt(n));
}

std::vector<double> realized_qv(const std::vector<double>& series) {
  std::vector<double> out(series.size(), 0.0);
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double d = series[i] - series[i - 1];
    out[i] = out[i - 1] + d * d;
  }
  return out;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace cbflow
