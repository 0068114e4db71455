#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cbflow {

/// Adaptive Simpson quadrature of f on [a, b] to the given tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-10);

/// Hitting-time law of T^{0,1} for dimension delta < 0, with density
/// C_delta t^{delta/2 - 2} exp(-1/(2t)) on (0, inf). The normalizer is
/// computed once by adaptive quadrature (the Gamma-function identity is a
/// free cross-check exercised in the tests, not used here).
class HittingDensity {
 public:
  explicit HittingDensity(double delta);

  double delta() const { return delta_; }
  double normalizer() const { return c_; }

  double pdf(double t) const;  // t <= 0 rejected
  double cdf(double t) const;  // 0 for t <= 0, monotone to 1

 private:
  double delta_;
  double nu_;     // 1 - delta/2 > 1
  double upper_;  // quadrature cutoff in the u = 1/(2t) variable
  double c_;
};

double hitting_pdf(double delta, double t);
double hitting_cdf(double delta, double t);

struct KsResult {
  double d = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov statistic against a target CDF, with the
/// asymptotic p-value Q(sqrt(n) D). Requires at least 8 samples.
KsResult ks_test(std::vector<double> samples,
                 const std::function<double(double)>& cdf);

/// Two-sample KS distance between empirical CDFs.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic Kolmogorov survival function Q(x) = P[K > x].
double kolmogorov_sf(double x);

struct TailEstimate {
  double p_hat = 0.0;
  double stderr_ = 0.0;
};

/// Fraction of samples >= K with its binomial standard error.
TailEstimate empirical_tail(const std::vector<double>& samples, double K);

/// z-score of the sample mean of terminal increments (0 when all zero).
double martingale_drift_test(const std::vector<double>& increments);

/// Cumulative sum of squared consecutive differences; out[0] = 0.
std::vector<double> realized_qv(const std::vector<double>& series);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace cbflow
