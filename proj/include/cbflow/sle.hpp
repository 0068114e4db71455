#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cbflow/flow.hpp"

namespace cbflow {

/// Chordal SLE_kappa trace on [0,1] (capacity time), kappa in (0,4),
/// generated through the flow embedding: gamma_t = sqrt(kappa) H~(1-t,1,0)
/// driven by the time reversal B_t = W_1 - W_{1-t} of the sampled motion.
struct Trace {
  double kappa = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<Complex> gamma;

  std::size_t size() const { return times.size(); }

  /// CSV export: t,re,im.
  void write_csv(std::ostream& os) const;
  /// Single-polyline SVG with fixed viewBox mapping [-2,2] x [0,2].
  void write_svg(std::ostream& os) const;
};

struct TraceOptions {
  double tol = 1e-3;
  int base_level = 4;
  SolveOptions solve{};
};

Trace sle_trace(std::uint64_t seed, double kappa, int n_points, double tol,
                const TraceOptions& opt = {});

/// Recomputes gamma_t by a direct reverse-flow solve on [0,t] driven by
/// W_s^t = W_t - W_{t-s} from the same seed and returns the distance to the
/// field route. t must be a dyadic point of the sampled motion.
double trace_crosscheck(std::uint64_t seed, double kappa, double t, double tol,
                        const TraceOptions& opt = {});

/// min over sample pairs at least `gap` apart in time of |gamma_i - gamma_j|.
double self_distance(const Trace& trace, double gap);

enum class Passage { kLeft, kRight, kUndecided };

/// Which side of the query point the trace passed: decided by the winding
/// of the closed polyline 0 -> trace -> (far field) -> back along the real
/// axis around the point.
Passage classify_passage(const Trace& trace, Complex point);

struct LeftPassageEstimate {
  double p_hat = 0.0;
  double stderr_ = 0.0;
  int n_left = 0;
  int n_right = 0;
  int n_undecided = 0;
};

LeftPassageEstimate left_passage_estimate(const std::vector<std::uint64_t>& seeds,
                                          double kappa, Complex point,
                                          int n_points = 256,
                                          double tol = 2e-3,
                                          const TraceOptions& opt = {});

/// Schramm's left-passage probability for chordal SLE_kappa at a point of
/// the upper half plane, by numerical hypergeometric evaluation. Used as an
/// independent oracle for the Monte Carlo estimate.
double schramm_left_passage(double kappa, Complex point);

}  // namespace cbflow
