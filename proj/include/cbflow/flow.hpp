#pragma once

#include <complex>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cbflow/noise.hpp"

namespace cbflow {

using Complex = std::complex<double>;

/// Dimension parameter of the Bessel drift, delta < 0, with a = (1-delta)/2.
struct FlowParams {
  double delta;
  double a;

  explicit FlowParams(double delta_) : delta(delta_), a((1.0 - delta_) / 2.0) {
    if (!(delta_ < 0.0)) {
      throw std::invalid_argument("FlowParams: dimension delta must be < 0");
    }
  }
};

/// (theta, lambda, zeta) with lambda = theta(1 + 1/(2a)) - theta^2/(4a) and
/// zeta = theta - theta^2/(4a). On theta in (2, 4a): lambda > 2, zeta > 0.
struct ExponentTriple {
  double theta = 0.0;
  double lambda = 0.0;
  double zeta = 0.0;
};

ExponentTriple exponents(const FlowParams& params, double theta);

struct SolveOptions {
  /// Step length cap: dt <= step_factor * |H|^2 / a.
  double step_factor = 0.1;
  /// Optional uniform cap on the step (forces fine output grids).
  double max_step = std::numeric_limits<double>::infinity();
  /// Floor on the Brownian resolution level actually used.
  int min_level = 0;
  /// Hitting threshold for real starts.
  double eps_hit = 1e-6;
  /// Track the pathwise bound diagnostics while integrating.
  bool track_bounds = true;
};

/// Discretised path of H(s, ., z0) = U + iV together with the running
/// integral of a(U^2-V^2)/(U^2+V^2)^2 (log|H'| when started on the
/// imaginary axis), the driving noise at the sample times, and the
/// quadrature of 1/|H| kept as a diagnostic.
struct FlowSolution {
  double s = 0.0;
  Complex z0;
  std::vector<double> times;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> log_deriv;
  std::vector<double> noise;
  std::vector<double> inv_mod;

  // Signed worst-case excesses of the pathwise bounds; stay at fp-noise
  // level on healthy runs. u_bound applies to imaginary-axis starts only.
  double v_monotone_excess = 0.0;
  double u_bound_excess = -std::numeric_limits<double>::infinity();
  double v_bound_excess = -std::numeric_limits<double>::infinity();

  std::size_t size() const { return times.size(); }
  Complex value(std::size_t i) const { return {u[i], v[i]}; }
  Complex back_value() const { return value(times.size() - 1); }

  /// Linear interpolation in t (t within [s, times.back()]).
  Complex value_at(double t) const;
  double log_deriv_at(double t) const;

  /// CSV export: t,u,v,logderiv with 17 significant digits.
  void write_csv(std::ostream& os) const;
};

/// Hitting time T^{s,x} of the real flow, with the analytic tail correction
/// added once |H| falls below eps_hit.
struct HittingRecord {
  double s = 0.0;
  double x = 0.0;
  double T = 0.0;
  double eps_hit = 0.0;
  double correction = 0.0;
  bool hit_before_horizon = true;
};

/// solve_flow from a real start whose hitting time precedes t_end.
class HitBeforeEnd : public std::runtime_error {
 public:
  HitBeforeEnd(const HittingRecord& rec)
      : std::runtime_error("real start hits zero before t_end (T = " +
                           std::to_string(rec.T) + ")"),
        record(rec) {}
  HittingRecord record;
};

/// boundary_start could not meet its tolerance within the refinement cap.
class BoundaryConvergenceError : public std::runtime_error {
 public:
  BoundaryConvergenceError(const std::string& what, double last_gap_)
      : std::runtime_error(what), last_gap(last_gap_) {}
  double last_gap;
};

/// Pathwise solution of dH = dB - (a/H) dt from z0 (upper half plane, or
/// real and nonzero). Integrates G = H - B cell-by-cell on the adaptive
/// dyadic grid of the driving path, refining the path whenever the step
/// rule demands it. Real starts that hit zero before t_end raise
/// HitBeforeEnd carrying the HittingRecord.
FlowSolution solve_flow(const NoisePath& path, const FlowParams& params,
                        double s, double t_end, Complex z0,
                        const SolveOptions& opt = {});

/// log_deriv_at as a free operation (interpolated accumulated quadrature).
double log_deriv_at(const FlowSolution& sol, double t);

/// First time >= s at which the real flow from x reaches zero. Never fails:
/// if the flow has not hit by the path horizon, T is capped there and
/// flagged. |x| <= eps_hit is treated as already at zero (T = s).
HittingRecord hitting_time(const NoisePath& path, const FlowParams& params,
                           double s, double x, const SolveOptions& opt = {});

struct BoundaryLadderOptions {
  int k_start = 1;       // first rung y = 2^-k
  double safety = 0.25;  // accept when successive gap < safety * tol
  int grid_points = 192; // comparison grid size (log-spaced over the window)
};

/// Boundary limit H(s, ., 0+) approached along the ray of the given angle.
struct BoundaryLimit {
  FlowSolution sol;             // last ladder rung, with H(s) = 0 installed
  std::vector<double> gaps;     // successive sup-norm gaps over the window
  int k_last = 0;               // rung index of the returned solution
  double window_lo = 0.0;       // comparison window is [window_lo, t_end]
};

/// Evaluates solve_flow from z_k = 2^-k e^{i angle} on the same noise for
/// increasing k until successive solutions are Cauchy in sup norm over
/// [s + tol^2, t_end] below tol (with a safety factor), then returns the
/// last rung. Raises BoundaryConvergenceError with the last gap if the
/// refinement cap is reached first.
BoundaryLimit boundary_start(const NoisePath& path, const FlowParams& params,
                             double s, double t_end, double angle, double tol,
                             const SolveOptions& opt = {},
                             const BoundaryLadderOptions& ladder = {});

}  // namespace cbflow
