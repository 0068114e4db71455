#pragma once

#include <iosfwd>
#include <vector>

#include "cbflow/flow.hpp"

namespace cbflow {

/// Value of the continuous flow modification H~(s,t,x): the real ODE
/// solution while t <= T^{s,x}, and the boundary limit restarted from
/// (T^{s,x}, 0) afterwards (x = 0 restarts at s directly). tol controls
/// the boundary ladder; ladders never descend past the refinement cap, so
/// very small tolerances are floored at what the path can resolve.
Complex evaluate_field(const NoisePath& path, const FlowParams& params,
                       double s, double t, double x, double tol,
                       const SolveOptions& opt = {});

/// |H(s,t,x) - H(r,t,H(s,r,x))| for s <= r <= t: the semigroup defect of
/// the numerical flow on shared noise.
double flow_property_residual(const NoisePath& path, const FlowParams& params,
                              double s, double r, double t, double x,
                              double tol, const SolveOptions& opt = {});

/// T^{s,x} over a product grid, with the per-sign monotonicity audit and a
/// neighbour-gap continuity audit.
struct HittingSurface {
  std::vector<double> s_grid;
  std::vector<double> x_grid;
  std::vector<HittingRecord> records;  // s-major

  const HittingRecord& at(std::size_t i_s, std::size_t j_x) const {
    return records[i_s * x_grid.size() + j_x];
  }

  /// Worst violation of T increasing in |x| within each sign (<= 0 good).
  double monotone_violation = 0.0;
  /// Largest |T(s, x_{j+1}) - T(s, x_j)| over same-sign neighbours.
  double max_neighbor_gap = 0.0;

  /// CSV export: s,x,T.
  void write_csv(std::ostream& os) const;
};

HittingSurface hitting_surface(const NoisePath& path, const FlowParams& params,
                               const std::vector<double>& s_grid,
                               const std::vector<double>& x_grid,
                               const SolveOptions& opt = {});

/// Least-squares fit of log S(y) vs log(1/y) where S(y) is the max of
/// |H'(s,t,iy)| over a fixed (s,t) grid in the triangle 0 <= s <= t <= T,
/// for y = 2^-1 .. 2^-y_levels. Fitted decay S(y) ~ C y^-beta.
struct DerivativeBoundFit {
  double c = 1.0;
  double beta = 0.0;
  std::vector<double> y;
  std::vector<double> s_max;
  bool degenerate = false;
};

DerivativeBoundFit derivative_bound_fit(const NoisePath& path,
                                        const FlowParams& params, double T,
                                        int y_levels, int grid_n = 32,
                                        const SolveOptions& opt = {});

/// Field values over an (s,t,x) product grid (pairs with t >= s only).
struct FieldGrid {
  std::vector<double> s_grid;
  std::vector<double> t_grid;
  std::vector<double> x_grid;
  std::vector<Complex> values;  // s-major, then t, then x; NaN when t < s

  Complex at(std::size_t i, std::size_t j, std::size_t k) const {
    return values[(i * t_grid.size() + j) * x_grid.size() + k];
  }

  /// CSV export: s,t,x,re,im (valid pairs only).
  void write_csv(std::ostream& os) const;
};

FieldGrid evaluate_grid(const NoisePath& path, const FlowParams& params,
                        const std::vector<double>& s_grid,
                        const std::vector<double>& t_grid,
                        const std::vector<double>& x_grid, double tol,
                        const SolveOptions& opt = {});

}  // namespace cbflow
