#include "cbflow/field.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace cbflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Smallest boundary-ladder tolerance the path can resolve: the ladder must
// stop at rungs y with step_factor y^2 / a above the finest dyadic cell.
double ladder_floor(const NoisePath& path, const FlowParams& params,
                    const SolveOptions& opt) {
  const double finest = path.horizon() * std::ldexp(1.0, -path.max_level());
  return 4.0 * std::sqrt(finest * params.a / opt.step_factor);
}

Complex boundary_value(const NoisePath& path, const FlowParams& params,
                       double s, double t, double tol,
                       const SolveOptions& opt) {
  const double eff = std::max(tol, ladder_floor(path, params, opt));
  const BoundaryLimit limit =
      boundary_start(path, params, s, t, 0.5 * kPi, eff, opt);
  return limit.sol.back_value();
}

}  // namespace

Complex evaluate_field(const NoisePath& path, const FlowParams& params,
                       double s, double t, double x, double tol,
                       const SolveOptions& opt) {
  if (!(s <= t)) throw std::invalid_argument("evaluate_field: need s <= t");
  if (t - s <= 1e-14 * std::max(1.0, path.horizon())) return {x, 0.0};
  if (std::fabs(x) <= opt.eps_hit) {
    return boundary_value(path, params, s, t, tol, opt);
  }
  try {
    const FlowSolution sol = solve_flow(path, params, s, t, {x, 0.0}, opt);
    return sol.back_value();
  } catch (const HitBeforeEnd& hit) {
    const double T = hit.record.T;
    if (t - T <= 1e-14 * std::max(1.0, path.horizon())) return {0.0, 0.0};
    return boundary_value(path, params, T, t, tol, opt);
  }
}

double flow_property_residual(const NoisePath& path, const FlowParams& params,
                              double s, double r, double t, double x,
                              double tol, const SolveOptions& opt) {
  if (!(s <= r && r <= t)) {
    throw std::invalid_argument("flow_property_residual: need s <= r <= t");
  }
  const Complex direct = evaluate_field(path, params, s, t, x, tol, opt);
  const Complex mid = evaluate_field(path, params, s, r, x, tol, opt);
  Complex composed;
  if (mid.imag() > 0.0) {
    if (r == t) {
      composed = mid;
    } else {
      composed = solve_flow(path, params, r, t, mid, opt).back_value();
    }
  } else {
    composed = evaluate_field(path, params, r, t, mid.real(), tol, opt);
  }
  return std::abs(direct - composed);
}

void HittingSurface::write_csv(std::ostream& os) const {
  os << "s,x,T\n";
  char buf[160];
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    for (std::size_t j = 0; j < x_grid.size(); ++j) {
      const HittingRecord& rec = at(i, j);
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", rec.s, rec.x,
                    rec.T);
      os << buf;
    }
  }
}

HittingSurface hitting_surface(const NoisePath& path, const FlowParams& params,
                               const std::vector<double>& s_grid,
                               const std::vector<double>& x_grid,
                               const SolveOptions& opt) {
  HittingSurface surf;
  surf.s_grid = s_grid;
  surf.x_grid = x_grid;
  surf.records.reserve(s_grid.size() * x_grid.size());
  for (double s : s_grid) {
    for (double x : x_grid) {
      surf.records.push_back(hitting_time(path, params, s, x, opt));
    }
  }
  // Audits: T^{s,x} - s increasing in |x| within each sign, and the
  // neighbour-gap statistic used by the continuity checks.
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    for (std::size_t j = 0; j + 1 < x_grid.size(); ++j) {
      const double x0 = x_grid[j], x1 = x_grid[j + 1];
      if (x0 == 0.0 || x1 == 0.0 || (x0 < 0.0) != (x1 < 0.0)) continue;
      const double t0 = surf.at(i, j).T, t1 = surf.at(i, j + 1).T;
      surf.max_neighbor_gap =
          std::max(surf.max_neighbor_gap, std::fabs(t1 - t0));
      // |x| increases with j for positive x, decreases for negative x.
      const double grow = (x0 > 0.0) ? t0 - t1 : t1 - t0;
      surf.monotone_violation = std::max(surf.monotone_violation, grow);
    }
  }
  return surf;
}

DerivativeBoundFit derivative_bound_fit(const NoisePath& path,
                                        const FlowParams& params, double T,
                                        int y_levels, int grid_n,
                                        const SolveOptions& opt) {
  if (y_levels < 4) {
    throw std::invalid_argument("derivative_bound_fit: need y_levels >= 4");
  }
  DerivativeBoundFit fit;
  for (int k = 1; k <= y_levels; ++k) {
    const double y = std::ldexp(1.0, -k);
    double s_max = 1.0;  // |H'(s,s,iy)| = 1 is always in the grid sup
    for (int i = 0; i < grid_n; ++i) {
      const double s = T * static_cast<double>(i) / grid_n;
      const FlowSolution sol =
          solve_flow(path, params, s, T, {0.0, y}, opt);
      for (int j = 0; j < grid_n; ++j) {
        const double t = T * static_cast<double>(j + 1) / grid_n;
        if (t <= s) continue;
        s_max = std::max(s_max, std::exp(sol.log_deriv_at(t)));
      }
    }
    fit.y.push_back(y);
    fit.s_max.push_back(s_max);
  }
  // Least squares of log S against log(1/y).
  const std::size_t n = fit.y.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double xv = std::log(1.0 / fit.y[i]);
    const double yv = std::log(fit.s_max[i]);
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    sxy += xv * yv;
    lo = std::min(lo, yv);
    hi = std::max(hi, yv);
  }
  if (hi - lo < 1e-9) {
    fit.degenerate = true;
    fit.beta = 0.0;
    fit.c = std::exp(sy / static_cast<double>(n));
    return fit;
  }
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  fit.beta = (static_cast<double>(n) * sxy - sx * sy) / denom;
  fit.c = std::exp((sy - fit.beta * sx) / static_cast<double>(n));
  if (!(fit.beta < 1.0)) {
    throw std::domain_error(
        "derivative_bound_fit: fitted beta >= 1 contradicts the derivative "
        "bound");
  }
  return fit;
}

void FieldGrid::write_csv(std::ostream& os) const {
  os << "s,t,x,re,im\n";
  char buf[240];
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      if (t_grid[j] < s_grid[i]) continue;
      for (std::size_t k = 0; k < x_grid.size(); ++k) {
        const Complex v = at(i, j, k);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      s_grid[i], t_grid[j], x_grid[k], v.real(), v.imag());
        os << buf;
      }
    }
  }
}

FieldGrid evaluate_grid(const NoisePath& path, const FlowParams& params,
                        const std::vector<double>& s_grid,
                        const std::vector<double>& t_grid,
                        const std::vector<double>& x_grid, double tol,
                        const SolveOptions& opt) {
  FieldGrid grid;
  grid.s_grid = s_grid;
  grid.t_grid = t_grid;
  grid.x_grid = x_grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  grid.values.assign(s_grid.size() * t_grid.size() * x_grid.size(),
                     {nan, nan});
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      if (t_grid[j] < s_grid[i]) continue;
      for (std::size_t k = 0; k < x_grid.size(); ++k) {
        grid.values[(i * t_grid.size() + j) * x_grid.size() + k] =
            evaluate_field(path, params, s_grid[i], t_grid[j], x_grid[k], tol,
                           opt);
      }
    }
  }
  return grid;
}

}  // namespace cbflow
