#include "cbflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace cbflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

int level_for_step(double horizon, double dt) {
  if (!(dt < horizon)) return 0;
  return static_cast<int>(std::ceil(std::log2(horizon / dt) - 1e-9));
}

std::uint64_t floor_snap(double q) {
  auto k = static_cast<std::uint64_t>(q);
  if (q - static_cast<double>(k) > 1.0 - 1e-9) ++k;
  return k;
}

struct State {
  double gu, gv;  // G = H - B (noise only enters the real part)
  double ld, im;  // integrals of a(U^2-V^2)/R^4 and 1/|H|
};

struct Deriv {
  double gu, gv, ld, im;
};

// Right-hand side on one cell where B is linear in time.
inline Deriv rhs(double a, double b, const State& y) {
  const double u = y.gu + b;
  const double v = y.gv;
  const double r2 = u * u + v * v;
  const double inv_r2 = 1.0 / r2;
  Deriv d;
  d.gu = -a * u * inv_r2;
  d.gv = a * v * inv_r2;
  d.ld = a * (u * u - v * v) * inv_r2 * inv_r2;
  d.im = 1.0 / std::sqrt(r2);
  return d;
}

inline State advance(const State& y, const Deriv& d, double dt) {
  return {y.gu + dt * d.gu, y.gv + dt * d.gv, y.ld + dt * d.ld,
          y.im + dt * d.im};
}

void rk4_step(double a, double b0, double slope, double dt, State& y) {
  const Deriv k1 = rhs(a, b0, y);
  const Deriv k2 = rhs(a, b0 + 0.5 * dt * slope, advance(y, k1, 0.5 * dt));
  const Deriv k3 = rhs(a, b0 + 0.5 * dt * slope, advance(y, k2, 0.5 * dt));
  const Deriv k4 = rhs(a, b0 + dt * slope, advance(y, k3, dt));
  y.gu += dt / 6.0 * (k1.gu + 2.0 * k2.gu + 2.0 * k3.gu + k4.gu);
  y.gv += dt / 6.0 * (k1.gv + 2.0 * k2.gv + 2.0 * k3.gv + k4.gv);
  y.ld += dt / 6.0 * (k1.ld + 2.0 * k2.ld + 2.0 * k3.ld + k4.ld);
  y.im += dt / 6.0 * (k1.im + 2.0 * k2.im + 2.0 * k3.im + k4.im);
}

struct IntegrateResult {
  FlowSolution sol;
  std::optional<HittingRecord> hit;
};

// Core pathwise integrator. Steps follow the dyadic cells of the driving
// path at the level demanded by dt <= step_factor*|H|^2/a, refining the
// path on the way down and coarsening (at aligned boundaries only) on the
// way up, so B is always sampled as the piecewise-linear function of the
// level in use. Real starts (Im z0 = 0) watch for the hitting time; once
// the required level would exceed the cap they continue with sub-cell
// steps, which only happens within O(eps^2) of the hit.
IntegrateResult integrate(const NoisePath& path, const FlowParams& params,
                          double s, double t_end, Complex z0,
                          const SolveOptions& opt) {
  const double horizon = path.horizon();
  if (!(s >= 0.0 && s <= t_end && t_end <= horizon * (1.0 + 1e-12))) {
    throw std::invalid_argument("integrate: need 0 <= s <= t_end <= horizon");
  }
  const bool real_mode = (z0.imag() == 0.0);
  const double a = params.a;
  const int cap = path.max_level();

  IntegrateResult res;
  FlowSolution& sol = res.sol;
  sol.s = s;
  sol.z0 = z0;

  const double norm0 = std::norm(z0);
  double desired = std::min(opt.step_factor * norm0 / a, opt.max_step);
  int level = std::clamp(level_for_step(horizon, desired), opt.min_level, cap);

  double t = s;
  double b_t = path.interp(t, level);
  State y{z0.real() - b_t, z0.imag(), 0.0, 0.0};
  bool aligned = false;
  std::uint64_t k = 0;

  const double b_s = b_t;
  double sup_b = 0.0;  // running max of |B_r - B_s| over visited points
  const bool track_u_bound = opt.track_bounds && !real_mode &&
                             z0.real() == 0.0;

  auto record = [&](double tt, double bb) {
    sol.times.push_back(tt);
    sol.u.push_back(y.gu + bb);
    sol.v.push_back(y.gv);
    sol.log_deriv.push_back(y.ld);
    sol.noise.push_back(bb);
    sol.inv_mod.push_back(y.im);
  };
  record(t, b_t);

  const double end_eps = 1e-12 * std::max(1.0, horizon);
  std::uint64_t steps = 0;
  while (t < t_end - end_eps) {
    if (++steps > (1u << 27)) {
      throw std::runtime_error("integrate: step budget exhausted");
    }
    const double u_cur = y.gu + b_t;
    const double r2 = u_cur * u_cur + y.gv * y.gv;

    if (real_mode && std::fabs(u_cur) <= opt.eps_hit) {
      const double corr = u_cur * u_cur / (2.0 * a);
      res.hit = HittingRecord{s, z0.real(), t + corr, opt.eps_hit, corr, true};
      break;
    }

    desired = std::min({opt.step_factor * r2 / a, opt.max_step, t_end - t});
    int target = std::clamp(level_for_step(horizon, desired), opt.min_level,
                            cap);
    if (aligned) {
      while (level < target) {
        ++level;
        k <<= 1;
      }
      while (level > target && (k & 1) == 0) {
        --level;
        k >>= 1;
      }
    } else if (target > level && level < cap) {
      // Off-grid with a finer demand can only occur before the first
      // boundary; the first cell is integrated at the level chosen from
      // the initial state, which the start-up logic already matched.
      target = level;
    }
    if (!real_mode && level_for_step(horizon, desired) > cap) {
      throw RefinementLimitError(
          "solve_flow: step rule needs refinement beyond the path cap "
          "(|H| too small; use boundary_start for limits from zero)");
    }

    const double h_cell = horizon * std::ldexp(1.0, -level);
    double t_next;
    bool next_aligned;
    std::uint64_t k_next = 0;
    if (aligned) {
      double dt = std::min(h_cell, desired);
      if (t + dt >= t_end - end_eps) {
        t_next = t_end;
        next_aligned = false;
      } else if (dt >= h_cell * (1.0 - 1e-12)) {
        k_next = k + 1;
        t_next = static_cast<double>(k_next) * h_cell;
        next_aligned = true;
      } else {
        t_next = t + dt;
        next_aligned = false;
      }
    } else {
      k_next = floor_snap(t / h_cell) + 1;
      t_next = static_cast<double>(k_next) * h_cell;
      if (t_next >= t_end - end_eps) {
        t_next = t_end;
        next_aligned = false;
      } else if (t_next - t > desired) {
        t_next = t + desired;
        next_aligned = false;
      } else {
        next_aligned = true;
      }
    }

    const double dt = t_next - t;
    const double b_next = path.interp(t_next, level);
    const double slope = (b_next - b_t) / dt;

    const double v_prev = y.gv;
    const bool rough = real_mode && (std::fabs(slope) * dt >
                                         0.3 * std::fabs(u_cur) ||
                                     a * dt > 0.12 * r2);
    if (rough) {
      // Near the hit the cell noise rivals |H|; a guarded Euler step avoids
      // singular RK stages. Accuracy here only moves T by O(dt).
      y.ld += dt * a * (u_cur * u_cur) / (r2 * r2);
      y.im += dt / std::sqrt(r2);
      y.gu += -a * u_cur / r2 * dt;
    } else {
      rk4_step(a, b_t, slope, dt, y);
    }

    const double u_new = y.gu + b_next;
    if (real_mode && u_new * u_cur < 0.0) {
      const double frac = std::fabs(u_cur) / (std::fabs(u_cur) +
                                              std::fabs(u_new));
      res.hit = HittingRecord{s, z0.real(), t + frac * dt, opt.eps_hit, 0.0,
                              true};
      break;
    }

    t = t_next;
    b_t = b_next;
    aligned = next_aligned;
    k = k_next;
    record(t, b_t);

    if (opt.track_bounds && !real_mode) {
      sol.v_monotone_excess = std::max(sol.v_monotone_excess, v_prev - y.gv);
      const double v_cap =
          std::sqrt(z0.imag() * z0.imag() + 2.0 * a * (t - s));
      sol.v_bound_excess = std::max(sol.v_bound_excess, y.gv - v_cap);
      if (track_u_bound) {
        sup_b = std::max(sup_b, std::fabs(b_t - b_s));
        sol.u_bound_excess =
            std::max(sol.u_bound_excess, std::fabs(u_new) - 2.0 * sup_b);
      }
    }
  }
  return res;
}

double interp_series(const std::vector<double>& ts,
                     const std::vector<double>& vals, double t) {
  const auto it = std::lower_bound(ts.begin(), ts.end(), t);
  if (it == ts.begin()) return vals.front();
  if (it == ts.end()) return vals.back();
  const std::size_t i = static_cast<std::size_t>(it - ts.begin());
  const double t1 = ts[i - 1], t2 = ts[i];
  if (t2 <= t1) return vals[i];
  const double w = (t - t1) / (t2 - t1);
  return vals[i - 1] + w * (vals[i] - vals[i - 1]);
}

}  // namespace

ExponentTriple exponents(const FlowParams& params, double theta) {
  const double hi = 4.0 * params.a;
  if (!(theta > 2.0 && theta < hi)) {
    throw std::invalid_argument("exponents: theta must lie in (2, " +
                                std::to_string(hi) + ")");
  }
  const double lambda =
      theta * (1.0 + 1.0 / (2.0 * params.a)) - theta * theta / (4.0 * params.a);
  const double zeta = theta - theta * theta / (4.0 * params.a);
  return {theta, lambda, zeta};
}

Complex FlowSolution::value_at(double t) const {
  if (times.empty()) throw std::logic_error("FlowSolution: empty");
  if (t < times.front() - 1e-12 || t > times.back() + 1e-12) {
    throw std::invalid_argument("FlowSolution::value_at: t out of range");
  }
  return {interp_series(times, u, t), interp_series(times, v, t)};
}

double FlowSolution::log_deriv_at(double t) const {
  if (times.empty()) throw std::logic_error("FlowSolution: empty");
  if (t < times.front() - 1e-12 || t > times.back() + 1e-12) {
    throw std::invalid_argument("FlowSolution::log_deriv_at: t out of range");
  }
  return interp_series(times, log_deriv, t);
}

double log_deriv_at(const FlowSolution& sol, double t) {
  return sol.log_deriv_at(t);
}

void FlowSolution::write_csv(std::ostream& os) const {
  os << "t,u,v,logderiv\n";
  char buf[160];
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", times[i],
                  u[i], v[i], log_deriv[i]);
    os << buf;
  }
}

FlowSolution solve_flow(const NoisePath& path, const FlowParams& params,
                        double s, double t_end, Complex z0,
                        const SolveOptions& opt) {
  if (z0 == Complex{0.0, 0.0}) {
    throw std::invalid_argument(
        "solve_flow: start at 0 is singular; use boundary_start");
  }
  if (z0.imag() < 0.0) {
    throw std::invalid_argument("solve_flow: start must satisfy Im z0 >= 0");
  }
  IntegrateResult r = integrate(path, params, s, t_end, z0, opt);
  if (r.hit && r.hit->T < t_end) throw HitBeforeEnd(*r.hit);
  return std::move(r.sol);
}

HittingRecord hitting_time(const NoisePath& path, const FlowParams& params,
                           double s, double x, const SolveOptions& opt) {
  const double horizon = path.horizon();
  if (!(s >= 0.0 && s <= horizon * (1.0 + 1e-12))) {
    throw std::invalid_argument("hitting_time: s outside [0, horizon]");
  }
  if (std::fabs(x) <= opt.eps_hit) {
    return {s, x, s, opt.eps_hit, 0.0, true};
  }
  IntegrateResult r = integrate(path, params, s, horizon, {x, 0.0}, opt);
  if (r.hit) return *r.hit;
  return {s, x, horizon, opt.eps_hit, 0.0, false};
}

BoundaryLimit boundary_start(const NoisePath& path, const FlowParams& params,
                             double s, double t_end, double angle, double tol,
                             const SolveOptions& opt,
                             const BoundaryLadderOptions& ladder) {
  if (!(angle > 0.0 && angle < kPi)) {
    throw std::invalid_argument("boundary_start: angle must be in (0, pi)");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("boundary_start: tol must be positive");
  }
  const double horizon = path.horizon();
  if (!(s >= 0.0 && s < t_end && t_end <= horizon * (1.0 + 1e-12))) {
    throw std::invalid_argument("boundary_start: need s < t_end <= horizon");
  }

  // Direction of approach; the vertical ray is kept exactly imaginary.
  const bool vertical = std::fabs(angle - 0.5 * kPi) < 1e-15;
  const double cx = vertical ? 0.0 : std::cos(angle);
  const double cy = vertical ? 1.0 : std::sin(angle);

  // Comparison window [s + tol^2, t_end], log-spaced: the sliver next to s
  // converges slowly and is excluded by construction.
  const double span = t_end - s;
  const double lo = std::min(tol * tol, 0.5 * span);
  const int n = std::max(8, ladder.grid_points);
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double ratio = span / lo;
  for (int i = 0; i < n; ++i) {
    grid[static_cast<std::size_t>(i)] =
        s + lo * std::pow(ratio, static_cast<double>(i) / (n - 1));
  }
  grid.back() = t_end;

  BoundaryLimit out;
  out.window_lo = s + lo;

  std::vector<double> prev_u, prev_v;
  FlowSolution current;
  bool have_prev = false;
  double last_gap = std::numeric_limits<double>::quiet_NaN();

  const int cap = path.max_level();
  for (int kk = ladder.k_start;; ++kk) {
    const double yk = std::ldexp(1.0, -kk);
    const double min_step = opt.step_factor * yk * yk * cy * cy / params.a;
    if (level_for_step(horizon, min_step) > cap) {
      throw BoundaryConvergenceError(
          "boundary_start: refinement cap reached before tolerance " +
              std::to_string(tol) + " (last Cauchy gap " +
              std::to_string(last_gap) + ")",
          last_gap);
    }
    FlowSolution sol =
        solve_flow(path, params, s, t_end, {yk * cx, yk * cy}, opt);
    std::vector<double> gu(grid.size()), gv(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Complex val = sol.value_at(grid[i]);
      gu[i] = val.real();
      gv[i] = val.imag();
    }
    if (have_prev) {
      double gap = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        gap = std::max(gap, std::hypot(gu[i] - prev_u[i], gv[i] - prev_v[i]));
      }
      out.gaps.push_back(gap);
      last_gap = gap;
      if (gap < tol * ladder.safety) {
        current = std::move(sol);
        out.k_last = kk;
        break;
      }
    }
    prev_u = std::move(gu);
    prev_v = std::move(gv);
    current = std::move(sol);
    out.k_last = kk;
    have_prev = true;
  }

  // Install the limit's initial condition H(s) = 0.
  current.z0 = {0.0, 0.0};
  current.u.front() = 0.0;
  current.v.front() = 0.0;
  out.sol = std::move(current);
  return out;
}

}  // namespace cbflow
