#include "cbflow/cbes.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace cbflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kEulerStream = 2;
}  // namespace

Complex branch_sqrt(Complex z, bool* on_cut) {
  const double x = z.real();
  const double yy = z.imag();
  if (on_cut) *on_cut = false;
  if (yy == 0.0) {
    if (x >= 0.0) {
      // Limit from the upper half plane; the two extensions +-sqrt(x)
      // disagree here, so flag the genuinely ambiguous case.
      if (on_cut && x > 0.0) *on_cut = true;
      return {std::sqrt(x), 0.0};
    }
    return {0.0, std::sqrt(-x)};
  }
  const double m = std::hypot(x, yy);
  if (x >= 0.0) {
    const double re = std::sqrt(0.5 * (m + x));
    const double im = 0.5 * std::fabs(yy) / re;
    return {yy > 0.0 ? re : -re, im};
  }
  const double im = std::sqrt(0.5 * (m - x));
  const double re = 0.5 * yy / im;  // carries sgn(Im z)
  return {re, im};
}

void ComplexProcessPath::write_csv(std::ostream& os) const {
  os << "t,re_y,im_y,re_h,im_h\n";
  char buf[220];
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  times[i], y[i].real(), y[i].imag(), h[i].real(),
                  h[i].imag());
    os << buf;
  }
}

ComplexProcessPath cbes_process(std::uint64_t seed, const FlowParams& params,
                                double t_end, double tol,
                                const SolveOptions& opt, int base_level) {
  BrownianPath path = sample_path(seed, t_end, base_level);
  const BoundaryLimit limit =
      boundary_start(path, params, 0.0, t_end, 0.5 * kPi, tol, opt);
  const FlowSolution& sol = limit.sol;

  ComplexProcessPath out;
  out.times = sol.times;
  out.h.resize(sol.size());
  out.y.resize(sol.size());
  out.branch_flags.assign(sol.size(), 0);
  double scale = 0.0;
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const Complex hh = sol.value(i);
    const Complex yy = hh * hh;
    out.h[i] = hh;
    out.y[i] = yy;
    scale = std::max(scale, std::abs(yy));
    if (i > 0 && std::fabs(yy.imag()) < 1e-4 * scale && yy.real() >= 0.0) {
      out.branch_flags[i] = 1;
    }
  }
  return out;
}

namespace {

// Left-point Ito sum of theta U/(U^2+V^2) dB and the trapezoid quadrature
// of theta^2 U^2/(U^2+V^2)^2 dr over the solution grid.
void ito_sums(const FlowSolution& sol, double theta, std::vector<double>& m,
              std::vector<double>& qm) {
  const std::size_t n = sol.size();
  m.assign(n, 0.0);
  qm.assign(n, 0.0);
  auto qv_integrand = [&](std::size_t i) {
    const double r2 = sol.u[i] * sol.u[i] + sol.v[i] * sol.v[i];
    return theta * theta * sol.u[i] * sol.u[i] / (r2 * r2);
  };
  double prev_q = qv_integrand(0);
  for (std::size_t i = 1; i < n; ++i) {
    const double r2_prev =
        sol.u[i - 1] * sol.u[i - 1] + sol.v[i - 1] * sol.v[i - 1];
    const double db = sol.noise[i] - sol.noise[i - 1];
    m[i] = m[i - 1] + theta * sol.u[i - 1] / r2_prev * db;
    const double q = qv_integrand(i);
    const double dt = sol.times[i] - sol.times[i - 1];
    qm[i] = qm[i - 1] + 0.5 * (prev_q + q) * dt;
    prev_q = q;
  }
}

void require_imaginary_start(const FlowSolution& sol, const char* who) {
  if (sol.z0.real() != 0.0 || !(sol.z0.imag() > 0.0)) {
    throw std::invalid_argument(std::string(who) +
                                ": solution must start at iy, y > 0");
  }
}

}  // namespace

std::vector<double> ito_identity_residual(const FlowSolution& sol,
                                          const ExponentTriple& triple) {
  require_imaginary_start(sol, "ito_identity_residual");
  const double y0 = sol.z0.imag();
  std::vector<double> m, qm;
  ito_sums(sol, triple.theta, m, qm);
  std::vector<double> res(sol.size());
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const double ratio = sol.u[i] / sol.v[i];
    const double rhs = m[i] - 0.5 * qm[i] +
                       triple.zeta * std::log(y0 / sol.v[i]) -
                       0.5 * triple.theta * std::log1p(ratio * ratio);
    res[i] = triple.lambda * sol.log_deriv[i] - rhs;
  }
  return res;
}

MartingaleBoundReport exp_martingale_bound_check(const FlowSolution& sol,
                                                 const ExponentTriple& triple) {
  require_imaginary_start(sol, "exp_martingale_bound_check");
  std::vector<double> m, qm;
  ito_sums(sol, triple.theta, m, qm);
  MartingaleBoundReport rep;
  rep.n_checked = sol.size();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sol.size(); ++i) {
    worst = std::max(worst,
                     triple.lambda * sol.log_deriv[i] - (m[i] - 0.5 * qm[i]));
  }
  rep.max_violation = worst;
  return rep;
}

std::vector<double> real_squared_bessel(std::uint64_t seed, double delta,
                                        double x0, double t_end, double dt,
                                        bool with_noise) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("real_squared_bessel: dt must be positive");
  }
  const auto n = static_cast<std::size_t>(t_end / dt + 1e-9);
  std::vector<double> z(n + 1);
  z[0] = x0 * x0;
  const double sd = std::sqrt(dt);
  for (std::size_t k = 0; k < n; ++k) {
    const double db =
        with_noise ? sd * counter_normal(seed, kEulerStream, k) : 0.0;
    z[k + 1] = z[k] + 2.0 * std::sqrt(std::fabs(z[k])) * db + delta * dt;
  }
  return z;
}

}  // namespace cbflow
