#include "cbflow/sle.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace cbflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

FlowParams params_for_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa < 4.0)) {
    throw std::invalid_argument("sle: kappa must lie in (0, 4)");
  }
  return FlowParams(1.0 - 4.0 / kappa);
}

Complex trace_point(const NoisePath& reversed, const FlowParams& params,
                    double kappa, double t, double tol,
                    const SolveOptions& solve) {
  if (t <= 0.0) return {0.0, 0.0};
  const BoundaryLimit limit = boundary_start(reversed, params, 1.0 - t, 1.0,
                                             0.5 * kPi, tol, solve);
  return std::sqrt(kappa) * limit.sol.back_value();
}

}  // namespace

void Trace::write_csv(std::ostream& os) const {
  os << "t,re,im\n";
  char buf[160];
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", times[i],
                  gamma[i].real(), gamma[i].imag());
    os << buf;
  }
}

void Trace::write_svg(std::ostream& os) const {
  // [-2,2] x [0,2] mapped onto a 400x200 viewBox, y pointing up.
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 400 200\">\n"
     << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.6\" "
        "points=\"";
  char buf[80];
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    const double px = (gamma[i].real() + 2.0) * 100.0;
    const double py = (2.0 - gamma[i].imag()) * 100.0;
    std::snprintf(buf, sizeof(buf), "%s%.6f,%.6f", i ? " " : "", px, py);
    os << buf;
  }
  os << "\"/>\n</svg>\n";
}

Trace sle_trace(std::uint64_t seed, double kappa, int n_points, double tol,
                const TraceOptions& opt) {
  const FlowParams params = params_for_kappa(kappa);
  if (n_points < 2) {
    throw std::invalid_argument("sle_trace: need n_points >= 2");
  }
  const BrownianPath w = sample_path(seed, 1.0, opt.base_level);
  const ReversedPath b(w, 1.0);

  Trace tr;
  tr.kappa = kappa;
  tr.seed = seed;
  tr.times.resize(static_cast<std::size_t>(n_points));
  tr.gamma.resize(static_cast<std::size_t>(n_points));
  for (int j = 0; j < n_points; ++j) {
    const double t = static_cast<double>(j) / (n_points - 1);
    tr.times[static_cast<std::size_t>(j)] = t;
    tr.gamma[static_cast<std::size_t>(j)] =
        trace_point(b, params, kappa, t, tol, opt.solve);
  }
  return tr;
}

double trace_crosscheck(std::uint64_t seed, double kappa, double t, double tol,
                        const TraceOptions& opt) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::invalid_argument("trace_crosscheck: t must lie in (0, 1]");
  }
  const FlowParams params = params_for_kappa(kappa);
  const BrownianPath w = sample_path(seed, 1.0, opt.base_level);

  const ReversedPath b(w, 1.0);
  const Complex via_field = trace_point(b, params, kappa, t, tol, opt.solve);

  // Direct route: drive the reverse flow on [0, t] by W_s^t = W_t - W_{t-s}.
  const ReversedPath wt(w, t);
  const BoundaryLimit direct =
      boundary_start(wt, params, 0.0, t, 0.5 * kPi, tol, opt.solve);
  const Complex via_direct = std::sqrt(kappa) * direct.sol.back_value();
  return std::abs(via_field - via_direct);
}

double self_distance(const Trace& trace, double gap) {
  if (!(gap > 0.0)) {
    throw std::invalid_argument("self_distance: gap must be positive");
  }
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    for (std::size_t j = i + 1; j < trace.size(); ++j) {
      if (trace.times[j] - trace.times[i] < gap) continue;
      any = true;
      best = std::min(best, std::abs(trace.gamma[j] - trace.gamma[i]));
    }
  }
  if (!any) {
    throw std::invalid_argument("self_distance: no sample pairs at least "
                                "`gap` apart");
  }
  return best;
}

Passage classify_passage(const Trace& trace, Complex point) {
  if (!(point.imag() > 0.0)) {
    throw std::invalid_argument("classify_passage: point must be in H");
  }
  // Closed polyline: 0 -> trace -> straight up -> across the far field to
  // the positive real axis -> back to 0. It bounds the region between the
  // trace and the positive axis (clockwise), so winding -1 means the point
  // sits right of the trace, i.e. the trace passed it on the left.
  double far = 10.0;
  for (const Complex& g : trace.gamma) {
    far = std::max({far, 2.0 * std::fabs(g.real()), 2.0 * g.imag()});
  }
  std::vector<Complex> poly;
  poly.reserve(trace.size() + 3);
  for (const Complex& g : trace.gamma) poly.push_back(g);
  const Complex tip = trace.gamma.back();
  poly.push_back({tip.real(), far});
  poly.push_back({far, far});
  poly.push_back({far, 0.0});

  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Complex a = poly[i] - point;
    const Complex b = poly[(i + 1) % poly.size()] - point;
    total += std::atan2(a.real() * b.imag() - a.imag() * b.real(),
                        a.real() * b.real() + a.imag() * b.imag());
  }
  const double turns = total / (2.0 * kPi);
  const long w = std::lround(turns);
  if (std::fabs(turns - static_cast<double>(w)) > 0.25) {
    return Passage::kUndecided;
  }
  if (w == -1) return Passage::kLeft;
  if (w == 0) return Passage::kRight;
  return Passage::kUndecided;
}

LeftPassageEstimate left_passage_estimate(
    const std::vector<std::uint64_t>& seeds, double kappa, Complex point,
    int n_points, double tol, const TraceOptions& opt) {
  if (!(point.imag() > 0.0)) {
    throw std::invalid_argument("left_passage_estimate: point must be in H");
  }
  LeftPassageEstimate est;
  for (std::uint64_t seed : seeds) {
    const Trace tr = sle_trace(seed, kappa, n_points, tol, opt);
    switch (classify_passage(tr, point)) {
      case Passage::kLeft:
        ++est.n_left;
        break;
      case Passage::kRight:
        ++est.n_right;
        break;
      case Passage::kUndecided:
        ++est.n_undecided;
        break;
    }
  }
  const int n = est.n_left + est.n_right;
  if (n > 0) {
    est.p_hat = static_cast<double>(est.n_left) / n;
    est.stderr_ = std::sqrt(est.p_hat * (1.0 - est.p_hat) / n);
  }
  return est;
}

double schramm_left_passage(double kappa, Complex point) {
  if (!(kappa > 0.0 && kappa < 8.0)) {
    throw std::invalid_argument("schramm_left_passage: kappa out of range");
  }
  if (!(point.imag() > 0.0)) {
    throw std::invalid_argument("schramm_left_passage: point must be in H");
  }
  const double w = point.real() / point.imag();
  const double b = 4.0 / kappa;
  // 2F1(1/2, b; 3/2; -w^2) via the Pfaff transform: the argument
  // u = w^2/(1+w^2) stays in [0,1) for every real w.
  const double u = w * w / (1.0 + w * w);
  const double a1 = 0.5, b1 = 1.5 - b, c1 = 1.5;
  double term = 1.0, sum = 1.0;
  for (int n = 0; n < 200000; ++n) {
    term *= (a1 + n) * (b1 + n) / ((c1 + n) * (n + 1.0)) * u;
    sum += term;
    if (std::fabs(term) < 1e-16 * std::fabs(sum)) break;
  }
  const double f = sum / std::sqrt(1.0 + w * w);
  const double pref =
      std::exp(std::lgamma(b) - std::lgamma(b - 0.5)) / std::sqrt(kPi);
  return 0.5 + pref * w * f;
}

}  // namespace cbflow
