#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cbflow/flow.hpp"

namespace cbflow {

/// Branch square root into the closed upper half plane:
///   sqrt(z) = sgn(Im z) sqrt((|z|+Re z)/2) + i sqrt((|z|-Re z)/2).
/// On the cut [0, inf) the displayed formula degenerates; the value returned
/// is the limit from above (+sqrt(x)) and *on_cut, when given, is set.
Complex branch_sqrt(Complex z, bool* on_cut = nullptr);

/// Sampled complex (squared) Bessel path started at 0: H is the boundary
/// flow limit, Y = H^2 on the same grid. branch_flags marks samples
/// suspiciously close to the cut [0, inf) relative to the running |Y| scale.
struct ComplexProcessPath {
  std::vector<double> times;
  std::vector<Complex> h;
  std::vector<Complex> y;
  std::vector<std::uint8_t> branch_flags;

  std::size_t size() const { return times.size(); }
  /// CSV export: t,re_y,im_y,re_h,im_h (17 significant digits).
  void write_csv(std::ostream& os) const;
};

ComplexProcessPath cbes_process(std::uint64_t seed, const FlowParams& params,
                                double t_end, double tol,
                                const SolveOptions& opt = {},
                                int base_level = 4);

/// Residual of the pathwise exponent identity along a solution started on
/// the imaginary axis:
///   lambda*log|H'|_t  vs  M_t - [M]_t/2 + zeta log(y/V_t)
///                          - (theta/2) log(1 + U_t^2/V_t^2),
/// with M_t the left-point Ito sum of theta U/(U^2+V^2) dB over the solver
/// grid and [M]_t its quadrature. Shrinks under grid refinement.
std::vector<double> ito_identity_residual(const FlowSolution& sol,
                                          const ExponentTriple& triple);

struct MartingaleBoundReport {
  double max_violation = 0.0;  // max over grid of lambda log|H'| - (M - [M]/2)
  std::size_t n_checked = 0;
};

/// Checks the domination lambda*log|H'| <= M - [M]/2 along the grid.
MartingaleBoundReport exp_martingale_bound_check(const FlowSolution& sol,
                                                 const ExponentTriple& triple);

/// Euler-Maruyama path of dZ = 2 sqrt(|Z|) dB + delta dt, Z_0 = x0^2,
/// sampled at k*dt for k = 0..floor(t_end/dt). The reference real-valued
/// construction the complex process is compared against.
std::vector<double> real_squared_bessel(std::uint64_t seed, double delta,
                                        double x0, double t_end, double dt,
                                        bool with_noise = true);

}  // namespace cbflow
