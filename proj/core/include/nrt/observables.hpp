#pragma once

// Squared modulus, norms and peak analysis.

#include <string>
#include <vector>

#include "nrt/grid.hpp"
#include "nrt/solutions.hpp"

namespace nrt {

/// psi sampled on a grid at one time; the unit of CLI output.
struct GridProfile {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> re_psi;
  std::vector<double> im_psi;
  std::vector<double> abs2;
};

/// [1 - 2(1-q) Re Q + (1-q)^2 |Q|^2]^{1/(1-q)} with Q = a x^2 + b x + c,
/// exp(-2 Re Q) at q = 1.
double abs2_from_coeffs(const CoefficientState& state, double q, double x);

/// Re psi, Im psi and |psi|^2 on the grid. Coefficient families take |psi|^2
/// from abs2_from_coeffs and cross-check it against |psi|^2 of the evaluated
/// wave function (DomainError on disagreement).
GridProfile abs2_profile(const SolutionFamily& family, const ModelParams& params, double t,
                         const UniformGrid& grid);

struct NormResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  bool converged = false;
};

/// N(t) = integral of |psi|^2 over the real line: adaptive Gauss-Kronrod on a
/// core interval plus the analytic power-law tails beyond it. Throws
/// DivergentNormError when the family is not normalizable at t, and
/// SingularTimeError at or beyond the singular times of the singular and
/// harmonic families.
NormResult norm(const SolutionFamily& family, const ModelParams& params, double t, double tol);

/// Closed-form norm of the singular packet,
///   N = (1/(|1-q| b_c)) [(1-q)^2 hbar^2 b_c^4 (t+t0)^2 / 4m^2]^{1/2 + 1/(1-q)}
///       sqrt(pi) Gamma((3-q)/(2(q-1))) / Gamma(1/(q-1)).
/// Throws DomainError unless 1 < q < 3, t > -t0 and b_c > 0.
double norm_closed_form_singular(double q, double b_c, double t0, const ModelParams& params,
                                 double t);

struct Normalizability {
  bool normalizable = false;
  std::string reason;
};

/// a != 0: 1 < q < 5 and no real root of the base polynomial.
/// a = 0: 1 < q < 3 (plus a nonzero linear term).
/// Frozen: 2 < q < 4. Gaussian families (q = 1): Re a > 0.
Normalizability normalizable(const SolutionFamily& family, const ModelParams& params, double t);

/// True when c0 + c1 x + c2 x^2 vanishes for some real x, decided on the
/// exact real and imaginary parts rather than by sampling.
bool polynomial_has_real_root(Complex c0, Complex c1, Complex c2);

/// Truncated norms over growing windows, without the analytic tail and
/// without consulting the classifier. `converged` is false when a window's
/// local quadrature fails (non-integrable singularity) or the increments
/// between windows stop shrinking geometrically.
struct ConvergenceProbe {
  bool converged = false;
  std::vector<double> cutoffs;
  std::vector<double> truncated_norms;
  std::string reason;
};

ConvergenceProbe probe_norm_convergence(const SolutionFamily& family, const ModelParams& params,
                                        double t, double tol);

/// dN/dt of the harmonic quasi-stationary packet by direct quadrature of
///   2(1-q)(hbar a_c^2/m) sin[(1-q) hbar a_c t/m]
///     * integral x^2 [1 - 2 a_c (1-q) cos[...] x^2 + (1-q)^2 a_c^2 x^4]^{q/(1-q)} dx.
NormResult harmonic_norm_rate(const ModelParams& params, double t, double tol);

struct Peak {
  double x = 0.0;
  double height = 0.0;
};
using PeakSet = std::vector<Peak>;

/// Strict interior local maxima of |psi|^2, refined with a 3-point parabola.
/// A flat top is reported once, at its leftmost node.
PeakSet find_peaks(const GridProfile& profile);

}  // namespace nrt
