#pragma once

// q-deformed complex arithmetic.
//
// All fractional powers are taken on the principal branch, Arg in (-pi, pi],
// except cpow_along_path which continues the argument along a straight
// complex trajectory starting from its principal value at t = 0.

#include <complex>

namespace nrt {

using Complex = std::complex<double>;

inline constexpr double kQOneEps = 1e-9;
inline constexpr double kOverflowLimit = 1e300;

/// True when q is treated as exactly 1 (the exponential limit).
inline bool is_q_one(double q) { return std::abs(q - 1.0) < kQOneEps; }

/// Principal argument in (-pi, pi]; a negative real with a -0.0 imaginary
/// part maps to +pi rather than -pi.
double principal_arg(Complex z);

/// Principal logarithm consistent with principal_arg.
Complex principal_log(Complex z);

/// exp(z) with the overflow guard applied.
Complex guarded_exp(Complex z);

/// exp(w) - 1 without cancellation for small |w|.
Complex cexpm1(Complex w);

/// q-exponential [1 + (1-q) z]^{1/(1-q)}, exp(z) for |q-1| < kQOneEps.
Complex qexp(double q, Complex z);

/// Principal P^s = exp(s (ln|P| + i Arg P)).
/// P = 0 gives 0 for s > 0, 1 for s = 0 and BranchPointError for s < 0.
Complex qpow_from_base(Complex base, double s);

/// Straight complex trajectory z(t) = z0 + v t.
class LinearPath {
 public:
  /// Throws PathThroughOriginError if z0 == 0.
  LinearPath(Complex z0, Complex velocity);

  Complex z0() const { return z0_; }
  Complex velocity() const { return v_; }
  Complex at(double t) const { return z0_ + v_ * t; }

  /// Real time at which the path passes through 0, if it does.
  bool crosses_origin(double* t_hit = nullptr) const;

 private:
  Complex z0_;
  Complex v_;
};

/// Continuous argument of z(t) with theta(0) = Arg z0.
/// Throws PathThroughOriginError if the segment between z(0) and z(t)
/// contains the origin.
double path_arg_unwrapped(const LinearPath& path, double t);

/// ln|z(t)| + i theta(t), the logarithm continued along the path.
Complex log_along_path(const LinearPath& path, double t);

/// |z(t)|^s exp(i s theta(t)) with theta from path_arg_unwrapped.
Complex cpow_along_path(const LinearPath& path, double s, double t);

}  // namespace nrt
