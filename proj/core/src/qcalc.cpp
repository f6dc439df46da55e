#include "nrt/qcalc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nrt/errors.hpp"

namespace nrt {
namespace {

const double kLogOverflow = std::log(kOverflowLimit);

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// |z0 + v s| minimised over s between 0 and t.
double distance_to_origin(Complex z0, Complex v, double t) {
  const double vv = std::norm(v);
  if (vv == 0.0) return std::abs(z0);
  double s = -(std::conj(v) * z0).real() / vv;
  s = std::clamp(s, std::min(0.0, t), std::max(0.0, t));
  return std::abs(z0 + v * s);
}

}  // namespace

double principal_arg(Complex z) {
  if (z.imag() == 0.0 && z.real() < 0.0) return std::numbers::pi;
  return std::arg(z);
}

Complex principal_log(Complex z) { return {std::log(std::abs(z)), principal_arg(z)}; }

Complex guarded_exp(Complex z) {
  if (!finite(z)) throw OverflowError("exp: non-finite argument");
  if (z.real() > kLogOverflow) throw OverflowError("exp: magnitude exceeds 1e300");
  return std::exp(z);
}

Complex cexpm1(Complex w) {
  const double x = w.real();
  const double y = w.imag();
  const double half_sin = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * half_sin * half_sin, std::exp(x) * std::sin(y)};
}

Complex qpow_from_base(Complex base, double s) {
  if (!finite(base) || !std::isfinite(s)) throw OverflowError("qpow_from_base: non-finite input");
  if (base == Complex{0.0, 0.0}) {
    if (s < 0.0) throw BranchPointError("qpow_from_base: zero base with negative exponent");
    return s == 0.0 ? Complex{1.0, 0.0} : Complex{0.0, 0.0};
  }
  const double log_mag = s * std::log(std::abs(base));
  if (log_mag > kLogOverflow) throw OverflowError("qpow_from_base: magnitude exceeds 1e300");
  return std::polar(std::exp(log_mag), s * principal_arg(base));
}

Complex qexp(double q, Complex z) {
  if (is_q_one(q)) return guarded_exp(z);
  const double one_minus_q = 1.0 - q;
  return qpow_from_base(1.0 + one_minus_q * z, 1.0 / one_minus_q);
}

LinearPath::LinearPath(Complex z0, Complex velocity) : z0_(z0), v_(velocity) {
  if (z0 == Complex{0.0, 0.0}) throw PathThroughOriginError("LinearPath: z0 is the branch point");
}

bool LinearPath::crosses_origin(double* t_hit) const {
  if (v_ == Complex{0.0, 0.0}) return false;
  const Complex r = -z0_ / v_;
  if (std::abs(r.imag()) > 1e-14 * std::max(1.0, std::abs(r.real()))) return false;
  if (t_hit != nullptr) *t_hit = r.real();
  return true;
}

double path_arg_unwrapped(const LinearPath& path, double t) {
  const Complex z0 = path.z0();
  const Complex z1 = path.at(t);
  const double scale = std::max(std::abs(z0), std::abs(z1));
  if (distance_to_origin(z0, path.velocity(), t) <= 1e-15 * scale) {
    throw PathThroughOriginError("path_arg_unwrapped: segment passes through 0 before t = " +
                                 std::to_string(t));
  }
  // The segment subtends an angle strictly inside (-pi, pi) as seen from 0.
  return principal_arg(z0) + std::arg(z1 * std::conj(z0));
}

Complex log_along_path(const LinearPath& path, double t) {
  const double theta = path_arg_unwrapped(path, t);
  return {std::log(std::abs(path.at(t))), theta};
}

Complex cpow_along_path(const LinearPath& path, double s, double t) {
  const double theta = path_arg_unwrapped(path, t);
  const double log_mag = s * std::log(std::abs(path.at(t)));
  if (log_mag > kLogOverflow) throw OverflowError("cpow_along_path: magnitude exceeds 1e300");
  return std::polar(std::exp(log_mag), s * theta);
}

}  // namespace nrt
