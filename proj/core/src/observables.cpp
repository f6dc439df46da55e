#include "nrt/observables.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "nrt/errors.hpp"
#include "quadrature.hpp"

namespace nrt {

namespace {

constexpr double kZeroCoeff = 1e-300;

// scale * x^moment * |poly(x)|^{2 sigma}, poly in ascending order.
struct PowerDensity {
  std::array<Complex, 3> poly{};
  double sigma = 0.0;
  int moment = 0;
  double scale = 1.0;

  int degree() const {
    if (std::abs(poly[2]) > kZeroCoeff) return 2;
    if (std::abs(poly[1]) > kZeroCoeff) return 1;
    return 0;
  }

  double operator()(double x) const {
    const Complex p = (poly[2] * x + poly[1]) * x + poly[0];
    const double mod2 = std::norm(p);
    double value = scale * std::pow(mod2, sigma);
    if (moment == 2) value *= x * x;
    return value;
  }

  // Exponent of the leading power law |x|^tau.
  double tail_exponent() const { return 2.0 * degree() * sigma + moment; }
};

// exp(-2 a_r (x - centre)^2) up to normalisation; integrated numerically on a window.
struct GaussianWindow {
  double centre = 0.0;
  double width = 1.0;  // standard deviation of |psi|^2
};

struct Tail {
  double value = 0.0;
  double error = 0.0;
};

// Integral of the density over |x| > X from the asymptotic expansion
// |A|^{2 sigma} |x|^tau (1 + f1/x + f2/x^2), f1 = sigma e1.
Tail analytic_tails(const PowerDensity& d, double X) {
  const int deg = d.degree();
  const Complex A = d.poly[deg];
  const Complex beta1 = deg >= 1 ? d.poly[deg - 1] / A : Complex{};
  const Complex beta2 = deg >= 2 ? d.poly[deg - 2] / A : Complex{};
  const double e1 = 2.0 * beta1.real();
  const double e2 = std::norm(beta1) + 2.0 * beta2.real();
  const double s = d.sigma;
  const double f2 = s * e2 + 0.5 * s * (s - 1.0) * e1 * e1;
  const double tau = d.tail_exponent();
  const double K = d.scale * std::pow(std::norm(A), s);
  const double lead = std::pow(X, tau + 1.0) / (-tau - 1.0);
  const double third = std::pow(X, tau - 1.0) / (1.0 - tau);
  // f1 flips sign on the left, so the odd term cancels in the sum.
  Tail out;
  out.value = K * (2.0 * lead + 2.0 * f2 * third);
  const double rho = std::abs(beta1) + std::sqrt(std::abs(beta2));
  const double cubic = std::pow(rho * (1.0 + std::abs(s)), 3) * 8.0;
  out.error = 2.0 * K * cubic * std::pow(X, tau - 2.0) / std::max(std::abs(2.0 - tau), 1.0);
  return out;
}

// Roots of a polynomial with complex coefficients of degree <= 2.
std::vector<Complex> complex_roots(const PowerDensity& d) {
  const int deg = d.degree();
  if (deg == 1) return {-d.poly[0] / d.poly[1]};
  if (deg == 2) {
    const Complex a = d.poly[2];
    const Complex b = d.poly[1];
    const Complex c = d.poly[0];
    const Complex disc = std::sqrt(b * b - 4.0 * a * c);
    const Complex big = (std::real(std::conj(b) * disc) >= 0.0) ? -(b + disc) / 2.0 : -(b - disc) / 2.0;
    if (std::abs(big) == 0.0) return {Complex{}, Complex{}};
    return {big / a, c / big};
  }
  return {};
}

// Scale beyond which the polynomial is governed by its leading term.
double feature_scale(const std::vector<Complex>& roots) {
  double r = 1.0;
  for (const auto& z : roots) r = std::max(r, std::abs(z.real()) + std::abs(z.imag()));
  return r;
}

// Breakpoints in [-X, X]: around every root plus geometric panels from the
// feature scale out to X.
std::vector<double> breakpoints(const std::vector<Complex>& roots, double R, double X) {
  std::vector<double> pts{-X, X, 0.0};
  for (const auto& z : roots) {
    const double w = std::max(std::abs(z.imag()), 1e-12);
    pts.push_back(z.real());
    for (int k = -3; k <= 3; ++k) {
      pts.push_back(z.real() + w * std::ldexp(1.0, k));
      pts.push_back(z.real() - w * std::ldexp(1.0, k));
    }
  }
  for (double s = R / 64.0; s < X; s *= 2.0) {
    pts.push_back(s);
    pts.push_back(-s);
  }
  std::erase_if(pts, [X](double p) { return !(p >= -X && p <= X); });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

detail::QuadratureResult integrate_panels(const std::function<double(double)>& f,
                                          const std::vector<double>& pts, double tol) {
  detail::QuadratureResult out;
  out.converged = true;
  const double share = tol / static_cast<double>(std::max<std::size_t>(pts.size() - 1, 1));
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto r = detail::integrate_adaptive(f, pts[i], pts[i + 1], share);
    out.value += r.value;
    out.error += r.error;
    out.converged = out.converged && r.converged;
  }
  out.converged = out.converged && std::isfinite(out.value) && out.error <= tol;
  return out;
}

bool dominates(const PowerDensity& d, double X) {
  const int deg = d.degree();
  const double A = std::abs(d.poly[deg]);
  if (deg == 2) return A * X * X > 100.0 * (std::abs(d.poly[1]) * X + std::abs(d.poly[0]) + 1.0);
  return A * X > 100.0 * (std::abs(d.poly[0]) + 1.0);
}

NormResult integrate_power_density(const PowerDensity& d, double tol) {
  if (d.degree() == 0) throw DivergentNormError("norm: constant base polynomial");
  const double tau = d.tail_exponent();
  if (!(tau < -1.0)) throw DivergentNormError("norm: tail exponent " + std::to_string(tau) + " >= -1");
  const auto roots = complex_roots(d);
  const double R = feature_scale(roots);
  double X = 2.0 * R;
  Tail tail = analytic_tails(d, X);
  for (int iter = 0; iter < 200 && !(dominates(d, X) && tail.error <= tol / 8.0); ++iter) {
    X *= 2.0;
    tail = analytic_tails(d, X);
  }
  const auto pts = breakpoints(roots, R, X);
  const std::function<double(double)> f = [&d](double x) { return d(x); };
  const auto core = integrate_panels(f, pts, tol - tail.error);
  NormResult out;
  out.value = core.value + tail.value;
  out.abs_error_estimate = core.error + tail.error;
  out.converged = core.converged && std::isfinite(out.value) && out.abs_error_estimate <= tol;
  return out;
}

NormResult integrate_gaussian(const std::function<double(double)>& f, const GaussianWindow& w,
                              double tol) {
  std::vector<double> pts;
  for (int k = -20; k <= 20; k += 2) pts.push_back(w.centre + k * w.width);
  const auto r = integrate_panels(f, pts, tol);
  return {r.value, r.error, r.converged};
}

// Window for exp(-2 Re(a x^2 + b x + c)).
GaussianWindow window_from_coeffs(const CoefficientState& s) {
  const double ar = s.a.real();
  return {-s.b.real() / (2.0 * ar), 0.5 / std::sqrt(ar)};
}

bool is_coefficient_family(const SolutionFamily& family) {
  return !std::holds_alternative<family::Frozen>(family) &&
         !std::holds_alternative<family::GaussianLimit>(family);
}

double frozen_exponent(const family::Frozen& f, double q) {
  return f.exponent ? *f.exponent : 1.0 / (2.0 - q);
}

PowerDensity density_from_coeffs(const CoefficientState& s, double q) {
  PowerDensity d;
  d.poly = {1.0 - (1.0 - q) * s.c, -(1.0 - q) * s.b, -(1.0 - q) * s.a};
  d.sigma = 1.0 / (1.0 - q);
  return d;
}

// Time-range checks that come before any classification.
void check_time_range(const SolutionFamily& family, const ModelParams& params, double t) {
  if (const auto* s = std::get_if<family::SingularPacket>(&family)) {
    if (!(t > -s->t0)) throw SingularTimeError("singular packet: t must exceed -t0");
  }
  if (std::holds_alternative<family::HarmonicQuasiStationary>(family)) {
    if (!(std::abs(t) < harmonic_singular_time(params))) {
      throw SingularTimeError("harmonic: |t| must stay below the singular time t_c");
    }
  }
}

double truncated_integral(const std::function<double(double)>& f,
                          const std::vector<Complex>& roots, double R, double W, double tol,
                          bool* ok) {
  const auto r = integrate_panels(f, breakpoints(roots, R, W), tol);
  *ok = r.converged;
  return r.value;
}

}  // namespace

double abs2_from_coeffs(const CoefficientState& state, double q, double x) {
  const Complex Q = (state.a * x + state.b) * x + state.c;
  if (is_q_one(q)) return std::exp(-2.0 * Q.real());
  const double e = 1.0 - q;
  const double shift = -2.0 * e * Q.real() + e * e * std::norm(Q);
  if (shift <= -1.0) return std::pow(std::max(1.0 + shift, 0.0), 1.0 / e);
  // log1p only pays off near shift = 0; elsewhere |P|^2 avoids the cancellation.
  if (std::abs(shift) < 0.5) return std::exp(std::log1p(shift) / e);
  return std::exp(std::log(std::norm(1.0 - e * Q)) / e);
}

GridProfile abs2_profile(const SolutionFamily& family, const ModelParams& params, double t,
                         const UniformGrid& grid) {
  GridProfile out;
  out.t = t;
  const auto coeffs = family_coeffs(family, t, params);
  const double q = family_q(family, params);
  out.x.reserve(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    const Complex psi = evaluate(family, params, t, x);
    const double direct = std::norm(psi);
    double abs2 = direct;
    if (coeffs) {
      abs2 = abs2_from_coeffs(*coeffs, q, x);
      const double scale = std::max({abs2, direct, 1e-300});
      if (!(std::abs(abs2 - direct) <= 1e-9 * scale)) {
        throw DomainError("abs2_profile: closed-form |psi|^2 disagrees with |psi|^2 at x = " +
                          std::to_string(x));
      }
    }
    out.x.push_back(x);
    out.re_psi.push_back(psi.real());
    out.im_psi.push_back(psi.imag());
    out.abs2.push_back(abs2);
  }
  return out;
}

bool polynomial_has_real_root(Complex c0, Complex c1, Complex c2) {
  const double scale = std::abs(c0) + std::abs(c1) + std::abs(c2);
  if (scale == 0.0) return true;
  const double eps = 1e-13 * scale;
  const double i0 = c0.imag(), i1 = c1.imag(), i2 = c2.imag();
  if (std::abs(i0) <= eps && std::abs(i1) <= eps && std::abs(i2) <= eps) {
    const double r0 = c0.real(), r1 = c1.real(), r2 = c2.real();
    if (std::abs(r2) > eps) return r1 * r1 - 4.0 * r2 * r0 >= -eps * scale;
    if (std::abs(r1) > eps) return true;
    return std::abs(r0) <= eps;
  }
  // Candidates: real zeros of the imaginary part.
  std::vector<double> xs;
  if (std::abs(i2) > eps) {
    const double disc = i1 * i1 - 4.0 * i2 * i0;
    if (disc < 0.0) return false;
    const double sq = std::sqrt(disc);
    const double big = -0.5 * (i1 + std::copysign(sq, i1));
    if (big != 0.0) {
      xs.push_back(big / i2);
      xs.push_back(i0 / big);
    } else {
      xs.push_back(0.0);
    }
  } else if (std::abs(i1) > eps) {
    xs.push_back(-i0 / i1);
  } else {
    return false;  // constant nonzero imaginary part
  }
  for (double x : xs) {
    const double re = (c2.real() * x + c1.real()) * x + c0.real();
    const double mag = std::abs(c0) + std::abs(c1) * std::abs(x) + std::abs(c2) * x * x;
    if (std::abs(re) <= 1e-12 * mag) return true;
  }
  return false;
}

Normalizability normalizable(const SolutionFamily& family, const ModelParams& params, double t) {
  if (const auto* g = std::get_if<family::GaussianLimit>(&family)) {
    if (!(g->alpha > 0.0)) return {false, "gaussian: alpha must be positive"};
    return {true, "gaussian packet with Re a > 0"};
  }
  const double q = family_q(family, params);
  if (const auto* f = std::get_if<family::Frozen>(&family)) {
    if (f->b == 0.0 || f->c == 0.0) return {false, "frozen: b x + i c has a real root"};
    if (!f->exponent) {
      if (q > 2.0 && q < 4.0) return {true, "frozen with 2 < q < 4"};
      return {false, "frozen requires 2 < q < 4"};
    }
    if (2.0 * *f->exponent < -1.0) return {true, "frozen: decay faster than 1/|x|"};
    return {false, "frozen: exponent gives decay no faster than 1/|x|"};
  }
  if (const auto* s = std::get_if<family::SingularPacket>(&family)) {
    if (!(t > -s->t0)) return {false, "singular packet: t at or before the singular time -t0"};
  }
  if (std::holds_alternative<family::HarmonicQuasiStationary>(family)) {
    if (!(std::abs(t) < harmonic_singular_time(params))) {
      return {false, "harmonic: |t| at or beyond the singular time t_c"};
    }
  }
  const auto s = family_coeffs(family, t, params);
  if (!s) return {false, "no coefficient form"};
  if (is_q_one(q)) {
    if (s->a.real() > 0.0) return {true, "gaussian with Re a > 0"};
    return {false, "gaussian requires Re a > 0"};
  }
  const auto d = density_from_coeffs(*s, q);
  if (std::abs(s->a) > kZeroCoeff) {
    if (!(q > 1.0 && q < 5.0)) return {false, "a != 0 requires 1 < q < 5"};
    if (polynomial_has_real_root(d.poly[0], d.poly[1], d.poly[2])) {
      return {false, "base polynomial has a real root"};
    }
    return {true, "1 < q < 5 and no real root"};
  }
  if (!(q > 1.0 && q < 3.0)) return {false, "a = 0 requires 1 < q < 3"};
  if (std::abs(s->b) <= kZeroCoeff) return {false, "a = b = 0: constant modulus"};
  if (polynomial_has_real_root(d.poly[0], d.poly[1], d.poly[2])) {
    return {false, "base polynomial has a real root"};
  }
  return {true, "a = 0 with 1 < q < 3"};
}

NormResult norm(const SolutionFamily& family, const ModelParams& params, double t, double tol) {
  if (!(tol > 0.0)) throw DomainError("norm: tolerance must be positive");
  check_time_range(family, params, t);
  const auto verdict = normalizable(family, params, t);
  if (!verdict.normalizable) throw DivergentNormError("norm: " + verdict.reason);
  const double q = family_q(family, params);

  if (const auto* g = std::get_if<family::GaussianLimit>(&family)) {
    const Complex z{g->alpha, 2.0 * params.hbar * t / params.m};
    const double ar = (1.0 / z).real();
    const GaussianWindow w{params.hbar * g->k0 * t / params.m, 0.5 / std::sqrt(ar)};
    return integrate_gaussian([&](double x) { return std::norm(evaluate(family, params, t, x)); }, w,
                              tol);
  }
  if (const auto* f = std::get_if<family::Frozen>(&family)) {
    PowerDensity d;
    d.poly = {Complex{0.0, f->c}, Complex{f->b, 0.0}, Complex{}};
    d.sigma = frozen_exponent(*f, q);
    return integrate_power_density(d, tol);
  }
  const auto s = family_coeffs(family, t, params);
  if (is_q_one(q)) {
    return integrate_gaussian([&](double x) { return abs2_from_coeffs(*s, q, x); },
                              window_from_coeffs(*s), tol);
  }
  return integrate_power_density(density_from_coeffs(*s, q), tol);
}

double norm_closed_form_singular(double q, double b_c, double t0, const ModelParams& params,
                                 double t) {
  if (!(q > 1.0 && q < 3.0)) throw DomainError("singular norm: requires 1 < q < 3");
  if (!(t > -t0)) throw DomainError("singular norm: requires t > -t0");
  if (!(b_c > 0.0)) throw DomainError("singular norm: requires b_c > 0");
  const double e = 1.0 - q;
  const double tau = t + t0;
  const double base = e * e * params.hbar * params.hbar * std::pow(b_c, 4) * tau * tau /
                      (4.0 * params.m * params.m);
  const double power = std::pow(base, 0.5 + 1.0 / e);
  const double ratio = boost::math::tgamma((3.0 - q) / (2.0 * (q - 1.0))) /
                       boost::math::tgamma(1.0 / (q - 1.0));
  return power * std::sqrt(std::numbers::pi) * ratio / (std::abs(e) * b_c);
}

ConvergenceProbe probe_norm_convergence(const SolutionFamily& family, const ModelParams& params,
                                        double t, double tol) {
  check_time_range(family, params, t);
  ConvergenceProbe out;
  const double q = family_q(family, params);
  std::function<double(double)> f;
  std::vector<Complex> roots;
  double X0 = 4.0;
  if (const auto* fr = std::get_if<family::Frozen>(&family)) {
    PowerDensity d;
    d.poly = {Complex{0.0, fr->c}, Complex{fr->b, 0.0}, Complex{}};
    d.sigma = frozen_exponent(*fr, q);
    roots = complex_roots(d);
    f = [d](double x) { return d(x); };
    X0 = 4.0 * feature_scale(roots);
  } else if (is_coefficient_family(family) && !is_q_one(q)) {
    const auto s = family_coeffs(family, t, params);
    const auto d = density_from_coeffs(*s, q);
    roots = complex_roots(d);
    f = [d](double x) { return d(x); };
    X0 = 4.0 * feature_scale(roots);
  } else {
    f = [&family, &params, t](double x) { return std::norm(evaluate(family, params, t, x)); };
  }
  for (int k = 0; k <= 6; ++k) {
    const double W = X0 * std::pow(4.0, k);
    bool ok = true;
    const double value = truncated_integral(f, roots, X0 / 4.0, W, tol, &ok);
    out.cutoffs.push_back(W);
    out.truncated_norms.push_back(value);
    if (!ok) {
      out.converged = false;
      out.reason = "local quadrature failed on [-" + std::to_string(W) + ", " + std::to_string(W) + "]";
      return out;
    }
  }
  const auto& T = out.truncated_norms;
  std::vector<double> inc;
  for (std::size_t i = 1; i < T.size(); ++i) inc.push_back(std::abs(T[i] - T[i - 1]));
  const double floor = std::max(tol, 1e-12 * std::abs(T.back()));
  bool shrinking = true;
  for (std::size_t i = inc.size() - 3; i < inc.size(); ++i) {
    if (inc[i] <= floor) continue;
    if (!(inc[i] < 0.95 * inc[i - 1])) shrinking = false;
  }
  out.converged = shrinking;
  out.reason = shrinking ? "increments shrink geometrically" : "increments do not shrink";
  return out;
}

NormResult harmonic_norm_rate(const ModelParams& params, double t, double tol) {
  const double q = params.q;
  if (is_q_one(q)) return {0.0, 0.0, true};
  const double a_c = harmonic_critical_a(params);
  if (!(std::abs(t) < harmonic_singular_time(params))) {
    throw SingularTimeError("harmonic: |t| must stay below the singular time t_c");
  }
  const double e = 1.0 - q;
  const double phase = e * params.hbar * a_c * t / params.m;
  const double prefactor = 2.0 * e * params.hbar * a_c * a_c / params.m * std::sin(phase);
  PowerDensity d;
  d.poly = {std::polar(1.0, -phase), Complex{}, Complex{-e * a_c, 0.0}};
  d.sigma = q / e;
  d.moment = 2;
  if (prefactor == 0.0) return {0.0, 0.0, true};
  auto r = integrate_power_density(d, tol / std::abs(prefactor));
  r.value *= prefactor;
  r.abs_error_estimate *= std::abs(prefactor);
  return r;
}

PeakSet find_peaks(const GridProfile& profile) {
  PeakSet peaks;
  const auto& f = profile.abs2;
  const auto& x = profile.x;
  const std::size_t n = f.size();
  if (n < 3) return peaks;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(f[i] > f[i - 1])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && f[j + 1] == f[i]) ++j;
    if (j + 1 >= n) break;
    if (f[j + 1] < f[i]) {
      Peak p{x[i], f[i]};
      if (j == i) {
        const double h = 0.5 * (x[i + 1] - x[i - 1]);
        const double curv = f[i - 1] - 2.0 * f[i] + f[i + 1];
        if (curv < 0.0) {
          const double diff = f[i - 1] - f[i + 1];
          p.x = x[i] + h * diff / (2.0 * curv);
          p.height = f[i] - diff * diff / (8.0 * curv);
        }
      }
      if (p.height > 0.0) peaks.push_back(p);
    }
    i = j + 1;
  }
  return peaks;
}

}  // namespace nrt
