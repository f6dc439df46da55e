#include "nrt/genfamily.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <boost/math/tools/roots.hpp>

#include "nrt/errors.hpp"

namespace nrt {

namespace {

constexpr double kFdStep = 1e-4;
constexpr double kRelationTol = 1e-6;
const Complex kI{0.0, 1.0};

Complex first_derivative(const ComplexFn& f, Complex u, Complex h) {
  return (f(u - 2.0 * h) - 8.0 * f(u - h) + 8.0 * f(u + h) - f(u + 2.0 * h)) / (12.0 * h);
}

Complex second_derivative(const ComplexFn& f, Complex u, Complex h) {
  return (-f(u - 2.0 * h) + 16.0 * f(u - h) - 30.0 * f(u) + 16.0 * f(u + h) - f(u + 2.0 * h)) /
         (12.0 * h * h);
}

double real_only(Complex u, const char* who) {
  if (u.imag() != 0.0) throw DomainError(std::string(who) + ": defined for real arguments only");
  return u.real();
}

}  // namespace

LFPair::LFPair(PairFunctions fns, std::string name, double u_min, double u_max)
    : LFPair(std::move(fns), std::move(name), u_min, u_max, true) {}

LFPair::LFPair(PairFunctions fns, std::string name, double u_min, double u_max, bool check)
    : fns_(std::move(fns)), name_(std::move(name)), u_min_(u_min), u_max_(u_max) {
  if (!fns_.F || !fns_.Fprime || !fns_.L) throw DomainError("pair: F, F' and L are required");
  if (!(u_min < u_max)) throw DomainError("pair: empty domain");
  if (check) {
    const auto samples = linspace(u_min, u_max, 41);
    const auto result = verify_pair_relation(*this, samples, kRelationTol);
    if (!result.passed) {
      throw DomainError("pair '" + name_ + "' violates d^2/du^2 L(F(u)) = F'(u): residual " +
                        std::to_string(result.max_residual));
    }
  }
}

LFPair LFPair::unverified(PairFunctions fns, std::string name, double u_min, double u_max) {
  return LFPair(std::move(fns), std::move(name), u_min, u_max, false);
}

Complex LFPair::dLF(Complex u) const {
  if (fns_.Lprime) return fns_.Lprime(fns_.F(u)) * fns_.Fprime(u);
  return first_derivative([this](Complex v) { return fns_.L(fns_.F(v)); }, u, kFdStep);
}

Complex LFPair::d2LF(Complex u) const {
  if (fns_.Lprime && fns_.Lsecond && fns_.Fsecond) {
    const Complex f = fns_.F(u);
    const Complex fp = fns_.Fprime(u);
    return fns_.Lsecond(f) * fp * fp + fns_.Lprime(f) * fns_.Fsecond(u);
  }
  return second_derivative([this](Complex v) { return fns_.L(fns_.F(v)); }, u, kFdStep);
}

LFPair nrt_pair(double q) {
  PairFunctions fns;
  const double e = 1.0 - q;
  fns.F = [q](Complex u) { return qexp(q, u); };
  if (is_q_one(q)) {
    fns.Fprime = [](Complex u) { return guarded_exp(u); };
    fns.Fsecond = fns.Fprime;
    fns.L = [](Complex v) { return v; };
    fns.Lprime = [](Complex) { return Complex{1.0, 0.0}; };
    fns.Lsecond = [](Complex) { return Complex{}; };
  } else {
    fns.Fprime = [q, e](Complex u) { return qpow_from_base(1.0 + e * u, q / e); };
    fns.Fsecond = [q, e](Complex u) { return q * qpow_from_base(1.0 + e * u, (2.0 * q - 1.0) / e); };
    if (std::abs(q - 2.0) < 1e-12) {
      fns.L = [](Complex v) { return principal_log(v); };
    } else {
      fns.L = [q](Complex v) { return qpow_from_base(v, 2.0 - q) / (2.0 - q); };
    }
    fns.Lprime = [e](Complex v) { return qpow_from_base(v, e); };
    fns.Lsecond = [q, e](Complex v) { return e * qpow_from_base(v, -q); };
  }
  // Keep 1 + (1-q)u well inside the right half plane.
  const double reach = is_q_one(q) ? 0.4 : std::min(0.4, 0.5 / std::abs(e));
  return LFPair(std::move(fns), "nrt", -reach, reach);
}

LFPair sinh_pair() {
  PairFunctions fns;
  fns.F = [](Complex u) { return std::sinh(u); };
  fns.Fprime = [](Complex u) { return std::cosh(u); };
  fns.Fsecond = fns.F;
  fns.L = [](Complex v) { return std::sqrt(1.0 + v * v); };
  fns.Lprime = [](Complex v) { return v / std::sqrt(1.0 + v * v); };
  fns.Lsecond = [](Complex v) {
    const Complex s = std::sqrt(1.0 + v * v);
    return 1.0 / (s * s * s);
  };
  return LFPair(std::move(fns), "sinh", -2.0, 2.0);
}

LFPair linear_pair() {
  PairFunctions fns;
  fns.F = [](Complex u) { return u; };
  fns.Fprime = [](Complex) { return Complex{1.0, 0.0}; };
  fns.Fsecond = [](Complex) { return Complex{}; };
  fns.L = [](Complex v) { return 0.5 * v * v; };
  fns.Lprime = [](Complex v) { return v; };
  fns.Lsecond = [](Complex) { return Complex{1.0, 0.0}; };
  return LFPair(std::move(fns), "linear", -2.0, 2.0);
}

LFPair scaled_L(const LFPair& pair, double factor) {
  PairFunctions fns = pair.functions();
  const auto scale = [factor](ComplexFn f) -> ComplexFn {
    if (!f) return f;
    return [f = std::move(f), factor](Complex v) { return factor * f(v); };
  };
  fns.L = scale(fns.L);
  fns.Lprime = scale(fns.Lprime);
  fns.Lsecond = scale(fns.Lsecond);
  return LFPair::unverified(std::move(fns), pair.name() + "-scaled", pair.u_min(), pair.u_max());
}

LFPair pair_from_G(const GeneratorG& gen, std::span<const double> u_samples, std::string name) {
  if (!gen.G || !gen.Gprime) throw DomainError("generator: G and G' are required");
  if (u_samples.size() < 2) throw DomainError("generator: at least two samples are required");
  std::vector<double> us(u_samples.begin(), u_samples.end());
  std::sort(us.begin(), us.end());
  int direction = 0;
  for (std::size_t i = 1; i < us.size(); ++i) {
    const double diff = gen.Gprime(us[i]) - gen.Gprime(us[i - 1]);
    const int sign = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
    if (sign == 0 || (direction != 0 && sign != direction)) {
      throw NonInvertibleError("generator: G' is not strictly monotone on the samples");
    }
    direction = sign;
  }
  // Room for the finite-difference stencils around the hull.
  const double lo = us.front() - 4.0 * kFdStep;
  const double hi = us.back() + 4.0 * kFdStep;

  const RealFn Gpp = gen.Gsecond ? *gen.Gsecond : RealFn([g = gen.Gprime](double u) {
    return (g(u - 2 * kFdStep) - 8 * g(u - kFdStep) + 8 * g(u + kFdStep) - g(u + 2 * kFdStep)) /
           (12 * kFdStep);
  });

  RealFn inverse;
  if (gen.Gprime_inverse) {
    inverse = *gen.Gprime_inverse;
  } else {
    inverse = [g = gen.Gprime, Gpp, lo, hi](double v) {
      const auto f = [&](double u) { return g(u) - v; };
      double flo = f(lo);
      double fhi = f(hi);
      if (flo == 0.0) return lo;
      if (fhi == 0.0) return hi;
      if ((flo > 0.0) == (fhi > 0.0)) throw DomainError("generator: value outside the range of G'");
      boost::uintmax_t iters = 200;
      const auto bracket = boost::math::tools::toms748_solve(
          f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
      double u = 0.5 * (bracket.first + bracket.second);
      for (int k = 0; k < 2; ++k) {
        const double d = Gpp(u);
        if (d == 0.0) break;
        u -= f(u) / d;
      }
      return u;
    };
  }

  PairFunctions fns;
  fns.F = [g = gen.Gprime](Complex u) { return Complex{g(real_only(u, "generated F")), 0.0}; };
  fns.Fprime = [Gpp](Complex u) { return Complex{Gpp(real_only(u, "generated F'")), 0.0}; };
  fns.L = [G = gen.G, inverse](Complex v) { return Complex{G(inverse(real_only(v, "generated L"))), 0.0}; };
  return LFPair(std::move(fns), std::move(name), us.front(), us.back());
}

PairCheck verify_pair_relation(const LFPair& pair, std::span<const double> u_samples, double tol) {
  PairCheck out;
  for (double u : u_samples) {
    const double r = std::abs(pair.d2LF(u) - pair.Fprime(u));
    if (!std::isfinite(r)) {
      out.max_residual = std::numeric_limits<double>::infinity();
      break;
    }
    out.max_residual = std::max(out.max_residual, r);
  }
  out.passed = out.max_residual <= tol;
  return out;
}

Complex general_plane_wave(const LFPair& pair, double k, const ModelParams& params, double t,
                           double x, std::optional<double> w) {
  const double omega = w ? *w : params.hbar * k * k / (2.0 * params.m);
  return pair.F(kI * (k * x - omega * t));
}

double generalized_residual(const LFPair& pair, double k, const ModelParams& params, double t,
                            double x, std::optional<double> w) {
  const auto psi_t = [&](Complex s) { return general_plane_wave(pair, k, params, s.real(), x, w); };
  const auto L_x = [&](Complex s) { return pair.L(general_plane_wave(pair, k, params, t, s.real(), w)); };
  const Complex dt = first_derivative(psi_t, t, kFdStep);
  const Complex dxx = second_derivative(L_x, x, kFdStep);
  return std::abs(kI * params.hbar * dt + params.hbar * params.hbar / (2.0 * params.m) * dxx);
}

UniquenessProbe uniqueness_residual(const LFPair& pair, std::span<const double> u_samples) {
  const std::size_t n = u_samples.size();
  if (n < 10) throw DomainError("uniqueness: at least 10 samples are required");
  std::vector<Complex> g(n), c1(n), c2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = u_samples[i];
    const Complex fp = pair.Fprime(u);
    if (fp == Complex{}) throw DomainError("uniqueness: F' vanishes on a sample");
    g[i] = pair.dLF(u);
    c1[i] = fp;
    c2[i] = u * fp;
  }
  const auto residuals = [&](double r1, double r2) {
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = std::abs(g[i] - r1 * c1[i] - r2 * c2[i]);
    return e;
  };
  // Weighted least squares over real (r1, r2) with complex rows.
  const auto solve = [&](const std::vector<double>& w, double* r1, double* r2) {
    double a11 = 0, a12 = 0, a22 = 0, y1 = 0, y2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      a11 += w[i] * std::norm(c1[i]);
      a22 += w[i] * std::norm(c2[i]);
      a12 += w[i] * std::real(std::conj(c1[i]) * c2[i]);
      y1 += w[i] * std::real(std::conj(c1[i]) * g[i]);
      y2 += w[i] * std::real(std::conj(c2[i]) * g[i]);
    }
    const double det = a11 * a22 - a12 * a12;
    if (std::abs(det) <= 1e-300) return false;
    *r1 = (a22 * y1 - a12 * y2) / det;
    *r2 = (a11 * y2 - a12 * y1) / det;
    return true;
  };

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  UniquenessProbe best;
  best.residual = std::numeric_limits<double>::infinity();
  // Lawson iteration: reweighting by the residual drives least squares to minimax.
  for (int iter = 0; iter < 2000; ++iter) {
    double r1 = 0, r2 = 0;
    if (!solve(w, &r1, &r2)) break;
    const auto e = residuals(r1, r2);
    const double emax = *std::max_element(e.begin(), e.end());
    if (emax < best.residual) {
      best.residual = emax;
      best.r1 = r1;
      best.r2 = r2;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= e[i];
      total += w[i];
    }
    if (!(total > 0.0) || emax <= 1e-15) break;
    for (auto& wi : w) wi /= total;
  }

  // F = F0 (r1 + r2 u)^{1/r2} + F1, anchored at the middle sample.
  const double u_ref = u_samples[n / 2];
  if (std::abs(best.r2) > 1e-12) {
    const double base = best.r1 + best.r2 * u_ref;
    if (base > 0.0) {
      best.F0 = pair.Fprime(u_ref).real() / std::pow(base, (1.0 - best.r2) / best.r2);
      best.F1 = pair.F(u_ref).real() - best.F0 * std::pow(base, 1.0 / best.r2);
    }
  }
  return best;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

}  // namespace nrt
