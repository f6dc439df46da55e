#pragma once

// Generalized Schroedinger-like equations
//
//   i hbar d/dt psi = -(hbar^2/2m) d^2/dx^2 L(psi)
//
// parameterized by a pair (L, F) with d^2/du^2 L(F(u)) = F'(u), and their
// plane-wave-like solutions psi = F[i(kx - wt)].

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nrt/qcalc.hpp"
#include "nrt/solutions.hpp"

namespace nrt {

using ComplexFn = std::function<Complex(Complex)>;
using RealFn = std::function<double(double)>;

struct PairFunctions {
  ComplexFn F;
  ComplexFn Fprime;
  ComplexFn L;
  // Optional analytic derivatives; finite differences otherwise.
  ComplexFn Fsecond;
  ComplexFn Lprime;
  ComplexFn Lsecond;
};

class LFPair {
 public:
  /// Checks the functional relation on a real grid over [u_min, u_max] and
  /// throws DomainError if it fails at 1e-6.
  LFPair(PairFunctions fns, std::string name, double u_min, double u_max);

  /// No check; for negative controls.
  static LFPair unverified(PairFunctions fns, std::string name, double u_min, double u_max);

  const PairFunctions& functions() const { return fns_; }
  const std::string& name() const { return name_; }
  double u_min() const { return u_min_; }
  double u_max() const { return u_max_; }

  Complex F(Complex u) const { return fns_.F(u); }
  Complex Fprime(Complex u) const { return fns_.Fprime(u); }
  Complex L(Complex v) const { return fns_.L(v); }

  /// d/du L(F(u)), analytic when L' is known.
  Complex dLF(Complex u) const;
  /// d^2/du^2 L(F(u)), analytic when L', L'' and F'' are known.
  Complex d2LF(Complex u) const;

 private:
  LFPair(PairFunctions fns, std::string name, double u_min, double u_max, bool check);

  PairFunctions fns_;
  std::string name_;
  double u_min_;
  double u_max_;
};

/// F = [1+(1-q)u]^{1/(1-q)}, L = u^{2-q}/(2-q) (Log u at q = 2).
/// Validated on |u| <= min(0.4, 0.5/|1-q|).
LFPair nrt_pair(double q);

/// F = sinh u, L = sqrt(1 + u^2). Validated on u in [-2, 2].
LFPair sinh_pair();

/// F = u, L = u^2/2: the linear equation.
LFPair linear_pair();

/// (F, F', L) with L scaled by `factor`; unverified.
LFPair scaled_L(const LFPair& pair, double factor);

struct GeneratorG {
  RealFn G;
  RealFn Gprime;
  std::optional<RealFn> Gsecond;
  std::optional<RealFn> Gprime_inverse;
};

/// F = G', L = G(F^{-1}). Without an explicit inverse G' is inverted
/// numerically on the sample hull. The result lives on real u only.
/// Throws NonInvertibleError if G' is not strictly monotone on the samples.
LFPair pair_from_G(const GeneratorG& gen, std::span<const double> u_samples,
                   std::string name = "generated");

struct PairCheck {
  double max_residual = 0.0;
  bool passed = false;
};

/// max |d^2/du^2 L(F(u)) - F'(u)| over real samples.
PairCheck verify_pair_relation(const LFPair& pair, std::span<const double> u_samples, double tol);

/// F[i(kx - wt)] with w = hbar k^2/2m unless overridden.
Complex general_plane_wave(const LFPair& pair, double k, const ModelParams& params, double t,
                           double x, std::optional<double> w = std::nullopt);

/// |i hbar d/dt psi + (hbar^2/2m) d^2/dx^2 L(psi)| for psi = general_plane_wave,
/// both derivatives by 5-point central differences with step 1e-4.
double generalized_residual(const LFPair& pair, double k, const ModelParams& params, double t,
                            double x, std::optional<double> w = std::nullopt);

struct UniquenessProbe {
  double r1 = 0.0;
  double r2 = 0.0;
  double F0 = 0.0;
  double F1 = 0.0;
  double residual = 0.0;  // max |d/du L(F) - (r1 + r2 u) F'| after the fit
};

/// Minimax fit of d/du L(F(u)) = (r1 + r2 u) F'(u) over at least 10 samples.
/// Throws DomainError for fewer samples or F' = 0 on a sample.
UniquenessProbe uniqueness_residual(const LFPair& pair, std::span<const double> u_samples);

/// n evenly spaced points on [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace nrt
