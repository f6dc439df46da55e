#pragma once

// Closed-form solution families of the NRT equation
//
//   i hbar d/dt psi = -(1/(2-q)) (hbar^2 / 2m) d^2/dx^2 psi^{2-q} [+ V(x) psi^q]
//
// with psi = Phi/Phi0 and Phi0 = 1. The q-Gaussian families are all of the
// form psi = [1 - (1-q)(a x^2 + b x + c)]^{1/(1-q)} with time dependent
// complex coefficients; the frozen and Gaussian-limit families are evaluated
// directly.

#include <optional>
#include <string_view>
#include <variant>

#include "nrt/qcalc.hpp"

namespace nrt {

struct ModelParams {
  double q = 1.0;
  double hbar = 1.0;
  double m = 1.0;
  double K = 1.0;  // spring constant, only read for the harmonic potential

  /// Throws DomainError unless hbar > 0, m > 0, K >= 0 and all are finite.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

enum class Potential { none, harmonic };

struct CoefficientState {
  double t = 0.0;
  Complex a{};
  Complex b{};
  Complex c{};
};

/// Time derivatives (da/dt, db/dt, dc/dt).
struct CoefficientRates {
  Complex da{};
  Complex db{};
  Complex dc{};
};

struct PacketConstants {
  Complex alpha{1.0, 0.0};
  Complex beta{};
  Complex gamma{};
};

/// Plane-wave mode obeying w = hbar k^2 / 2m, E = hbar w, p = hbar k.
struct PlaneWaveMode {
  double k = 0.0;
  double w = 0.0;
  double E = 0.0;
  double p = 0.0;

  static PlaneWaveMode from_wave_number(double k, const ModelParams& params);
};

namespace family {

struct FreeQGaussian {
  PacketConstants constants;
};
struct QPlaneWave {
  PlaneWaveMode mode;
};
/// a = 0, b = b_c real, c = -i hbar b_c^2 (t + t0) / 2m.
struct SingularPacket {
  double b_c = 1.0;
  double t0 = 1.0;
};
/// q = 3 solution; the model's q is ignored.
struct PulsatingQ3 {
  Complex a_c{1.0, 0.0};
  Complex b_c{};
  Complex c_1{};
};
/// psi = (b x + i c)^e with e = 1/(2-q) unless `exponent` overrides it.
/// The override exists for falsification probes only.
struct Frozen {
  double b = 1.0;
  double c = 1.0;
  std::optional<double> exponent;
};
/// Quasi-stationary packet in V = K x^2 / 2; a_c is fixed by (q, hbar, m, K).
struct HarmonicQuasiStationary {
  double a_c = 0.0;
};
/// Normalised Gaussian packet of the linear (q = 1) equation.
struct GaussianLimit {
  double k0 = 0.0;
  double alpha = 1.0;
};

}  // namespace family

using SolutionFamily =
    std::variant<family::FreeQGaussian, family::QPlaneWave, family::SingularPacket,
                 family::PulsatingQ3, family::Frozen, family::HarmonicQuasiStationary,
                 family::GaussianLimit>;

// ---------------------------------------------------------------------------
// Free q-Gaussian packet

/// alpha = 1/a0, beta = b0/a0 and gamma from c0. Throws DegenerateInitialError
/// for a0 = 0 and DomainError for q = 3. q = 1 uses the logarithmic limit.
PacketConstants constants_from_initial(Complex a0, Complex b0, Complex c0, double q);

/// Closed-form (a, b, c)(t). Fractional powers of (3-q) i hbar t/m + alpha are
/// continued from t = 0. Throws PathThroughOriginError at a coefficient pole.
CoefficientState free_coeffs(double t, const PacketConstants& constants, const ModelParams& params);

/// Time derivative of free_coeffs, differentiated in closed form.
CoefficientRates free_coeff_rates(double t, const PacketConstants& constants,
                                  const ModelParams& params);

/// Base polynomial P = 1 - (1-q)(a x^2 + b x + c).
Complex ansatz_base(const CoefficientState& state, double q, double x);

/// psi = P^{1/(1-q)} (principal), or exp(-(a x^2 + b x + c)) at q = 1.
Complex eval_ansatz(const CoefficientState& state, double q, double x);

// ---------------------------------------------------------------------------
// a = 0 families

/// a = 0, b = -i k, c = i hbar k^2 t / 2m: the q-plane wave.
CoefficientState plane_wave_coeffs(double k, double t, const ModelParams& params);

/// Throws SingularTimeError for t <= -t0.
CoefficientState singular_packet_coeffs(double b_c, double t0, double t, const ModelParams& params);

// ---------------------------------------------------------------------------
// q = 3, frozen, Gaussian and harmonic families

/// Coefficients of the pulsating family, to be used with q = 3.
CoefficientState q3_pulsating_coeffs(Complex a_c, Complex b_c, Complex c_1, double t,
                                     const ModelParams& params);

/// (1/sqrt 2) [a_c x^2 + b_c x + b_c^2/(4 a_c) + c_1 exp(2 i hbar a_c t/m)]^{-1/2}.
Complex q3_pulsating(Complex a_c, Complex b_c, Complex c_1, double t, double x,
                     const ModelParams& params);

/// (b x + i c)^{1/(2-q)}.
Complex frozen_psi(double b, double c, double q, double x);

Complex gaussian_limit_psi(double k0, double alpha, double t, double x, const ModelParams& params);

/// a_c = (1/hbar) sqrt(m K / (2 (3-q))). Throws DomainError unless K > 0 and q < 3.
double harmonic_critical_a(const ModelParams& params);

/// t_c = pi m / ((q-1) hbar a_c); infinite for q <= 1.
double harmonic_singular_time(const ModelParams& params);

CoefficientState harmonic_quasistationary_coeffs(double t, const ModelParams& params);

/// [exp(-i (1-q) hbar a_c t/m) - (1-q) a_c x^2]^{1/(1-q)}.
Complex harmonic_quasistationary(double t, double x, const ModelParams& params);

/// Linear oscillator ground state exp(-i w t/2) exp(-m w x^2/(2 hbar)), w = sqrt(K/m),
/// the q -> 1 limit of the quasi-stationary packet.
Complex harmonic_ground_state(double t, double x, const ModelParams& params);

// ---------------------------------------------------------------------------
// Family-level dispatch

std::string_view family_name(const SolutionFamily& family);

/// Effective q for the family (3 for PulsatingQ3, 1 for GaussianLimit).
double family_q(const SolutionFamily& family, const ModelParams& params);

Potential family_potential(const SolutionFamily& family);

/// Coefficients for the q-Gaussian families; nullopt for Frozen and GaussianLimit.
std::optional<CoefficientState> family_coeffs(const SolutionFamily& family, double t,
                                              const ModelParams& params);

/// Closed-form coefficient rates, same availability as family_coeffs.
std::optional<CoefficientRates> family_coeff_rates(const SolutionFamily& family, double t,
                                                   const ModelParams& params);

/// psi(x, t) for any family.
Complex evaluate(const SolutionFamily& family, const ModelParams& params, double t, double x);

/// Checks the family's parameter constraints against params. Throws DomainError
/// or DegenerateInputError naming the violated condition.
void validate_family(const SolutionFamily& family, const ModelParams& params);

}  // namespace nrt
