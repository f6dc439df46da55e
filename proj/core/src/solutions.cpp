#include "nrt/solutions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nrt/errors.hpp"

namespace nrt {
namespace {

constexpr Complex kI{0.0, 1.0};

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_q_three(double q) { return std::abs(q - 3.0) < 1e-12; }

void require_not_q_three(double q, const char* where) {
  if (is_q_three(q)) {
    throw DomainError(std::string(where) +
                      ": q = 3 has (3-q) denominators; use the pulsating-q3 family");
  }
}

// Exponent p = (1-q)/(3-q) of the free-packet powers.
double free_exponent(double q) { return (1.0 - q) / (3.0 - q); }

// (1 - exp(-p L)) / (1 - q), continuous through q = 1 where it equals L/(3-q).
Complex log_growth(Complex log_z, double q) {
  if (is_q_one(q)) return log_z / (3.0 - q);
  return -cexpm1(-free_exponent(q) * log_z) / (1.0 - q);
}

LinearPath free_path(const PacketConstants& constants, const ModelParams& params) {
  if (constants.alpha == Complex{}) {
    throw DegenerateInitialError("free packet: alpha = 1/a(0) must be nonzero");
  }
  const double speed = (3.0 - params.q) * params.hbar / params.m;
  return LinearPath(constants.alpha, Complex{0.0, speed});
}

Complex harmonic_phase_factor(double a_c, double t, const ModelParams& params) {
  const double phase = params.hbar * a_c * t / params.m;
  return std::polar(1.0, -(1.0 - params.q) * phase);
}

}  // namespace

void ModelParams::validate() const {
  if (!std::isfinite(q)) throw DomainError("q must be finite");
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw DomainError("hbar must be positive");
  if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("m must be positive");
  if (!(K >= 0.0) || !std::isfinite(K)) throw DomainError("K must be non-negative");
}

PlaneWaveMode PlaneWaveMode::from_wave_number(double k, const ModelParams& params) {
  PlaneWaveMode mode;
  mode.k = k;
  mode.w = params.hbar * k * k / (2.0 * params.m);
  mode.E = params.hbar * mode.w;
  mode.p = params.hbar * k;
  return mode;
}

PacketConstants constants_from_initial(Complex a0, Complex b0, Complex c0, double q) {
  if (a0 == Complex{}) {
    throw DegenerateInitialError("constants_from_initial: a(0) = 0, use the a = 0 families");
  }
  require_not_q_three(q, "constants_from_initial");
  PacketConstants k;
  k.alpha = 1.0 / a0;
  k.beta = b0 / a0;
  const Complex reduced_c = c0 - b0 * b0 / (4.0 * a0);
  const Complex log_alpha = principal_log(k.alpha);
  if (is_q_one(q)) {
    k.gamma = reduced_c - 0.5 * log_alpha;
  } else {
    const double p = free_exponent(q);
    k.gamma = guarded_exp(p * log_alpha) * reduced_c - cexpm1(p * log_alpha) / (1.0 - q);
  }
  return k;
}

CoefficientState free_coeffs(double t, const PacketConstants& constants,
                             const ModelParams& params) {
  require_not_q_three(params.q, "free_coeffs");
  const LinearPath path = free_path(constants, params);
  const Complex z = path.at(t);
  const Complex log_z = log_along_path(path, t);
  const double p = free_exponent(params.q);

  CoefficientState s;
  s.t = t;
  s.a = 1.0 / z;
  s.b = constants.beta / z;
  s.c = constants.gamma * guarded_exp(-p * log_z) + log_growth(log_z, params.q) +
        constants.beta * constants.beta / (4.0 * z);
  return s;
}

CoefficientRates free_coeff_rates(double t, const PacketConstants& constants,
                                  const ModelParams& params) {
  require_not_q_three(params.q, "free_coeff_rates");
  const LinearPath path = free_path(constants, params);
  const Complex z = path.at(t);
  const Complex dz = path.velocity();
  const Complex log_z = log_along_path(path, t);
  const double q = params.q;
  const double p = free_exponent(q);
  const Complex beta2 = constants.beta * constants.beta;

  CoefficientRates r;
  r.da = -dz / (z * z);
  r.db = -constants.beta * dz / (z * z);
  const Complex dc_dz =
      guarded_exp(-p * log_z) / z * (1.0 / (3.0 - q) - p * constants.gamma) - beta2 / (4.0 * z * z);
  r.dc = dz * dc_dz;
  return r;
}

Complex ansatz_base(const CoefficientState& state, double q, double x) {
  const Complex quad = (state.a * x + state.b) * x + state.c;
  return 1.0 - (1.0 - q) * quad;
}

Complex eval_ansatz(const CoefficientState& state, double q, double x) {
  if (is_q_one(q)) return guarded_exp(-((state.a * x + state.b) * x + state.c));
  return qpow_from_base(ansatz_base(state, q, x), 1.0 / (1.0 - q));
}

CoefficientState plane_wave_coeffs(double k, double t, const ModelParams& params) {
  const PlaneWaveMode mode = PlaneWaveMode::from_wave_number(k, params);
  return {t, Complex{}, Complex{0.0, -k}, Complex{0.0, mode.w * t}};
}

CoefficientState singular_packet_coeffs(double b_c, double t0, double t,
                                        const ModelParams& params) {
  if (!(t > -t0)) {
    throw SingularTimeError("singular packet: t = " + std::to_string(t) +
                            " is not after the singular time -t0 = " + std::to_string(-t0));
  }
  const double phase = params.hbar * b_c * b_c * (t + t0) / (2.0 * params.m);
  return {t, Complex{}, Complex{b_c, 0.0}, Complex{0.0, -phase}};
}

CoefficientState q3_pulsating_coeffs(Complex a_c, Complex b_c, Complex c_1, double t,
                                     const ModelParams& params) {
  if (a_c == Complex{}) throw DegenerateInputError("pulsating q=3: a_c must be nonzero");
  const Complex oscillation = guarded_exp(2.0 * kI * params.hbar * a_c * t / params.m);
  return {t, a_c, b_c, (b_c * b_c - 2.0 * a_c) / (4.0 * a_c) + c_1 * oscillation};
}

Complex q3_pulsating(Complex a_c, Complex b_c, Complex c_1, double t, double x,
                     const ModelParams& params) {
  if (a_c == Complex{}) throw DegenerateInputError("pulsating q=3: a_c must be nonzero");
  const Complex oscillation = guarded_exp(2.0 * kI * params.hbar * a_c * t / params.m);
  const Complex bracket = (a_c * x + b_c) * x + b_c * b_c / (4.0 * a_c) + c_1 * oscillation;
  return qpow_from_base(bracket, -0.5) / std::numbers::sqrt2;
}

Complex frozen_psi(double b, double c, double q, double x) {
  if (b == 0.0 || c == 0.0) throw DegenerateInputError("frozen: b and c must both be nonzero");
  if (std::abs(q - 2.0) < 1e-12) throw DomainError("frozen: exponent 1/(2-q) undefined at q = 2");
  return qpow_from_base(Complex{b * x, c}, 1.0 / (2.0 - q));
}

Complex gaussian_limit_psi(double k0, double alpha, double t, double x,
                           const ModelParams& params) {
  if (!(alpha > 0.0)) throw DomainError("gaussian limit: alpha must be positive");
  const double hbar = params.hbar;
  const double m = params.m;
  const double spread = 2.0 * hbar * t / m;
  const Complex z{alpha, spread};
  const double amplitude = std::pow(2.0 * alpha / std::numbers::pi / (spread * spread + alpha * alpha), 0.25);
  const double theta = 0.5 * std::atan2(spread, alpha);
  const double drift = x - hbar * k0 * t / m;
  const Complex phase = std::polar(1.0, -(theta + hbar * k0 * k0 * t / (2.0 * m)) + k0 * x);
  return amplitude * phase * guarded_exp(-drift * drift / z);
}

double harmonic_critical_a(const ModelParams& params) {
  if (!(params.K > 0.0)) throw DomainError("harmonic: K must be positive");
  if (!(params.q < 3.0)) throw DomainError("harmonic: q must be below 3 for a real a_c");
  return std::sqrt(params.m * params.K / (2.0 * (3.0 - params.q))) / params.hbar;
}

double harmonic_singular_time(const ModelParams& params) {
  if (params.q <= 1.0) return std::numeric_limits<double>::infinity();
  return std::numbers::pi * params.m / ((params.q - 1.0) * params.hbar * harmonic_critical_a(params));
}

namespace {

CoefficientState harmonic_coeffs_with(double a_c, double t, const ModelParams& params) {
  const double q = params.q;
  const double phase = params.hbar * a_c * t / params.m;
  const Complex c = is_q_one(q) ? Complex{0.0, phase}
                                : -cexpm1(Complex{0.0, -(1.0 - q) * phase}) / (1.0 - q);
  return {t, Complex{a_c, 0.0}, Complex{}, c};
}

CoefficientRates harmonic_rates_with(double a_c, double t, const ModelParams& params) {
  const double rate = params.hbar * a_c / params.m;
  return {Complex{}, Complex{}, kI * rate * harmonic_phase_factor(a_c, t, params)};
}

Complex harmonic_psi_with(double a_c, double t, double x, const ModelParams& params) {
  const double q = params.q;
  if (is_q_one(q)) return eval_ansatz(harmonic_coeffs_with(a_c, t, params), q, x);
  const Complex base = harmonic_phase_factor(a_c, t, params) - (1.0 - q) * a_c * x * x;
  return qpow_from_base(base, 1.0 / (1.0 - q));
}

}  // namespace

CoefficientState harmonic_quasistationary_coeffs(double t, const ModelParams& params) {
  return harmonic_coeffs_with(harmonic_critical_a(params), t, params);
}

Complex harmonic_quasistationary(double t, double x, const ModelParams& params) {
  return harmonic_psi_with(harmonic_critical_a(params), t, x, params);
}

Complex harmonic_ground_state(double t, double x, const ModelParams& params) {
  params.validate();
  if (!(params.K > 0.0)) throw DomainError("harmonic ground state: requires K > 0");
  const double omega = std::sqrt(params.K / params.m);
  return std::exp(Complex{-params.m * omega * x * x / (2.0 * params.hbar), -omega * t / 2.0});
}

std::string_view family_name(const SolutionFamily& family) {
  return std::visit(Overloaded{
                        [](const family::FreeQGaussian&) { return "free"; },
                        [](const family::QPlaneWave&) { return "plane-wave"; },
                        [](const family::SingularPacket&) { return "singular"; },
                        [](const family::PulsatingQ3&) { return "pulsating-q3"; },
                        [](const family::Frozen&) { return "frozen"; },
                        [](const family::HarmonicQuasiStationary&) { return "harmonic"; },
                        [](const family::GaussianLimit&) { return "gaussian"; },
                    },
                    family);
}

double family_q(const SolutionFamily& family, const ModelParams& params) {
  if (std::holds_alternative<family::PulsatingQ3>(family)) return 3.0;
  if (std::holds_alternative<family::GaussianLimit>(family)) return 1.0;
  return params.q;
}

Potential family_potential(const SolutionFamily& family) {
  return std::holds_alternative<family::HarmonicQuasiStationary>(family) ? Potential::harmonic
                                                                           : Potential::none;
}

std::optional<CoefficientState> family_coeffs(const SolutionFamily& family, double t,
                                              const ModelParams& params) {
  return std::visit(
      Overloaded{
          [&](const family::FreeQGaussian& f) -> std::optional<CoefficientState> {
            return free_coeffs(t, f.constants, params);
          },
          [&](const family::QPlaneWave& f) -> std::optional<CoefficientState> {
            return CoefficientState{t, Complex{}, Complex{0.0, -f.mode.k}, Complex{0.0, f.mode.w * t}};
          },
          [&](const family::SingularPacket& f) -> std::optional<CoefficientState> {
            return singular_packet_coeffs(f.b_c, f.t0, t, params);
          },
          [&](const family::PulsatingQ3& f) -> std::optional<CoefficientState> {
            return q3_pulsating_coeffs(f.a_c, f.b_c, f.c_1, t, params);
          },
          [&](const family::HarmonicQuasiStationary& f) -> std::optional<CoefficientState> {
            return harmonic_coeffs_with(f.a_c, t, params);
          },
          [](const auto&) -> std::optional<CoefficientState> { return std::nullopt; },
      },
      family);
}

std::optional<CoefficientRates> family_coeff_rates(const SolutionFamily& family, double t,
                                                   const ModelParams& params) {
  return std::visit(
      Overloaded{
          [&](const family::FreeQGaussian& f) -> std::optional<CoefficientRates> {
            return free_coeff_rates(t, f.constants, params);
          },
          [&](const family::QPlaneWave& f) -> std::optional<CoefficientRates> {
            return CoefficientRates{Complex{}, Complex{}, Complex{0.0, f.mode.w}};
          },
          [&](const family::SingularPacket& f) -> std::optional<CoefficientRates> {
            const double rate = params.hbar * f.b_c * f.b_c / (2.0 * params.m);
            return CoefficientRates{Complex{}, Complex{}, Complex{0.0, -rate}};
          },
          [&](const family::PulsatingQ3& f) -> std::optional<CoefficientRates> {
            const Complex omega = 2.0 * kI * params.hbar * f.a_c / params.m;
            return CoefficientRates{Complex{}, Complex{}, f.c_1 * omega * guarded_exp(omega * t)};
          },
          [&](const family::HarmonicQuasiStationary& f) -> std::optional<CoefficientRates> {
            return harmonic_rates_with(f.a_c, t, params);
          },
          [](const auto&) -> std::optional<CoefficientRates> { return std::nullopt; },
      },
      family);
}

Complex evaluate(const SolutionFamily& family, const ModelParams& params, double t, double x) {
  return std::visit(
      Overloaded{
          [&](const family::FreeQGaussian& f) {
            return eval_ansatz(free_coeffs(t, f.constants, params), params.q, x);
          },
          [&](const family::QPlaneWave& f) {
            return qexp(params.q, Complex{0.0, f.mode.k * x - f.mode.w * t});
          },
          [&](const family::SingularPacket& f) {
            return eval_ansatz(singular_packet_coeffs(f.b_c, f.t0, t, params), params.q, x);
          },
          [&](const family::PulsatingQ3& f) { return q3_pulsating(f.a_c, f.b_c, f.c_1, t, x, params); },
          [&](const family::Frozen& f) {
            if (!f.exponent) return frozen_psi(f.b, f.c, params.q, x);
            return qpow_from_base(Complex{f.b * x, f.c}, *f.exponent);
          },
          [&](const family::HarmonicQuasiStationary& f) { return harmonic_psi_with(f.a_c, t, x, params); },
          [&](const family::GaussianLimit& f) { return gaussian_limit_psi(f.k0, f.alpha, t, x, params); },
      },
      family);
}

void validate_family(const SolutionFamily& family, const ModelParams& params) {
  params.validate();
  std::visit(Overloaded{
                 [&](const family::FreeQGaussian& f) {
                   require_not_q_three(params.q, "free");
                   if (f.constants.alpha == Complex{}) throw DegenerateInitialError("free: alpha must be nonzero");
                 },
                 [](const family::QPlaneWave&) {},
                 [](const family::SingularPacket& f) {
                   if (f.b_c == 0.0) throw DegenerateInputError("singular: b_c must be nonzero");
                 },
                 [](const family::PulsatingQ3& f) {
                   if (f.a_c == Complex{}) throw DegenerateInputError("pulsating-q3: a_c must be nonzero");
                 },
                 [&](const family::Frozen& f) {
                   if (f.b == 0.0 || f.c == 0.0) throw DegenerateInputError("frozen: b and c must be nonzero");
                   if (!f.exponent && std::abs(params.q - 2.0) < 1e-12) {
                     throw DomainError("frozen: q = 2 is excluded");
                   }
                 },
                 [&](const family::HarmonicQuasiStationary& f) {
                   const double expected = harmonic_critical_a(params);
                   if (std::abs(f.a_c - expected) > 1e-12 * expected) {
                     throw DomainError("harmonic: a_c does not match sqrt(mK/(2(3-q)))/hbar");
                   }
                 },
                 [](const family::GaussianLimit& f) {
                   if (!(f.alpha > 0.0)) throw DomainError("gaussian: alpha must be positive");
                 },
             },
             family);
}

}  // namespace nrt
