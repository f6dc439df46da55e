#include "nrt/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "nrt/errors.hpp"

namespace nrt {
namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kTimeStep = 1e-5;   // finite-difference step in t
constexpr double kSpaceStep = 1e-3;  // finite-difference step in x

using Vec3 = std::array<Complex, 3>;

Vec3 to_vec(const CoefficientState& s) { return {s.a, s.b, s.c}; }
Vec3 to_vec(const CoefficientRates& r) { return {r.da, r.db, r.dc}; }

Vec3 axpy(const Vec3& y, double h, std::initializer_list<std::pair<double, const Vec3*>> terms) {
  Vec3 out = y;
  for (const auto& [w, k] : terms) {
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < 3; ++i) out[i] += h * w * (*k)[i];
  }
  return out;
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double potential_at(Potential potential, const ModelParams& params, double x) {
  return potential == Potential::harmonic ? 0.5 * params.K * x * x : 0.0;
}

// 5-point central stencils.
template <class F>
Complex first_derivative(F&& f, double x, double h) {
  return (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
}

template <class F>
Complex second_derivative(F&& f, double x, double h) {
  return (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) /
         (12.0 * h * h);
}

// psi^{2-q}/(2-q) up to an additive constant, from log psi. Continuous in q
// through q = 2, where it becomes log psi.
Complex nonlinear_potential(Complex log_psi, double q) {
  if (std::abs(2.0 - q) < 1e-12) return log_psi;
  return cexpm1((2.0 - q) * log_psi) / (2.0 - q);
}

// Residual for psi = P^{1/(1-q)}, P = 1 - (1-q)(a x^2 + b x + c), using the
// chain rule on P with all powers taken from a single logarithm of P.
double ansatz_residual(const CoefficientState& s, const CoefficientRates& r, double q,
                       const ModelParams& params, Potential potential, double x) {
  const double hbar = params.hbar;
  const double kinetic = hbar * hbar / (2.0 * params.m);
  const double v = potential_at(potential, params, x);
  const Complex quad = (s.a * x + s.b) * x + s.c;
  const Complex dquad_dx = 2.0 * s.a * x + s.b;
  const Complex d2quad_dx2 = 2.0 * s.a;
  const Complex dquad_dt = (r.da * x + r.db) * x + r.dc;

  if (is_q_one(q)) {
    const Complex psi = guarded_exp(-quad);
    const Complex lhs = kI * hbar * (-dquad_dt) * psi;
    const Complex d2psi = (dquad_dx * dquad_dx - d2quad_dx2) * psi;
    return std::abs(lhs - (-kinetic * d2psi + v * psi));
  }

  const double one_minus_q = 1.0 - q;
  const Complex base = 1.0 - one_minus_q * quad;
  if (base == Complex{}) throw BranchPointError("nrt_residual: base polynomial vanishes");
  const Complex log_base = principal_log(base);
  const Complex dbase_dx = -one_minus_q * dquad_dx;
  const Complex d2base_dx2 = -one_minus_q * d2quad_dx2;
  const Complex dbase_dt = -one_minus_q * dquad_dt;

  const Complex psi = guarded_exp(log_base / one_minus_q);
  const Complex psi_q = guarded_exp(q / one_minus_q * log_base);
  const Complex lhs = kI * hbar * psi * dbase_dt / (base * one_minus_q);

  const double r_exp = (2.0 - q) / one_minus_q;
  const Complex dlog = dbase_dx / base;
  const Complex d2log = d2base_dx2 / base - dlog * dlog;
  // (1/(2-q)) d^2/dx^2 P^{r}, finite at q = 2.
  const Complex nonlinear = guarded_exp(r_exp * log_base) * (r_exp * dlog * dlog + d2log) / one_minus_q;
  return std::abs(lhs - (-kinetic * nonlinear + v * psi_q));
}

double frozen_exponent(const family::Frozen& f, double q) {
  return f.exponent ? *f.exponent : 1.0 / (2.0 - q);
}

Complex time_derivative(const SolutionFamily& family, const ModelParams& params, double t, double x) {
  return first_derivative([&](double tt) { return evaluate(family, params, tt, x); }, t, kTimeStep);
}

// log psi along the same branch the family uses for its powers.
Complex log_psi(const SolutionFamily& family, const ModelParams& params, double t, double x) {
  const double q = family_q(family, params);
  if (const auto state = family_coeffs(family, t, params)) {
    if (is_q_one(q)) return -((state->a * x + state->b) * x + state->c);
    const Complex base = ansatz_base(*state, q, x);
    if (base == Complex{}) throw BranchPointError("nrt_residual: base polynomial vanishes");
    return principal_log(base) / (1.0 - q);
  }
  if (const auto* f = std::get_if<family::Frozen>(&family)) {
    return frozen_exponent(*f, q) * principal_log(Complex{f->b * x, f->c});
  }
  const Complex psi = evaluate(family, params, t, x);
  if (psi == Complex{}) throw BranchPointError("nrt_residual: psi vanishes");
  return principal_log(psi);
}

double fd_residual(const SolutionFamily& family, const ModelParams& params, Potential potential,
                   double x, double t) {
  const double q = family_q(family, params);
  const double kinetic = params.hbar * params.hbar / (2.0 * params.m);
  const Complex lhs = kI * params.hbar * time_derivative(family, params, t, x);
  const auto phi = [&](double xx) {
    const Complex lp = log_psi(family, params, t, xx);
    return is_q_one(q) ? guarded_exp(lp) : nonlinear_potential(lp, q);
  };
  const Complex nonlinear = second_derivative(phi, x, kSpaceStep);
  const Complex psi_q = guarded_exp(q * log_psi(family, params, t, x));
  return std::abs(lhs - (-kinetic * nonlinear + potential_at(potential, params, x) * psi_q));
}

}  // namespace

CoefficientRates coeff_rhs(const CoefficientState& s, const ModelParams& params,
                           Potential potential) {
  const double q = params.q;
  const double rate = params.hbar / params.m;
  Complex ia = rate * (3.0 - q) * s.a * s.a;
  if (potential == Potential::harmonic) ia -= params.K / (2.0 * params.hbar);
  const Complex ib = rate * (3.0 - q) * s.a * s.b;
  const Complex ic = rate * ((1.0 - q) * s.a * s.c - s.a + 0.5 * s.b * s.b);
  // i y' = f  =>  y' = -i f
  return {-kI * ia, -kI * ib, -kI * ic};
}

CoefficientTrajectory integrate_coeffs(const CoefficientState& initial, double t_end,
                                       const ModelParams& params, Potential potential, double tol,
                                       const IntegratorOptions& options) {
  if (!(tol > 0.0)) throw DomainError("integrate_coeffs: tol must be positive");
  params.validate();

  // Dormand-Prince 5(4) tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const auto f = [&](double t, const Vec3& y) {
    return to_vec(coeff_rhs({t, y[0], y[1], y[2]}, params, potential));
  };

  CoefficientTrajectory traj;
  traj.samples.push_back(initial);
  double t = initial.t;
  const double direction = t_end >= t ? 1.0 : -1.0;
  if (t == t_end) return traj;

  Vec3 y = to_vec(initial);
  double h = std::min(options.initial_step, std::abs(t_end - t));
  Vec3 k1 = f(t, y);

  while (direction * (t_end - t) > 0.0) {
    if (traj.steps + traj.rejected >= options.max_steps) {
      throw StiffnessError("integrate_coeffs: step budget exhausted", t);
    }
    if (options.max_step > 0.0) h = std::min(h, options.max_step);
    bool last = false;
    if (h >= std::abs(t_end - t)) {
      h = std::abs(t_end - t);
      last = true;
    }
    const double hs = direction * h;

    const Vec3 k2 = f(t + c2 * hs, axpy(y, hs, {{a21, &k1}}));
    const Vec3 k3 = f(t + c3 * hs, axpy(y, hs, {{a31, &k1}, {a32, &k2}}));
    const Vec3 k4 = f(t + c4 * hs, axpy(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec3 k5 = f(t + c5 * hs, axpy(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vec3 k6 =
        f(t + hs, axpy(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const Vec3 y_new = axpy(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const Vec3 k7 = f(t + hs, y_new);

    double err = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < 3; ++i) {
      if (!finite(y_new[i])) ok = false;
      const Complex e =
          hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = tol * (1.0 + std::max(std::abs(y[i]), std::abs(y_new[i])));
      err = std::max(err, std::abs(e) / scale);
    }
    if (!ok || !std::isfinite(err)) err = std::numeric_limits<double>::infinity();

    if (err <= 1.0) {
      t = last ? t_end : t + hs;
      y = y_new;
      k1 = k7;
      ++traj.steps;
      traj.max_local_error = std::max(traj.max_local_error, err);
      traj.samples.push_back({t, y[0], y[1], y[2]});
      const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= grow;
    } else {
      ++traj.rejected;
      const double shrink = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
      h *= shrink;
    }
    if (h < options.dt_min && direction * (t_end - t) > 0.0) {
      throw StiffnessError("integrate_coeffs: step size collapsed below dt_min at t = " +
                               std::to_string(t),
                           t);
    }
  }
  return traj;
}

ImplicitHarmonicConstant harmonic_delta_check(const CoefficientTrajectory& trajectory,
                                              const ModelParams& params) {
  if (trajectory.samples.empty()) throw DomainError("harmonic_delta_check: empty trajectory");
  if (!(params.K > 0.0) || !(params.q < 3.0)) {
    throw DomainError("harmonic_delta_check: needs K > 0 and q < 3");
  }
  const double hbar = params.hbar;
  const double m = params.m;
  const double q = params.q;
  const double kappa = std::sqrt(m * params.K / (2.0 * hbar * hbar * (3.0 - q)));
  const double prefactor = m / (hbar * (3.0 - q)) / (2.0 * kappa);

  ImplicitHarmonicConstant out;
  Complex previous_ratio{};
  double theta = 0.0;
  bool first = true;
  for (const auto& s : trajectory.samples) {
    const Complex up = kappa + s.a;
    const Complex down = kappa - s.a;
    if (std::abs(up) <= 1e-12 * kappa || std::abs(down) <= 1e-12 * kappa) {
      throw DegenerateInputError("harmonic_delta_check: a(t) sits on the fixed point +-kappa");
    }
    const Complex ratio = up / down;
    theta = first ? principal_arg(ratio) : theta + std::arg(ratio * std::conj(previous_ratio));
    previous_ratio = ratio;
    const Complex value = prefactor * Complex{std::log(std::abs(ratio)), theta} - kI * s.t;
    if (first) {
      out.delta = value;
      first = false;
    }
    out.max_deviation = std::max(out.max_deviation, std::abs(value - out.delta));
  }
  return out;
}

double nrt_residual(const SolutionFamily& family, const ModelParams& params, Potential potential,
                    double x, double t, DerivativeMode mode) {
  if (mode == DerivativeMode::finite_difference) return fd_residual(family, params, potential, x, t);

  const double q = family_q(family, params);
  if (const auto state = family_coeffs(family, t, params)) {
    const auto rates = family_coeff_rates(family, t, params);
    return ansatz_residual(*state, *rates, q, params, potential, x);
  }

  const double kinetic = params.hbar * params.hbar / (2.0 * params.m);
  const double v = potential_at(potential, params, x);
  const Complex lhs = kI * params.hbar * time_derivative(family, params, t, x);

  if (const auto* f = std::get_if<family::Frozen>(&family)) {
    const double e = frozen_exponent(*f, q);
    const Complex base{f->b * x, f->c};
    const Complex log_base = principal_log(base);
    const double s = (2.0 - q) * e;
    const Complex nonlinear = guarded_exp(s * log_base) * e * (s - 1.0) * f->b * f->b / (base * base);
    const Complex psi_q = guarded_exp(q * e * log_base);
    return std::abs(lhs - (-kinetic * nonlinear + v * psi_q));
  }

  const auto& g = std::get<family::GaussianLimit>(family);
  const Complex psi = gaussian_limit_psi(g.k0, g.alpha, t, x, params);
  const Complex z{g.alpha, 2.0 * params.hbar * t / params.m};
  const Complex dexp = kI * g.k0 - 2.0 * (x - params.hbar * g.k0 * t / params.m) / z;
  const Complex d2psi = (dexp * dexp - 2.0 / z) * psi;
  return std::abs(lhs - (-kinetic * d2psi + v * psi));
}

FieldState sample_field(const SolutionFamily& family, const ModelParams& params,
                        const UniformGrid& grid, double t) {
  FieldState field{grid, {}, t};
  field.psi.reserve(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) field.psi.push_back(evaluate(family, params, t, grid.x(i)));
  return field;
}

namespace {

struct PdeOperator {
  const ModelParams& params;
  Potential potential;
  const UniformGrid& grid;
  std::vector<double> v;
  mutable std::vector<Complex> phi;

  Complex power_q(Complex psi) const {
    const double q = params.q;
    if (is_q_one(q)) return psi;
    if (psi == Complex{}) return Complex{};
    return guarded_exp(q * principal_log(psi));
  }

  Complex nonlinear_node(Complex psi) const {
    const double q = params.q;
    if (is_q_one(q)) return psi;
    if (psi == Complex{}) {
      if (q < 2.0) return Complex{-1.0 / (2.0 - q), 0.0};
      throw StabilityError("evolve_pde: psi vanished at a node where psi^{2-q} is singular");
    }
    return nonlinear_potential(principal_log(psi), q);
  }

  void apply(const std::vector<Complex>& psi, std::vector<Complex>& out) const {
    const std::size_t n = psi.size();
    for (std::size_t i = 0; i < n; ++i) phi[i] = nonlinear_node(psi[i]);
    const double h = grid.spacing();
    const Complex kinetic = kI * params.hbar / (2.0 * params.m) / (12.0 * h * h);
    std::fill(out.begin(), out.end(), Complex{});
    for (std::size_t i = 2; i + 2 < n; ++i) {
      const Complex lap = -phi[i - 2] + 16.0 * phi[i - 1] - 30.0 * phi[i] + 16.0 * phi[i + 1] - phi[i + 2];
      out[i] = kinetic * lap;
      if (potential == Potential::harmonic) out[i] -= kI / params.hbar * v[i] * power_q(psi[i]);
    }
  }

  // Largest stable step for the current field.
  double step_limit(const std::vector<Complex>& psi, double factor) const {
    const double h = grid.spacing();
    const double q = params.q;
    double stiffness = 1.0;
    double potential_rate = 0.0;
    for (std::size_t i = 2; i + 2 < psi.size(); ++i) {
      const double mag = std::abs(psi[i]);
      const double local = is_q_one(q) ? 1.0 : std::pow(mag, 1.0 - q);
      stiffness = std::max(stiffness, local);
      if (potential == Potential::harmonic) {
        const double qpow = is_q_one(q) ? 1.0 : std::pow(mag, q - 1.0);
        potential_rate = std::max(potential_rate, std::abs(q) * v[i] * qpow / params.hbar);
      }
    }
    if (!std::isfinite(stiffness)) {
      throw StabilityError("evolve_pde: nonlinear stiffness is unbounded (psi vanished at a node)");
    }
    double limit = factor * h * h * 2.0 * params.m / params.hbar / stiffness;
    if (potential_rate > 0.0) limit = std::min(limit, 1.0 / potential_rate);
    return limit;
  }
};

}  // namespace

FieldState evolve_pde(const FieldState& initial, const ModelParams& params, Potential potential,
                      double t_end, double dt, const PdeOptions& options, PdeStats* stats) {
  params.validate();
  const UniformGrid& grid = initial.grid;
  if (grid.n < 5 || initial.psi.size() != grid.n || !(grid.x_max > grid.x_min)) {
    throw DomainError("evolve_pde: grid needs at least 5 nodes matching psi");
  }
  if (!(t_end >= initial.t)) throw DomainError("evolve_pde: t_end precedes the initial time");
  const double h = grid.spacing();
  const double dt_rule = options.stability_factor * h * h * 2.0 * params.m / params.hbar;
  if (!(dt > 0.0) || dt > dt_rule * (1.0 + 1e-12)) {
    throw DomainError("evolve_pde: dt must lie in (0, " + std::to_string(dt_rule) + "]");
  }
  if (std::abs(initial.psi.front()) >= options.boundary_eps ||
      std::abs(initial.psi.back()) >= options.boundary_eps) {
    throw DomainError("evolve_pde: boundary |psi| exceeds boundary_eps; enlarge the domain");
  }

  PdeOperator op{params, potential, grid, std::vector<double>(grid.n), std::vector<Complex>(grid.n)};
  for (std::size_t i = 0; i < grid.n; ++i) op.v[i] = potential_at(potential, params, grid.x(i));

  FieldState state = initial;
  const std::size_t edge[4] = {0, 1, grid.n - 2, grid.n - 1};
  std::vector<Complex> k1(grid.n), k2(grid.n), k3(grid.n), k4(grid.n), tmp(grid.n);
  PdeStats local_stats;
  local_stats.smallest_step = dt;

  while (state.t < t_end) {
    double step = std::min({dt, op.step_limit(state.psi, options.stability_factor), t_end - state.t});
    // Avoid a sliver of a final step.
    if (t_end - (state.t + step) < 1e-14 * std::max(1.0, t_end)) step = t_end - state.t;
    auto& psi = state.psi;

    op.apply(psi, k1);
    // Prescribed boundary data enters as a constant slope over the step.
    const auto drive = [&](std::vector<Complex>& k) {
      if (!options.boundary) return;
      for (std::size_t i : edge) {
        k[i] = (options.boundary(grid.x(i), state.t + step) - psi[i]) / step;
      }
    };
    drive(k1);
    for (std::size_t i = 0; i < grid.n; ++i) tmp[i] = psi[i] + 0.5 * step * k1[i];
    op.apply(tmp, k2);
    drive(k2);
    for (std::size_t i = 0; i < grid.n; ++i) tmp[i] = psi[i] + 0.5 * step * k2[i];
    op.apply(tmp, k3);
    drive(k3);
    for (std::size_t i = 0; i < grid.n; ++i) tmp[i] = psi[i] + step * k3[i];
    op.apply(tmp, k4);
    drive(k4);
    for (std::size_t i = 0; i < grid.n; ++i) {
      psi[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!finite(psi[i]) || std::abs(psi[i]) > options.blowup_limit) {
        throw StabilityError("evolve_pde: field blew up at x = " + std::to_string(grid.x(i)) +
                             ", t = " + std::to_string(state.t + step));
      }
    }
    state.t = (t_end - state.t - step <= 0.0) ? t_end : state.t + step;
    ++local_stats.steps;
    local_stats.smallest_step = std::min(local_stats.smallest_step, step);
  }
  if (stats != nullptr) *stats = local_stats;
  return state;
}

double relative_l2_error(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw DomainError("relative_l2_error: size mismatch");
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += std::norm(a[i] - b[i]);
    ref += std::norm(b[i]);
  }
  if (ref == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(diff / ref);
}

}  // namespace nrt
