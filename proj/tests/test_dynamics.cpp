#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nrt/dynamics.hpp"
#include "nrt/errors.hpp"

using nrt::Complex;
using doctest::Approx;
namespace fam = nrt::family;

namespace {

nrt::ModelParams with_q(double q) {
  nrt::ModelParams p;
  p.q = q;
  return p;
}

double coeff_distance(const nrt::CoefficientState& a, const nrt::CoefficientState& b) {
  return std::max({std::abs(a.a - b.a), std::abs(a.b - b.b), std::abs(a.c - b.c)});
}

}  // namespace

TEST_CASE("coefficient flow right-hand side") {
  const auto p = with_q(2.0);
  auto r = nrt::coeff_rhs({}, p, nrt::Potential::none);
  CHECK(r.da == Complex{});
  CHECK(r.db == Complex{});
  CHECK(r.dc == Complex{});
  // a = 0 is invariant: a' = b' = 0 and i c' = hbar b^2 / 2m
  const double k = 1.7;
  r = nrt::coeff_rhs({0.0, {}, {0.0, -k}, {0.3, 0.2}}, p, nrt::Potential::none);
  CHECK(r.da == Complex{});
  CHECK(r.db == Complex{});
  CHECK(std::abs(r.dc - Complex{0.0, k * k / 2}) < 1e-15);
  // harmonic fixed point
  auto ph = with_q(1.5);
  ph.K = 2.0;
  const double ac = nrt::harmonic_critical_a(ph);
  r = nrt::coeff_rhs({0.0, {ac, 0.0}, {}, {}}, ph, nrt::Potential::harmonic);
  CHECK(std::abs(r.da) < 1e-15);
}

TEST_CASE("ODE integration reproduces the free closed form") {
  const auto p = with_q(2.0);
  const nrt::CoefficientState start{0.0, {1, 0}, {1, 0}, {1, 0}};
  const auto k = nrt::constants_from_initial(start.a, start.b, start.c, 2.0);
  const auto traj = nrt::integrate_coeffs(start, 2.0, p, nrt::Potential::none, 1e-10);
  CHECK(traj.samples.back().t == 2.0);
  CHECK(coeff_distance(traj.samples.back(), nrt::free_coeffs(2.0, k, p)) < 1e-8);
  for (std::size_t i = 1; i < traj.samples.size(); ++i) CHECK(traj.samples[i].t > traj.samples[i - 1].t);

  const auto back = nrt::integrate_coeffs(start, -1.0, p, nrt::Potential::none, 1e-10);
  CHECK(coeff_distance(back.samples.back(), nrt::free_coeffs(-1.0, k, p)) < 1e-8);
  CHECK_THROWS_AS(nrt::integrate_coeffs(start, 1.0, p, nrt::Potential::none, 0.0), nrt::DomainError);
}

TEST_CASE("closed forms agree with the ODE for every coefficient family") {
  auto p = with_q(2.0);
  p.K = 1.0;
  const std::vector<std::pair<nrt::SolutionFamily, double>> cases = {
      {fam::FreeQGaussian{{{0.8, 0.4}, {0.2, -0.3}, {0.5, 0.1}}}, 2.0},
      {fam::QPlaneWave{nrt::PlaneWaveMode::from_wave_number(1.3, p)}, 3.0},
      {fam::SingularPacket{1.2, 0.5}, 3.0},
      {fam::PulsatingQ3{{1, 0.2}, {0.3, 0.1}, {0.2, -0.1}}, 3.0},
      {fam::HarmonicQuasiStationary{nrt::harmonic_critical_a(p)}, 3.0},
  };
  for (const auto& [family, horizon] : cases) {
    CAPTURE(nrt::family_name(family));
    auto fp = p;
    fp.q = nrt::family_q(family, p);
    const auto start = *nrt::family_coeffs(family, 0.0, p);
    const auto traj = nrt::integrate_coeffs(start, horizon, fp, nrt::family_potential(family), 1e-10);
    double worst = 0.0;
    for (const auto& s : traj.samples) {
      worst = std::max(worst, coeff_distance(s, *nrt::family_coeffs(family, s.t, p)));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("harmonic fixed point is preserved by the integrator") {
  const auto p = with_q(2.0);
  const double ac = nrt::harmonic_critical_a(p);
  const double period = 2.0 * nrt::harmonic_singular_time(p);
  const auto traj = nrt::integrate_coeffs({0.0, {ac, 0.0}, {}, {}}, period, p, nrt::Potential::harmonic, 1e-10);
  double worst = 0.0;
  for (const auto& s : traj.samples) worst = std::max(worst, std::abs(s.a - ac));
  CHECK(worst < 1e-9);
}

TEST_CASE("stiffness detection at the coefficient pole") {
  // a(0) = i gives alpha = -i, and (3-q) i t + alpha = 0 at t = 1 for q = 2.
  const auto p = with_q(2.0);
  bool thrown = false;
  try {
    nrt::integrate_coeffs({0.0, {0, 1}, {}, {}}, 2.0, p, nrt::Potential::none, 1e-10);
  } catch (const nrt::StiffnessError& e) {
    thrown = true;
    CHECK(e.time() == Approx(1.0).epsilon(1e-3));
  }
  CHECK(thrown);
  // a(0) = 1 / (pole at t = 2.5 for q = 1.4)
  const auto p2 = with_q(1.4);
  const double t_pole = 2.5;
  const Complex a0 = 1.0 / Complex{0.0, -(3.0 - 1.4) * t_pole};
  try {
    nrt::integrate_coeffs({0.0, a0, {}, {}}, 5.0, p2, nrt::Potential::none, 1e-10);
    CHECK(false);
  } catch (const nrt::StiffnessError& e) {
    CHECK(e.time() == Approx(t_pole).epsilon(1e-3));
  }
}

TEST_CASE("implicit harmonic constant") {
  const auto p = with_q(2.0);
  const double ac = nrt::harmonic_critical_a(p);
  const auto traj =
      nrt::integrate_coeffs({0.0, {0.5 * ac, 0.0}, {}, {}}, 1.5, p, nrt::Potential::harmonic, 1e-12);
  const auto good = nrt::harmonic_delta_check(traj, p);
  CHECK(good.max_deviation < 1e-6);

  auto noisy = traj;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  for (auto& s : noisy.samples) s.a += Complex{u(rng), u(rng)};
  CHECK(nrt::harmonic_delta_check(noisy, p).max_deviation > 1e-3);

  const auto fixed = nrt::integrate_coeffs({0.0, {ac, 0.0}, {}, {}}, 0.5, p, nrt::Potential::harmonic, 1e-10);
  CHECK_THROWS_AS(nrt::harmonic_delta_check(fixed, p), nrt::DegenerateInputError);
}

TEST_CASE("residual oracle") {
  const auto p = with_q(2.0);
  const nrt::SolutionFamily fig1 = fam::FreeQGaussian{{{1, 0}, {1, 0}, {1, 0}}};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(-10, 10), ut(0, 2);
  for (int i = 0; i < 25; ++i) {
    const double x = ux(rng), t = ut(rng);
    CHECK(nrt::nrt_residual(fig1, p, nrt::Potential::none, x, t) < 1e-8);
    CHECK(nrt::nrt_residual(fig1, p, nrt::Potential::none, x, t, nrt::DerivativeMode::finite_difference) < 1e-4);
  }
  const auto p15 = with_q(1.5);
  const nrt::SolutionFamily wave = fam::QPlaneWave{nrt::PlaneWaveMode::from_wave_number(1.0, p15)};
  for (double x : {-3.0, 0.0, 2.5}) CHECK(nrt::nrt_residual(wave, p15, nrt::Potential::none, x, 0.7) < 1e-8);

  // negative controls
  const auto p3 = with_q(3.0);
  const nrt::SolutionFamily wrong = fam::Frozen{1.0, 1.0, 1.0 / (1.0 - 3.0)};
  CHECK(nrt::nrt_residual(wrong, p3, nrt::Potential::none, 0.7, 0.0) > 1e-2);
  auto off = nrt::PlaneWaveMode::from_wave_number(1.0, p15);
  off.w *= 1.01;
  CHECK(nrt::nrt_residual(fam::QPlaneWave{off}, p15, nrt::Potential::none, 0.4, 0.3) > 1e-4);
  CHECK(nrt::nrt_residual(fig1, p, nrt::Potential::harmonic, 0.5, 0.5) > 1e-2);
}

TEST_CASE("PDE: zero field is a fixed point") {
  for (double q : {1.0, 0.5}) {
    nrt::FieldState zero{{-5.0, 5.0, 101}, std::vector<Complex>(101), 0.0};
    const double h = zero.grid.spacing();
    const auto out = nrt::evolve_pde(zero, with_q(q), nrt::Potential::none, 0.05, 0.1 * h * h * 2.0);
    // psi^{2-q} is shifted by a constant, whose discrete Laplacian rounds to ~1e-16
    for (const auto& v : out.psi) CHECK(std::abs(v) <= (q == 1.0 ? 0.0 : 1e-14));
    CHECK(out.t == 0.05);
  }
}

TEST_CASE("PDE: linear Gaussian packet and fourth-order convergence") {
  const auto p = with_q(1.0);
  const nrt::SolutionFamily g = fam::GaussianLimit{1.0, 1.0};
  std::vector<double> errors;
  for (std::size_t n : {151u, 301u, 601u}) {
    const nrt::UniformGrid grid{-15.0, 15.0, n};
    const double h = grid.spacing();
    // fixed time step so the spatial error dominates
    const double dt = 0.1 * 0.05 * 0.05 * 2.0 / 4.0;
    CHECK(dt <= 0.1 * h * h * 2.0);
    const auto out = nrt::evolve_pde(nrt::sample_field(g, p, grid, 0.0), p, nrt::Potential::none, 0.1, dt);
    errors.push_back(nrt::relative_l2_error(out.psi, nrt::sample_field(g, p, grid, 0.1).psi));
  }
  const double slope1 = std::log2(errors[0] / errors[1]);
  const double slope2 = std::log2(errors[1] / errors[2]);
  CAPTURE(errors[0]);
  CAPTURE(errors[1]);
  CAPTURE(errors[2]);
  CHECK(0.5 * (slope1 + slope2) == Approx(4.0).epsilon(0.3 / 4.0));
}

TEST_CASE("PDE: input validation") {
  const auto p = with_q(1.0);
  const nrt::SolutionFamily g = fam::GaussianLimit{0.0, 1.0};
  const nrt::UniformGrid grid{-15.0, 15.0, 301};
  const auto field = nrt::sample_field(g, p, grid, 0.0);
  const double limit = 0.1 * grid.spacing() * grid.spacing() * 2.0;
  CHECK_THROWS_AS(nrt::evolve_pde(field, p, nrt::Potential::none, 0.01, 2.0 * limit), nrt::DomainError);
  CHECK_THROWS_AS(nrt::evolve_pde(field, p, nrt::Potential::none, -1.0, limit), nrt::DomainError);
  const auto narrow = nrt::sample_field(g, p, {-1.0, 1.0, 41}, 0.0);
  CHECK_THROWS_AS(nrt::evolve_pde(narrow, p, nrt::Potential::none, 0.01, 1e-5), nrt::DomainError);
  CHECK_THROWS_AS(nrt::relative_l2_error(field.psi, narrow.psi), nrt::DomainError);
}

TEST_CASE("PDE: harmonic packet keeps its shape for a short time") {
  auto p = with_q(1.0);
  p.K = 1.0;
  const nrt::UniformGrid grid{-12.0, 12.0, 481};
  nrt::FieldState start{grid, {}, 0.0};
  for (std::size_t i = 0; i < grid.n; ++i) start.psi.push_back(nrt::harmonic_ground_state(0.0, grid.x(i), p));
  const double h = grid.spacing();
  const auto out = nrt::evolve_pde(start, p, nrt::Potential::harmonic, 0.2, 0.1 * h * h * 2.0);
  std::vector<Complex> exact;
  for (std::size_t i = 0; i < grid.n; ++i) exact.push_back(nrt::harmonic_ground_state(0.2, grid.x(i), p));
  CHECK(nrt::relative_l2_error(out.psi, exact) < 1e-6);
}
