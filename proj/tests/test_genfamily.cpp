#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nrt/errors.hpp"
#include "nrt/genfamily.hpp"

using nrt::Complex;
using doctest::Approx;

namespace {

nrt::ModelParams with_q(double q) {
  nrt::ModelParams p;
  p.q = q;
  return p;
}

}  // namespace

TEST_CASE("functional relation for the built-in pairs") {
  const auto nrt15 = nrt::nrt_pair(1.5);
  CHECK(nrt::verify_pair_relation(nrt15, nrt::linspace(-0.4, 0.4, 41), 1e-6).passed);
  const auto sinh = nrt::sinh_pair();
  const auto check = nrt::verify_pair_relation(sinh, nrt::linspace(-2.0, 2.0, 81), 1e-6);
  CHECK(check.passed);
  CHECK(check.max_residual < 1e-6);
  CHECK(nrt::verify_pair_relation(nrt::linear_pair(), nrt::linspace(-3.0, 3.0, 31), 1e-10).passed);
  for (double q : {0.5, 1.0, 2.0, 3.0, 4.5}) {
    CAPTURE(q);
    const auto pair = nrt::nrt_pair(q);
    CHECK(nrt::verify_pair_relation(pair, nrt::linspace(pair.u_min(), pair.u_max(), 21), 1e-6).passed);
  }
}

TEST_CASE("corrupted pair fails the relation") {
  const auto bad = nrt::scaled_L(nrt::sinh_pair(), 1.01);
  const auto check = nrt::verify_pair_relation(bad, nrt::linspace(-2.0, 2.0, 81), 1e-6);
  CHECK_FALSE(check.passed);
  CHECK(check.max_residual > 1e-3);
  nrt::PairFunctions broken = nrt::sinh_pair().functions();
  broken.L = [](Complex v) { return 1.01 * std::sqrt(1.0 + v * v); };
  broken.Lprime = nullptr;
  broken.Lsecond = nullptr;
  CHECK_THROWS_AS(nrt::LFPair(broken, "broken", -2.0, 2.0), nrt::DomainError);
}

TEST_CASE("pairs generated from G") {
  const auto us = nrt::linspace(-1.5, 1.5, 31);
  // G = u^2/2: the linear equation
  const nrt::GeneratorG quad{[](double u) { return 0.5 * u * u; }, [](double u) { return u; }, {}, {}};
  const auto lin = nrt::pair_from_G(quad, us, "quadratic");
  for (double u : {-1.0, 0.2, 1.3}) {
    CHECK(lin.F(u).real() == Approx(u));
    CHECK(lin.L(u).real() == Approx(0.5 * u * u).epsilon(1e-10));
  }

  // G = cosh: F = sinh, L = sqrt(1 + u^2)
  const nrt::GeneratorG cosh_gen{[](double u) { return std::cosh(u); }, [](double u) { return std::sinh(u); },
                                 {}, {}};
  const auto gen = nrt::pair_from_G(cosh_gen, nrt::linspace(-2.0, 2.0, 41), "cosh");
  for (double v : {-3.0, -0.5, 0.0, 1.7}) CHECK(gen.L(v).real() == Approx(std::sqrt(1.0 + v * v)).epsilon(1e-10));
  CHECK(nrt::verify_pair_relation(gen, nrt::linspace(-1.8, 1.8, 37), 1e-6).passed);

  // NRT generator at q = 1.5
  const double q = 1.5;
  const nrt::GeneratorG nrt_gen{
      [q](double u) { return std::pow(1.0 + (1.0 - q) * u, (2.0 - q) / (1.0 - q)) / (2.0 - q); },
      [q](double u) { return std::pow(1.0 + (1.0 - q) * u, 1.0 / (1.0 - q)); },
      {},
      {}};
  const auto from_g = nrt::pair_from_G(nrt_gen, nrt::linspace(-0.4, 0.4, 41), "nrt-generated");
  const auto direct = nrt::nrt_pair(q);
  for (double u : {-0.3, 0.0, 0.25}) CHECK(std::abs(from_g.F(u) - direct.F(u)) < 1e-12);
  for (double v : {0.9, 1.0, 1.2}) CHECK(std::abs(from_g.L(v) - direct.L(v)) < 1e-9);
  CHECK_THROWS_AS(from_g.F(Complex{0.1, 0.1}), nrt::DomainError);

  const nrt::GeneratorG flat{[](double u) { return std::cos(u); }, [](double u) { return -std::sin(u); }, {}, {}};
  CHECK_THROWS_AS(nrt::pair_from_G(flat, nrt::linspace(-3.0, 3.0, 61)), nrt::NonInvertibleError);
}

TEST_CASE("plane-wave-like solutions") {
  const auto p = with_q(2.0);
  const auto pair = nrt::nrt_pair(2.0);
  const auto mode = nrt::PlaneWaveMode::from_wave_number(1.0, p);
  for (double t : {0.0, 0.3}) {
    for (double x : {-0.2, 0.0, 0.35}) {
      const Complex a = nrt::general_plane_wave(pair, 1.0, p, t, x);
      const Complex b = nrt::eval_ansatz(nrt::plane_wave_coeffs(1.0, t, p), 2.0, x);
      const Complex c = nrt::qexp(2.0, Complex{0.0, mode.k * x - mode.w * t});
      CHECK(std::abs(a - b) <= 1e-12);
      CHECK(std::abs(a - c) <= 1e-12);
    }
  }
  const auto sinh = nrt::sinh_pair();
  nrt::ModelParams p1;
  CHECK(std::abs(nrt::general_plane_wave(sinh, 1.0, p1, 0.0, 0.0)) == 0.0);
  double exact = 0.0, perturbed = 0.0;
  const double w = 0.5;
  for (double t = 0.0; t <= 1.0; t += 0.25) {
    for (double x = -1.0; x <= 1.0; x += 0.1) {
      if (std::abs(x - w * t) > 1.2) continue;
      exact = std::max(exact, nrt::generalized_residual(sinh, 1.0, p1, t, x));
      perturbed = std::max(perturbed, nrt::generalized_residual(sinh, 1.0, p1, t, x, 1.01 * w));
    }
  }
  CHECK(exact < 1e-6);
  CHECK(perturbed > 1e-3);
}

TEST_CASE("plane-wave-like solutions are travelling waves") {
  nrt::ModelParams p;
  const double k = 1.3;
  const double w = p.hbar * k * k / (2 * p.m);
  const double v = w / k;
  for (const auto& pair : {nrt::sinh_pair(), nrt::nrt_pair(2.0), nrt::nrt_pair(1.5)}) {
    CAPTURE(pair.name());
    for (double d : {0.1, 0.7, 2.0}) {
      for (double x : {-0.5, 0.0, 0.4}) {
        CHECK(std::abs(nrt::general_plane_wave(pair, k, p, 0.2, x) -
                       nrt::general_plane_wave(pair, k, p, 0.2 + d, x + v * d)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("uniqueness probe") {
  const auto u = nrt::uniqueness_residual(nrt::nrt_pair(1.5), nrt::linspace(-0.4, 0.4, 41));
  CHECK(u.residual < 1e-8);
  CHECK(u.r2 == Approx(1.0 - 1.5).epsilon(1e-8));
  CHECK(std::abs(u.r2 - (1.0 - 1.5)) < 1e-8);

  const auto lin = nrt::uniqueness_residual(nrt::linear_pair(), nrt::linspace(-2.0, 2.0, 41));
  CHECK(lin.residual < 1e-8);
  CHECK(std::abs(lin.r2 - 1.0) < 1e-8);

  const auto s = nrt::uniqueness_residual(nrt::sinh_pair(), nrt::linspace(-2.0, 2.0, 81));
  CHECK(s.residual > 0.05);

  CHECK_THROWS_AS(nrt::uniqueness_residual(nrt::sinh_pair(), nrt::linspace(-1.0, 1.0, 5)), nrt::DomainError);
}

TEST_CASE("linspace") {
  const auto v = nrt::linspace(-1.0, 1.0, 5);
  REQUIRE(v.size() == 5);
  CHECK(v.front() == -1.0);
  CHECK(v[2] == 0.0);
  CHECK(v.back() == 1.0);
}
