#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nrt/errors.hpp"
#include "nrt/observables.hpp"

using nrt::Complex;
using doctest::Approx;
namespace fam = nrt::family;

namespace {

nrt::ModelParams with_q(double q) {
  nrt::ModelParams p;
  p.q = q;
  return p;
}

// Free packet whose coefficients at t = 0 are (a0, b0, c0).
nrt::SolutionFamily free_from(Complex a0, Complex b0, Complex c0, double q) {
  return fam::FreeQGaussian{nrt::constants_from_initial(a0, b0, c0, q)};
}

const nrt::SolutionFamily kFig1 = fam::FreeQGaussian{{{1, 0}, {1, 0}, {1, 0}}};

}  // namespace

TEST_CASE("squared modulus reference values") {
  const auto p = with_q(2.0);
  const auto s0 = nrt::plane_wave_coeffs(1.0, 0.0, p);
  CHECK(nrt::abs2_from_coeffs(s0, 2.0, 0.0) == Approx(1.0).epsilon(1e-15));
  CHECK(nrt::abs2_from_coeffs(s0, 2.0, 1.0) == Approx(0.5).epsilon(1e-15));
}

TEST_CASE("closed-form squared modulus matches |psi|^2") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ux(-6.0, 6.0);
  for (double q : {0.5, 1.0, 1.5, 2.0, 2.5, 4.0}) {
    for (int i = 0; i < 200; ++i) {
      const nrt::CoefficientState s{0.0, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
      const double x = ux(rng);
      const Complex base = nrt::ansatz_base(s, q, x);
      if (!nrt::is_q_one(q) && std::abs(base) < 1e-3) continue;
      const double direct = std::norm(nrt::eval_ansatz(s, q, x));
      CHECK(std::abs(nrt::abs2_from_coeffs(s, q, x) - direct) <= 1e-12 * direct);
    }
  }
}

TEST_CASE("abs2_profile carries the grid and both representations") {
  const auto p = with_q(2.0);
  const nrt::UniformGrid grid{-10.0, 10.0, 201};
  const auto prof = nrt::abs2_profile(kFig1, p, 0.75, grid);
  REQUIRE(prof.x.size() == 201);
  CHECK(prof.t == 0.75);
  CHECK(prof.x.front() == -10.0);
  CHECK(prof.x.back() == 10.0);
  for (std::size_t i = 0; i < prof.x.size(); ++i) {
    const double direct = prof.re_psi[i] * prof.re_psi[i] + prof.im_psi[i] * prof.im_psi[i];
    CHECK(std::abs(direct - prof.abs2[i]) <= 1e-12 * prof.abs2[i]);
  }
}

TEST_CASE("norm reference values") {
  const auto p2 = with_q(2.0);
  const nrt::SolutionFamily singular = fam::SingularPacket{1.0, 1.0};
  const auto n = nrt::norm(singular, p2, 0.0, 1e-10);
  CHECK(n.converged);
  CHECK(n.value == Approx(2.0 * std::numbers::pi).epsilon(1e-9));
  CHECK(nrt::norm_closed_form_singular(2.0, 1.0, 1.0, p2, 0.0) == Approx(2.0 * std::numbers::pi).epsilon(1e-14));

  const nrt::SolutionFamily gauss = fam::GaussianLimit{1.0, 1.0};
  for (double t : {0.0, 0.5, 1.0}) CHECK(nrt::norm(gauss, with_q(1.0), t, 1e-12).value == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("norm of the q = 2 reference packet is conserved") {
  // N = pi/(4 sqrt 2) at every t for alpha = beta = gamma = 1.
  const auto p = with_q(2.0);
  const double expected = std::numbers::pi / (4.0 * std::numbers::sqrt2);
  for (double t : {0.0, 0.5, 1.0, 2.0}) {
    const auto r = nrt::norm(kFig1, p, t, 1e-10);
    CHECK(r.converged);
    CHECK(r.value == Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("norm of a free q = 2 packet with complex beta changes in time") {
  // real beta keeps N constant at q = 2, whatever alpha is
  const auto p = with_q(2.0);
  const nrt::SolutionFamily conserved = fam::FreeQGaussian{{{1.0, 0.5}, {0.0, 0.0}, {0.5, 0.0}}};
  CHECK(nrt::norm(conserved, p, 0.0, 1e-11).value == Approx(nrt::norm(conserved, p, 1.0, 1e-11).value).epsilon(1e-9));
  const nrt::SolutionFamily f = fam::FreeQGaussian{{{0.7, -0.3}, {0.4, 0.2}, {0.2, 0.3}}};
  const double tol = 1e-10;
  const double n0 = nrt::norm(f, p, 0.0, tol).value;
  const double n1 = nrt::norm(f, p, 0.5, tol).value;
  CAPTURE(n0);
  CAPTURE(n1);
  CHECK(std::abs(n1 - n0) > 10.0 * tol);
}

TEST_CASE("singular packet norm: quadrature against the Gamma closed form") {
  for (double q : {1.5, 2.0, 2.5}) {
    const auto p = with_q(q);
    const nrt::SolutionFamily f = fam::SingularPacket{1.0, 1.0};
    double prev = INFINITY;
    for (double t : {0.0, 1.0, 4.0}) {
      const double closed = nrt::norm_closed_form_singular(q, 1.0, 1.0, p, t);
      const auto r = nrt::norm(f, p, t, 1e-9 * closed);
      CHECK(r.converged);
      CHECK(std::abs(r.value - closed) <= 1e-6 * closed);
      CHECK(r.value < prev);  // strictly decreasing
      prev = r.value;
    }
  }
  const auto p2 = with_q(2.0);
  const double ref = nrt::norm_closed_form_singular(2.0, 1.0, 1.0, p2, 0.0);
  for (double t : {0.5, 3.0, 9.0}) {
    CHECK(nrt::norm_closed_form_singular(2.0, 1.0, 1.0, p2, t) * (t + 1.0) == Approx(ref).epsilon(1e-10));
  }
  CHECK_THROWS_AS(nrt::norm_closed_form_singular(3.0, 1.0, 1.0, p2, 0.0), nrt::DomainError);
  CHECK_THROWS_AS(nrt::norm_closed_form_singular(2.0, 1.0, 1.0, p2, -1.0), nrt::DomainError);
  CHECK_THROWS_AS(nrt::norm_closed_form_singular(2.0, -1.0, 1.0, p2, 0.0), nrt::DomainError);
}

TEST_CASE("singular packet: log-log slope for q = 1.5") {
  const auto p = with_q(1.5);
  const nrt::SolutionFamily f = fam::SingularPacket{1.0, 1.0};
  std::vector<double> lx, lclosed, lquad;
  for (int i = 0; i < 10; ++i) {
    const double t = i;
    const double closed = nrt::norm_closed_form_singular(1.5, 1.0, 1.0, p, t);
    lx.push_back(std::log(t + 1.0));
    lclosed.push_back(std::log(closed));
    lquad.push_back(std::log(nrt::norm(f, p, t, 1e-10 * closed).value));
  }
  auto slope = [&](const std::vector<double>& y) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += y[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  CHECK(std::abs(slope(lclosed) + 3.0) < 1e-3);
  CHECK(std::abs(slope(lquad) + 3.0) < 1e-3);
}

TEST_CASE("norm refuses divergent and singular cases") {
  CHECK_THROWS_AS(nrt::norm(kFig1, with_q(6.0), 0.0, 1e-8), nrt::DivergentNormError);
  const nrt::SolutionFamily wave = fam::QPlaneWave{nrt::PlaneWaveMode::from_wave_number(1.0, with_q(3.5))};
  CHECK_THROWS_AS(nrt::norm(wave, with_q(3.5), 0.0, 1e-8), nrt::DivergentNormError);
  CHECK_THROWS_AS(nrt::norm(fam::SingularPacket{1.0, 1.0}, with_q(2.0), -1.5, 1e-8), nrt::SingularTimeError);
  auto ph = with_q(2.0);
  const nrt::SolutionFamily h = fam::HarmonicQuasiStationary{nrt::harmonic_critical_a(ph)};
  CHECK_THROWS_AS(nrt::norm(h, ph, nrt::harmonic_singular_time(ph), 1e-8), nrt::SingularTimeError);
}

TEST_CASE("normalizability reference cases") {
  CHECK(nrt::normalizable(free_from({0, 1}, {}, {}, 2.0), with_q(2.0), 0.0).normalizable);
  CHECK_FALSE(nrt::normalizable(free_from({0, 1}, {}, {}, 6.0), with_q(6.0), 0.0).normalizable);
  CHECK_FALSE(nrt::normalizable(free_from({0.5, 0}, {}, {}, 0.5), with_q(0.5), 0.0).normalizable);
  // P = 1 - x^2 at q = 2 has real roots
  const auto neg = nrt::normalizable(free_from({-1, 0}, {}, {}, 2.0), with_q(2.0), 0.0);
  CHECK_FALSE(neg.normalizable);
  CHECK_FALSE(neg.reason.empty());
  CHECK(nrt::normalizable(free_from({1, 0}, {}, {}, 2.0), with_q(2.0), 0.0).normalizable);
  // frozen window 2 < q < 4
  CHECK(nrt::normalizable(fam::Frozen{1, 1, std::nullopt}, with_q(3.0), 0.0).normalizable);
  CHECK_FALSE(nrt::normalizable(fam::Frozen{1, 1, std::nullopt}, with_q(4.5), 0.0).normalizable);
  CHECK_FALSE(nrt::normalizable(fam::Frozen{1, 1, std::nullopt}, with_q(1.5), 0.0).normalizable);
  // plane waves 1 < q < 3
  const auto wave = [](double q) {
    return fam::QPlaneWave{nrt::PlaneWaveMode::from_wave_number(1.0, with_q(q))};
  };
  CHECK(nrt::normalizable(wave(2.0), with_q(2.0), 0.0).normalizable);
  CHECK_FALSE(nrt::normalizable(wave(3.2), with_q(3.2), 0.0).normalizable);
  CHECK(nrt::normalizable(fam::GaussianLimit{0.0, 1.0}, with_q(1.0), 0.0).normalizable);
  CHECK_FALSE(nrt::normalizable(fam::SingularPacket{1.0, 1.0}, with_q(2.0), -2.0).normalizable);
}

TEST_CASE("real-root detection is exact") {
  CHECK(nrt::polynomial_has_real_root({1, 0}, {-2, 0}, {1, 0}));   // (x-1)^2, tangential
  CHECK_FALSE(nrt::polynomial_has_real_root({1, 0}, {0, 0}, {1, 0}));
  CHECK(nrt::polynomial_has_real_root({0, 1}, {-1, -1}, {1, 0}));  // (x-1)(x-i)
  CHECK_FALSE(nrt::polynomial_has_real_root({0, 1}, {-1, 0}, {1, 0}));
  CHECK(nrt::polynomial_has_real_root({2, 0}, {-1, 0}, {0, 0}));   // linear
  CHECK_FALSE(nrt::polynomial_has_real_root({2, 0}, {0, 0}, {0, 0}));
}

TEST_CASE("classifier agrees with the convergence probe") {
  struct Case {
    nrt::SolutionFamily family;
    double q;
  };
  const std::vector<Case> cases = {
      {free_from({1, 0.3}, {0.2, 0}, {0, 0}, 2.0), 2.0},
      {free_from({1, 0.3}, {0.2, 0}, {0, 0}, 4.5), 4.5},
      {free_from({1, 0.3}, {0.2, 0}, {0, 0}, 5.5), 5.5},
      {fam::SingularPacket{1.0, 1.0}, 2.0},
      {fam::SingularPacket{1.0, 1.0}, 3.5},
      {fam::Frozen{1, 1, std::nullopt}, 3.0},
      {fam::Frozen{1, 1, std::nullopt}, 1.5},
  };
  for (const auto& c : cases) {
    CAPTURE(nrt::family_name(c.family));
    CAPTURE(c.q);
    const auto p = with_q(c.q);
    const bool yes = nrt::normalizable(c.family, p, 0.0).normalizable;
    const auto probe = nrt::probe_norm_convergence(c.family, p, 0.0, 1e-8);
    CHECK(yes == probe.converged);
    CHECK(probe.cutoffs.size() == probe.truncated_norms.size());
  }
}

TEST_CASE("free packet tails follow |x|^{4/(1-q)}") {
  for (double q : {1.5, 2.0, 3.5}) {
    const auto p = with_q(q);
    const auto f = fam::FreeQGaussian{{{1, 0.2}, {0.5, 0}, {0.3, 0}}};
    std::vector<double> lx, ly;
    for (double x = 50.0; x <= 200.0; x += 10.0) {
      for (double sx : {-x, x}) {
        lx.push_back(std::log(std::abs(sx)));
        ly.push_back(std::log(std::norm(nrt::evaluate(f, p, 0.3, sx))));
      }
    }
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == Approx(4.0 / (1.0 - q)).epsilon(0.01));
  }
}

TEST_CASE("harmonic norm rate") {
  const auto p = with_q(2.0);
  const double tc = nrt::harmonic_singular_time(p);
  const nrt::SolutionFamily h = fam::HarmonicQuasiStationary{nrt::harmonic_critical_a(p)};
  const double t = tc / 4;
  const auto rate = nrt::harmonic_norm_rate(p, t, 1e-10);
  CHECK(rate.converged);
  CHECK(std::abs(rate.value) > 100 * 1e-10);
  const double dt = 1e-4;
  const double fd = (nrt::norm(h, p, t + dt, 1e-12).value - nrt::norm(h, p, t - dt, 1e-12).value) / (2 * dt);
  CHECK(rate.value == Approx(fd).epsilon(1e-6));
  CHECK(nrt::harmonic_norm_rate(p, 0.0, 1e-10).value == Approx(0.0));
}

TEST_CASE("peak finder") {
  const auto p = with_q(2.0);
  const nrt::UniformGrid grid{-10.0, 10.0, 801};
  CHECK(nrt::find_peaks(nrt::abs2_profile(kFig1, p, 0.0, grid)).size() == 1);

  // symmetric double hump
  nrt::GridProfile sym;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    sym.x.push_back(x);
    sym.abs2.push_back(std::exp(-(x - 2.3) * (x - 2.3)) + std::exp(-(x + 2.3) * (x + 2.3)));
  }
  sym.re_psi.assign(grid.n, 0.0);
  sym.im_psi.assign(grid.n, 0.0);
  const auto peaks = nrt::find_peaks(sym);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0].x == Approx(-peaks[1].x).epsilon(1e-9));
  CHECK(peaks[1].x == Approx(2.3).epsilon(grid.spacing()));

  // plateau reported once
  nrt::GridProfile flat;
  flat.x = {0, 1, 2, 3, 4, 5};
  flat.abs2 = {0, 1, 2, 2, 1, 0};
  flat.re_psi.assign(6, 0.0);
  flat.im_psi.assign(6, 0.0);
  const auto fp = nrt::find_peaks(flat);
  REQUIRE(fp.size() == 1);
  CHECK(fp[0].x == Approx(2.0));

  // reference packet: one peak, then two peaks drifting apart
  std::size_t prev_count = 1;
  double prev_sep = -1.0;
  for (int i = 0; i <= 8; ++i) {
    const auto pk = nrt::find_peaks(nrt::abs2_profile(kFig1, p, 0.25 * i, grid));
    if (i == 0) CHECK(pk.size() == 1);
    CHECK(pk.size() >= prev_count);
    if (pk.size() == 2) {
      const double sep = pk[1].x - pk[0].x;
      CHECK(sep > prev_sep);
      prev_sep = sep;
    }
    prev_count = pk.size();
  }
  CHECK(prev_count == 2);
}
