#pragma once

// Numerical cross-validation: coefficient ODE integration, pointwise
// residuals of the governing equation and a method-of-lines PDE solver.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nrt/grid.hpp"
#include "nrt/solutions.hpp"

namespace nrt {

/// Right-hand side of the coefficient flow
///   i a' = (hbar/m)(3-q) a^2 [- K/(2 hbar)]
///   i b' = (hbar/m)(3-q) a b
///   i c' = (hbar/m)((1-q) a c - a + b^2/2)
CoefficientRates coeff_rhs(const CoefficientState& state, const ModelParams& params,
                           Potential potential);

struct CoefficientTrajectory {
  std::vector<CoefficientState> samples;  // accepted steps, strictly ordered in t
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double max_local_error = 0.0;  // scaled error norm of accepted steps, <= 1 means at tol
};

struct IntegratorOptions {
  double dt_min = 1e-12;
  double initial_step = 1e-3;
  double max_step = 0.0;  // 0 means unbounded
  std::size_t max_steps = 5'000'000;
};

/// Adaptive Dormand-Prince 5(4) integration of the coefficient flow from
/// initial.t to t_end (either direction). The per-step error of every
/// component is held below tol * (1 + |y|). Throws StiffnessError when the
/// step collapses below dt_min or the state stops being finite.
CoefficientTrajectory integrate_coeffs(const CoefficientState& initial, double t_end,
                                       const ModelParams& params, Potential potential, double tol,
                                       const IntegratorOptions& options = {});

struct ImplicitHarmonicConstant {
  Complex delta{};
  double max_deviation = 0.0;
};

/// Evaluates
///   (m / (hbar (3-q))) (1/(2 kappa)) Log((kappa + a)/(kappa - a)) - i t,
/// kappa = sqrt(m K / (2 hbar^2 (3-q))), on every sample with the logarithm
/// continued between samples. The value is constant on exact trajectories.
/// Throws DegenerateInputError if a sample sits on a = +-kappa.
ImplicitHarmonicConstant harmonic_delta_check(const CoefficientTrajectory& trajectory,
                                              const ModelParams& params);

enum class DerivativeMode { analytic, finite_difference };

/// |LHS - RHS| of the governing equation at (x, t). In analytic mode the
/// time derivative comes from the family's closed-form coefficient rates
/// (finite differences in t for the frozen and Gaussian families) and the
/// space derivative from the base polynomial. finite_difference mode uses
/// 5-point stencils in both variables.
double nrt_residual(const SolutionFamily& family, const ModelParams& params, Potential potential,
                    double x, double t, DerivativeMode mode = DerivativeMode::analytic);

struct FieldState {
  UniformGrid grid;
  std::vector<Complex> psi;
  double t = 0.0;
};

struct PdeOptions {
  double stability_factor = 0.1;
  double boundary_eps = 1e-8;
  double blowup_limit = 1e6;
  /// Optional Dirichlet data psi(x, t) for the two nodes at each end. Empty
  /// means the nodes stay pinned to their initial values.
  std::function<Complex(double x, double t)> boundary;
};

struct PdeStats {
  std::size_t steps = 0;
  double smallest_step = 0.0;
};

/// Samples the family on the grid at time t.
FieldState sample_field(const SolutionFamily& family, const ModelParams& params,
                        const UniformGrid& grid, double t);

/// Method of lines: 4th order central differences in x applied to
/// psi^{2-q}/(2-q) (principal branch per node, Log psi at q = 2), classical
/// RK4 in t, two Dirichlet nodes at each end (pinned, or driven by
/// options.boundary).
///
/// dt must satisfy dt <= stability_factor * h^2 * 2m/hbar. The step is
/// further reduced where the nonlinearity stiffens the operator (factor
/// max |psi|^{1-q} over interior nodes). The nodewise principal power is
/// only valid while psi stays away from the negative real axis.
///
/// Throws DomainError for a bad grid, dt or boundary values and
/// StabilityError on blow-up.
FieldState evolve_pde(const FieldState& initial, const ModelParams& params, Potential potential,
                      double t_end, double dt, const PdeOptions& options = {},
                      PdeStats* stats = nullptr);

/// ||a - b||_2 / ||b||_2 on a common grid.
double relative_l2_error(std::span<const Complex> a, std::span<const Complex> b);

}  // namespace nrt
