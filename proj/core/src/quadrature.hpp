#pragma once

// Globally adaptive 15-point Gauss-Kronrod quadrature on a finite interval.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace nrt::detail {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for nodes 1, 3, 5 and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[j] * pair;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
  }
  const double value = kronrod * half;
  double error = std::abs((kronrod - gauss) * half);
  if (!std::isfinite(value)) error = value;
  return {a, b, value, error};
}

/// Bisects the panel with the largest error estimate until the summed
/// error is below abs_tol or max_panels is reached. Deterministic: the final
/// sum runs over panels in order of position.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                    std::size_t max_panels = 400) {
  QuadratureResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::vector<Panel> panels{gauss_kronrod_15(f, a, b)};
  const auto total_error = [&] {
    double e = 0.0;
    for (const auto& p : panels) e += p.error;
    return e;
  };
  while (true) {
    const double err = total_error();
    if (!std::isfinite(err)) break;
    if (err <= abs_tol || panels.size() >= max_panels) break;
    const auto worst = std::max_element(panels.begin(), panels.end(),
                                        [](const Panel& l, const Panel& r) { return l.error < r.error; });
    const double mid = 0.5 * (worst->a + worst->b);
    if (!(mid > worst->a && mid < worst->b)) break;  // interval exhausted
    const Panel left = gauss_kronrod_15(f, worst->a, mid);
    const Panel right = gauss_kronrod_15(f, mid, worst->b);
    *worst = left;
    panels.push_back(right);
  }
  std::sort(panels.begin(), panels.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });
  for (const auto& p : panels) {
    out.value += p.value;
    out.error += p.error;
  }
  out.converged = std::isfinite(out.value) && std::isfinite(out.error) && out.error <= abs_tol;
  return out;
}

}  // namespace nrt::detail
