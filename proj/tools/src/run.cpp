#include "nrt/cli/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "nrt/dynamics.hpp"
#include "nrt/errors.hpp"
#include "nrt/genfamily.hpp"

namespace nrt::cli {

namespace {

namespace fs = std::filesystem;

std::string num(double x) { return fmt::format("{:.17g}", x); }

class Session {
 public:
  explicit Session(const RunConfig& config) : config_(config) {}

  void check(const std::string& name, double value, double limit, bool below = true) {
    const bool passed = std::isfinite(value) && (below ? value <= limit : value > limit);
    result_.checks.push_back({name, value, limit, below, passed});
    report_ += fmt::format("check {} value={:.6e} {} {:.6e} {}\n", name, value, below ? "<=" : ">",
                           limit, passed ? "PASS" : "FAIL");
  }

  void line(const std::string& text) { report_ += text + "\n"; }

  void write_file(const std::string& name, const std::string& contents) {
    const fs::path path = fs::path(config_.output_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw nrt::Error("cannot write " + path.string());
    out << contents;
    result_.files.push_back(path.string());
  }

  std::string profile_name(std::size_t index) const {
    return fmt::format("{}_t{:03d}.dat", config_.command, index);
  }

  // Profiles for every requested time, with the |psi|^2 consistency check.
  std::vector<GridProfile> profiles(const SolutionFamily& family) {
    std::vector<GridProfile> out;
    double worst = 0.0;
    for (std::size_t i = 0; i < config_.times.size(); ++i) {
      GridProfile p = abs2_profile(family, config_.params, config_.times[i], config_.grid);
      for (std::size_t j = 0; j < p.x.size(); ++j) {
        const double direct = p.re_psi[j] * p.re_psi[j] + p.im_psi[j] * p.im_psi[j];
        const double scale = std::max(std::abs(p.abs2[j]), 1e-300);
        worst = std::max(worst, std::abs(direct - p.abs2[j]) / scale);
      }
      write_file(profile_name(i), format_profile(p));
      out.push_back(std::move(p));
    }
    check("profile_consistency", worst, 1e-12);
    return out;
  }

  void residuals(const SolutionFamily& family, Potential potential) {
    double worst = 0.0;
    for (double t : config_.times) {
      for (std::size_t i = 0; i < config_.grid.n; ++i) {
        worst = std::max(worst, nrt_residual(family, config_.params, potential, config_.grid.x(i), t));
      }
    }
    check("residual_max", worst, config_.residual_tol);
  }

  // Closed-form coefficients against adaptive integration from t = 0.
  void ode_agreement(const SolutionFamily& family, Potential potential) {
    const auto start = family_coeffs(family, 0.0, config_.params);
    if (!start) return;
    ModelParams p = config_.params;
    p.q = family_q(family, config_.params);
    double worst = 0.0;
    for (double t : config_.times) {
      const auto exact = family_coeffs(family, t, config_.params);
      CoefficientState numeric = *start;
      if (t != 0.0) numeric = integrate_coeffs(*start, t, p, potential, 1e-12).samples.back();
      worst = std::max({worst, std::abs(numeric.a - exact->a), std::abs(numeric.b - exact->b),
                        std::abs(numeric.c - exact->c)});
    }
    check("ode_agreement", worst, config_.residual_tol);
  }

  void norm_table(const SolutionFamily& family) {
    line("table norm");
    line("# t N abs_error converged");
    bool all_converged = true;
    for (double t : config_.times) {
      const auto verdict = normalizable(family, config_.params, t);
      if (!verdict.normalizable) {
        line(fmt::format("{} divergent \"{}\"", num(t), verdict.reason));
        continue;
      }
      const auto r = norm(family, config_.params, t, config_.tol);
      all_converged = all_converged && r.converged;
      line(fmt::format("{} {} {:.3e} {}", num(t), num(r.value), r.abs_error_estimate, r.converged));
    }
    check("norm_converged", all_converged ? 0.0 : 1.0, 0.0);
  }

  void peak_table(const std::vector<GridProfile>& profiles) {
    line("table peaks");
    line("# t count positions");
    for (const auto& p : profiles) {
      PeakRow row{p.t, find_peaks(p)};
      std::string text = fmt::format("{} {}", num(row.t), row.peaks.size());
      for (const auto& pk : row.peaks) text += " " + num(pk.x);
      line(text);
      result_.peaks.push_back(std::move(row));
    }
  }

  void plot_script(std::size_t count) {
    std::string gp = "set xlabel 'x'\nset ylabel '|psi|^2'\nplot \\\n";
    for (std::size_t i = 0; i < count; ++i) {
      gp += fmt::format("  '{}' using 2:5 with lines title 't = {}'{}\n", profile_name(i),
                        num(config_.times[i]), i + 1 < count ? ", \\" : "");
    }
    write_file(config_.command + "_plot.gp", gp);
  }

  RunResult finish() {
    std::string failed;
    for (const auto& c : result_.checks) {
      if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    }
    if (!failed.empty()) {
      result_.exit_code = kExitNumerical;
      result_.failure = failed;
    }
    report_ += failed.empty() ? "result PASS\n" : "result FAIL " + failed + "\n";
    result_.report = report_;
    write_file(config_.command + "_report.txt", report_);
    return result_;
  }

  const RunConfig& config() const { return config_; }
  const std::vector<PeakRow>& peaks() const { return result_.peaks; }

 private:
  const RunConfig& config_;
  RunResult result_;
  std::string report_;
};

void run_family(Session& s, const SolutionFamily& family, Potential potential) {
  const auto profiles = s.profiles(family);
  s.residuals(family, potential);
  s.ode_agreement(family, potential);
  s.norm_table(family);
  s.peak_table(profiles);
  s.plot_script(profiles.size());
}

void run_harmonic(Session& s, const SolutionFamily& family) {
  run_family(s, family, Potential::harmonic);
  const auto& c = s.config();
  s.line("table norm_rate");
  s.line("# t dN/dt abs_error");
  for (double t : c.times) {
    const auto r = harmonic_norm_rate(c.params, t, c.tol);
    s.line(fmt::format("{} {} {:.3e}", num(t), num(r.value), r.abs_error_estimate));
  }
}

void run_plane_wave(Session& s, const SolutionFamily& family) {
  run_family(s, family, Potential::none);
  const auto& c = s.config();
  if (!c.check_dispersion) return;
  const auto mode = std::get<family::QPlaneWave>(family).mode;
  const double expected = c.params.hbar * c.k * c.k / (2.0 * c.params.m);
  s.line(fmt::format("dispersion w={} hbar*k^2/(2m)={} E={} p={}", num(mode.w), num(expected), num(mode.E),
                     num(mode.p)));
  s.check("dispersion_relation", std::abs(mode.w - expected), 1e-14 * std::max(1.0, expected));
  // Negative control: a 1% frequency error must show up in the residual.
  PlaneWaveMode wrong = mode;
  wrong.w *= 1.01;
  const SolutionFamily perturbed = family::QPlaneWave{wrong};
  double worst = 0.0;
  for (double t : c.times) {
    for (std::size_t i = 0; i < c.grid.n; ++i) {
      worst = std::max(worst, nrt_residual(perturbed, c.params, Potential::none, c.grid.x(i), t));
    }
  }
  s.check("perturbed_dispersion_residual", worst, 100.0 * c.residual_tol, false);
}

void run_pulsating(Session& s, const SolutionFamily& family) {
  run_family(s, family, Potential::none);
  const auto& c = s.config();
  if (c.pulse_a.imag() != 0.0 || !(c.pulse_a.real() > 0.0)) return;
  const double period = std::numbers::pi * c.params.m / (c.params.hbar * c.pulse_a.real());
  s.line(fmt::format("period {}", num(period)));
  double worst = 0.0;
  for (double t : c.times) {
    for (std::size_t i = 0; i < c.grid.n; ++i) {
      const double x = c.grid.x(i);
      worst = std::max(worst, std::abs(std::norm(evaluate(family, c.params, t, x)) -
                                       std::norm(evaluate(family, c.params, t + period, x))));
    }
  }
  s.check("pulsation_period", worst, 1e-10);
}

void run_singular(Session& s, const SolutionFamily& family) {
  run_family(s, family, Potential::none);
  const auto& c = s.config();
  if (!(c.params.q > 1.0 && c.params.q < 3.0 && c.b_c > 0.0)) return;
  double worst = 0.0;
  for (double t : c.times) {
    const double closed = norm_closed_form_singular(c.params.q, c.b_c, c.t0, c.params, t);
    const double quad = norm(family, c.params, t, c.tol).value;
    worst = std::max(worst, std::abs(quad - closed) / closed);
  }
  s.check("norm_closed_form", worst, 1e-6);
}

void run_norm_scan(Session& s, const SolutionFamily& family) {
  const auto& c = s.config();
  const bool singular = c.family == "singular";
  const double shift = singular ? c.t0 : 0.0;
  s.line("table norm_scan");
  s.line(singular ? "# t N abs_error closed_form slope" : "# t N abs_error");
  std::string table = singular ? "# t N abs_error closed_form slope\n" : "# t N abs_error\n";
  std::vector<double> lx, ly;
  double prev_lx = 0.0, prev_ly = 0.0;
  bool converged = true;
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    const double t = c.times[i];
    const auto r = norm(family, c.params, t, c.tol);
    converged = converged && r.converged;
    std::string row = fmt::format("{} {} {:.3e}", num(t), num(r.value), r.abs_error_estimate);
    if (singular) {
      const double closed = (c.params.q > 1.0 && c.params.q < 3.0 && c.b_c > 0.0)
                                ? norm_closed_form_singular(c.params.q, c.b_c, c.t0, c.params, t)
                                : std::nan("");
      const double x = std::log(t + shift);
      const double y = std::log(r.value);
      const std::string slope = i == 0 ? "-" : fmt::format("{:.6f}", (y - prev_ly) / (x - prev_lx));
      row += fmt::format(" {} {}", num(closed), slope);
      lx.push_back(x);
      ly.push_back(y);
      prev_lx = x;
      prev_ly = y;
    }
    s.line(row);
    table += row + "\n";
  }
  s.write_file("norm-scan_table.dat", table);
  s.check("norm_converged", converged ? 0.0 : 1.0, 0.0);
  if (singular && lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double expected = 1.0 + 2.0 / (1.0 - c.params.q);
    s.line(fmt::format("loglog_slope fitted={:.6f} expected={:.6f}", slope, expected));
    s.check("loglog_slope", std::abs(slope - expected), 1e-3);
  }
}

void run_genfamily(Session& s) {
  const auto& c = s.config();
  const LFPair pair = c.pair == "sinh" ? sinh_pair() : nrt_pair(c.params.q);
  const auto us = linspace(pair.u_min(), pair.u_max(), 81);
  s.line(fmt::format("pair {} domain [{}, {}]", pair.name(), num(pair.u_min()), num(pair.u_max())));
  s.check("pair_relation", verify_pair_relation(pair, us, 1e-6).max_residual, 1e-6);

  const double w = c.params.hbar * c.k * c.k / (2.0 * c.params.m);
  double exact = 0.0, perturbed = 0.0;
  std::size_t samples = 0;
  for (double t : c.times) {
    for (std::size_t i = 0; i < c.grid.n; ++i) {
      const double x = c.grid.x(i);
      // sqrt(1 + sinh^2) is cosh only while cos(kx - wt) > 0.
      if (std::abs(c.k * x - w * t) > 1.2) continue;
      exact = std::max(exact, generalized_residual(pair, c.k, c.params, t, x));
      perturbed = std::max(perturbed, generalized_residual(pair, c.k, c.params, t, x, 1.01 * w));
      ++samples;
    }
  }
  if (samples == 0) throw nrt::DomainError("genfamily-check: no (x, t) sample with |kx - wt| <= 1.2");
  s.line(fmt::format("plane_wave_samples {}", samples));
  s.check("plane_wave_residual", exact, 1e-6);
  s.check("perturbed_w_residual", perturbed, 1e-3, false);

  const auto probe = uniqueness_residual(pair, us);
  s.line(fmt::format("uniqueness r1={} r2={} F0={} F1={} residual={:.6e}", num(probe.r1), num(probe.r2),
                     num(probe.F0), num(probe.F1), probe.residual));
  if (c.pair == "nrt") {
    s.check("uniqueness_residual", probe.residual, 1e-8);
    s.check("uniqueness_r2", std::abs(probe.r2 - (1.0 - c.params.q)), 1e-8);
  } else {
    s.check("uniqueness_residual", probe.residual, 0.05, false);
  }
}

void run_pde(Session& s, const SolutionFamily& family) {
  const auto& c = s.config();
  const double t_start = c.times.front();
  const FieldState initial = sample_field(family, c.params, c.grid, t_start);
  const double h = c.grid.spacing();
  PdeOptions options;
  options.boundary_eps = c.pde_boundary_eps;
  if (c.pde_analytic_boundary) {
    options.boundary = [&](double x, double t) { return evaluate(family, c.params, t, x); };
  }
  const double dt = options.stability_factor * h * h * 2.0 * c.params.m / c.params.hbar;
  PdeStats stats;
  const FieldState numeric = evolve_pde(initial, c.params, family_potential(family), t_start + c.pde_t_end, dt,
                                        options, &stats);
  const FieldState exact = sample_field(family, c.params, c.grid, numeric.t);
  const auto to_profile = [&](const FieldState& f) {
    GridProfile p;
    p.t = f.t;
    for (std::size_t i = 0; i < c.grid.n; ++i) {
      p.x.push_back(c.grid.x(i));
      p.re_psi.push_back(f.psi[i].real());
      p.im_psi.push_back(f.psi[i].imag());
      p.abs2.push_back(std::norm(f.psi[i]));
    }
    return p;
  };
  s.write_file("pde-crosscheck_numeric.dat", format_profile(to_profile(numeric)));
  s.write_file("pde-crosscheck_analytic.dat", format_profile(to_profile(exact)));
  s.line(fmt::format("pde steps={} smallest_step={:.6e} boundary={}", stats.steps, stats.smallest_step,
                     c.pde_analytic_boundary ? "analytic" : "pinned"));
  s.check("pde_relative_l2", relative_l2_error(numeric.psi, exact.psi), c.pde_tol);
}

void run_fig1(Session& s, const SolutionFamily& family) {
  const auto profiles = s.profiles(family);
  s.residuals(family, Potential::none);
  s.peak_table(profiles);
  s.plot_script(profiles.size());
  const PeakTransition tr = peak_transition(s.peaks());
  s.line(fmt::format("transition single_at_start={} stays_double={} separation_increasing={} t_star={}",
                     tr.single_at_start, tr.stays_double, tr.separation_increasing, num(tr.t_star)));
  s.check("peak_transition", tr.ok() ? 0.0 : 1.0, 0.0);
}

}  // namespace

PeakTransition peak_transition(const std::vector<PeakRow>& rows) {
  PeakTransition out;
  if (rows.empty()) return out;
  out.single_at_start = rows.front().peaks.size() == 1;
  std::size_t first = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].peaks.size() == 2) {
      first = i;
      break;
    }
  }
  if (first == rows.size()) return out;
  out.t_star = rows[first].t;
  out.stays_double = true;
  out.separation_increasing = true;
  double last = -1.0;
  for (std::size_t i = first; i < rows.size(); ++i) {
    if (rows[i].peaks.size() != 2) {
      out.stays_double = false;
      out.separation_increasing = false;
      break;
    }
    const double sep = rows[i].peaks[1].x - rows[i].peaks[0].x;
    if (!(sep > last)) out.separation_increasing = false;
    last = sep;
  }
  return out;
}

std::string format_profile(const GridProfile& p) {
  std::string out = "# t x re_psi im_psi abs2\n";
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    out += fmt::format("{:.17g} {:.17g} {:.17g} {:.17g} {:.17g}\n", p.t, p.x[i], p.re_psi[i], p.im_psi[i],
                       p.abs2[i]);
  }
  return out;
}

RunResult run(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) {
    RunResult r;
    r.exit_code = kExitConfig;
    r.failure = "output.dir: cannot create '" + config.output_dir + "': " + ec.message();
    return r;
  }
  Session s(config);
  s.line("# nrt report");
  s.line("command " + config.command);
  s.line("family " + (config.command == "genfamily-check" ? config.pair : config.family));
  try {
    if (config.command == "genfamily-check") {
      run_genfamily(s);
      return s.finish();
    }
    const SolutionFamily family = make_family(config);
    const std::string& cmd = config.command;
    if (cmd == "evolve-free" || cmd == "frozen") {
      run_family(s, family, Potential::none);
    } else if (cmd == "evolve-harmonic") {
      run_harmonic(s, family);
    } else if (cmd == "plane-wave") {
      run_plane_wave(s, family);
    } else if (cmd == "pulsating-q3") {
      run_pulsating(s, family);
    } else if (cmd == "singular") {
      run_singular(s, family);
    } else if (cmd == "norm-scan") {
      run_norm_scan(s, family);
    } else if (cmd == "pde-crosscheck") {
      run_pde(s, family);
    } else if (cmd == "reproduce-fig1") {
      run_fig1(s, family);
    }
  } catch (const nrt::Error& e) {
    s.line(std::string("error ") + e.what());
    RunResult r = s.finish();
    r.exit_code = kExitNumerical;
    r.failure = e.what();
    return r;
  }
  return s.finish();
}

}  // namespace nrt::cli
