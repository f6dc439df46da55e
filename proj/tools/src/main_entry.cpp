#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "nrt/cli/run.hpp"
#include "nrt/errors.hpp"

namespace nrt::cli {

namespace {

// flag name -> config key
const std::vector<std::pair<std::string, std::string>>& flag_keys() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"q", "model.q"},
      {"hbar", "model.hbar"},
      {"m", "model.m"},
      {"K", "model.K"},
      {"family", "family.name"},
      {"alpha-re", "family.alpha_re"},
      {"alpha-im", "family.alpha_im"},
      {"beta-re", "family.beta_re"},
      {"beta-im", "family.beta_im"},
      {"gamma-re", "family.gamma_re"},
      {"gamma-im", "family.gamma_im"},
      {"k", "family.k"},
      {"pair", "family.pair"},
      {"k0", "family.k0"},
      {"b-c", "family.b_c"},
      {"t0", "family.t0"},
      {"a-c-re", "family.pulse_a_re"},
      {"a-c-im", "family.pulse_a_im"},
      {"pulse-b-re", "family.pulse_b_re"},
      {"pulse-b-im", "family.pulse_b_im"},
      {"c1-re", "family.pulse_c1_re"},
      {"c1-im", "family.pulse_c1_im"},
      {"frozen-b", "family.frozen_b"},
      {"frozen-c", "family.frozen_c"},
      {"x-min", "grid.x_min"},
      {"x-max", "grid.x_max"},
      {"nx", "grid.nx"},
      {"t", "grid.t"},
      {"tol", "check.tol"},
      {"residual-tol", "check.residual_tol"},
      {"pde-t-end", "check.pde_t_end"},
      {"pde-tol", "check.pde_tol"},
      {"pde-boundary-eps", "check.pde_boundary_eps"},
      {"pde-boundary", "check.pde_boundary"},
      {"out", "output.dir"},
  };
  return table;
}

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> table = {
      {"evolve-free", "free q-Gaussian packet profiles, residual and ODE checks"},
      {"evolve-harmonic", "quasi-stationary packet in the harmonic potential"},
      {"plane-wave", "q-plane wave and its dispersion relation"},
      {"pulsating-q3", "q = 3 pulsating packet and its period"},
      {"frozen", "frozen (time-independent modulus) packet"},
      {"singular", "singular packet and its closed-form norm"},
      {"norm-scan", "norm against time with log-log slope"},
      {"genfamily-check", "generalized (L, F) pair relation, waves and uniqueness"},
      {"pde-crosscheck", "finite-difference evolution against the exact solution"},
      {"reproduce-fig1", "q = 2 free packet profiles and the one-to-two peak transition"},
  };
  return table;
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"Exact solutions of the NRT nonlinear Schroedinger equation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  std::map<std::string, std::string> flag_values;
  std::map<std::string, bool> dispersion;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, bool> print_config;
  for (const auto& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name, descriptions().at(name));
    for (const auto& [flag, key] : flag_keys()) {
      sub->add_option("--" + flag, flag_values[name + "/" + key], key);
    }
    sub->add_option("--config", config_paths[name], "INI-style config file");
    sub->add_flag("--check-dispersion", dispersion[name], "check w = hbar k^2/2m (plane-wave)");
    sub->add_flag("--print-config", print_config[name], "print the merged configuration and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    ConfigValues values = default_values(name);
    if (!config_paths[name].empty()) {
      ConfigValues file = read_config_file(config_paths[name]);
      if (file.count("run.command") && file.at("run.command") != name) {
        throw ConfigError("run.command", "file is for '" + file.at("run.command") + "', not '" + name + "'");
      }
      merge_values(values, file);
    }
    if (const char* env = std::getenv("NRT_OUTPUT_DIR"); env != nullptr && *env != '\0') {
      values["output.dir"] = env;
    }
    for (const auto& [flag, key] : flag_keys()) {
      if (sub->count("--" + flag) > 0) values[key] = flag_values[name + "/" + key];
    }
    if (dispersion[name]) values["check.dispersion"] = "true";
    const RunConfig config = config_from_values(values);
    if (print_config[name]) {
      std::cout << serialize(config);
      return kExitOk;
    }
    const RunResult result = run(config);
    std::cout << result.report;
    if (result.exit_code != kExitOk) std::cerr << "nrt: " << name << " failed: " << result.failure << "\n";
    return result.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "nrt: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nrt::Error& e) {
    std::cerr << "nrt: numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace nrt::cli
