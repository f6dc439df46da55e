#pragma once

// Run configuration: a flat set of "section.key" values read from a simple
// INI-like file and command-line flags, validated into RunConfig.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrt/grid.hpp"
#include "nrt/solutions.hpp"

namespace nrt::cli {

/// Validation failure; what() names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

using ConfigValues = std::map<std::string, std::string>;

struct RunConfig {
  std::string command = "evolve-free";
  std::string family = "free";
  ModelParams params;

  // free family
  Complex alpha{1.0, 0.0};
  Complex beta{};
  Complex gamma{};
  // plane wave and generalized pairs
  double k = 1.0;
  std::string pair = "nrt";
  // Gaussian limit
  double k0 = 0.0;
  // singular packet
  double b_c = 1.0;
  double t0 = 1.0;
  // pulsating q = 3
  Complex pulse_a{1.0, 0.0};
  Complex pulse_b{};
  Complex pulse_c1{};
  // frozen
  double frozen_b = 1.0;
  double frozen_c = 1.0;

  UniformGrid grid;
  std::vector<double> times{0.0};

  double tol = 1e-8;           // quadrature
  double residual_tol = 1e-8;  // pointwise residuals and ODE agreement
  bool check_dispersion = false;
  double pde_t_end = 0.1;
  double pde_tol = 1e-3;
  double pde_boundary_eps = 1e-2;
  bool pde_analytic_boundary = true;

  std::string output_dir = "nrt_out";

  bool operator==(const RunConfig&) const = default;
};

/// Subcommands in documentation order.
const std::vector<std::string>& subcommands();

/// Built-in defaults for a subcommand as key/value pairs.
ConfigValues default_values(const std::string& command);

/// Reads "[section]" headers, "key = value" lines and "#" comments.
/// Throws ConfigError on malformed lines.
ConfigValues parse_config_text(const std::string& text);
ConfigValues read_config_file(const std::string& path);

/// Merges `overrides` into `base` (later wins).
void merge_values(ConfigValues& base, const ConfigValues& overrides);

/// Validates and converts; every key must be known.
RunConfig config_from_values(const ConfigValues& values);

/// Canonical text form, every key present, doubles with 17 significant digits.
std::string serialize(const RunConfig& config);

/// "a:b:n" (n evenly spaced values), a comma list, or a single value.
std::vector<double> parse_time_list(const std::string& text);

/// The solution family named by config.family. Throws ConfigError when the
/// family's preconditions fail.
SolutionFamily make_family(const RunConfig& config);

}  // namespace nrt::cli
