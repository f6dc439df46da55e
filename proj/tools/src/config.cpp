#include "nrt/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "nrt/errors.hpp"

namespace nrt::cli {

namespace {

struct KeySpec {
  const char* key;
  const char* fallback;
};

// Canonical key order; also the set of accepted keys.
const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"run.command", "evolve-free"},
      {"model.q", "2"},
      {"model.hbar", "1"},
      {"model.m", "1"},
      {"model.K", "1"},
      {"family.name", "free"},
      {"family.alpha_re", "1"},
      {"family.alpha_im", "0"},
      {"family.beta_re", "1"},
      {"family.beta_im", "0"},
      {"family.gamma_re", "1"},
      {"family.gamma_im", "0"},
      {"family.k", "1"},
      {"family.pair", "nrt"},
      {"family.k0", "0"},
      {"family.b_c", "1"},
      {"family.t0", "1"},
      {"family.pulse_a_re", "1"},
      {"family.pulse_a_im", "0"},
      {"family.pulse_b_re", "0"},
      {"family.pulse_b_im", "0"},
      {"family.pulse_c1_re", "0.2"},
      {"family.pulse_c1_im", "0"},
      {"family.frozen_b", "1"},
      {"family.frozen_c", "1"},
      {"grid.x_min", "-10"},
      {"grid.x_max", "10"},
      {"grid.nx", "801"},
      {"grid.t", "0:2:9"},
      {"check.tol", "1e-8"},
      {"check.residual_tol", "1e-8"},
      {"check.dispersion", "false"},
      {"check.pde_t_end", "0.1"},
      {"check.pde_tol", "1e-3"},
      {"check.pde_boundary_eps", "1e-2"},
      {"check.pde_boundary", "analytic"},
      {"output.dir", "nrt_out"},
  };
  return specs;
}

bool known_key(const std::string& key) {
  const auto& specs = key_specs();
  return std::any_of(specs.begin(), specs.end(), [&](const KeySpec& s) { return key == s.key; });
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const ConfigValues& v, const std::string& key) {
  const std::string& text = v.at(key);
  double out = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  if (!std::isfinite(out)) throw ConfigError(key, "must be finite");
  return out;
}

bool to_bool(const ConfigValues& v, const std::string& key) {
  const std::string& text = v.at(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::string num(double x) { return fmt::format("{}", x); }

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = {"free",   "plane-wave", "singular", "pulsating-q3",
                                                 "frozen", "harmonic",   "gaussian"};
  return names;
}

// Family fixed by the subcommand, or empty when family.name decides.
std::string family_for_command(const std::string& command) {
  if (command == "evolve-free" || command == "reproduce-fig1") return "free";
  if (command == "evolve-harmonic") return "harmonic";
  if (command == "plane-wave") return "plane-wave";
  if (command == "pulsating-q3") return "pulsating-q3";
  if (command == "frozen") return "frozen";
  if (command == "singular") return "singular";
  return {};
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "evolve-free", "evolve-harmonic", "plane-wave",      "pulsating-q3",  "frozen",
      "singular",    "norm-scan",       "genfamily-check", "pde-crosscheck", "reproduce-fig1"};
  return names;
}

ConfigValues default_values(const std::string& command) {
  ConfigValues v;
  for (const auto& s : key_specs()) v[s.key] = s.fallback;
  v["run.command"] = command;
  const std::string fam = family_for_command(command);
  if (!fam.empty()) v["family.name"] = fam;
  if (command == "evolve-harmonic") {
    v["grid.t"] = "-1:1:5";
    v["grid.x_min"] = "-20";
    v["grid.x_max"] = "20";
  } else if (command == "plane-wave") {
    v["grid.t"] = "0:1:5";
  } else if (command == "pulsating-q3") {
    v["model.q"] = "3";
    v["grid.t"] = "0:3.1415926535897931:5";
  } else if (command == "frozen") {
    v["model.q"] = "3";
    v["grid.t"] = "0";
  } else if (command == "singular") {
    v["grid.t"] = "0:9:10";
  } else if (command == "norm-scan") {
    v["family.name"] = "singular";
    v["grid.t"] = "0:9:10";
  } else if (command == "genfamily-check") {
    v["grid.t"] = "0:0.5:6";
    v["grid.x_min"] = "-1.2";
    v["grid.x_max"] = "1.2";
    v["grid.nx"] = "49";
  } else if (command == "pde-crosscheck") {
    v["grid.x_min"] = "-15";
    v["grid.x_max"] = "15";
    v["grid.nx"] = "601";
    v["grid.t"] = "0";
  }
  return v;
}

ConfigValues parse_config_text(const std::string& text) {
  ConfigValues out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value'");
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (name.empty()) throw ConfigError(where, "missing key");
    if (section.empty()) throw ConfigError(where, "key '" + name + "' outside a [section]");
    const std::string key = section + "." + name;
    if (!known_key(key)) throw ConfigError(key, "unknown key");
    out[key] = value;
  }
  return out;
}

ConfigValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void merge_values(ConfigValues& base, const ConfigValues& overrides) {
  for (const auto& [k, v] : overrides) base[k] = v;
}

std::vector<double> parse_time_list(const std::string& text) {
  const auto parse = [&](const std::string& s) {
    ConfigValues tmp{{"grid.t", trim(s)}};
    return to_double(tmp, "grid.t");
  };
  std::vector<double> out;
  if (trim(text).empty()) throw ConfigError("grid.t", "time list is empty");
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("grid.t", "range must read start:stop:count");
    const double a = parse(parts[0]);
    const double b = parse(parts[1]);
    const double n = parse(parts[2]);
    if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("grid.t", "count must be a positive integer");
    const auto count = static_cast<std::size_t>(n);
    if (count == 1) return {a};
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(i + 1 == count ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse(item));
  return out;
}

RunConfig config_from_values(const ConfigValues& input) {
  ConfigValues v = input;
  for (const auto& [key, value] : input) {
    if (!known_key(key)) throw ConfigError(key, "unknown key");
  }
  const std::string command = v.count("run.command") ? v.at("run.command") : "evolve-free";
  const auto& cmds = subcommands();
  if (std::find(cmds.begin(), cmds.end(), command) == cmds.end()) {
    throw ConfigError("run.command", "unknown subcommand '" + command + "'");
  }
  // Fill gaps from the subcommand defaults.
  ConfigValues full = default_values(command);
  merge_values(full, v);
  v = full;

  RunConfig c;
  c.command = command;
  c.family = v.at("family.name");
  c.params.q = to_double(v, "model.q");
  c.params.hbar = to_double(v, "model.hbar");
  c.params.m = to_double(v, "model.m");
  c.params.K = to_double(v, "model.K");
  if (!(c.params.hbar > 0.0)) throw ConfigError("model.hbar", "must be positive");
  if (!(c.params.m > 0.0)) throw ConfigError("model.m", "must be positive");
  if (!(c.params.K >= 0.0)) throw ConfigError("model.K", "must be non-negative");

  c.alpha = {to_double(v, "family.alpha_re"), to_double(v, "family.alpha_im")};
  c.beta = {to_double(v, "family.beta_re"), to_double(v, "family.beta_im")};
  c.gamma = {to_double(v, "family.gamma_re"), to_double(v, "family.gamma_im")};
  c.k = to_double(v, "family.k");
  c.pair = v.at("family.pair");
  c.k0 = to_double(v, "family.k0");
  c.b_c = to_double(v, "family.b_c");
  c.t0 = to_double(v, "family.t0");
  c.pulse_a = {to_double(v, "family.pulse_a_re"), to_double(v, "family.pulse_a_im")};
  c.pulse_b = {to_double(v, "family.pulse_b_re"), to_double(v, "family.pulse_b_im")};
  c.pulse_c1 = {to_double(v, "family.pulse_c1_re"), to_double(v, "family.pulse_c1_im")};
  c.frozen_b = to_double(v, "family.frozen_b");
  c.frozen_c = to_double(v, "family.frozen_c");

  c.grid.x_min = to_double(v, "grid.x_min");
  c.grid.x_max = to_double(v, "grid.x_max");
  const double nx = to_double(v, "grid.nx");
  if (!(nx >= 5.0) || nx != std::floor(nx) || nx > 1e8) {
    throw ConfigError("grid.nx", "must be an integer >= 5");
  }
  c.grid.n = static_cast<std::size_t>(nx);
  if (!(c.grid.x_min < c.grid.x_max)) throw ConfigError("grid.x_min", "must be below grid.x_max");
  c.times = parse_time_list(v.at("grid.t"));
  if (c.times.empty()) throw ConfigError("grid.t", "time list is empty");

  c.tol = to_double(v, "check.tol");
  c.residual_tol = to_double(v, "check.residual_tol");
  c.check_dispersion = to_bool(v, "check.dispersion");
  c.pde_t_end = to_double(v, "check.pde_t_end");
  c.pde_tol = to_double(v, "check.pde_tol");
  c.pde_boundary_eps = to_double(v, "check.pde_boundary_eps");
  for (const char* key : {"check.tol", "check.residual_tol", "check.pde_tol", "check.pde_boundary_eps"}) {
    if (!(to_double(v, key) > 0.0)) throw ConfigError(key, "tolerance must be positive");
  }
  if (!(c.pde_t_end > 0.0)) throw ConfigError("check.pde_t_end", "must be positive");
  const std::string boundary = v.at("check.pde_boundary");
  if (boundary != "analytic" && boundary != "pinned") {
    throw ConfigError("check.pde_boundary", "expected analytic or pinned");
  }
  c.pde_analytic_boundary = boundary == "analytic";
  c.output_dir = v.at("output.dir");
  if (c.output_dir.empty()) throw ConfigError("output.dir", "must not be empty");

  // Family selection and preconditions.
  const std::string fixed = family_for_command(command);
  if (!fixed.empty() && c.family != fixed) {
    throw ConfigError("family.name", "subcommand " + command + " runs the " + fixed + " family");
  }
  const auto& names = family_names();
  if (command != "genfamily-check" && std::find(names.begin(), names.end(), c.family) == names.end()) {
    throw ConfigError("family.name", "unknown family '" + c.family + "'");
  }
  if (command == "pde-crosscheck" && c.family != "free" && c.family != "gaussian") {
    throw ConfigError("family.name", "pde-crosscheck runs the free or gaussian family");
  }
  if (command == "genfamily-check" && c.pair != "nrt" && c.pair != "sinh") {
    throw ConfigError("family.pair", "expected nrt or sinh");
  }
  if (c.family == "free" && std::abs(c.params.q - 3.0) < 1e-12) {
    throw ConfigError("model.q", "q = 3 is outside the free family; use the pulsating-q3 subcommand");
  }
  if (c.family == "pulsating-q3" && std::abs(c.params.q - 3.0) > 1e-12) {
    throw ConfigError("model.q", "pulsating-q3 fixes q = 3");
  }
  if (c.family == "gaussian" && !is_q_one(c.params.q)) {
    throw ConfigError("model.q", "the gaussian family is the q = 1 packet");
  }
  if (command != "genfamily-check") {
    (void)make_family(c);
    if (c.family == "singular") {
      for (double t : c.times) {
        if (!(t > -c.t0)) throw ConfigError("grid.t", "singular packet needs t > -t0");
      }
    }
    if (c.family == "harmonic") {
      const double tc = harmonic_singular_time(c.params);
      for (double t : c.times) {
        if (!(std::abs(t) < tc)) throw ConfigError("grid.t", "harmonic packet needs |t| < t_c = " + num(tc));
      }
    }
  }
  return c;
}

std::string serialize(const RunConfig& c) {
  std::string out;
  const auto line = [&](const char* key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  out += "[run]\n";
  line("command", c.command);
  out += "\n[model]\n";
  line("q", num(c.params.q));
  line("hbar", num(c.params.hbar));
  line("m", num(c.params.m));
  line("K", num(c.params.K));
  out += "\n[family]\n";
  line("name", c.family);
  line("alpha_re", num(c.alpha.real()));
  line("alpha_im", num(c.alpha.imag()));
  line("beta_re", num(c.beta.real()));
  line("beta_im", num(c.beta.imag()));
  line("gamma_re", num(c.gamma.real()));
  line("gamma_im", num(c.gamma.imag()));
  line("k", num(c.k));
  line("pair", c.pair);
  line("k0", num(c.k0));
  line("b_c", num(c.b_c));
  line("t0", num(c.t0));
  line("pulse_a_re", num(c.pulse_a.real()));
  line("pulse_a_im", num(c.pulse_a.imag()));
  line("pulse_b_re", num(c.pulse_b.real()));
  line("pulse_b_im", num(c.pulse_b.imag()));
  line("pulse_c1_re", num(c.pulse_c1.real()));
  line("pulse_c1_im", num(c.pulse_c1.imag()));
  line("frozen_b", num(c.frozen_b));
  line("frozen_c", num(c.frozen_c));
  out += "\n[grid]\n";
  line("x_min", num(c.grid.x_min));
  line("x_max", num(c.grid.x_max));
  line("nx", std::to_string(c.grid.n));
  std::string times;
  for (std::size_t i = 0; i < c.times.size(); ++i) times += (i ? "," : "") + num(c.times[i]);
  line("t", times);
  out += "\n[check]\n";
  line("tol", num(c.tol));
  line("residual_tol", num(c.residual_tol));
  line("dispersion", c.check_dispersion ? "true" : "false");
  line("pde_t_end", num(c.pde_t_end));
  line("pde_tol", num(c.pde_tol));
  line("pde_boundary_eps", num(c.pde_boundary_eps));
  line("pde_boundary", c.pde_analytic_boundary ? "analytic" : "pinned");
  out += "\n[output]\n";
  line("dir", c.output_dir);
  return out;
}

SolutionFamily make_family(const RunConfig& c) {
  SolutionFamily family;
  try {
    if (c.family == "free") {
      family = family::FreeQGaussian{{c.alpha, c.beta, c.gamma}};
    } else if (c.family == "plane-wave") {
      family = family::QPlaneWave{PlaneWaveMode::from_wave_number(c.k, c.params)};
    } else if (c.family == "singular") {
      family = family::SingularPacket{c.b_c, c.t0};
    } else if (c.family == "pulsating-q3") {
      family = family::PulsatingQ3{c.pulse_a, c.pulse_b, c.pulse_c1};
    } else if (c.family == "frozen") {
      family = family::Frozen{c.frozen_b, c.frozen_c, std::nullopt};
    } else if (c.family == "harmonic") {
      family = family::HarmonicQuasiStationary{harmonic_critical_a(c.params)};
    } else if (c.family == "gaussian") {
      if (c.alpha.imag() != 0.0) throw ConfigError("family.alpha_im", "gaussian width must be real");
      family = family::GaussianLimit{c.k0, c.alpha.real()};
    } else {
      throw ConfigError("family.name", "unknown family '" + c.family + "'");
    }
    validate_family(family, c.params);
  } catch (const nrt::Error& e) {
    throw ConfigError("family", e.what());
  }
  return family;
}

}  // namespace nrt::cli
