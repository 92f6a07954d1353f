#pragma once

// Run configuration: one `section.key = value` per line, `#` starts a comment.
// Every key must appear in the schema below; anything else is rejected.

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "warpspec/error.hpp"

namespace warpspec {

struct ConfigKey {
  const char* name;
  const char* fallback;  ///< empty: unset unless given
  const char* help;
};

inline const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys = {
      {"profile.kind", "power_law", "power_law | oscillatory_exp | exp_power | sampled"},
      {"profile.theta", "1", "power_law: h = r^theta"},
      {"profile.r_min", "1", "power_law / exp_power: first admissible radius"},
      {"profile.alpha", "0.75", "oscillatory_exp: A = r^-alpha + k sin(2r)/r"},
      {"profile.k", "6", "oscillatory_exp: oscillation amplitude"},
      {"profile.c", "1", "exp_power: h = exp(c r^p)"},
      {"profile.p", "1", "exp_power: exponent"},
      {"profile.file", "", "sampled: CSV with header r,h"},
      {"end.n", "2", "manifold dimension"},
      {"end.r0", "", "start of the end (default: profile r_min)"},
      {"end.sphere_degree", "64", "cross-section S^{n-1}: harmonics up to this degree"},
      {"end.eigenvalues", "", "explicit cross-section spectrum, comma separated, starting at 0"},
      {"reference.kind", "auto", "auto | none | power_law | exp_power | power_decay"},
      {"reference.theta", "1", "power_law reference exponent"},
      {"reference.c", "1", "exp_power reference coefficient"},
      {"reference.p", "1", "exp_power reference exponent"},
      {"reference.alpha", "0.75", "power_decay reference: f'/f = r^-alpha"},
      {"window.lo", "2", "condition window start"},
      {"window.hi", "2048", "condition window end"},
      {"constants.a", "", "Hessian band lower width"},
      {"constants.b", "", "Hessian band upper width"},
      {"constants.A0", "", "A >= A0 / r"},
      {"constants.B0", "", "A <= B0 / sqrt(r)"},
      {"constants.b1", "", "Ricci lower bound constant"},
      {"constants.K3", "", "variation bound constant"},
      {"constants.gamma", "1", "flux exponent"},
      {"constants.theta", "", "power-law reference exponent for beta"},
      {"constants.lambda", "1", "spectral parameter for eta1"},
      {"constants.curvature_a", "", "curvature band constant (check subcommand)"},
      {"thresholds.gamma_sweep", "", "lo:hi:step sweep of lambda1 over gamma"},
      {"scan.modes", "", "number of modes (default: pruning rule)"},
      {"scan.lambda_lo", "0.1", "lambda grid start"},
      {"scan.lambda_hi", "4", "lambda grid end"},
      {"scan.lambda_step", "0.05", "lambda grid step"},
      {"scan.X", "", "truncation (default x0 + max(200, 100/sqrt(lambda_lo)))"},
      {"scan.boundary", "dirichlet", "dirichlet | neumann | robin"},
      {"scan.robin_c", "0", "robin: w'(x0) = c w(x0)"},
      {"scan.threads", "0", "worker threads (0 = hardware)"},
      {"scan.dump_potential", "false", "write potential_<mode>.csv"},
      {"scan.dump_lambda", "", "write trajectory.csv for this lambda (mode scan.dump_mode)"},
      {"scan.dump_mode", "0", "mode of the trajectory dump"},
      {"identity.beta", "0", "weight exponent"},
      {"identity.s", "", "lower radius (default end start)"},
      {"identity.t", "10", "upper radius"},
      {"identity.function", "power", "power | exponential"},
      {"identity.exponent", "-1", "v = r^e or v = exp(e r)"},
      {"identity.random_draws", "0", "additional randomized draws"},
      {"identity.seed", "12345", "seed of the randomized draws"},
      {"counterexample.alpha", "0.75", "critical profile alpha"},
      {"counterexample.k", "6", "critical profile k"},
      {"counterexample.n", "2", "dimension"},
      {"counterexample.lambda_lo", "0.1", ""},
      {"counterexample.lambda_hi", "4", ""},
      {"counterexample.lambda_step", "0.05", ""},
      {"counterexample.X", "", "truncation override"},
      {"counterexample.max_modes", "0", "0 = pruning rule"},
      {"counterexample.threads", "0", ""},
      {"tolerances.rtol", "1e-10", "integrator relative tolerance"},
      {"tolerances.atol", "1e-10", "integrator absolute tolerance"},
      {"tolerances.max_step", "0.1", "integrator maximum step"},
      {"tolerances.segment_length", "2", "Prufer frequency segment length"},
      {"tolerances.frequency_floor", "1e-4", "floor of S^2"},
      {"tolerances.exponent_margin", "0.1", "L2 candidate: exponent > 1/2 + margin"},
      {"tolerances.oscillatory_band", "0.1", "oscillatory: |exponent| <= band"},
      {"tolerances.tail_mass_min", "0.15", "oscillatory: tail mass ratio floor"},
      {"tolerances.fit_r2_min", "0.9", "L2 candidate: envelope fit R^2 floor"},
      {"tolerances.min_contrast", "2", "refinement contrast floor"},
      {"tolerances.min_decay_exponent", "0.1", "tends-to-zero exponent floor"},
      {"tolerances.negligible", "1e-12", "absolute floor for vanishing envelopes"},
      {"tolerances.margin_snap", "1e-12", "relative snap of margins to zero"},
      {"tolerances.identity_residual", "1e-8", "flux identity residual bound"},
      {"tolerances.quadrature", "1e-14", "flux identity quadrature tolerance"},
      {"tolerances.grid_points_per_unit", "64", "condition grid density"},
      {"tolerances.grid_max_points", "2097152", "condition grid size cap"},
  };
  return keys;
}

class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in, const std::string& origin = "<config>") {
    Config c;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(number) + ": expected section.key = value");
      }
      c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), origin + ":" + std::to_string(number));
    }
    return c;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse(in, path);
  }

  /// Applies "section.key=value".
  void apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "--set");
  }

  void set(const std::string& key, const std::string& value, const std::string& where = "") {
    if (!known(key)) {
      throw ConfigError((where.empty() ? "" : where + ": ") + "unknown key '" + key + "'");
    }
    if (value.empty()) throw ConfigError((where.empty() ? "" : where + ": ") + "empty value for " + key);
    values_[key] = value;
  }

  bool has(const std::string& key) const {
    require_known(key);
    return values_.count(key) > 0 || !std::string(lookup(key).fallback).empty();
  }

  bool given(const std::string& key) const {
    require_known(key);
    return values_.count(key) > 0;
  }

  std::string str(const std::string& key) const {
    require_known(key);
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    const std::string fallback = lookup(key).fallback;
    if (fallback.empty()) throw ConfigError("missing required key " + key);
    return fallback;
  }

  double num(const std::string& key) const { return to_double(str(key), key); }

  long integer(const std::string& key) const {
    const double v = num(key);
    if (v != static_cast<double>(static_cast<long>(v))) throw ConfigError(key + " must be an integer");
    return static_cast<long>(v);
  }

  bool flag(const std::string& key) const {
    const auto v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + " must be true or false");
  }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), key));
    return out;
  }

  static double to_double(const std::string& text, const std::string& key) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
      throw ConfigError("value '" + text + "' of " + key + " is not a number");
    }
    return v;
  }

 private:
  static bool known(const std::string& key) {
    const auto& s = config_schema();
    return std::any_of(s.begin(), s.end(), [&](const ConfigKey& k) { return key == k.name; });
  }
  static void require_known(const std::string& key) {
    if (!known(key)) throw ConfigError("internal: key '" + key + "' missing from the schema");
  }
  static const ConfigKey& lookup(const std::string& key) {
    for (const auto& k : config_schema()) {
      if (key == k.name) return k;
    }
    throw ConfigError("unknown key '" + key + "'");
  }
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
  }

  std::map<std::string, std::string> values_;
};

/// "lo:hi:step"
struct GridSpec {
  double lo = 0.0, hi = 0.0, step = 0.0;

  static GridSpec parse(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(Config::to_double(item, "grid"));
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw ConfigError("grid '" + text + "' must be lo:hi:step with lo <= hi, step > 0");
    }
    return {parts[0], parts[1], parts[2]};
  }
};

}  // namespace warpspec
