#pragma once

// Run configuration: strict JSON parsing (duplicate keys and unknown keys
// rejected, parse errors reported with line/column) plus validation and
// defaulting into the solver structures.

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "muskat/errors.hpp"
#include "muskat/geometry.hpp"
#include "muskat/integrator.hpp"

namespace muskat {

struct InitialSpec {
  struct Mode {
    int k = 1;
    double amplitude = 0.0;
    double phase = 0.0;
  };
  std::vector<Mode> modes;     // used when snapshot_path is empty
  std::string snapshot_path;   // restart source

  bool from_snapshot() const { return !snapshot_path.empty(); }
};

struct OutputSpec {
  std::string directory = "out";
  std::set<std::string> emit = {"norms", "curves", "spectrum", "vorticity", "diagnostics"};
  int curve_stride = 250;      // snapshots between curve dumps
  int curve_samples = 256;
  int snapshot_stride = 1000;  // snapshots between spectrum/restart records
};

struct RunConfig {
  PhysicalParams params{};
  IntegratorConfig integrator{};
  InitialSpec initial{};
  OutputSpec output{};
};

namespace detail {

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// SAX handler that builds the DOM while rejecting duplicate object keys.
class StrictSax {
 public:
  using json = nlohmann::json;

  explicit StrictSax(json& root) : dom_(root, /*allow_exceptions=*/true) {}

  bool null() { return dom_.null(); }
  bool boolean(bool v) { return dom_.boolean(v); }
  bool number_integer(json::number_integer_t v) { return dom_.number_integer(v); }
  bool number_unsigned(json::number_unsigned_t v) { return dom_.number_unsigned(v); }
  bool number_float(json::number_float_t v, const std::string& s) {
    return dom_.number_float(v, s);
  }
  bool string(std::string& v) { return dom_.string(v); }
  bool binary(json::binary_t& v) { return dom_.binary(v); }
  bool start_object(std::size_t n) {
    scopes_.emplace_back();
    return dom_.start_object(n);
  }
  bool key(std::string& v) {
    if (!scopes_.back().insert(v).second) {
      duplicate_key = v;
      return false;
    }
    return dom_.key(v);
  }
  bool end_object() {
    scopes_.pop_back();
    return dom_.end_object();
  }
  bool start_array(std::size_t n) { return dom_.start_array(n); }
  bool end_array() { return dom_.end_array(); }
  bool parse_error(std::size_t position, const std::string&,
                   const nlohmann::detail::exception& ex) {
    error_byte = position;
    error_what = ex.what();
    return false;
  }

  std::string duplicate_key;
  std::size_t error_byte = 0;
  std::string error_what;

 private:
  nlohmann::detail::json_sax_dom_parser<json> dom_;
  std::vector<std::set<std::string>> scopes_;
};

inline nlohmann::json parse_strict_json(const std::string& text) {
  nlohmann::json root;
  StrictSax sax(root);
  const bool ok = nlohmann::json::sax_parse(text, &sax);
  if (!sax.duplicate_key.empty()) {
    // best-effort location: second textual occurrence of the quoted key
    const std::string needle = "\"" + sax.duplicate_key + "\"";
    std::size_t pos = text.find(needle);
    if (pos != std::string::npos) pos = text.find(needle, pos + 1);
    int line = -1, col = -1;
    if (pos != std::string::npos) {
      auto [l, c] = line_column(text, pos);
      line = l;
      col = c;
    }
    std::ostringstream msg;
    msg << "parse error: duplicate key \"" << sax.duplicate_key << "\"";
    if (line > 0) msg << " at line " << line << ", column " << col;
    throw ConfigError(msg.str(), line, col);
  }
  if (!ok) {
    const auto [line, col] = line_column(text, sax.error_byte > 0 ? sax.error_byte - 1 : 0);
    std::ostringstream msg;
    msg << "parse error at line " << line << ", column " << col << ": " << sax.error_what;
    throw ConfigError(msg.str(), line, col);
  }
  return root;
}

class ConfigReader {
 public:
  using json = nlohmann::json;

  ConfigReader() = default;

  void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) errors_.push_back(path + ": expected an object");
  }

  void check_known_keys(const json& j, const std::string& path,
                        const std::set<std::string>& known) {
    if (!j.is_object()) return;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!known.count(it.key())) {
        errors_.push_back(path + ": unknown key \"" + it.key() + "\"");
      }
    }
  }

  double number(const json& j, const std::string& path, double fallback) {
    if (!j.contains(path_leaf(path))) return fallback;
    const auto& v = j.at(path_leaf(path));
    if (!v.is_number()) {
      errors_.push_back(path + ": expected a number");
      return fallback;
    }
    return v.get<double>();
  }

  int integer(const json& j, const std::string& path, int fallback) {
    if (!j.contains(path_leaf(path))) return fallback;
    const auto& v = j.at(path_leaf(path));
    if (!v.is_number_integer()) {
      errors_.push_back(path + ": expected an integer");
      return fallback;
    }
    return v.get<int>();
  }

  std::string text(const json& j, const std::string& path, const std::string& fallback) {
    if (!j.contains(path_leaf(path))) return fallback;
    const auto& v = j.at(path_leaf(path));
    if (!v.is_string()) {
      errors_.push_back(path + ": expected a string");
      return fallback;
    }
    return v.get<std::string>();
  }

  void record(const std::string& msg) { errors_.push_back(msg); }

  void finish() const {
    if (errors_.empty()) return;
    std::ostringstream msg;
    msg << "validation error:";
    for (const auto& e : errors_) msg << "\n  - " << e;
    throw ConfigError(msg.str());
  }

 private:
  static std::string path_leaf(const std::string& path) {
    const auto dot = path.rfind('.');
    return dot == std::string::npos ? path : path.substr(dot + 1);
  }

  std::vector<std::string> errors_;
};

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  const nlohmann::json root = detail::parse_strict_json(text);
  detail::ConfigReader rd;
  RunConfig cfg;

  rd.require_object(root, "<config>");
  rd.check_known_keys(root, "<config>", {"params", "integrator", "initial", "output"});

  if (root.contains("params")) {
    const auto& p = root.at("params");
    rd.require_object(p, "params");
    rd.check_known_keys(p, "params", {"A_mu", "A_rhosigma"});
    cfg.params.A_mu = rd.number(p, "params.A_mu", 0.0);
    cfg.params.A_rhosigma = rd.number(p, "params.A_rhosigma", 0.0);
    if (!(cfg.params.A_mu >= -1.0 && cfg.params.A_mu <= 1.0)) {
      rd.record("params.A_mu outside [-1,1]");
    }
  } else {
    rd.record("params: section is required");
  }

  if (root.contains("integrator")) {
    const auto& g = root.at("integrator");
    rd.require_object(g, "integrator");
    rd.check_known_keys(g, "integrator",
                        {"scheme", "dt", "t_end", "n_max", "tol_vorticity", "safety",
                         "dealias_factor", "nu", "floor_norm", "area_tol", "max_halvings"});
    const std::string scheme = rd.text(g, "integrator.scheme", "etdrk2-diagonalized");
    if (scheme == "etdrk2-diagonalized") {
      cfg.integrator.scheme = Scheme::etdrk2_diagonalized;
    } else if (scheme == "rk4-explicit") {
      cfg.integrator.scheme = Scheme::rk4_explicit;
    } else {
      rd.record("integrator.scheme: must be etdrk2-diagonalized or rk4-explicit");
    }
    cfg.integrator.dt = rd.number(g, "integrator.dt", cfg.integrator.dt);
    cfg.integrator.t_end = rd.number(g, "integrator.t_end", cfg.integrator.t_end);
    cfg.integrator.n_max = rd.integer(g, "integrator.n_max", cfg.integrator.n_max);
    cfg.integrator.tol_vorticity = rd.number(g, "integrator.tol_vorticity", cfg.integrator.tol_vorticity);
    cfg.integrator.safety = rd.number(g, "integrator.safety", cfg.integrator.safety);
    cfg.integrator.dealias_factor = rd.integer(g, "integrator.dealias_factor", cfg.integrator.dealias_factor);
    cfg.integrator.nu = rd.number(g, "integrator.nu", cfg.integrator.nu);
    cfg.integrator.floor_norm = rd.number(g, "integrator.floor_norm", cfg.integrator.floor_norm);
    cfg.integrator.area_tol = rd.number(g, "integrator.area_tol", cfg.integrator.area_tol);
    cfg.integrator.max_halvings = rd.integer(g, "integrator.max_halvings", cfg.integrator.max_halvings);
    if (!(cfg.integrator.dt > 0.0)) rd.record("integrator.dt must be > 0");
    if (!(cfg.integrator.t_end >= 0.0)) rd.record("integrator.t_end must be >= 0");
    if (cfg.integrator.n_max < 2) rd.record("integrator.n_max must be >= 2");
  }

  if (root.contains("initial")) {
    const auto& ini = root.at("initial");
    rd.require_object(ini, "initial");
    rd.check_known_keys(ini, "initial", {"modes", "snapshot"});
    const bool has_modes = ini.contains("modes");
    const bool has_snapshot = ini.contains("snapshot");
    if (has_modes == has_snapshot) {
      rd.record("initial: exactly one of \"modes\" or \"snapshot\" is required");
    }
    if (has_snapshot) {
      cfg.initial.snapshot_path = rd.text(ini, "initial.snapshot", "");
    }
    if (has_modes) {
      const auto& arr = ini.at("modes");
      if (!arr.is_array() || arr.empty()) {
        rd.record("initial.modes: expected a non-empty array of [k, amplitude, phase]");
      } else {
        for (const auto& entry : arr) {
          if (!entry.is_array() || entry.size() < 2 || entry.size() > 3 ||
              !entry.at(0).is_number_integer() || !entry.at(1).is_number() ||
              (entry.size() == 3 && !entry.at(2).is_number())) {
            rd.record("initial.modes: each entry must be [k, amplitude] or [k, amplitude, phase]");
            continue;
          }
          InitialSpec::Mode m;
          m.k = entry.at(0).get<int>();
          m.amplitude = entry.at(1).get<double>();
          m.phase = entry.size() == 3 ? entry.at(2).get<double>() : 0.0;
          if (m.k < 1) rd.record("initial.modes: mode numbers must be >= 1");
          if (m.k > cfg.integrator.n_max) rd.record("initial.modes: mode number exceeds n_max");
          cfg.initial.modes.push_back(m);
        }
      }
    }
  } else {
    rd.record("initial: section is required");
  }

  if (root.contains("output")) {
    const auto& o = root.at("output");
    rd.require_object(o, "output");
    rd.check_known_keys(o, "output",
                        {"directory", "emit", "curve_stride", "curve_samples", "snapshot_stride"});
    cfg.output.directory = rd.text(o, "output.directory", cfg.output.directory);
    cfg.output.curve_stride = rd.integer(o, "output.curve_stride", cfg.output.curve_stride);
    cfg.output.curve_samples = rd.integer(o, "output.curve_samples", cfg.output.curve_samples);
    cfg.output.snapshot_stride = rd.integer(o, "output.snapshot_stride", cfg.output.snapshot_stride);
    if (o.contains("emit")) {
      const auto& e = o.at("emit");
      if (!e.is_array()) {
        rd.record("output.emit: expected an array of output kinds");
      } else {
        cfg.output.emit.clear();
        const std::set<std::string> known = {"norms", "curves", "spectrum", "vorticity", "diagnostics"};
        for (const auto& v : e) {
          if (!v.is_string() || !known.count(v.get<std::string>())) {
            rd.record("output.emit: unknown output kind");
          } else {
            cfg.output.emit.insert(v.get<std::string>());
          }
        }
      }
    }
    if (cfg.output.curve_stride < 1) rd.record("output.curve_stride must be >= 1");
    if (cfg.output.curve_samples < 8) rd.record("output.curve_samples must be >= 8");
    if (cfg.output.snapshot_stride < 1) rd.record("output.snapshot_stride must be >= 1");
  }

  rd.finish();
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

// Resolved configuration with all defaults filled in, as a JSON document;
// round-trips through parse_config to the identical RunConfig.
inline nlohmann::json resolved_config_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["params"] = {{"A_mu", cfg.params.A_mu}, {"A_rhosigma", cfg.params.A_rhosigma}};
  j["integrator"] = {
      {"scheme", cfg.integrator.scheme == Scheme::etdrk2_diagonalized ? "etdrk2-diagonalized"
                                                                      : "rk4-explicit"},
      {"dt", cfg.integrator.dt},
      {"t_end", cfg.integrator.t_end},
      {"n_max", cfg.integrator.n_max},
      {"tol_vorticity", cfg.integrator.tol_vorticity},
      {"safety", cfg.integrator.safety},
      {"dealias_factor", cfg.integrator.dealias_factor},
      {"nu", cfg.integrator.nu},
      {"floor_norm", cfg.integrator.floor_norm},
      {"area_tol", cfg.integrator.area_tol},
      {"max_halvings", cfg.integrator.max_halvings}};
  if (cfg.initial.from_snapshot()) {
    j["initial"] = {{"snapshot", cfg.initial.snapshot_path}};
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : cfg.initial.modes) {
      arr.push_back({m.k, m.amplitude, m.phase});
    }
    j["initial"] = {{"modes", arr}};
  }
  nlohmann::json emit = nlohmann::json::array();
  for (const auto& e : cfg.output.emit) emit.push_back(e);
  j["output"] = {{"directory", cfg.output.directory},
                 {"emit", emit},
                 {"curve_stride", cfg.output.curve_stride},
                 {"curve_samples", cfg.output.curve_samples},
                 {"snapshot_stride", cfg.output.snapshot_stride}};
  return j;
}

// Initial shape from the configured mode list: Σ amp cos(k a + phase).
inline SpectralFunction shape_from_modes(const InitialSpec& spec, int n_max) {
  SpectralFunction f(n_max);
  for (const auto& m : spec.modes) {
    f.add_to_coef(m.k, 0.5 * m.amplitude * std::polar(1.0, m.phase));
  }
  return f;
}

}  // namespace muskat
