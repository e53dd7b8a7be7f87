#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svqe/density.hpp"
#include "svqe/estimator.hpp"

namespace svqe {

// Raised when a config cannot be parsed or validated; what() carries the full
// human-readable report.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& report) : std::runtime_error(report) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

// Minimal INI-style reader: [section] headers, key = value pairs, comments
// with '#' or ';'.  Keys are tracked so unknown entries can be reported.
class IniFile {
 public:
  static IniFile parse(const std::string& text) {
    IniFile ini;
    std::istringstream stream(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(stream, line)) {
      ++line_no;
      const auto comment = line.find_first_of("#;");
      if (comment != std::string::npos) line = line.substr(0, comment);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config line " + std::to_string(line_no) +
                            ": unterminated section header");
        section = detail::trim(line.substr(1, line.size() - 2));
        ini.sections_[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": expected key = value");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
      ini.sections_[section][key] = value;
    }
    return ini;
  }

  static IniFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key) const {
    return sections_.at(section).at(key);
  }

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Fully resolved experiment configuration; every field has a default so the
// echo written into summaries reproduces the run exactly.
struct ExperimentConfig {
  // [model]
  std::string model_kind = "sm";  // sm | ph | sm_control | ph_control
  int n_qubits = 9;
  double sm_j = 1.0;
  double sm_delta = 0.7;
  double sm_b = 1.0;
  int ph_block = 4;  // D
  int ph_chi = 1;
  double ph_pert = 0.1;
  bool ph_uniform_signs = false;

  // [ansatz]
  int depth = 3;
  double init_scale = 1e-3;

  // [cost]
  double cost_a = 0.5;
  double cost_b = 0.5;
  double e_tar = 0.0;

  // [evaluator]
  std::string mode = "exact";  // exact | shots | noisy
  std::uint64_t shots = 10000;
  double noise_p1 = 0.0;
  double noise_p2 = 0.0;
  double noise_readout = 0.0;

  // [optimizer]
  std::string optimizer = "adam";  // adam | spsa
  double adam_alpha = 0.1;
  bool spsa_calibrate = true;
  double spsa_a0 = 0.0;
  double spsa_c0 = 0.0;

  // [run]
  int iterations = 300;
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  // [sweep]
  double sweep_min = -4.0;
  double sweep_max = 4.0;
  int sweep_points = 21;

  // [shots_study]
  std::vector<std::uint64_t> study_shots = {10000, 100000, 1000000};
  int study_seeds = 5;
  bool study_include_exact = true;

  // [audit]
  int audit_repetitions = 10000;

  // [noisy_study]
  std::vector<std::uint64_t> noisy_shots = {1000, 5000, 10000, 20000};
  std::uint64_t noisy_total_budget = 535000;

  CostSpec cost_spec() const { return CostSpec{cost_a, cost_b, e_tar}; }
  NoiseModel noise_model() const { return NoiseModel{noise_p1, noise_p2, noise_readout}; }

  nlohmann::ordered_json echo() const {
    nlohmann::ordered_json j;
    j["model"] = {{"kind", model_kind}, {"n_qubits", n_qubits}};
    if (model_kind == "sm" || model_kind == "sm_control") {
      j["model"]["j"] = sm_j;
      j["model"]["delta"] = sm_delta;
      j["model"]["b"] = sm_b;
    } else {
      j["model"]["block"] = ph_block;
      j["model"]["chi"] = ph_chi;
      j["model"]["pert"] = ph_pert;
      j["model"]["uniform_signs"] = ph_uniform_signs;
    }
    j["ansatz"] = {{"depth", depth}, {"init_scale", init_scale}};
    j["cost"] = {{"a", cost_a}, {"b", cost_b}, {"e_tar", e_tar}};
    j["evaluator"] = {{"mode", mode},
                      {"shots", shots},
                      {"p1", noise_p1},
                      {"p2", noise_p2},
                      {"readout", noise_readout}};
    j["optimizer"] = {{"kind", optimizer},
                      {"adam_alpha", adam_alpha},
                      {"spsa_calibrate", spsa_calibrate},
                      {"spsa_a0", spsa_a0},
                      {"spsa_c0", spsa_c0}};
    j["run"] = {{"iterations", iterations}, {"seed", seed}, {"out_dir", out_dir}};
    j["sweep"] = {{"min", sweep_min}, {"max", sweep_max}, {"points", sweep_points}};
    j["shots_study"] = {{"shots", study_shots},
                        {"seeds", study_seeds},
                        {"include_exact", study_include_exact}};
    j["audit"] = {{"repetitions", audit_repetitions}};
    j["noisy_study"] = {{"shots", noisy_shots}, {"total_budget", noisy_total_budget}};
    return j;
  }
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const IniFile& ini) : ini_(ini) {}

  template <class T>
  void read(const std::string& section, const std::string& key, T& out) {
    seen_[section].insert(key);
    if (!ini_.has(section, key)) return;
    const std::string raw = ini_.get(section, key);
    try {
      parse_value(raw, out);
    } catch (const std::exception&) {
      errors_.push_back("[" + section + "] " + key + ": cannot parse '" + raw + "'");
    }
  }

  void note_unknown_keys() {
    for (const auto& [section, keys] : ini_.sections()) {
      auto known = seen_.find(section);
      if (known == seen_.end()) {
        errors_.push_back("unknown section [" + section + "]");
        continue;
      }
      for (const auto& [key, value] : keys)
        if (!known->second.count(key))
          errors_.push_back("[" + section + "] unknown key '" + key + "'");
    }
  }

  std::vector<std::string>& errors() { return errors_; }

 private:
  static void parse_value(const std::string& raw, std::string& out) { out = raw; }
  static void parse_value(const std::string& raw, bool& out) {
    if (raw == "true" || raw == "1" || raw == "yes") out = true;
    else if (raw == "false" || raw == "0" || raw == "no") out = false;
    else throw std::invalid_argument("not a boolean");
  }
  static void parse_value(const std::string& raw, int& out) {
    std::size_t used = 0;
    out = std::stoi(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing characters");
  }
  static void parse_value(const std::string& raw, std::uint64_t& out) {
    if (!raw.empty() && raw.front() == '-') throw std::invalid_argument("negative");
    std::size_t used = 0;
    out = std::stoull(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing characters");
  }
  static void parse_value(const std::string& raw, double& out) {
    std::size_t used = 0;
    out = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing characters");
  }
  static void parse_value(const std::string& raw, std::vector<std::uint64_t>& out) {
    std::vector<std::uint64_t> parsed;
    std::istringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) throw std::invalid_argument("empty list item");
      std::uint64_t v = 0;
      parse_value(item, v);
      parsed.push_back(v);
    }
    if (parsed.empty()) throw std::invalid_argument("empty list");
    out = std::move(parsed);
  }

  const IniFile& ini_;
  std::map<std::string, std::set<std::string>> seen_;
  std::vector<std::string> errors_;
};

}  // namespace detail

// Semantic validation; returns all problems found (empty means valid).
inline std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  auto err = [&](const std::string& m) { errors.push_back(m); };

  static const std::set<std::string> kinds{"sm", "ph", "sm_control", "ph_control"};
  if (!kinds.count(c.model_kind))
    err("[model] kind must be one of sm, ph, sm_control, ph_control");
  if (c.n_qubits < 1 || c.n_qubits > dense_qubit_limit)
    err("[model] n_qubits must lie in [1, " + std::to_string(dense_qubit_limit) + "]");
  const bool is_ph = c.model_kind == "ph" || c.model_kind == "ph_control";
  if (is_ph) {
    if (c.ph_block < 2) err("[model] block must be at least 2");
    if (c.ph_chi < 1) err("[model] chi must be at least 1");
    if (c.ph_block >= 2 && c.n_qubits % c.ph_block != 0)
      err("[model] n_qubits must be divisible by block");
    if (c.ph_pert < 0) err("[model] pert must be nonnegative");
    if (c.ph_block >= 2 && c.ph_chi >= 1 &&
        (std::uint64_t{1} << c.ph_block) <= static_cast<std::uint64_t>(c.ph_chi) *
                                                static_cast<std::uint64_t>(c.ph_chi))
      err("[model] needs 2^block > chi^2 for a nonempty annihilating subspace");
  } else {
    if (c.n_qubits < 2) err("[model] sm models need at least 2 sites");
  }

  if (c.depth < 0) err("[ansatz] depth must be nonnegative");
  if (c.init_scale <= 0) err("[ansatz] init_scale must be positive");

  if (c.cost_a < 0 || c.cost_b < 0) err("[cost] a and b must be nonnegative");
  if (std::abs(c.cost_a + c.cost_b - 1.0) > 1e-12) err("[cost] a + b must equal 1");

  static const std::set<std::string> modes{"exact", "shots", "noisy"};
  if (!modes.count(c.mode)) err("[evaluator] mode must be exact, shots, or noisy");
  if (c.mode != "exact" && c.shots < 2) err("[evaluator] shots mode needs shots >= 2");
  if (c.mode == "noisy") {
    if (c.n_qubits > density_qubit_limit)
      err("[evaluator] noisy mode supports at most " + std::to_string(density_qubit_limit) +
          " qubits");
    for (double p : {c.noise_p1, c.noise_p2, c.noise_readout})
      if (p < 0.0 || p > 1.0) {
        err("[evaluator] noise probabilities must lie in [0, 1]");
        break;
      }
  }

  if (c.optimizer != "adam" && c.optimizer != "spsa")
    err("[optimizer] kind must be adam or spsa");
  if (c.optimizer == "adam" && c.adam_alpha <= 0) err("[optimizer] adam_alpha must be positive");
  if (c.optimizer == "spsa" && !c.spsa_calibrate && (c.spsa_a0 <= 0 || c.spsa_c0 <= 0))
    err("[optimizer] spsa without calibrate needs positive spsa_a0 and spsa_c0");

  if (c.iterations < 0) err("[run] iterations must be nonnegative");
  if (c.out_dir.empty()) err("[run] out_dir must not be empty");

  if (c.sweep_points < 1) err("[sweep] points must be at least 1");
  if (c.sweep_points > 1 && c.sweep_min >= c.sweep_max)
    err("[sweep] min must be below max for multi-point grids");

  if (c.study_seeds < 1) err("[shots_study] seeds must be at least 1");
  for (std::uint64_t s : c.study_shots)
    if (s < 2) {
      err("[shots_study] every shot budget must be >= 2");
      break;
    }

  if (c.audit_repetitions < 1) err("[audit] repetitions must be at least 1");

  if (c.noisy_total_budget < 2) err("[noisy_study] total_budget must be at least 2");
  for (std::uint64_t s : c.noisy_shots)
    if (s < 2) {
      err("[noisy_study] every shot setting must be >= 2");
      break;
    }

  return errors;
}

inline std::string format_validation_report(const std::vector<std::string>& errors) {
  std::string report = "invalid configuration:\n";
  for (const auto& e : errors) report += "  - " + e + "\n";
  return report;
}

// Parse + validate in one step; throws ConfigError carrying the report.
inline ExperimentConfig config_from_ini(const IniFile& ini) {
  ExperimentConfig c;
  detail::ConfigReader r(ini);

  r.read("model", "kind", c.model_kind);
  r.read("model", "n_qubits", c.n_qubits);
  r.read("model", "j", c.sm_j);
  r.read("model", "delta", c.sm_delta);
  r.read("model", "b", c.sm_b);
  r.read("model", "block", c.ph_block);
  r.read("model", "chi", c.ph_chi);
  r.read("model", "pert", c.ph_pert);
  r.read("model", "uniform_signs", c.ph_uniform_signs);

  r.read("ansatz", "depth", c.depth);
  r.read("ansatz", "init_scale", c.init_scale);

  r.read("cost", "a", c.cost_a);
  r.read("cost", "b", c.cost_b);
  r.read("cost", "e_tar", c.e_tar);

  r.read("evaluator", "mode", c.mode);
  r.read("evaluator", "shots", c.shots);
  r.read("evaluator", "p1", c.noise_p1);
  r.read("evaluator", "p2", c.noise_p2);
  r.read("evaluator", "readout", c.noise_readout);

  r.read("optimizer", "kind", c.optimizer);
  r.read("optimizer", "adam_alpha", c.adam_alpha);
  r.read("optimizer", "spsa_calibrate", c.spsa_calibrate);
  r.read("optimizer", "spsa_a0", c.spsa_a0);
  r.read("optimizer", "spsa_c0", c.spsa_c0);

  r.read("run", "iterations", c.iterations);
  r.read("run", "seed", c.seed);
  r.read("run", "out_dir", c.out_dir);

  r.read("sweep", "min", c.sweep_min);
  r.read("sweep", "max", c.sweep_max);
  r.read("sweep", "points", c.sweep_points);

  r.read("shots_study", "shots", c.study_shots);
  r.read("shots_study", "seeds", c.study_seeds);
  r.read("shots_study", "include_exact", c.study_include_exact);

  r.read("audit", "repetitions", c.audit_repetitions);

  r.read("noisy_study", "shots", c.noisy_shots);
  r.read("noisy_study", "total_budget", c.noisy_total_budget);

  r.note_unknown_keys();
  auto errors = r.errors();
  auto semantic = validate_config(c);
  errors.insert(errors.end(), semantic.begin(), semantic.end());
  if (!errors.empty()) throw ConfigError(format_validation_report(errors));
  return c;
}

inline ExperimentConfig config_from_string(const std::string& text) {
  return config_from_ini(IniFile::parse(text));
}

inline ExperimentConfig config_from_file(const std::string& path) {
  return config_from_ini(IniFile::load(path));
}

}  // namespace svqe
