#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stockloan::cli {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view text, std::string_view key, std::size_t line) {
  const std::string s(trim(text));
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError("invalid number '" + s + "' for " + std::string(key), line);
  }
  return value;
}

std::size_t to_count(std::string_view text, std::string_view key, std::size_t line) {
  const double value = to_double(text, key, line);
  if (value < 0.0 || value != std::floor(value)) {
    throw ConfigError("expected a non-negative integer for " + std::string(key), line);
  }
  return static_cast<std::size_t>(value);
}

bool to_bool(std::string_view text, std::string_view key, std::size_t line) {
  const auto s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("expected a boolean for " + std::string(key), line);
}

}  // namespace

ConfigError::ConfigError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

const std::vector<std::string>& documented_keys() {
  static const std::vector<std::string> keys = {
      "market.r",           "market.mu1",           "market.sigma1",
      "collateral.sigma2",  "collateral.delta",     "collateral.rho",
      "loan.principal",     "loan.alpha",           "loan.v0",
      "loan.horizon",       "preference.gamma",     "solver.v_intervals",
      "solver.t_steps",     "solver.v_max_factor",  "solver.v_max",
      "solver.spacing",     "solver.spacing_center", "solver.spacing_width",
      "solver.theta",       "solver.rannacher_steps", "solver.omega",
      "solver.tol",         "solver.max_iter",      "solver.detection_tol",
      "solver.bank_theta",  "solver.workers",       "oracle.n_paths",
      "oracle.n_steps",     "oracle.seed",          "oracle.antithetic",
      "oracle.bridge_correction", "oracle.tree_steps", "oracle.perpetual_steps_per_year",
  };
  return keys;
}

void apply_setting(RunSettings& s, std::string_view section, std::string_view key,
                   std::string_view value, std::size_t line) {
  const std::string name = std::string(section) + "." + std::string(key);
  const auto& keys = documented_keys();
  if (std::find(keys.begin(), keys.end(), name) == keys.end()) {
    throw ConfigError("unknown key '" + name + "'", line);
  }
  auto num = [&] { return to_double(value, name, line); };
  auto count = [&] { return to_count(value, name, line); };
  auto& p = s.params;
  auto& g = s.grid;

  if (name == "market.r") p.r = num();
  else if (name == "market.mu1") p.mu1 = num();
  else if (name == "market.sigma1") p.sigma1 = num();
  else if (name == "collateral.sigma2") p.sigma2 = num();
  else if (name == "collateral.delta") p.delta = num();
  else if (name == "collateral.rho") p.rho = num();
  else if (name == "loan.principal") p.principal = num();
  else if (name == "loan.alpha") p.alpha = num();
  else if (name == "loan.v0") p.v0 = num();
  else if (name == "loan.horizon") {
    if (trim(value) == "perpetual") p.horizon = Perpetual{};
    else p.horizon = Finite{num()};
  }
  else if (name == "preference.gamma") p.gamma = num();
  else if (name == "solver.v_intervals") g.v_intervals = count();
  else if (name == "solver.t_steps") g.t_steps = count();
  else if (name == "solver.v_max_factor") g.v_max_factor = num();
  else if (name == "solver.v_max") g.v_max = num();
  else if (name == "solver.spacing") {
    const auto v = trim(value);
    if (v == "uniform") g.spacing.kind = SpacingKind::Uniform;
    else if (v == "sinh") g.spacing.kind = SpacingKind::Sinh;
    else throw ConfigError("solver.spacing must be 'uniform' or 'sinh'", line);
  }
  else if (name == "solver.spacing_center") g.spacing.center = num();
  else if (name == "solver.spacing_width") g.spacing.width = num();
  else if (name == "solver.theta") g.scheme.theta = num();
  else if (name == "solver.rannacher_steps") g.scheme.rannacher_steps = static_cast<int>(count());
  else if (name == "solver.omega") g.psor.omega = num();
  else if (name == "solver.tol") g.psor.tol = num();
  else if (name == "solver.max_iter") g.psor.max_iter = static_cast<int>(count());
  else if (name == "solver.detection_tol") g.detection_tol = num();
  else if (name == "solver.bank_theta") g.bank_scheme.theta = num();
  else if (name == "solver.workers") s.workers = static_cast<unsigned>(std::max<std::size_t>(1, count()));
  else if (name == "oracle.n_paths") s.paths.n_paths = count();
  else if (name == "oracle.n_steps") s.paths.n_steps = count();
  else if (name == "oracle.seed") s.paths.seed = count();
  else if (name == "oracle.antithetic") s.paths.antithetic = to_bool(value, name, line);
  else if (name == "oracle.bridge_correction") s.paths.bridge_correction = to_bool(value, name, line);
  else if (name == "oracle.tree_steps") s.tree_steps = count();
  else if (name == "oracle.perpetual_steps_per_year") s.perpetual_steps_per_year = num();
}

void apply_override(RunSettings& settings, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
    throw ConfigError("override must look like section.key=value: '" + std::string(assignment) + "'");
  }
  apply_setting(settings, trim(assignment.substr(0, dot)),
                trim(assignment.substr(dot + 1, eq - dot - 1)), assignment.substr(eq + 1));
}

void load_config(RunSettings& settings, std::istream& in) {
  std::string raw;
  std::string section;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto text = trim(raw);
    if (const auto c = text.find_first_of("#;"); c != std::string_view::npos) {
      text = trim(text.substr(0, c));
    }
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("unterminated section header", line);
      section = std::string(trim(text.substr(1, text.size() - 2)));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value", line);
    if (section.empty()) throw ConfigError("key outside of any section", line);
    apply_setting(settings, section, trim(text.substr(0, eq)), trim(text.substr(eq + 1)), line);
  }
}

void load_config_file(RunSettings& settings, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  load_config(settings, in);
}

std::vector<double> parse_values(std::string_view text) {
  text = trim(text);
  if (const auto range = text.find(".."); range != std::string_view::npos) {
    const double start = to_double(text.substr(0, range), "--values", 0);
    auto rest = text.substr(range + 2);
    double step = 0.0;
    double stop = 0.0;
    if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
      stop = to_double(rest.substr(0, colon), "--values", 0);
      step = to_double(rest.substr(colon + 1), "--values", 0);
    } else {
      stop = to_double(rest, "--values", 0);
      step = (stop - start) / 10.0;
    }
    if (!(step > 0.0) || stop < start) throw ConfigError("invalid --values range");
    std::vector<double> values;
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) values.push_back(start + step * static_cast<double>(i));
    return values;
  }
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string_view::npos ? text.size() - pos : comma - pos);
    values.push_back(to_double(item, "--values", 0));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return values;
}

}  // namespace stockloan::cli
