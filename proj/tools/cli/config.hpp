#pragma once

#include <cstddef>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stockloan/finite_horizon.hpp"
#include "stockloan/model.hpp"
#include "stockloan/oracle.hpp"

namespace stockloan::cli {

/// Configuration or command-line error. `line` is 0 when the problem is not
/// tied to a line of the configuration file.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Everything a run needs besides the mode.
struct RunSettings {
  ModelParameters params;
  GridConfig grid;
  PathConfig paths;
  std::size_t tree_steps = 5000;
  double perpetual_steps_per_year = 20.0;
  unsigned workers = 1;
};

/// Documented "section.key" names.
const std::vector<std::string>& documented_keys();

/// Sets one documented key from its textual value.
void apply_setting(RunSettings& settings, std::string_view section, std::string_view key,
                   std::string_view value, std::size_t line = 0);

/// Applies an override of the form "section.key=value".
void apply_override(RunSettings& settings, std::string_view assignment);

/// Reads an INI-style configuration on top of `settings`.
void load_config(RunSettings& settings, std::istream& in);
void load_config_file(RunSettings& settings, const std::string& path);

/// Parses "a,b,c", "start..stop" (11 points) or "start..stop:step".
std::vector<double> parse_values(std::string_view text);

}  // namespace stockloan::cli
