#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace stockloan::cli {

enum class Mode { Perpetual, Finite, Sweep, Tables, OracleCheck };
enum class OutputFormat { Text, Csv, Json };

std::optional<Mode> parse_mode(std::string_view name);
std::optional<OutputFormat> parse_output(std::string_view name);

struct RunConfig {
  Mode mode = Mode::Finite;
  std::string config_path;             // empty: built-in defaults
  OutputFormat output = OutputFormat::Text;
  std::vector<std::string> overrides;  // "section.key=value", applied after the file
  std::string out_path;                // empty: write to the given stream
  std::string axis;                    // sweep only
  std::string values;                  // sweep only
};

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverFailure = 1;
inline constexpr int kExitConfigError = 2;

/// One cell of a reproduced reference table.
struct TableCell {
  std::string table;     // "perpetual" or "finite"
  std::string case_name;
  double principal = 0.0;
  std::string quantity;  // "c", "V*" or "a0"
  double computed = 0.0;
  double reference = 0.0;
  double deviation() const { return computed - reference; }
};

/// Reference cells for the perpetual loan (four cases) and the five-year loan.
/// The finite-maturity cells use the grid and worker count from `settings`.
std::vector<TableCell> reproduce_tables(const RunSettings& settings, bool include_finite = true);

/// One comparison between a solver and an independent oracle.
struct OracleCheck {
  std::string name;
  double solver = 0.0;
  double oracle = 0.0;
  double std_error = 0.0;  // zero for deterministic oracles
  double tolerance = 0.0;  // allowed |solver - oracle|
  bool agree() const;
};

std::vector<OracleCheck> oracle_checks(const RunSettings& settings);

/// Runs one CLI invocation. Reports go to `out` (or to cfg.out_path),
/// messages to `err`. Returns one of the exit codes above.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace stockloan::cli
