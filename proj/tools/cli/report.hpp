#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "stockloan/finite_horizon.hpp"
#include "stockloan/quote.hpp"

namespace stockloan::cli {

inline constexpr int kSchemaVersion = 1;

/// One CSV row: axis_value, fee, cost, p0, v_star_at_0, psor_max_iters.
struct CsvRow {
  double axis_value = 0.0;
  double fee = 0.0;
  double cost = 0.0;
  double p0 = 0.0;
  double v_star_at_0 = 0.0;
  long long psor_max_iters = 0;

  bool operator==(const CsvRow&) const = default;
};

CsvRow to_csv_row(double axis_value, const FeeQuote& quote);

/// Values are written with 17 significant digits so parsing reproduces them.
void write_csv(std::ostream& out, const std::vector<CsvRow>& rows);
std::vector<CsvRow> parse_csv(std::istream& in);

nlohmann::json parameters_json(const RunSettings& settings);
nlohmann::json quote_json(const FeeQuote& quote);

void write_quote_text(std::ostream& out, const FeeQuote& quote);

}  // namespace stockloan::cli
