#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace stockloan::cli {
namespace {

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_number(const std::string& field, std::size_t line) {
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw ConfigError("invalid CSV number '" + field + "'", line);
  }
  return value;
}

nlohmann::json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

CsvRow to_csv_row(double axis_value, const FeeQuote& quote) {
  return CsvRow{axis_value,
                quote.fee,
                quote.bank_cost,
                quote.indifference_value,
                quote.threshold_at_inception(),
                quote.diagnostics.psor_max_iterations};
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
  out << "axis_value,fee,cost,p0,v_star_at_0,psor_max_iters\n";
  for (const auto& r : rows) {
    out << format_number(r.axis_value) << ',' << format_number(r.fee) << ','
        << format_number(r.cost) << ',' << format_number(r.p0) << ','
        << format_number(r.v_star_at_0) << ',' << r.psor_max_iters << '\n';
  }
}

std::vector<CsvRow> parse_csv(std::istream& in) {
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 || line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) throw ConfigError("expected 6 CSV columns", number);
    rows.push_back(CsvRow{parse_number(fields[0], number), parse_number(fields[1], number),
                          parse_number(fields[2], number), parse_number(fields[3], number),
                          parse_number(fields[4], number),
                          static_cast<long long>(parse_number(fields[5], number))});
  }
  return rows;
}

nlohmann::json parameters_json(const RunSettings& s) {
  const auto& p = s.params;
  const auto& g = s.grid;
  nlohmann::json horizon = std::holds_alternative<Perpetual>(p.horizon)
                               ? nlohmann::json("perpetual")
                               : nlohmann::json(std::get<Finite>(p.horizon).maturity);
  return {
      {"market", {{"r", p.r}, {"mu1", p.mu1}, {"sigma1", p.sigma1}}},
      {"collateral", {{"sigma2", p.sigma2}, {"delta", p.delta}, {"rho", p.rho}}},
      {"loan", {{"principal", p.principal}, {"alpha", p.alpha}, {"v0", p.v0}, {"horizon", horizon}}},
      {"preference", {{"gamma", p.gamma}}},
      {"solver",
       {{"v_intervals", g.v_intervals},
        {"t_steps", g.t_steps},
        {"v_max_factor", g.v_max_factor},
        {"v_max", g.v_max ? nlohmann::json(*g.v_max) : nlohmann::json(nullptr)},
        {"spacing", g.spacing.kind == SpacingKind::Uniform ? "uniform" : "sinh"},
        {"spacing_center", g.spacing.center},
        {"spacing_width", g.spacing.width},
        {"theta", g.scheme.theta},
        {"rannacher_steps", g.scheme.rannacher_steps},
        {"omega", g.psor.omega},
        {"tol", g.psor.tol},
        {"max_iter", g.psor.max_iter},
        {"detection_tol", g.detection_tol},
        {"bank_theta", g.bank_scheme.theta},
        {"workers", s.workers}}},
      {"oracle",
       {{"n_paths", s.paths.n_paths},
        {"n_steps", s.paths.n_steps},
        {"seed", s.paths.seed},
        {"antithetic", s.paths.antithetic},
        {"bridge_correction", s.paths.bridge_correction},
        {"tree_steps", s.tree_steps},
        {"perpetual_steps_per_year", s.perpetual_steps_per_year}}},
  };
}

nlohmann::json quote_json(const FeeQuote& quote) {
  const auto& d = quote.diagnostics;
  nlohmann::json out = {
      {"fee", quote.fee},
      {"bank_cost", quote.bank_cost},
      {"indifference_value", quote.indifference_value},
      {"v_star_at_0", number_or_null(quote.threshold_at_inception())},
      {"diagnostics",
       {{"branch", std::string(to_string(d.branch))},
        {"root_iterations", d.root_iterations},
        {"threshold_residual", d.threshold_residual},
        {"psor_max_iterations", d.psor_max_iterations},
        {"psor_total_iterations", d.psor_total_iterations},
        {"max_complementarity", d.max_complementarity},
        {"boundary_missing_steps", d.boundary_missing_steps},
        {"clamped", d.clamped},
        {"raw_fee", d.raw_fee},
        {"warnings", d.warnings}}},
  };
  if (const auto* b = std::get_if<ExerciseBoundary>(&quote.boundary)) {
    nlohmann::json levels = nlohmann::json::array();
    for (double level : b->levels) levels.push_back(number_or_null(level));
    out["boundary"] = {{"times", b->times}, {"levels", levels}, {"detection_tol", b->detection_tol}};
  } else {
    out["boundary"] = number_or_null(std::get<double>(quote.boundary));
  }
  return out;
}

void write_quote_text(std::ostream& out, const FeeQuote& quote) {
  const auto& d = quote.diagnostics;
  out << std::fixed << std::setprecision(4);
  out << "fee c                : " << quote.fee << '\n'
      << "bank cost C          : " << quote.bank_cost << '\n'
      << "indifference value p : " << quote.indifference_value << '\n'
      << "threshold V*(0)      : " << quote.threshold_at_inception() << '\n'
      << "branch               : " << to_string(d.branch) << '\n';
  if (d.root_iterations > 0) {
    out << "root iterations      : " << d.root_iterations << '\n'
        << std::scientific << std::setprecision(2)
        << "threshold residual   : " << d.threshold_residual << '\n';
  }
  if (d.psor_max_iterations > 0) {
    out << "PSOR max sweeps/step : " << d.psor_max_iterations << '\n'
        << std::scientific << std::setprecision(2)
        << "max complementarity  : " << d.max_complementarity << '\n';
  }
  for (const auto& w : d.warnings) out << "warning: " << w << '\n';
  out << std::defaultfloat;
}

}  // namespace stockloan::cli
