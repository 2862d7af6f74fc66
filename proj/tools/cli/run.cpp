#include "run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "report.hpp"
#include "stockloan/error.hpp"
#include "stockloan/finite_horizon.hpp"
#include "stockloan/oracle.hpp"
#include "stockloan/perpetual.hpp"

namespace stockloan::cli {
namespace {

using nlohmann::json;

constexpr double kPrincipals[] = {50, 60, 70, 80, 90, 100, 110, 120};

struct PerpetualCase {
  const char* name;
  double delta;
  bool complete;
  const char* threshold_label;  // empty when the threshold column is not tabulated
  double fee[8];
  double threshold[8];
};

// Perpetual reference rows: sigma2 = 0.15, r = alpha = 0.05, V0 = 100, and
// rho = 0.9, gamma = 0.01 for the incomplete-market cases.
constexpr PerpetualCase kPerpetual[] = {
    {"Case 1", 0.0, true, "", {50, 60, 70, 80, 90, 100, 110, 120}, {}},
    {"Case 2", 0.0, false, "V*",
     {31.0528, 39.5086, 48.1242, 56.8653, 65.7084, 74.6363, 83.6361, 92.6978},
     {263.8914, 292.8058, 319.9876, 345.8010, 370.4988, 394.2648, 417.2377, 439.5251}},
    {"Case 3", 0.05, true, "a0",
     {0, 0, 0, 0, 1.9041, 7.4530, 14.8794, 23.3145},
     {61.25, 73.5, 85.75, 98.0, 110.25, 122.5, 134.75, 147.0}},
    {"Case 4", 0.05, false, "V*",
     {0, 0, 0, 0, 1.9015, 7.4510, 14.8778, 23.3132},
     {61.1055, 73.2926, 85.4688, 97.6341, 109.7885, 121.9323, 134.0656, 146.1884}},
};

// Finite maturity reference fees at the ModelParameters defaults.
constexpr double kFinite[] = {0, 0, 0, 1.0667, 4.1073, 9.3487, 16.0344, 23.8156};

ModelParameters perpetual_parameters(const PerpetualCase& c, double principal) {
  ModelParameters p;
  p.r = 0.05;
  p.alpha = 0.05;
  p.sigma2 = 0.15;
  p.delta = c.delta;
  p.rho = 0.9;
  p.gamma = 0.01;
  p.v0 = 100.0;
  p.principal = principal;
  p.horizon = Perpetual{};
  return p;
}

std::string fmt(double x, int precision = 4) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  return buf;
}

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json base_report(std::string_view mode) {
  return json{{"schema_version", kSchemaVersion}, {"mode", std::string(mode)}};
}

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Perpetual: return "perpetual";
    case Mode::Finite: return "finite";
    case Mode::Sweep: return "sweep";
    case Mode::Tables: return "tables";
    case Mode::OracleCheck: return "oracle-check";
  }
  return "?";
}

// Parameter errors found before any solve are configuration errors.
StockLoanModel build_model(const ModelParameters& params) {
  try {
    return params.build();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

int run_single(const RunConfig& cfg, RunSettings settings, std::ostream& out) {
  if (cfg.mode == Mode::Perpetual) {
    settings.params.horizon = Perpetual{};
  } else if (std::holds_alternative<Perpetual>(settings.params.horizon)) {
    throw ConfigError("finite mode needs loan.horizon set to a maturity in years");
  }
  const auto model = build_model(settings.params);
  const FeeQuote quote = quote_fee(model, settings.grid);

  switch (cfg.output) {
    case OutputFormat::Text:
      write_quote_text(out, quote);
      break;
    case OutputFormat::Csv:
      write_csv(out, {to_csv_row(settings.params.principal, quote)});
      break;
    case OutputFormat::Json: {
      auto report = base_report(mode_name(cfg.mode));
      report["parameters"] = parameters_json(settings);
      report["result"] = quote_json(quote);
      out << report.dump(2) << '\n';
      break;
    }
  }
  return kExitOk;
}

int run_sweep(const RunConfig& cfg, const RunSettings& settings, std::ostream& out,
              std::ostream& err) {
  if (cfg.axis.empty()) throw ConfigError("sweep needs --axis");
  const auto axis = parse_sweep_axis(cfg.axis);
  if (!axis) throw ConfigError("unknown sweep axis '" + cfg.axis + "'");
  if (cfg.values.empty()) throw ConfigError("sweep needs --values");
  const auto values = parse_values(cfg.values);
  for (double v : values) build_model(with_axis_value(settings.params, *axis, v));

  const auto rows = sweep(settings.params, settings.grid, *axis, values, settings.workers);
  bool failed = false;
  for (const auto& row : rows) {
    if (!row.quote) {
      failed = true;
      err << "sweep " << to_string(*axis) << "=" << fmt_g(row.axis_value) << " failed: " << row.error
          << '\n';
    }
  }

  switch (cfg.output) {
    case OutputFormat::Csv: {
      std::vector<CsvRow> csv;
      for (const auto& row : rows) {
        if (row.quote) csv.push_back(to_csv_row(row.axis_value, *row.quote));
      }
      write_csv(out, csv);
      break;
    }
    case OutputFormat::Json: {
      auto report = base_report("sweep");
      report["axis"] = std::string(to_string(*axis));
      report["parameters"] = parameters_json(settings);
      json list = json::array();
      for (const auto& row : rows) {
        json item{{"axis_value", row.axis_value}};
        if (row.quote) item["result"] = quote_json(*row.quote);
        else item["error"] = row.error;
        list.push_back(std::move(item));
      }
      report["rows"] = std::move(list);
      out << report.dump(2) << '\n';
      break;
    }
    case OutputFormat::Text: {
      out << std::setw(12) << to_string(*axis) << std::setw(12) << "fee" << std::setw(12) << "cost"
          << std::setw(12) << "p0" << std::setw(12) << "V*(0)" << std::setw(8) << "psor" << '\n';
      for (const auto& row : rows) {
        out << std::setw(12) << fmt_g(row.axis_value).substr(0, 11);
        if (!row.quote) {
          out << "  error: " << row.error << '\n';
          continue;
        }
        const auto& q = *row.quote;
        out << std::setw(12) << fmt(q.fee) << std::setw(12) << fmt(q.bank_cost) << std::setw(12)
            << fmt(q.indifference_value) << std::setw(12) << fmt(q.threshold_at_inception())
            << std::setw(8) << q.diagnostics.psor_max_iterations << '\n';
      }
      break;
    }
  }
  return failed ? kExitSolverFailure : kExitOk;
}

void write_tables_text(std::ostream& out, const std::vector<TableCell>& cells) {
  // Group consecutive cells with the same table, case and quantity into rows.
  std::size_t i = 0;
  std::string last_block;
  while (i < cells.size()) {
    std::size_t j = i;
    while (j < cells.size() && cells[j].table == cells[i].table &&
           cells[j].case_name == cells[i].case_name && cells[j].quantity == cells[i].quantity) {
      ++j;
    }
    const std::string block = cells[i].table + ", " + cells[i].case_name;
    if (block != last_block) {
      out << '\n' << block << '\n' << std::setw(16) << "L";
      for (std::size_t k = i; k < j; ++k) out << std::setw(11) << fmt(cells[k].principal, 0);
      out << '\n';
      last_block = block;
    }
    const std::string q = cells[i].quantity;
    out << std::setw(4) << q << std::setw(12) << "computed";
    for (std::size_t k = i; k < j; ++k) out << std::setw(11) << fmt(cells[k].computed);
    out << '\n' << std::setw(16) << "reference";
    for (std::size_t k = i; k < j; ++k) out << std::setw(11) << fmt(cells[k].reference);
    out << '\n' << std::setw(16) << "deviation";
    for (std::size_t k = i; k < j; ++k) out << std::setw(11) << fmt(cells[k].deviation());
    out << '\n';
    i = j;
  }
}

int run_tables(const RunConfig& cfg, const RunSettings& settings, std::ostream& out) {
  const auto cells = reproduce_tables(settings);
  switch (cfg.output) {
    case OutputFormat::Text:
      write_tables_text(out, cells);
      break;
    case OutputFormat::Csv:
      out << "table,case,L,quantity,computed,reference,deviation\n";
      for (const auto& c : cells) {
        out << c.table << ',' << c.case_name << ',' << fmt_g(c.principal) << ',' << c.quantity << ','
            << fmt_g(c.computed) << ',' << fmt_g(c.reference) << ',' << fmt_g(c.deviation()) << '\n';
      }
      break;
    case OutputFormat::Json: {
      auto report = base_report("tables");
      report["parameters"] = parameters_json(settings);
      json list = json::array();
      for (const auto& c : cells) {
        list.push_back({{"table", c.table},
                        {"case", c.case_name},
                        {"L", c.principal},
                        {"quantity", c.quantity},
                        {"computed", c.computed},
                        {"reference", c.reference},
                        {"deviation", c.deviation()}});
      }
      report["cells"] = std::move(list);
      out << report.dump(2) << '\n';
      break;
    }
  }
  return kExitOk;
}

int run_oracle_check(const RunConfig& cfg, const RunSettings& settings, std::ostream& out) {
  build_model(settings.params);
  const auto checks = oracle_checks(settings);
  bool all_agree = true;
  for (const auto& c : checks) all_agree = all_agree && c.agree();

  switch (cfg.output) {
    case OutputFormat::Text:
      for (const auto& c : checks) {
        out << std::left << std::setw(34) << c.name << std::right << " solver " << fmt(c.solver, 6)
            << "  oracle " << fmt(c.oracle, 6);
        if (c.std_error > 0.0) out << " +/- " << fmt(c.std_error, 6);
        out << "  |diff| " << fmt(std::abs(c.solver - c.oracle), 6) << " <= " << fmt(c.tolerance, 6)
            << (c.agree() ? "  agree" : "  DISAGREE") << '\n';
      }
      break;
    case OutputFormat::Csv:
      out << "check,solver,oracle,std_error,tolerance,agree\n";
      for (const auto& c : checks) {
        out << c.name << ',' << fmt_g(c.solver) << ',' << fmt_g(c.oracle) << ','
            << fmt_g(c.std_error) << ',' << fmt_g(c.tolerance) << ',' << (c.agree() ? 1 : 0)
            << '\n';
      }
      break;
    case OutputFormat::Json: {
      auto report = base_report("oracle-check");
      report["parameters"] = parameters_json(settings);
      json list = json::array();
      for (const auto& c : checks) {
        list.push_back({{"name", c.name},
                        {"solver", c.solver},
                        {"oracle", c.oracle},
                        {"std_error", c.std_error},
                        {"tolerance", c.tolerance},
                        {"agree", c.agree()}});
      }
      report["checks"] = std::move(list);
      report["all_agree"] = all_agree;
      out << report.dump(2) << '\n';
      break;
    }
  }
  return all_agree ? kExitOk : kExitSolverFailure;
}

}  // namespace

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "perpetual") return Mode::Perpetual;
  if (name == "finite") return Mode::Finite;
  if (name == "sweep") return Mode::Sweep;
  if (name == "tables") return Mode::Tables;
  if (name == "oracle-check") return Mode::OracleCheck;
  return std::nullopt;
}

std::optional<OutputFormat> parse_output(std::string_view name) {
  if (name == "text") return OutputFormat::Text;
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  return std::nullopt;
}

std::vector<TableCell> reproduce_tables(const RunSettings& settings, bool include_finite) {
  std::vector<TableCell> cells;
  for (const auto& c : kPerpetual) {
    std::vector<FeeQuote> quotes;
    for (double principal : kPrincipals) {
      const auto model = perpetual_parameters(c, principal).build();
      quotes.push_back(c.complete ? complete_market_fee(model) : fee(model));
    }
    for (std::size_t i = 0; i < 8; ++i) {
      cells.push_back({"perpetual", c.name, kPrincipals[i], "c", quotes[i].fee, c.fee[i]});
    }
    if (*c.threshold_label != '\0') {
      for (std::size_t i = 0; i < 8; ++i) {
        cells.push_back({"perpetual", c.name, kPrincipals[i], c.threshold_label,
                         quotes[i].threshold_at_inception(), c.threshold[i]});
      }
    }
  }
  if (include_finite) {
    const ModelParameters base;
    const auto rows = sweep(base, settings.grid, SweepAxis::Principal, kPrincipals, settings.workers);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].quote) throw Error(ErrorCode::NonConvergence, rows[i].error);
      cells.push_back({"finite", "T = 5", kPrincipals[i], "c", rows[i].quote->fee, kFinite[i]});
    }
  }
  return cells;
}

bool OracleCheck::agree() const { return std::abs(solver - oracle) <= tolerance; }

std::vector<OracleCheck> oracle_checks(const RunSettings& settings) {
  const auto model = settings.params.build();
  PathConfig paths = settings.paths;
  paths.workers = settings.workers;
  std::vector<OracleCheck> checks;

  if (model.loan.is_perpetual()) {
    const FeeQuote quote = fee(model);
    const double v_star = quote.threshold_at_inception();
    if (std::isfinite(v_star)) {
      const double sigma = model.collateral.sigma2();
      const double delta = model.collateral.delta();
      const double horizon = perpetual_truncation_horizon(model.loan.v0(), v_star, sigma, delta);
      paths.n_steps = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(horizon * settings.perpetual_steps_per_year)));
      const auto mc = mc_barrier_cost_perpetual(v_star, model, paths, horizon);
      checks.push_back({"bank cost: closed form vs MC", quote.bank_cost, mc.estimate, mc.std_error,
                        std::max(3.0 * mc.std_error, 1e-9)});
    }
    return checks;
  }

  const FeeQuote quote = fee_finite(model, settings.grid);
  const double k = model.effective_risk_aversion();
  const auto tree = tree_stopping_F(model, settings.tree_steps);
  checks.push_back({"indifference value: PSOR vs tree", quote.indifference_value,
                    -std::log(tree.f0) / k, 0.0, 0.05});
  const auto& boundary = std::get<ExerciseBoundary>(quote.boundary);
  const auto mc = mc_barrier_cost(boundary, model, paths);
  checks.push_back({"bank cost: PDE vs MC", quote.bank_cost, mc.estimate, mc.std_error,
                    std::max(3.0 * mc.std_error, 1e-9)});
  return checks;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    RunSettings settings;
    if (!cfg.config_path.empty()) load_config_file(settings, cfg.config_path);
    for (const auto& o : cfg.overrides) apply_override(settings, o);

    std::ofstream file;
    std::ostream* sink = &out;
    if (!cfg.out_path.empty()) {
      file.open(cfg.out_path);
      if (!file) throw ConfigError("cannot open output file '" + cfg.out_path + "'");
      sink = &file;
    }
    // Render into a buffer so a failed run leaves no partial report behind.
    std::ostringstream buffer;
    int status = kExitOk;
    switch (cfg.mode) {
      case Mode::Perpetual:
      case Mode::Finite: status = run_single(cfg, settings, buffer); break;
      case Mode::Sweep: status = run_sweep(cfg, settings, buffer, err); break;
      case Mode::Tables: status = run_tables(cfg, settings, buffer); break;
      case Mode::OracleCheck: status = run_oracle_check(cfg, settings, buffer); break;
    }
    *sink << buffer.str();
    sink->flush();
    return status;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolverFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
}

}  // namespace stockloan::cli
