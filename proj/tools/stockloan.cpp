#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/run.hpp"

int main(int argc, char** argv) {
  using namespace stockloan::cli;

  CLI::App app{"Stock loan fee valuation under partial hedging"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string output = "text";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", cfg.config_path, "INI configuration file");
    sub->add_option("--set", cfg.overrides, "Override a key, e.g. loan.principal=90 (repeatable)")
        ->take_all();
    sub->add_option("--output", output, "Report format")
        ->check(CLI::IsMember({"text", "csv", "json"}));
    sub->add_option("--out", cfg.out_path, "Write the report to this file");
  };

  auto* perpetual = app.add_subcommand("perpetual", "Infinite-maturity fee (closed form)");
  auto* finite = app.add_subcommand("finite", "Finite-maturity fee (LCP and barrier PDE)");
  auto* sweep = app.add_subcommand("sweep", "Fee over a range of one parameter");
  auto* tables = app.add_subcommand("tables", "Reproduce the reference fee tables");
  auto* oracle = app.add_subcommand("oracle-check", "Compare solvers with independent oracles");
  for (auto* sub : {perpetual, finite, sweep, tables, oracle}) add_common(sub);
  sweep->add_option("--axis", cfg.axis,
                    "gamma, delta, rho, sigma2, v0, L, T or alpha")->required();
  sweep->add_option("--values", cfg.values, "a,b,c or start..stop[:step]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  for (auto* sub : app.get_subcommands()) {
    cfg.mode = *parse_mode(sub->get_name());
  }
  cfg.output = *parse_output(output);
  return run(cfg, std::cout, std::cerr);
}
