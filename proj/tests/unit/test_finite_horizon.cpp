#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "stockloan/error.hpp"
#include "stockloan/finite_horizon.hpp"
#include "stockloan/oracle.hpp"
#include "stockloan/perpetual.hpp"

using namespace stockloan;

namespace {

GridConfig coarse() {
  GridConfig cfg;
  cfg.v_intervals = 200;
  cfg.t_steps = 500;
  return cfg;
}

ModelParameters equal_rates(double maturity) {
  ModelParameters p;
  p.alpha = p.r;
  p.horizon = Finite{maturity};
  return p;
}

double fee_tolerance(double reference) { return std::max(0.15, 0.02 * std::abs(reference)); }

}  // namespace

TEST(MakeGrid, CollateralValueIsANode) {
  for (double v0 : {37.3, 100.0, 141.7}) {
    ModelParameters p;
    p.v0 = v0;
    const auto grid = make_grid(p.build(), coarse());
    EXPECT_TRUE(std::any_of(grid.v_nodes.begin(), grid.v_nodes.end(),
                            [&](double v) { return std::abs(v - v0) < 1e-9; }));
    EXPECT_GE(grid.v_max(), 5.0 * std::max(v0, 100.0) * std::exp(0.02 * 5) - 1e-9);
  }
}

TEST(SolveIndifference, TerminalSliceAndBoundaryAtExpiry) {
  const auto model = ModelParameters{}.build();
  const auto sol = solve_indifference(model, coarse());
  const std::size_t last = sol.grid.nt() - 1;
  const double strike = 100.0 * std::exp(0.02 * 5.0);
  for (std::size_t i = 0; i < sol.grid.nv(); ++i) {
    EXPECT_NEAR(sol.indifference_at(last, i), std::max(sol.grid.v_nodes[i] - strike, 0.0), 1e-9);
  }
  EXPECT_NEAR(sol.boundary.levels.back(), strike, 1e-9);
}

TEST(SolveIndifference, StructuralInvariants) {
  const auto model = ModelParameters{}.build();
  const auto sol = solve_indifference(model, coarse());
  const auto& g = sol.grid;
  // PSOR stops at a 1e-9 update on F, which is 1e-9 / k on the p scale.
  const double p_tol = 10.0 * 1e-9 / model.effective_risk_aversion();
  for (std::size_t n = 0; n < g.nt(); ++n) {
    EXPECT_EQ(sol.lcp.at(n, 0), 1.0);
    const double strike = sol.obstacle.strike(g.t_nodes[n]);
    double previous = -1.0;
    for (std::size_t i = 0; i < g.nv(); ++i) {
      const double f = sol.lcp.at(n, i);
      ASSERT_GT(f, 0.0);
      ASSERT_LE(f, 1.0);
      const double p = sol.indifference_at(n, i);
      ASSERT_GE(p, std::max(g.v_nodes[i] - strike, 0.0) - p_tol);
      ASSERT_GE(p, previous - p_tol);
      previous = p;
    }
  }
  EXPECT_LT(sol.lcp.max_residual, 1e-7);
}

TEST(SolveIndifference, AgreesWithTreeOracle) {
  GridConfig cfg;
  cfg.v_intervals = 400;
  cfg.t_steps = 1000;
  const auto model = ModelParameters{}.build();
  const auto sol = solve_indifference(model, cfg);
  const auto tree = tree_stopping_F(model, 2000);
  const double k = model.effective_risk_aversion();
  EXPECT_NEAR(sol.p0, -std::log(tree.f0) / k, 0.05);
}

TEST(ExtractBoundary, NonincreasingInTimeWhenRatesEqual) {
  const auto sol = solve_indifference(equal_rates(5.0).build(), coarse());
  const auto& levels = sol.boundary.levels;
  for (std::size_t n = 1; n < levels.size(); ++n) {
    if (std::isinf(levels[n - 1])) continue;
    EXPECT_LE(levels[n], levels[n - 1] + 1e-9) << "step " << n;
  }
}

TEST(ExtractBoundary, SmallRiskAversionBoundaryLiesAbove) {
  auto p = ModelParameters{};
  p.gamma = 1e-4;
  const auto low = solve_indifference(p.build(), coarse());
  p.gamma = 0.08;
  const auto high = solve_indifference(p.build(), coarse());
  ASSERT_EQ(low.boundary.levels.size(), high.boundary.levels.size());
  for (std::size_t n = 0; n + 1 < low.boundary.levels.size(); ++n) {
    EXPECT_GE(low.boundary.levels[n], high.boundary.levels[n]) << "step " << n;
  }
}

TEST(ExtractBoundary, MissingLevelsAreRecordedAsInfinite) {
  // A negative detection tolerance can never be met.
  const auto sol = solve_indifference(ModelParameters{}.build(), coarse());
  const auto b = extract_boundary(sol.lcp, sol.grid, sol.obstacle, -1.0);
  EXPECT_EQ(b.missing_steps, sol.grid.nt());
  EXPECT_TRUE(std::isinf(b.levels.front()));
  EXPECT_TRUE(std::isinf(b.at(2.5)));
  EXPECT_EQ(sol.boundary.missing_steps, 0u);
}

TEST(BankCostPde, NoBarrierMatchesEuropeanCall) {
  ModelParameters p = equal_rates(5.0);
  p.delta = 0.0;
  const auto model = p.build();
  GridConfig cfg;
  const auto grid = make_grid(model, cfg);
  ExerciseBoundary none;
  none.times = grid.t_nodes;
  none.levels.assign(grid.nt(), std::numeric_limits<double>::infinity());
  const double c = bank_cost_pde(none, model, grid);
  const double call = oracle::call_closed_form(100.0, 100.0, 0.4, 0.0, 0.0, 5.0);
  EXPECT_NEAR(oracle::lognormal_call_quadrature(100.0, 100.0, 0.4, 0.0, 0.0, 5.0), call, 1e-8);
  EXPECT_NEAR(c, call, 1e-3 * call);
  EXPECT_NEAR(european_call_closed_form(100.0, 100.0, 0.4, 0.0, 0.0, 5.0), call, 1e-10);
}

TEST(BankCostPde, RejectsNonPositiveBoundary) {
  const auto model = ModelParameters{}.build();
  const auto grid = make_grid(model, coarse());
  ExerciseBoundary bad;
  bad.times = grid.t_nodes;
  bad.levels.assign(grid.nt(), 150.0);
  bad.levels[3] = 0.0;
  try {
    bank_cost_pde(bad, model, grid);
    FAIL() << "expected InvalidBoundary";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidBoundary);
  }
}

TEST(BankCostPde, AgreesWithMonteCarloOnSolvedBoundary) {
  const auto model = ModelParameters{}.build();
  const auto quote = fee_finite(model, coarse());
  PathConfig cfg;
  cfg.n_paths = 20000;
  cfg.n_steps = 500;
  const auto mc = mc_barrier_cost(std::get<ExerciseBoundary>(quote.boundary), model, cfg);
  EXPECT_NEAR(quote.bank_cost, mc.estimate, 3.0 * mc.std_error + 0.02 * quote.bank_cost);
}

TEST(FeeFinite, ZeroFeeForSmallLoan) {
  ModelParameters p;
  p.principal = 50.0;
  const auto q = fee_finite(p.build());
  EXPECT_EQ(q.fee, 0.0);
}

TEST(FeeFinite, ReferenceTableTwoFees) {
  // Fees for L = 80, 100, 110, 120 on the reference finite-maturity parameters.
  const std::pair<double, double> cases[] = {{80, 1.0667}, {100, 9.3487}, {110, 16.0344},
                                             {120, 23.8156}};
  for (const auto& [principal, expected] : cases) {
    ModelParameters p;
    p.principal = principal;
    const auto q = fee_finite(p.build());
    EXPECT_NEAR(q.fee, expected, fee_tolerance(expected)) << "L = " << principal;
  }
}

TEST(FeeFinite, FeeIdentityAndDiagnostics) {
  const auto q = fee_finite(ModelParameters{}.build(), coarse());
  EXPECT_NEAR(q.fee, 100.0 + q.bank_cost - 100.0, 1e-12);
  EXPECT_EQ(q.diagnostics.branch, FeeBranch::FiniteHorizon);
  EXPECT_GT(q.diagnostics.psor_max_iterations, 0);
  EXPECT_LT(q.diagnostics.max_complementarity, 1e-7);
  EXPECT_TRUE(std::holds_alternative<ExerciseBoundary>(q.boundary));
}

TEST(FeeFinite, LongMaturityApproachesPerpetual) {
  ModelParameters p;
  p.r = p.alpha = 0.05;
  p.sigma2 = 0.15;
  p.delta = 0.05;
  p.rho = 0.9;
  p.gamma = 0.01;
  p.principal = 90.0;
  p.horizon = Finite{50.0};
  const double finite = fee_finite(p.build()).fee;
  p.horizon = Perpetual{};
  const double perpetual = fee(p.build()).fee;
  EXPECT_LE(finite, perpetual + 1e-9);
  EXPECT_NEAR(finite, perpetual, 0.02 * perpetual);
}

TEST(FeeFinite, HalfGridRefinementIsStable) {
  ModelParameters p;
  p.principal = 100.0;
  GridConfig cfg;
  cfg.v_intervals = 400;
  cfg.t_steps = 1000;
  const double a = fee_finite(p.build(), cfg).fee;
  const double b = fee_finite(p.build(), cfg.refined()).fee;
  EXPECT_LT(std::abs(a - b), 0.05);
}

TEST(FeeFinite, SinhSpacingAgreesWithUniform) {
  auto cfg = coarse();
  const double uniform = fee_finite(ModelParameters{}.build(), cfg).fee;
  cfg.spacing.kind = SpacingKind::Sinh;
  const double sinh = fee_finite(ModelParameters{}.build(), cfg).fee;
  EXPECT_NEAR(uniform, sinh, 0.1);
}

TEST(FeeFinite, MaturityMonotoneWhenRatesEqual) {
  double previous = -1.0;
  for (double maturity : {2.0, 5.0, 10.0}) {
    const double c = fee_finite(equal_rates(maturity).build(), coarse()).fee;
    if (previous > 0.0) {
      EXPECT_GT(c, previous);
    }
    EXPECT_GE(c, previous);
    previous = c;
  }
}

TEST(Sweep, AxisNames) {
  EXPECT_EQ(parse_sweep_axis("gamma"), SweepAxis::Gamma);
  EXPECT_EQ(parse_sweep_axis("L"), SweepAxis::Principal);
  EXPECT_EQ(parse_sweep_axis("principal"), SweepAxis::Principal);
  EXPECT_EQ(parse_sweep_axis("T"), SweepAxis::Maturity);
  EXPECT_EQ(parse_sweep_axis("v0"), SweepAxis::V0);
  EXPECT_FALSE(parse_sweep_axis("volatility").has_value());
  for (auto axis : {SweepAxis::Gamma, SweepAxis::Delta, SweepAxis::Rho, SweepAxis::Sigma2,
                    SweepAxis::V0, SweepAxis::Principal, SweepAxis::Maturity, SweepAxis::Alpha}) {
    EXPECT_EQ(parse_sweep_axis(to_string(axis)), axis);
  }
}

TEST(Sweep, MonotoneInGammaDeltaRho) {
  const ModelParameters base;
  const auto cfg = coarse();
  auto fees = [&](SweepAxis axis, std::vector<double> values) {
    std::vector<double> out;
    for (const auto& row : sweep(base, cfg, axis, values, 2)) {
      EXPECT_TRUE(row.quote.has_value()) << row.error;
      out.push_back(row.quote ? row.quote->fee : std::nan(""));
    }
    return out;
  };
  const auto g = fees(SweepAxis::Gamma, {0.01, 0.05, 0.08});
  EXPECT_GT(g[0], g[1]);
  EXPECT_GT(g[1], g[2]);
  const auto r = fees(SweepAxis::Rho, {0.05, 0.4, 0.9});
  EXPECT_LE(r[0], r[1]);
  EXPECT_LE(r[1], r[2]);
  const auto d = fees(SweepAxis::Delta, {0.05, 0.1, 0.15});
  EXPECT_GE(d[0], d[1]);
  EXPECT_GE(d[1], d[2]);
}

TEST(Sweep, FeeNonincreasingInCollateralValue) {
  // c = L + C(V0) - V0 and the bank cost rises by at most one per unit of V0.
  ModelParameters base;
  base.principal = 80.0;
  const std::vector<double> values{80, 90, 100, 110, 120, 130, 140};
  const auto rows = sweep(base, coarse(), SweepAxis::V0, values, 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].quote && rows[i - 1].quote);
    EXPECT_LE(rows[i].quote->fee, rows[i - 1].quote->fee + 1e-9);
  }
}

TEST(Sweep, RecordsRowErrorsAndKeepsOrder) {
  const std::vector<double> values{0.05, -0.5, 0.1};
  const auto rows = sweep(ModelParameters{}, coarse(), SweepAxis::Delta, values, 3);
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(rows[i].axis_value, values[i]);
  EXPECT_TRUE(rows[0].quote.has_value());
  EXPECT_FALSE(rows[1].quote.has_value());
  EXPECT_FALSE(rows[1].error.empty());
  EXPECT_TRUE(rows[2].quote.has_value());
}

TEST(Sweep, WorkerCountDoesNotChangeResults) {
  const std::vector<double> values{60, 90, 120};
  const auto one = sweep(ModelParameters{}, coarse(), SweepAxis::Principal, values, 1);
  const auto three = sweep(ModelParameters{}, coarse(), SweepAxis::Principal, values, 3);
  for (std::size_t i = 0; i < values.size(); ++i) {
    EXPECT_EQ(one[i].quote->fee, three[i].quote->fee);
  }
}
