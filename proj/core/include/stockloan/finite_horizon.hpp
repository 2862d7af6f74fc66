#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stockloan/lcp.hpp"
#include "stockloan/model.hpp"
#include "stockloan/quote.hpp"

namespace stockloan {

/// Discretization controls for finite-maturity valuation.
struct GridConfig {
  std::size_t v_intervals = 800;
  std::size_t t_steps = 2000;
  /// v_max = factor * max(V0, L) * exp(|alpha - r| T) unless v_max is set.
  double v_max_factor = 5.0;
  std::optional<double> v_max;
  Spacing spacing;  // for Sinh, a zero center/width is replaced by L and L/2
  ThetaScheme scheme;
  PsorSettings psor;
  double detection_tol = 1e-7;
  /// Scheme for the bank's barrier PDE on its moving domain.
  ThetaScheme bank_scheme{1.0, 0};

  GridConfig refined() const;  // halves both step sizes
};

/// Grid for a finite-maturity model. With uniform spacing the v step is
/// adjusted so that V0 falls on a node.
Grid make_grid(const StockLoanModel& model, const GridConfig& cfg);

/// kappa(t, v) = exp(-k (v - L e^{(alpha - r) t})^+).
struct ObstacleSpec {
  double k = 0.0;              // gamma (1 - rho^2)
  double strike_growth = 0.0;  // alpha - r
  double principal = 0.0;

  static ObstacleSpec from_model(const StockLoanModel& model);
  double strike(double t) const;
  double operator()(double t, double v) const;
};

/// Solution of the borrower's obstacle problem for F(t, v).
struct IndifferenceSolution {
  Grid grid;
  LcpSolution lcp;
  ObstacleSpec obstacle;
  ExerciseBoundary boundary;
  double f0 = 1.0;  // F(0, V0)
  double p0 = 0.0;  // indifference value -log(F(0, V0)) / k

  /// p(t_n, v_i) = -log F / k at a grid node.
  double indifference_at(std::size_t n, std::size_t i) const;
};

IndifferenceSolution solve_indifference(const StockLoanModel& model, const GridConfig& cfg);

/// V*(t) = inf{v > strike(t) : kappa - F <= detection_tol}, refined by linear
/// interpolation of the gap between the bracketing nodes. Steps with no
/// exercising node are recorded as +inf and counted in missing_steps.
ExerciseBoundary extract_boundary(const LcpSolution& sol, const Grid& grid,
                                  const ObstacleSpec& obstacle, double detection_tol);

/// Bank's cost C(0, V0) of the barrier-type call exercised at the borrower's
/// boundary, from the backward PDE in discounted-strike ("hatted") variables on
/// the moving domain 0 <= v <= e^{(r-alpha)t} V*(t). A +inf boundary level
/// means no barrier at that time.
double bank_cost_pde(const ExerciseBoundary& boundary, const StockLoanModel& model,
                     const Grid& grid, const ThetaScheme& scheme = {1.0, 0});

/// Full finite-maturity pipeline: LCP, boundary, barrier PDE, fee.
FeeQuote fee_finite(const StockLoanModel& model, const GridConfig& cfg = {});

/// Fee for either horizon: perpetual closed form or finite-maturity solve.
FeeQuote quote_fee(const StockLoanModel& model, const GridConfig& cfg = {});

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { Gamma, Delta, Rho, Sigma2, V0, Principal, Maturity, Alpha };

std::optional<SweepAxis> parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

/// Copy of `base` with the swept parameter set to `value`.
ModelParameters with_axis_value(ModelParameters base, SweepAxis axis, double value);

struct SweepRow {
  double axis_value = 0.0;
  std::optional<FeeQuote> quote;
  std::string error;  // set when the solve failed
};

/// Independent solves per value, rows in input order. Failures are recorded
/// per row. Up to `workers` rows run concurrently.
std::vector<SweepRow> sweep(const ModelParameters& base, const GridConfig& cfg, SweepAxis axis,
                            std::span<const double> values, unsigned workers = 1);

}  // namespace stockloan
