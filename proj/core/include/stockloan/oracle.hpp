#pragma once

#include <cstdint>
#include <vector>

#include "stockloan/model.hpp"
#include "stockloan/quote.hpp"

namespace stockloan {

/// Monte Carlo settings. Paths are simulated in batches of `batch_size`; batch
/// b uses seed splitmix64(seed + b), so results do not depend on `workers`.
struct PathConfig {
  std::size_t n_paths = 100000;
  std::size_t n_steps = 1000;
  std::uint64_t seed = 20090101;
  bool antithetic = true;
  unsigned workers = 1;
  std::size_t batch_size = 4096;
  /// Continuous-monitoring correction: between monitoring dates the path
  /// crosses a (log-linear) barrier with the Brownian-bridge probability.
  bool bridge_correction = true;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;  // independent samples (antithetic pairs count once)
};

/// Seed-splitting rule for batches.
std::uint64_t splitmix64(std::uint64_t x);

/// E^Q[e^{-r_hat tau} (V^_tau - L)^+ 1{tau <= T}] with V^ = e^{(r-alpha)t} V,
/// tau the first time V reaches the boundary, or the terminal payoff
/// (V^_T - L)^+ if it never does. Finite horizon only.
McEstimate mc_barrier_cost(const ExerciseBoundary& boundary, const StockLoanModel& model,
                           const PathConfig& cfg);

/// Perpetual variant: constant barrier `v_star`, simulated up to
/// `truncation_horizon` years (alpha = r so there is no discounting).
McEstimate mc_barrier_cost_perpetual(double v_star, const StockLoanModel& model,
                                     const PathConfig& cfg, double truncation_horizon);

/// Probability that V (drift -delta, volatility sigma under Q) started at v0
/// reaches `barrier` > v0 during [0, horizon].
double hitting_probability(double v0, double barrier, double sigma, double delta,
                           double horizon);

/// Smallest horizon (doubling from 1 year) for which the probability of first
/// hitting after it is below rel_tol times the total hitting probability.
double perpetual_truncation_horizon(double v0, double barrier, double sigma, double delta,
                                    double rel_tol = 1e-4);

struct TreeStoppingResult {
  double f0 = 1.0;
  /// Lowest exercising node level per step (+inf where none exercises).
  std::vector<double> exercise_levels;
};

/// inf over stopping times of E^0[kappa(tau, V_tau)] by backward induction on
/// a CRR tree with drift -delta (minimal martingale measure under CAPM).
/// Throws StepCountTooSmall if n_steps < 50.
TreeStoppingResult tree_stopping_F(const StockLoanModel& model, std::size_t n_steps);

/// e^{-r_hat T} E[(V_T - L)^+] for V with drift r_hat - delta and volatility
/// sigma2.
double european_call_closed_form(double v0, double strike, double sigma2, double delta,
                                 double r_hat, double maturity);

}  // namespace stockloan
