#pragma once

#include "stockloan/model.hpp"
#include "stockloan/quote.hpp"

namespace stockloan {

/// Stationary exercise threshold of the perpetual loan (alpha = r).
struct PerpetualSolution {
  double v_star = 0.0;
  double beta = 1.0;
  double residual = 0.0;  // threshold-equation residual at v_star
  double k = 0.0;         // gamma (1 - rho^2)
  int iterations = 0;
};

/// Effective risk aversion below which the closed forms are replaced by their
/// complete-market limit.
inline constexpr double kCompleteMarketCutoff = 1e-12;

/// Solves V - L = log(1 + k V / beta) / k for the unique root V* > L using
/// bisection-safeguarded Newton. Requires a perpetual loan with alpha = r and
/// k = gamma (1 - rho^2) >= kCompleteMarketCutoff.
PerpetualSolution solve_threshold(const StockLoanModel& model);

/// Complete-market threshold beta L / (beta - 1); +inf when delta = 0.
double complete_market_threshold(const StockLoanModel& model);

/// Borrower's indifference value of the repayment option at collateral value v.
double indifference_value(double v, const PerpetualSolution& sol, const StockLoanModel& model);

/// Limit of indifference_value as gamma (1 - rho^2) -> 0.
double complete_market_indifference_value(double v, const StockLoanModel& model);

/// Value function G(x, v) of the borrower holding wealth x and the loan.
double value_function_g(double x, double v, const PerpetualSolution& sol,
                        const StockLoanModel& model);

/// Bank's replication cost of the repayment option, (V* - L)(v/V*)^beta below
/// the threshold and v - L above it.
double bank_cost(double v, const PerpetualSolution& sol, const LoanTerms& loan);

/// Loan fee c = L + C(V0) - V0. Routes to complete_market_fee when the
/// effective risk aversion underflows kCompleteMarketCutoff.
FeeQuote fee(const StockLoanModel& model);

/// Fee in the complete-market limit (rho^2 -> 1 or gamma -> 0).
FeeQuote complete_market_fee(const StockLoanModel& model);

}  // namespace stockloan
