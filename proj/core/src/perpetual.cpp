#include "stockloan/perpetual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stockloan/error.hpp"

namespace stockloan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxRootIterations = 200;
constexpr int kMaxBracketDoublings = 200;

void require_perpetual_at_par(const StockLoanModel& model) {
  if (!model.loan.is_perpetual()) {
    throw Error(ErrorCode::InvalidParameter, "perpetual valuation needs a perpetual loan");
  }
  const double r = model.market.r();
  const double alpha = model.loan.alpha();
  if (std::abs(alpha - r) > 1e-14 * std::max(1.0, std::abs(r))) {
    std::ostringstream msg;
    msg << "perpetual valuation requires alpha = r (alpha=" << alpha << ", r=" << r << ")";
    throw Error(ErrorCode::AlphaMismatch, msg.str());
  }
}

// g(V) = V - L - log(1 + k V / beta) / k; increasing and convex past its root.
struct ThresholdEquation {
  double principal;
  double k;
  double beta;

  double value(double v) const { return v - principal - std::log1p(k * v / beta) / k; }
  double slope(double v) const { return 1.0 - 1.0 / (beta + k * v); }
};

}  // namespace

PerpetualSolution solve_threshold(const StockLoanModel& model) {
  require_perpetual_at_par(model);
  const double k = model.effective_risk_aversion();
  if (k < kCompleteMarketCutoff) {
    throw Error(ErrorCode::InvalidParameter,
                "gamma (1 - rho^2) too small; use the complete-market threshold");
  }
  const double principal = model.loan.principal();
  const ThresholdEquation g{principal, k, beta(model.collateral)};
  const double tol = 1e-10 * std::max(1.0, principal);

  double lo = principal * (1.0 + 1e-9);
  double hi = 10.0 * principal;
  int doublings = 0;
  while (g.value(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxBracketDoublings || !std::isfinite(hi)) {
      throw Error(ErrorCode::NonConvergence, "could not bracket the exercise threshold");
    }
  }

  // Newton from the right end converges monotonically for a convex increasing
  // function; bisection takes over if a step leaves the bracket.
  double v = hi;
  double dv_prev = hi - lo;
  for (int it = 1; it <= kMaxRootIterations; ++it) {
    const double gv = g.value(v);
    if (gv < 0.0) {
      lo = v;
    } else {
      hi = v;
    }
    const double slope = g.slope(v);
    double next = slope > 0.0 ? v - gv / slope : lo - 1.0;
    if (next <= lo || next >= hi || std::abs(2.0 * gv) > std::abs(dv_prev * slope)) {
      next = 0.5 * (lo + hi);
    }
    dv_prev = next - v;
    v = next;
    if (std::abs(dv_prev) < tol || hi - lo < tol) {
      const double residual = g.value(v);
      if (std::abs(residual) < tol) {
        return PerpetualSolution{v, g.beta, residual, k, it};
      }
    }
  }
  throw Error(ErrorCode::NonConvergence, "exercise threshold iteration did not converge");
}

double complete_market_threshold(const StockLoanModel& model) {
  const double b = beta(model.collateral);
  if (b <= 1.0) return kInf;
  return b / (b - 1.0) * model.loan.principal();
}

double indifference_value(double v, const PerpetualSolution& sol, const StockLoanModel& model) {
  const double principal = model.loan.principal();
  if (v >= sol.v_star) return v - principal;
  if (v <= 0.0) return 0.0;
  const double hit = std::pow(v / sol.v_star, sol.beta);
  return -std::log1p(std::expm1(-sol.k * (sol.v_star - principal)) * hit) / sol.k;
}

double complete_market_indifference_value(double v, const StockLoanModel& model) {
  const double principal = model.loan.principal();
  const double threshold = complete_market_threshold(model);
  if (!std::isfinite(threshold)) return std::max(v, 0.0);
  if (v >= threshold) return v - principal;
  if (v <= 0.0) return 0.0;
  return (threshold - principal) * std::pow(v / threshold, beta(model.collateral));
}

double value_function_g(double x, double v, const PerpetualSolution& sol,
                        const StockLoanModel& model) {
  const double gamma = model.preference.gamma();
  const double principal = model.loan.principal();
  if (v >= sol.v_star) return -std::exp(-gamma * (x + v - principal));
  const double one_minus_rho2 = sol.k / gamma;
  const double hit = v <= 0.0 ? 0.0 : std::pow(v / sol.v_star, sol.beta);
  const double inner = 1.0 + std::expm1(-sol.k * (sol.v_star - principal)) * hit;
  return -std::exp(-gamma * x) * std::pow(inner, 1.0 / one_minus_rho2);
}

double bank_cost(double v, const PerpetualSolution& sol, const LoanTerms& loan) {
  const double principal = loan.principal();
  if (v >= sol.v_star) return v - principal;
  if (v <= 0.0) return 0.0;
  return (sol.v_star - principal) * std::pow(v / sol.v_star, sol.beta);
}

FeeQuote fee(const StockLoanModel& model) {
  require_perpetual_at_par(model);
  if (model.effective_risk_aversion() < kCompleteMarketCutoff) {
    FeeQuote quote = complete_market_fee(model);
    quote.diagnostics.warnings.push_back(
        "gamma (1 - rho^2) below cutoff; complete-market limit used");
    return quote;
  }
  const PerpetualSolution sol = solve_threshold(model);
  const double principal = model.loan.principal();
  const double v0 = model.loan.v0();

  FeeQuote quote;
  quote.boundary = sol.v_star;
  quote.bank_cost = bank_cost(v0, sol, model.loan);
  quote.indifference_value = indifference_value(v0, sol, model);
  quote.diagnostics.root_iterations = sol.iterations;
  quote.diagnostics.threshold_residual = sol.residual;
  if (v0 >= sol.v_star) {
    quote.diagnostics.branch = FeeBranch::ImmediateExercise;
    quote.fee = 0.0;
  } else {
    quote.diagnostics.branch = FeeBranch::Continuation;
    const double raw = principal + quote.bank_cost - v0;
    quote.diagnostics.raw_fee = raw;
    quote.fee = std::max(raw, 0.0);
  }
  return quote;
}

FeeQuote complete_market_fee(const StockLoanModel& model) {
  require_perpetual_at_par(model);
  const double principal = model.loan.principal();
  const double v0 = model.loan.v0();
  const double threshold = complete_market_threshold(model);

  FeeQuote quote;
  quote.boundary = threshold;
  quote.indifference_value = complete_market_indifference_value(v0, model);
  if (!std::isfinite(threshold)) {
    // Repayment is never optimal: the option is worth the collateral itself.
    quote.diagnostics.branch = FeeBranch::NeverExercised;
    quote.bank_cost = v0;
    quote.fee = principal;
    quote.diagnostics.raw_fee = principal;
    return quote;
  }
  quote.diagnostics.branch = FeeBranch::CompleteMarket;
  if (v0 >= threshold) {
    quote.bank_cost = v0 - principal;
    quote.fee = 0.0;
    return quote;
  }
  quote.bank_cost = (threshold - principal) * std::pow(v0 / threshold, beta(model.collateral));
  const double raw = principal + quote.bank_cost - v0;
  quote.diagnostics.raw_fee = raw;
  quote.fee = std::max(raw, 0.0);
  return quote;
}

}  // namespace stockloan
