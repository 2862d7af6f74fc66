#pragma once

#include <variant>

namespace stockloan {

/// Risk-free rate and market-portfolio dynamics. Rates are per year,
/// volatility per square-root year.
class MarketModel {
 public:
  MarketModel(double r, double mu1, double sigma1);

  double r() const noexcept { return r_; }
  double mu1() const noexcept { return mu1_; }
  double sigma1() const noexcept { return sigma1_; }
  double sharpe_ratio() const noexcept { return (mu1_ - r_) / sigma1_; }

 private:
  double r_;
  double mu1_;
  double sigma1_;
};

/// CAPM-implied expected return of the collateral:
/// mu2 = rho * sigma2 * (mu1 - r) / sigma1 + r - delta.
double implied_mu2(const MarketModel& market, double sigma2, double delta, double rho);

/// Collateral dynamics. The drift is never user supplied; it is always the
/// CAPM value returned by implied_mu2.
class CollateralModel {
 public:
  CollateralModel(const MarketModel& market, double sigma2, double delta, double rho);

  double sigma2() const noexcept { return sigma2_; }
  double delta() const noexcept { return delta_; }
  double rho() const noexcept { return rho_; }
  double mu2() const noexcept { return mu2_; }

 private:
  double sigma2_;
  double delta_;
  double rho_;
  double mu2_;
};

/// Exponent 1 + 2 delta / sigma2^2 of the hitting probability (v / V*)^beta.
double beta(const CollateralModel& collateral);

/// Unreduced form 1 - (2/sigma2) ((mu2 - r)/sigma2 - rho (mu1 - r)/sigma1),
/// valid for any drift. Throws InvalidParameter when the result is not
/// positive (the repayment option would never be exercised).
double beta_general(const MarketModel& market, double sigma2, double mu2, double rho);

/// Drift coefficient of dV/V under the minimal martingale measure,
/// mu2 - r - rho (mu1 - r) sigma2 / sigma1. Equals -delta under CAPM.
double minimal_martingale_drift(const MarketModel& market, const CollateralModel& collateral);

struct Perpetual {};
struct Finite {
  double maturity;  // years since inception
};
using Horizon = std::variant<Perpetual, Finite>;

/// Loan contract terms. Times are measured from inception (t0 = 0).
class LoanTerms {
 public:
  LoanTerms(double principal, double alpha, double v0, Horizon horizon);

  double principal() const noexcept { return principal_; }
  double alpha() const noexcept { return alpha_; }
  double v0() const noexcept { return v0_; }
  const Horizon& horizon() const noexcept { return horizon_; }
  bool is_perpetual() const noexcept { return std::holds_alternative<Perpetual>(horizon_); }
  /// Throws InvalidParameter for a perpetual loan.
  double maturity() const;

  /// Repayment amount in discounted units, L e^{(alpha - r) t}.
  double strike_at(double t, double r) const;

 private:
  double principal_;
  double alpha_;
  double v0_;
  Horizon horizon_;
};

class RiskPreference {
 public:
  explicit RiskPreference(double gamma);

  double gamma() const noexcept { return gamma_; }

 private:
  double gamma_;
};

/// Everything a valuation needs, validated.
struct StockLoanModel {
  MarketModel market;
  CollateralModel collateral;
  LoanTerms loan;
  RiskPreference preference;

  /// gamma (1 - rho^2), the effective risk aversion toward unhedgeable risk.
  double effective_risk_aversion() const noexcept;
};

/// Flat, unvalidated parameter set. Convenient for configuration files and
/// parameter sweeps; build() validates and derives mu2.
struct ModelParameters {
  double r = 0.05;
  double mu1 = 0.10;
  double sigma1 = 0.20;
  double sigma2 = 0.4;
  double delta = 0.05;
  double rho = 0.4;
  double gamma = 0.01;
  double principal = 100.0;
  double alpha = 0.07;
  double v0 = 100.0;
  Horizon horizon = Finite{5.0};

  StockLoanModel build() const;
};

}  // namespace stockloan
