#include "stockloan/model.hpp"

#include <cmath>
#include <string>

#include "stockloan/error.hpp"

namespace stockloan {
namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::InvalidParameter, message);
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

MarketModel::MarketModel(double r, double mu1, double sigma1)
    : r_(r), mu1_(mu1), sigma1_(sigma1) {
  require(finite(r) && finite(mu1) && finite(sigma1), "market parameters must be finite");
  require(sigma1 > 0.0, "sigma1 must be positive");
}

double implied_mu2(const MarketModel& market, double sigma2, double delta, double rho) {
  return rho * sigma2 * (market.mu1() - market.r()) / market.sigma1() + market.r() - delta;
}

CollateralModel::CollateralModel(const MarketModel& market, double sigma2, double delta,
                                 double rho)
    : sigma2_(sigma2), delta_(delta), rho_(rho) {
  require(finite(sigma2) && finite(delta) && finite(rho),
          "collateral parameters must be finite");
  require(sigma2 > 0.0, "sigma2 must be positive");
  require(delta >= 0.0, "delta must be non-negative");
  require(rho >= -1.0 && rho <= 1.0, "rho must lie in [-1, 1]");
  mu2_ = implied_mu2(market, sigma2, delta, rho);
}

double beta(const CollateralModel& collateral) {
  const double s = collateral.sigma2();
  return 1.0 + 2.0 * collateral.delta() / (s * s);
}

double beta_general(const MarketModel& market, double sigma2, double mu2, double rho) {
  require(sigma2 > 0.0, "sigma2 must be positive");
  const double b =
      1.0 - (2.0 / sigma2) * ((mu2 - market.r()) / sigma2 - rho * market.sharpe_ratio());
  require(b > 0.0, "beta <= 0: repayment is never optimal in this parameter regime");
  return b;
}

double minimal_martingale_drift(const MarketModel& market, const CollateralModel& collateral) {
  return collateral.mu2() - market.r() -
         collateral.rho() * market.sharpe_ratio() * collateral.sigma2();
}

LoanTerms::LoanTerms(double principal, double alpha, double v0, Horizon horizon)
    : principal_(principal), alpha_(alpha), v0_(v0), horizon_(horizon) {
  require(finite(principal) && principal > 0.0, "principal must be positive");
  require(finite(alpha), "alpha must be finite");
  require(finite(v0) && v0 > 0.0, "v0 must be positive");
  if (const auto* f = std::get_if<Finite>(&horizon_)) {
    require(finite(f->maturity) && f->maturity > 0.0, "maturity must be positive");
  }
}

double LoanTerms::maturity() const {
  const auto* f = std::get_if<Finite>(&horizon_);
  require(f != nullptr, "perpetual loan has no maturity");
  return f->maturity;
}

double LoanTerms::strike_at(double t, double r) const {
  return principal_ * std::exp((alpha_ - r) * t);
}

RiskPreference::RiskPreference(double gamma) : gamma_(gamma) {
  require(finite(gamma) && gamma > 0.0, "gamma must be positive");
}

double StockLoanModel::effective_risk_aversion() const noexcept {
  const double rho = collateral.rho();
  return preference.gamma() * (1.0 - rho * rho);
}

StockLoanModel ModelParameters::build() const {
  MarketModel market(r, mu1, sigma1);
  CollateralModel collateral(market, sigma2, delta, rho);
  return StockLoanModel{market, collateral, LoanTerms(principal, alpha, v0, horizon),
                        RiskPreference(gamma)};
}

}  // namespace stockloan
