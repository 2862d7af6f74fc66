#include <gtest/gtest.h>

#include <cmath>

#include "stockloan/error.hpp"
#include "stockloan/model.hpp"

using namespace stockloan;

namespace {

void expect_code(ErrorCode code, auto&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(ImpliedMu2, ZeroMarketPremiumGivesRiskFreeRate) {
  EXPECT_DOUBLE_EQ(implied_mu2(MarketModel(0.05, 0.05, 0.2), 0.15, 0.0, 0.9), 0.05);
}

TEST(ImpliedMu2, ZeroCorrelationGivesRMinusDelta) {
  EXPECT_NEAR(implied_mu2(MarketModel(0.05, 0.10, 0.2), 0.15, 0.05, 0.0), 0.0, 1e-15);
}

TEST(ImpliedMu2, FiniteMaturityReferenceParameters) {
  // 0.4 * 0.4 * 0.25 + 0.05 - 0.05
  EXPECT_NEAR(implied_mu2(MarketModel(0.05, 0.10, 0.2), 0.4, 0.05, 0.4), 0.04, 1e-15);
}

TEST(ImpliedMu2, LinearInRhoAndDelta) {
  const MarketModel m(0.03, 0.11, 0.25);
  const double sigma2 = 0.3;
  const double rho_slope = sigma2 * (m.mu1() - m.r()) / m.sigma1();
  for (double rho : {-0.9, -0.2, 0.0, 0.5, 0.99}) {
    for (double delta : {0.0, 0.02, 0.1}) {
      const double base = implied_mu2(m, sigma2, 0.0, 0.0);
      EXPECT_NEAR(implied_mu2(m, sigma2, delta, rho), base + rho_slope * rho - delta, 1e-15);
    }
  }
}

TEST(CollateralModel, StoresImpliedDriftBitForBit) {
  const MarketModel m(0.05, 0.10, 0.2);
  for (double rho : {-0.7, 0.0, 0.4, 0.9}) {
    const CollateralModel c(m, 0.4, 0.05, rho);
    EXPECT_EQ(c.mu2(), implied_mu2(m, 0.4, 0.05, rho));
  }
}

TEST(CollateralModel, RejectsInvalidInputs) {
  const MarketModel m(0.05, 0.10, 0.2);
  expect_code(ErrorCode::InvalidParameter, [&] { CollateralModel(m, 0.0, 0.05, 0.4); });
  expect_code(ErrorCode::InvalidParameter, [&] { CollateralModel(m, 0.2, -0.01, 0.4); });
  expect_code(ErrorCode::InvalidParameter, [&] { CollateralModel(m, 0.2, 0.05, 1.01); });
  expect_code(ErrorCode::InvalidParameter, [&] { MarketModel(0.05, 0.1, 0.0); });
}

TEST(Beta, Examples) {
  const MarketModel m(0.05, 0.10, 0.2);
  EXPECT_NEAR(beta(CollateralModel(m, 0.15, 0.05, 0.9)), 1.0 + 0.1 / 0.0225, 1e-12);
  EXPECT_DOUBLE_EQ(beta(CollateralModel(m, 0.15, 0.0, 0.9)), 1.0);
  EXPECT_NEAR(beta(CollateralModel(m, 0.4, 0.05, 0.4)), 1.625, 1e-12);
}

TEST(Beta, AtLeastOneForNonnegativeDividend) {
  const MarketModel m(0.05, 0.10, 0.2);
  for (double s : {0.05, 0.15, 0.4, 1.0}) {
    for (double d : {0.0, 0.01, 0.3}) EXPECT_GE(beta(CollateralModel(m, s, d, 0.3)), 1.0);
  }
}

TEST(Beta, GeneralFormAgreesUnderCapmAndRejectsNonPositive) {
  const MarketModel m(0.05, 0.10, 0.2);
  const CollateralModel c(m, 0.4, 0.05, 0.4);
  EXPECT_NEAR(beta_general(m, 0.4, c.mu2(), 0.4), beta(c), 1e-12);
  // A drift far above the CAPM value makes the exponent non-positive.
  expect_code(ErrorCode::InvalidParameter, [&] { beta_general(m, 0.4, 0.5, 0.4); });
}

TEST(MinimalMartingaleDrift, EqualsMinusDelta) {
  const MarketModel m(0.05, 0.12, 0.25);
  for (double d : {0.0, 0.05, 0.1}) {
    EXPECT_NEAR(minimal_martingale_drift(m, CollateralModel(m, 0.3, d, 0.6)), -d, 1e-15);
  }
}

TEST(LoanTerms, StrikeGrowsAtExcessRate) {
  const LoanTerms loan(100.0, 0.07, 100.0, Finite{5.0});
  EXPECT_DOUBLE_EQ(loan.strike_at(0.0, 0.05), 100.0);
  EXPECT_NEAR(loan.strike_at(2.0, 0.05), 100.0 * std::exp(0.04), 1e-12);
  EXPECT_DOUBLE_EQ(loan.maturity(), 5.0);
  EXPECT_FALSE(loan.is_perpetual());
}

TEST(LoanTerms, Validation) {
  expect_code(ErrorCode::InvalidParameter, [] { LoanTerms(0.0, 0.05, 100.0, Perpetual{}); });
  expect_code(ErrorCode::InvalidParameter, [] { LoanTerms(90.0, 0.05, -1.0, Perpetual{}); });
  expect_code(ErrorCode::InvalidParameter, [] { LoanTerms(90.0, 0.05, 100.0, Finite{0.0}); });
  expect_code(ErrorCode::InvalidParameter,
              [] { (void)LoanTerms(90.0, 0.05, 100.0, Perpetual{}).maturity(); });
}

TEST(ModelParameters, DefaultsBuildFiniteMaturityReferenceModel) {
  const auto model = ModelParameters{}.build();
  EXPECT_DOUBLE_EQ(model.market.r(), 0.05);
  EXPECT_DOUBLE_EQ(model.collateral.sigma2(), 0.4);
  EXPECT_DOUBLE_EQ(model.loan.alpha(), 0.07);
  EXPECT_DOUBLE_EQ(model.loan.maturity(), 5.0);
  EXPECT_NEAR(model.effective_risk_aversion(), 0.01 * (1 - 0.16), 1e-15);
}

TEST(ModelParameters, RejectsNonPositiveRiskAversion) {
  ModelParameters p;
  p.gamma = 0.0;
  expect_code(ErrorCode::InvalidParameter, [&] { p.build(); });
}
