#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "stockloan/error.hpp"
#include "stockloan/lcp.hpp"

using namespace stockloan;

TEST(BuildGrid, UniformExamples) {
  const auto g = build_grid(400.0, 5, 1.0, 2);
  EXPECT_EQ(g.v_nodes, (std::vector<double>{0, 100, 200, 300, 400}));
  EXPECT_EQ(g.t_nodes, (std::vector<double>{0, 1}));

  const auto fine = build_grid(400.0, 401, 5.0, 1001);
  EXPECT_NEAR(fine.v_nodes[1] - fine.v_nodes[0], 1.0, 1e-12);
  EXPECT_NEAR(fine.t_nodes[1] - fine.t_nodes[0], 0.005, 1e-12);
  EXPECT_EQ(fine.v_max(), 400.0);
  EXPECT_EQ(fine.maturity(), 5.0);
}

TEST(BuildGrid, SinhSpacingIsStrictlyIncreasingAndClustered) {
  const auto g = build_grid(500.0, 201, 1.0, 11, Spacing{SpacingKind::Sinh, 100.0, 20.0});
  ASSERT_EQ(g.nv(), 201u);
  EXPECT_EQ(g.v_nodes.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.v_max(), 500.0);
  double near_center = 1e300;
  for (std::size_t i = 1; i < g.nv(); ++i) {
    ASSERT_GT(g.v_nodes[i], g.v_nodes[i - 1]);
    if (std::abs(g.v_nodes[i] - 100.0) < 5.0) {
      near_center = std::min(near_center, g.v_nodes[i] - g.v_nodes[i - 1]);
    }
  }
  EXPECT_LT(near_center, 500.0 / 200.0);
  EXPECT_GT(g.v_nodes.back() - g.v_nodes[g.nv() - 2], 500.0 / 200.0);
}

TEST(BuildGrid, RejectsBadSizes) {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidParameter;
  };
  EXPECT_EQ(code([] { build_grid(0.0, 5, 1.0, 2); }), ErrorCode::InvalidGrid);
  EXPECT_EQ(code([] { build_grid(100.0, 2, 1.0, 2); }), ErrorCode::InvalidGrid);
  EXPECT_EQ(code([] { build_grid(100.0, 5, 1.0, 1); }), ErrorCode::InvalidGrid);
  EXPECT_EQ(code([] { build_grid(100.0, 5, -1.0, 3); }), ErrorCode::InvalidGrid);
}

TEST(SpatialStencil, CentralWhenMonotoneUpwindOtherwise) {
  const auto central = spatial_stencil(1.0, 1.0, 2.0, 1.0, 0.1);
  EXPECT_DOUBLE_EQ(central.lower, 2.0 - 0.5);
  EXPECT_DOUBLE_EQ(central.upper, 2.0 + 0.5);
  EXPECT_DOUBLE_EQ(central.diag, -4.0 - 0.1);

  // Drift dominating diffusion: off-diagonals must stay non-negative.
  for (double drift : {-50.0, 50.0}) {
    const auto s = spatial_stencil(1.0, 1.0, 0.1, drift, 0.0);
    EXPECT_GE(s.lower, 0.0);
    EXPECT_GE(s.upper, 0.0);
    EXPECT_NEAR(s.lower + s.diag + s.upper, 0.0, 1e-12);
  }
}

TEST(SolveTridiagonal, MatchesDenseElimination) {
  const std::size_t n = 9;
  std::vector<double> lo(n), di(n), up(n), rhs(n);
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = -1.0 - 0.1 * i;
    up[i] = -0.5 + 0.05 * i;
    di[i] = 4.0 + i;
    rhs[i] = std::sin(static_cast<double>(i));
    dense[i][i] = di[i];
    if (i > 0) dense[i][i - 1] = lo[i];
    if (i + 1 < n) dense[i][i + 1] = up[i];
  }
  const auto x = solve_tridiagonal(lo, di, up, rhs);
  const auto ref = oracle::dense_solve(dense, rhs);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-14);
}

TEST(SolveLcp, ConstantObstacleGivesConstantSurface) {
  LcpProblem p;
  p.drift = [](double, double) { return 0.0; };
  p.diffusion = [](double v, double) { return 0.02 * v * v; };
  p.obstacle = [](double, double) { return 1.0; };
  p.terminal = [](double) { return 1.0; };
  p.left_boundary = [](double) { return 1.0; };
  const auto grid = build_grid(300.0, 61, 2.0, 41);
  const auto sol = solve_lcp(p, grid, {}, {});
  for (double x : sol.surface) EXPECT_NEAR(x, 1.0, 1e-11);  // round-off only
}

namespace {

// Backward equation u_t + a u_v + b u_vv = 0 with constant a and b on [0, X]
// has the solution e^{-b c^2 (T - t)} sin(c (v + a (T - t))) for c = pi / X.
struct AdvectionDiffusion {
  double a = 0.3;
  double b = 0.8;
  double x_max = 4.0;
  double maturity = 1.0;
  double c() const { return std::numbers::pi / x_max; }
  double exact(double t, double v) const {
    const double tau = maturity - t;
    return std::exp(-b * c() * c() * tau) * std::sin(c() * (v + a * tau));
  }
  LcpProblem problem() const {
    LcpProblem p;
    p.drift = [a = a](double, double) { return a; };
    p.diffusion = [b = b](double, double) { return b; };
    p.terminal = [this](double v) { return exact(maturity, v); };
    p.left_boundary = [this](double t) { return exact(t, 0.0); };
    p.right_boundary = DirichletBoundary{[this](double t) { return exact(t, x_max); }};
    return p;
  }
  double max_error(std::size_t intervals, std::size_t steps, ThetaScheme scheme) const {
    const auto grid = build_grid(x_max, intervals + 1, maturity, steps + 1);
    const auto sol = solve_lcp(problem(), grid, scheme, {});
    double err = 0.0;
    for (std::size_t i = 0; i < grid.nv(); ++i) {
      err = std::max(err, std::abs(sol.at(0, i) - exact(0.0, grid.v_nodes[i])));
    }
    return err;
  }
};

}  // namespace

TEST(SolveLcp, UnconstrainedMatchesPlainThetaScheme) {
  const AdvectionDiffusion ad;
  oracle::ThetaReference ref;
  ref.drift = [&](double) { return ad.a; };
  ref.diffusion = [&](double) { return ad.b; };
  ref.terminal = [&](double v) { return ad.exact(ad.maturity, v); };
  ref.left = [&](double t) { return ad.exact(t, 0.0); };
  ref.right = [&](double t) { return ad.exact(t, ad.x_max); };
  const auto expected = oracle::theta_reference_solve(ref, ad.x_max, 40, ad.maturity, 50, 0.5, 2);

  const auto grid = build_grid(ad.x_max, 41, ad.maturity, 51);
  const auto sol = solve_lcp(ad.problem(), grid, ThetaScheme{0.5, 2}, {});
  for (std::size_t i = 0; i < grid.nv(); ++i) EXPECT_NEAR(sol.at(0, i), expected[i], 1e-12);
}

TEST(SolveLcp, ConvergenceOrderWithoutObstacle) {
  const AdvectionDiffusion ad;
  // Crank-Nicolson: second order in both steps.
  const double cn1 = ad.max_error(40, 40, {0.5, 0});
  const double cn2 = ad.max_error(80, 80, {0.5, 0});
  EXPECT_GT(cn1 / cn2, 3.5);
  // Implicit Euler with a fine space grid: first order in time.
  const double ie1 = ad.max_error(400, 20, {1.0, 0});
  const double ie2 = ad.max_error(400, 40, {1.0, 0});
  EXPECT_GT(ie1 / ie2, 1.8);
  EXPECT_LT(ie1 / ie2, 2.2);
}

namespace {

// Upper-obstacle stopping problem shaped like the borrower's F.
LcpProblem stopping_problem() {
  LcpProblem p;
  p.drift = [](double v, double) { return -0.05 * v; };
  p.diffusion = [](double v, double) { return 0.08 * v * v; };
  p.obstacle = [](double v, double) { return std::exp(-0.01 * std::max(v - 100.0, 0.0)); };
  p.terminal = [](double v) { return std::exp(-0.01 * std::max(v - 100.0, 0.0)); };
  p.left_boundary = [](double) { return 1.0; };
  return p;
}

}  // namespace

TEST(SolveLcp, ComplementarityAndObstacleRespected) {
  const auto grid = build_grid(500.0, 201, 5.0, 201);
  const auto p = stopping_problem();
  const auto sol = solve_lcp(p, grid, {}, {});
  EXPECT_LT(sol.max_residual, 1e-7);
  for (std::size_t n = 0; n < sol.nt; ++n) {
    for (std::size_t i = 0; i < sol.nv; ++i) {
      const double kappa = p.obstacle(grid.v_nodes[i], grid.t_nodes[n]);
      EXPECT_LE(sol.at(n, i), kappa + 1e-12);
      if (sol.active(n, i)) {
        EXPECT_NEAR(sol.at(n, i), kappa, 1e-12);
      }
    }
  }
}

TEST(SolveLcp, PsorUpdatesShrinkAcrossSweeps) {
  PsorSettings psor;
  psor.record_history = true;
  const auto grid = build_grid(500.0, 101, 1.0, 51);
  const auto sol = solve_lcp(stopping_problem(), grid, {}, psor);
  ASSERT_EQ(sol.history.size(), sol.nt - 1);  // one entry per time step
  std::size_t checked = 0;
  for (const auto& h : sol.history) {
    for (std::size_t s = 2; s < h.size(); ++s) {
      EXPECT_LE(h[s], h[s - 1] * (1.0 + 1e-9) + 1e-15);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0u);
}

TEST(SolveLcp, DivergenceIsReported) {
  PsorSettings psor;
  psor.max_iter = 1;
  const auto grid = build_grid(500.0, 101, 1.0, 11);
  try {
    solve_lcp(stopping_problem(), grid, {}, psor);
    FAIL() << "expected PsorDivergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PsorDivergence);
  }
}

TEST(SolveLcp, RefinementChangesValueLittle) {
  const auto p = stopping_problem();
  auto value_at_100 = [&](std::size_t intervals, std::size_t steps) {
    const auto grid = build_grid(500.0, intervals + 1, 5.0, steps + 1);
    const auto sol = solve_lcp(p, grid, {}, {});
    return interpolate(grid.v_nodes, sol.row(0), 100.0);
  };
  const double coarse = value_at_100(200, 250);
  const double mid = value_at_100(400, 500);
  const double fine = value_at_100(800, 1000);
  EXPECT_LT(std::abs(fine - mid), std::abs(mid - coarse));
  EXPECT_LT(std::abs(fine - mid), 1e-4);
}

TEST(Interpolate, ExactAtNodesAndForQuadratics) {
  const std::vector<double> x{0.0, 0.5, 1.7, 2.0, 3.5};
  std::vector<double> y;
  for (double xi : x) y.push_back(2.0 * xi * xi - xi + 3.0);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(interpolate(x, y, x[i]), y[i]);
  for (double q : {0.2, 1.1, 1.9, 3.0}) EXPECT_NEAR(interpolate(x, y, q), 2 * q * q - q + 3, 1e-12);
}
