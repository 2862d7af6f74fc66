#include "stockloan/finite_horizon.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include "stockloan/error.hpp"
#include "stockloan/perpetual.hpp"

namespace stockloan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

GridConfig GridConfig::refined() const {
  GridConfig out = *this;
  out.v_intervals *= 2;
  out.t_steps *= 2;
  out.scheme.rannacher_steps *= 2;
  out.bank_scheme.rannacher_steps *= 2;
  return out;
}

Grid make_grid(const StockLoanModel& model, const GridConfig& cfg) {
  const double maturity = model.loan.maturity();
  const double v0 = model.loan.v0();
  const double principal = model.loan.principal();
  if (cfg.v_intervals < 2 || cfg.t_steps < 1) {
    throw Error(ErrorCode::InvalidGrid, "grid needs at least 2 v intervals and 1 time step");
  }
  double v_max = cfg.v_max.value_or(
      cfg.v_max_factor * std::max(v0, principal) *
      std::exp(std::abs(model.loan.alpha() - model.market.r()) * maturity));
  if (!(v_max > v0)) throw Error(ErrorCode::InvalidGrid, "v_max must exceed V0");

  Spacing spacing = cfg.spacing;
  if (spacing.kind == SpacingKind::Uniform) {
    const auto n = static_cast<double>(cfg.v_intervals);
    // Rounding down keeps the domain at least as large as requested.
    const double nodes_below_v0 = std::max(1.0, std::floor(v0 * n / v_max));
    v_max = n * v0 / nodes_below_v0;
  } else {
    if (spacing.center <= 0.0) spacing.center = principal;
    if (spacing.width <= 0.0) spacing.width = 0.5 * principal;
  }
  return build_grid(v_max, cfg.v_intervals + 1, maturity, cfg.t_steps + 1, spacing);
}

ObstacleSpec ObstacleSpec::from_model(const StockLoanModel& model) {
  return ObstacleSpec{model.effective_risk_aversion(), model.loan.alpha() - model.market.r(),
                      model.loan.principal()};
}

double ObstacleSpec::strike(double t) const { return principal * std::exp(strike_growth * t); }

double ObstacleSpec::operator()(double t, double v) const {
  return std::exp(-k * positive_part(v - strike(t)));
}

double IndifferenceSolution::indifference_at(std::size_t n, std::size_t i) const {
  return -std::log(lcp.at(n, i)) / obstacle.k;
}

IndifferenceSolution solve_indifference(const StockLoanModel& model, const GridConfig& cfg) {
  if (model.loan.is_perpetual()) {
    throw Error(ErrorCode::InvalidParameter, "finite-maturity solve needs a finite horizon");
  }
  const double k = model.effective_risk_aversion();
  if (!(k >= kCompleteMarketCutoff)) {
    throw Error(ErrorCode::InvalidParameter,
                "gamma (1 - rho^2) must be positive for the indifference problem");
  }

  IndifferenceSolution out;
  out.grid = make_grid(model, cfg);
  out.obstacle = ObstacleSpec::from_model(model);
  const ObstacleSpec kappa = out.obstacle;
  const double maturity = out.grid.maturity();
  const double drift = minimal_martingale_drift(model.market, model.collateral);
  const double half_var = 0.5 * model.collateral.sigma2() * model.collateral.sigma2();

  LcpProblem problem;
  problem.drift = [drift](double v, double) { return drift * v; };
  problem.diffusion = [half_var](double v, double) { return half_var * v * v; };
  problem.obstacle = [kappa](double v, double t) { return kappa(t, v); };
  problem.side = ObstacleSide::Upper;
  problem.terminal = [kappa, maturity](double v) { return kappa(maturity, v); };
  problem.left_boundary = [](double) { return 1.0; };
  problem.right_boundary = LinearBoundary{};

  out.lcp = solve_lcp(problem, out.grid, cfg.scheme, cfg.psor);
  out.boundary = extract_boundary(out.lcp, out.grid, out.obstacle, cfg.detection_tol);
  out.f0 = interpolate(out.grid.v_nodes, out.lcp.row(0), model.loan.v0());
  out.p0 = -std::log(out.f0) / k;
  return out;
}

ExerciseBoundary extract_boundary(const LcpSolution& sol, const Grid& grid,
                                  const ObstacleSpec& obstacle, double detection_tol) {
  const auto& v = grid.v_nodes;
  ExerciseBoundary boundary;
  boundary.times = grid.t_nodes;
  boundary.levels.assign(grid.nt(), kInf);
  boundary.detection_tol = detection_tol;

  std::vector<double> gap(grid.nv());
  for (std::size_t n = 0; n < grid.nt(); ++n) {
    const double t = grid.t_nodes[n];
    const double strike = obstacle.strike(t);
    for (std::size_t i = 0; i < v.size(); ++i) gap[i] = obstacle(t, v[i]) - sol.at(n, i);

    const auto first_above = static_cast<std::size_t>(
        std::upper_bound(v.begin(), v.end(), strike) - v.begin());
    std::size_t hit = v.size();
    for (std::size_t i = first_above; i < v.size(); ++i) {
      if (gap[i] <= detection_tol) {
        hit = i;
        break;
      }
    }
    if (hit == v.size()) {
      ++boundary.missing_steps;
      continue;
    }

    double lo_v;
    double lo_gap;
    if (hit > first_above) {
      lo_v = v[hit - 1];
      lo_gap = gap[hit - 1];
    } else {
      // The bracket starts at the strike itself.
      lo_v = strike;
      if (hit == 0) {
        lo_gap = gap[0];
      } else {
        const double w = (strike - v[hit - 1]) / (v[hit] - v[hit - 1]);
        lo_gap = gap[hit - 1] + w * (gap[hit] - gap[hit - 1]);
      }
      if (lo_gap <= detection_tol) {
        boundary.levels[n] = strike;
        continue;
      }
    }
    const double w = (lo_gap - detection_tol) / (lo_gap - gap[hit]);
    boundary.levels[n] = lo_v + std::clamp(w, 0.0, 1.0) * (v[hit] - lo_v);
  }
  return boundary;
}

double bank_cost_pde(const ExerciseBoundary& boundary, const StockLoanModel& model,
                     const Grid& grid, const ThetaScheme& scheme) {
  const double principal = model.loan.principal();
  const double v0 = model.loan.v0();
  const double r_hat = model.market.r() - model.loan.alpha();
  const double sigma = model.collateral.sigma2();
  const double delta = model.collateral.delta();
  const auto& v = grid.v_nodes;
  const auto& t = grid.t_nodes;
  const std::size_t last = grid.nv() - 1;

  auto hatted_barrier = [&](double time) {
    const double level = boundary.at(time);
    if (!std::isfinite(level)) return kInf;
    const double hatted = std::exp(r_hat * time) * level;
    if (!(hatted > 0.0)) {
      std::ostringstream msg;
      msg << "hatted boundary is non-positive at t=" << time;
      throw Error(ErrorCode::InvalidBoundary, msg.str());
    }
    return hatted;
  };
  for (double time : t) hatted_barrier(time);

  if (v0 >= boundary.at(0.0)) return v0 - principal;

  const double half_var = 0.5 * sigma * sigma;
  auto stencil_at = [&](std::size_t i, double h_plus) {
    return spatial_stencil(v[i] - v[i - 1], h_plus, half_var * v[i] * v[i],
                           (r_hat - delta) * v[i], r_hat);
  };

  std::vector<double> c(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = positive_part(v[i] - principal);

  std::vector<double> lower(v.size()), diag(v.size()), upper(v.size()), rhs(v.size());
  for (std::size_t n = grid.nt() - 1; n-- > 0;) {
    const std::size_t step = grid.nt() - 2 - n;
    const double theta = static_cast<int>(step) < scheme.rannacher_steps ? 1.0 : scheme.theta;
    const double dt = t[n + 1] - t[n];
    const double barrier = hatted_barrier(t[n]);
    const bool restricted = barrier < v[last];

    // Unknowns are nodes 1..m; node m+1 (if restricted) is replaced by the
    // barrier point itself with Dirichlet value (barrier - L)^+.
    std::size_t m = last;
    double h_last = 0.0;
    const double barrier_value = positive_part(barrier - principal);
    if (restricted) {
      m = static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), barrier) - v.begin()) - 1;
      h_last = barrier - v[m];
      if (m >= 1 && h_last < 1e-6 * (v[m] - v[m - 1])) {
        // Barrier sits on node m.
        --m;
        h_last = barrier - v[m];
      }
    }

    std::vector<double> next(v.size());
    next[0] = 0.0;
    if (m >= 1) {
      const std::size_t size = m + 1;
      for (std::size_t i = 1; i <= m; ++i) {
        Stencil s;
        double far_value = 0.0;  // contribution of a Dirichlet right neighbour
        if (i < m || (!restricted && i < last)) {
          s = stencil_at(i, v[i + 1] - v[i]);
        } else if (restricted) {
          s = stencil_at(i, h_last);
          far_value = barrier_value;
        } else {
          // Zero second derivative at v_max.
          const double h = v[i] - v[i - 1];
          const double b = (r_hat - delta) * v[i];
          s = Stencil{-b / h, b / h - r_hat, 0.0};
        }
        lower[i] = -theta * dt * s.lower;
        diag[i] = 1.0 - theta * dt * s.diag;
        const bool neighbour_is_unknown = i < m;
        upper[i] = neighbour_is_unknown ? -theta * dt * s.upper : 0.0;

        double explicit_part = s.lower * c[i - 1] + s.diag * c[i];
        if (neighbour_is_unknown) explicit_part += s.upper * c[i + 1];
        else explicit_part += s.upper * far_value;
        rhs[i] = c[i] + (1.0 - theta) * dt * explicit_part;
        if (!neighbour_is_unknown) rhs[i] += theta * dt * s.upper * far_value;
      }
      lower[0] = upper[0] = 0.0;
      diag[0] = 1.0;
      rhs[0] = 0.0;
      const auto x = solve_tridiagonal(std::span(lower).first(size), std::span(diag).first(size),
                                       std::span(upper).first(size), std::span(rhs).first(size));
      std::copy(x.begin(), x.end(), next.begin());
    }
    for (std::size_t i = m + 1; i < v.size(); ++i) next[i] = positive_part(v[i] - principal);
    c = std::move(next);
  }
  return interpolate(v, c, v0);
}

FeeQuote fee_finite(const StockLoanModel& model, const GridConfig& cfg) {
  const IndifferenceSolution sol = solve_indifference(model, cfg);
  const double principal = model.loan.principal();
  const double v0 = model.loan.v0();

  FeeQuote quote;
  quote.indifference_value = sol.p0;
  quote.bank_cost = bank_cost_pde(sol.boundary, model, sol.grid, cfg.bank_scheme);
  quote.boundary = sol.boundary;

  auto& diag = quote.diagnostics;
  diag.psor_max_iterations =
      *std::max_element(sol.lcp.psor_iterations.begin(), sol.lcp.psor_iterations.end());
  for (int it : sol.lcp.psor_iterations) diag.psor_total_iterations += it;
  diag.max_complementarity = sol.lcp.max_residual;
  diag.boundary_missing_steps = sol.boundary.missing_steps;
  if (sol.boundary.missing_steps > 0) {
    diag.warnings.push_back("exercise boundary beyond v_max at " +
                            std::to_string(sol.boundary.missing_steps) + " time steps");
  }

  if (v0 >= sol.boundary.at(0.0)) {
    diag.branch = FeeBranch::ImmediateExercise;
    diag.raw_fee = 0.0;
    quote.fee = 0.0;
    return quote;
  }
  diag.branch = FeeBranch::FiniteHorizon;
  const double raw = principal + quote.bank_cost - v0;
  diag.raw_fee = raw;
  if (raw >= 0.0) {
    quote.fee = raw;
  } else if (raw >= -0.005 * principal) {
    quote.fee = 0.0;
    diag.clamped = true;
    diag.warnings.push_back("negative fee within grid tolerance clamped to zero");
  } else {
    std::ostringstream msg;
    msg << "computed fee " << raw << " is negative beyond grid tolerance";
    throw Error(ErrorCode::NegativeFee, msg.str());
  }
  return quote;
}

FeeQuote quote_fee(const StockLoanModel& model, const GridConfig& cfg) {
  return model.loan.is_perpetual() ? fee(model) : fee_finite(model, cfg);
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view name) {
  if (name == "gamma") return SweepAxis::Gamma;
  if (name == "delta") return SweepAxis::Delta;
  if (name == "rho") return SweepAxis::Rho;
  if (name == "sigma2") return SweepAxis::Sigma2;
  if (name == "v0") return SweepAxis::V0;
  if (name == "L" || name == "principal") return SweepAxis::Principal;
  if (name == "T" || name == "maturity") return SweepAxis::Maturity;
  if (name == "alpha") return SweepAxis::Alpha;
  return std::nullopt;
}

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Gamma: return "gamma";
    case SweepAxis::Delta: return "delta";
    case SweepAxis::Rho: return "rho";
    case SweepAxis::Sigma2: return "sigma2";
    case SweepAxis::V0: return "v0";
    case SweepAxis::Principal: return "L";
    case SweepAxis::Maturity: return "T";
    case SweepAxis::Alpha: return "alpha";
  }
  return "unknown";
}

ModelParameters with_axis_value(ModelParameters base, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::Gamma: base.gamma = value; break;
    case SweepAxis::Delta: base.delta = value; break;
    case SweepAxis::Rho: base.rho = value; break;
    case SweepAxis::Sigma2: base.sigma2 = value; break;
    case SweepAxis::V0: base.v0 = value; break;
    case SweepAxis::Principal: base.principal = value; break;
    case SweepAxis::Maturity: base.horizon = Finite{value}; break;
    case SweepAxis::Alpha: base.alpha = value; break;
  }
  return base;
}

std::vector<SweepRow> sweep(const ModelParameters& base, const GridConfig& cfg, SweepAxis axis,
                            std::span<const double> values, unsigned workers) {
  auto solve_row = [&](double value) {
    SweepRow row;
    row.axis_value = value;
    try {
      row.quote = quote_fee(with_axis_value(base, axis, value).build(), cfg);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  };

  std::vector<SweepRow> rows(values.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < values.size(); ++i) rows[i] = solve_row(values[i]);
    return rows;
  }
  // Rows are independent; each worker takes every `workers`-th row.
  std::vector<std::future<void>> tasks;
  for (unsigned w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < values.size(); i += workers) rows[i] = solve_row(values[i]);
    }));
  }
  for (auto& task : tasks) task.get();
  return rows;
}

}  // namespace stockloan
