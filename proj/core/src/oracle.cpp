#include "stockloan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <thread>

#include "stockloan/error.hpp"

namespace stockloan {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct BatchMoments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
};

// Barrier-hitting simulation of log V^ on a uniform monitoring grid.
struct BarrierSimulation {
  double log_v0 = 0.0;
  double r_hat = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  double principal = 0.0;
  double horizon = 0.0;
  bool terminal_payoff = true;
  std::vector<double> log_barrier;  // per monitoring date, +inf if absent
  std::vector<double> hit_payoff;   // discounted payoff if hit at that date

  double path(std::span<const double> normals, double sign, bool bridge) const {
    const std::size_t n = normals.size();
    const double dt = horizon / static_cast<double>(n);
    const double drift = (r_hat - delta - 0.5 * sigma * sigma) * dt;
    const double vol = sigma * std::sqrt(dt);
    const double bridge_scale = 2.0 / (sigma * sigma * dt);
    double x = log_v0;
    double value = 0.0;
    double survival = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x_next = x + drift + sign * vol * normals[k];
      const double b0 = log_barrier[k];
      const double b1 = log_barrier[k + 1];
      double crossed = 0.0;
      if (x_next >= b1) {
        crossed = 1.0;
      } else if (bridge && std::isfinite(b0) && std::isfinite(b1)) {
        crossed = std::exp(-bridge_scale * (b0 - x) * (b1 - x_next));
      }
      if (crossed > 0.0) {
        value += survival * crossed * hit_payoff[k + 1];
        survival *= 1.0 - crossed;
      }
      x = x_next;
      if (survival < 1e-15) return value;
    }
    if (terminal_payoff) {
      value += survival * std::exp(-r_hat * horizon) * std::max(std::exp(x) - principal, 0.0);
    }
    return value;
  }
};

McEstimate run_paths(const BarrierSimulation& sim, const PathConfig& cfg) {
  if (cfg.n_paths == 0 || cfg.n_steps == 0 || cfg.batch_size == 0) {
    throw Error(ErrorCode::InvalidParameter, "path configuration needs positive sizes");
  }
  const std::size_t paths_per_sample = cfg.antithetic ? 2 : 1;
  const std::size_t samples = std::max<std::size_t>(1, cfg.n_paths / paths_per_sample);
  const std::size_t batches = (samples + cfg.batch_size - 1) / cfg.batch_size;
  std::vector<BatchMoments> moments(batches);

  auto run_batch = [&](std::size_t b) {
    std::mt19937_64 rng(splitmix64(cfg.seed + b));
    std::normal_distribution<double> normal;
    std::vector<double> z(cfg.n_steps);
    const std::size_t begin = b * cfg.batch_size;
    const std::size_t end = std::min(samples, begin + cfg.batch_size);
    BatchMoments m;
    for (std::size_t s = begin; s < end; ++s) {
      for (double& zi : z) zi = normal(rng);
      double y = sim.path(z, 1.0, cfg.bridge_correction);
      if (cfg.antithetic) y = 0.5 * (y + sim.path(z, -1.0, cfg.bridge_correction));
      m.sum += y;
      m.sum_sq += y * y;
      ++m.count;
    }
    moments[b] = m;
  };

  const unsigned workers = std::max(1u, cfg.workers);
  if (workers == 1) {
    for (std::size_t b = 0; b < batches; ++b) run_batch(b);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < batches; b += workers) run_batch(b);
      });
    }
  }

  BatchMoments total;
  for (const auto& m : moments) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
    total.count += m.count;
  }
  const auto count = static_cast<double>(total.count);
  const double mean = total.sum / count;
  const double var = total.count > 1
                         ? std::max(0.0, (total.sum_sq - count * mean * mean) / (count - 1.0))
                         : 0.0;
  return McEstimate{mean, std::sqrt(var / count), total.count};
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

McEstimate mc_barrier_cost(const ExerciseBoundary& boundary, const StockLoanModel& model,
                           const PathConfig& cfg) {
  const double maturity = model.loan.maturity();
  const double principal = model.loan.principal();
  const double v0 = model.loan.v0();
  const double r_hat = model.market.r() - model.loan.alpha();
  if (v0 >= boundary.at(0.0)) return McEstimate{v0 - principal, 0.0, cfg.n_paths};

  BarrierSimulation sim{std::log(v0), r_hat, model.collateral.delta(),
                        model.collateral.sigma2(), principal, maturity, true, {}, {}};
  const std::size_t n = std::max<std::size_t>(1, cfg.n_steps);
  sim.log_barrier.resize(n + 1);
  sim.hit_payoff.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = maturity * static_cast<double>(k) / static_cast<double>(n);
    const double level = boundary.at(t);
    if (!std::isfinite(level)) {
      sim.log_barrier[k] = kInf;
      sim.hit_payoff[k] = 0.0;
      continue;
    }
    const double hatted = std::exp(r_hat * t) * level;
    sim.log_barrier[k] = std::log(hatted);
    sim.hit_payoff[k] = std::exp(-r_hat * t) * std::max(hatted - principal, 0.0);
  }
  return run_paths(sim, cfg);
}

McEstimate mc_barrier_cost_perpetual(double v_star, const StockLoanModel& model,
                                     const PathConfig& cfg, double truncation_horizon) {
  const double principal = model.loan.principal();
  const double v0 = model.loan.v0();
  if (v0 >= v_star) return McEstimate{v0 - principal, 0.0, cfg.n_paths};
  if (!(truncation_horizon > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "truncation horizon must be positive");
  }
  BarrierSimulation sim{std::log(v0), 0.0, model.collateral.delta(), model.collateral.sigma2(),
                        principal, truncation_horizon, false, {}, {}};
  const std::size_t n = std::max<std::size_t>(1, cfg.n_steps);
  sim.log_barrier.assign(n + 1, std::log(v_star));
  sim.hit_payoff.assign(n + 1, v_star - principal);
  return run_paths(sim, cfg);
}

double hitting_probability(double v0, double barrier, double sigma, double delta,
                           double horizon) {
  if (v0 >= barrier) return 1.0;
  const double a = std::log(barrier / v0);
  const double nu = -delta - 0.5 * sigma * sigma;
  const double reflection = std::exp(2.0 * nu * a / (sigma * sigma));
  if (!std::isfinite(horizon)) return nu < 0.0 ? reflection : 1.0;
  if (horizon <= 0.0) return 0.0;
  const double s = sigma * std::sqrt(horizon);
  return normal_cdf((-a + nu * horizon) / s) + reflection * normal_cdf((-a - nu * horizon) / s);
}

double perpetual_truncation_horizon(double v0, double barrier, double sigma, double delta,
                                    double rel_tol) {
  const double total = hitting_probability(v0, barrier, sigma, delta, kInf);
  double horizon = 1.0;
  while (total - hitting_probability(v0, barrier, sigma, delta, horizon) >= rel_tol * total) {
    horizon *= 2.0;
    if (horizon > 1e7) {
      throw Error(ErrorCode::NonConvergence, "hitting probability tail does not vanish");
    }
  }
  return horizon;
}

TreeStoppingResult tree_stopping_F(const StockLoanModel& model, std::size_t n_steps) {
  if (n_steps < 50) {
    throw Error(ErrorCode::StepCountTooSmall, "binomial tree needs at least 50 steps");
  }
  const double maturity = model.loan.maturity();
  const double sigma = model.collateral.sigma2();
  const double drift = -model.collateral.delta();
  const double k = model.effective_risk_aversion();
  const double growth_rate = model.loan.alpha() - model.market.r();
  const double principal = model.loan.principal();
  const double v0 = model.loan.v0();

  const double dt = maturity / static_cast<double>(n_steps);
  const double up = std::exp(sigma * std::sqrt(dt));
  const double p = (std::exp(drift * dt) - 1.0 / up) / (up - 1.0 / up);
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::StepCountTooSmall, "tree probabilities outside (0, 1)");
  }
  const double log_up = std::log(up);
  auto node_value = [&](std::size_t step, std::size_t j) {
    return v0 * std::exp(log_up * (2.0 * static_cast<double>(j) - static_cast<double>(step)));
  };
  auto strike = [&](std::size_t step) {
    return principal * std::exp(growth_rate * dt * static_cast<double>(step));
  };
  auto kappa = [&](std::size_t step, double v) {
    return std::exp(-k * std::max(v - strike(step), 0.0));
  };

  TreeStoppingResult result;
  result.exercise_levels.assign(n_steps + 1, kInf);
  std::vector<double> f(n_steps + 1);
  for (std::size_t j = 0; j <= n_steps; ++j) {
    const double v = node_value(n_steps, j);
    f[j] = kappa(n_steps, v);
    if (v > strike(n_steps)) {
      result.exercise_levels[n_steps] = std::min(result.exercise_levels[n_steps], v);
    }
  }
  for (std::size_t step = n_steps; step-- > 0;) {
    const double k_strike = strike(step);
    for (std::size_t j = 0; j <= step; ++j) {
      const double v = node_value(step, j);
      const double continuation = p * f[j + 1] + (1.0 - p) * f[j];
      const double obstacle = kappa(step, v);
      if (obstacle <= continuation) {
        f[j] = obstacle;
        if (v > k_strike && v < result.exercise_levels[step]) result.exercise_levels[step] = v;
      } else {
        f[j] = continuation;
      }
    }
  }
  result.f0 = f[0];
  return result;
}

double european_call_closed_form(double v0, double strike, double sigma2, double delta,
                                 double r_hat, double maturity) {
  if (maturity <= 0.0) return std::max(v0 - strike, 0.0);
  if (strike <= 0.0) return v0 * std::exp(-delta * maturity);
  const double s = sigma2 * std::sqrt(maturity);
  if (s < 1e-12) {
    const double forward = v0 * std::exp((r_hat - delta) * maturity);
    return std::exp(-r_hat * maturity) * std::max(forward - strike, 0.0);
  }
  const double d1 = (std::log(v0 / strike) + (r_hat - delta + 0.5 * sigma2 * sigma2) * maturity) / s;
  const double d2 = d1 - s;
  return v0 * std::exp(-delta * maturity) * normal_cdf(d1) -
         strike * std::exp(-r_hat * maturity) * normal_cdf(d2);
}

}  // namespace stockloan
