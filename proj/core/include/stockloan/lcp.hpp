#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace stockloan {

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

enum class SpacingKind { Uniform, Sinh };

/// Node placement in v. Sinh spacing clusters nodes around `center` with
/// characteristic width `width` (smaller width, stronger clustering).
struct Spacing {
  SpacingKind kind = SpacingKind::Uniform;
  double center = 0.0;
  double width = 0.0;
};

struct Grid {
  std::vector<double> v_nodes;  // v_nodes.front() == 0, v_nodes.back() == v_max
  std::vector<double> t_nodes;  // t_nodes.front() == 0, t_nodes.back() == T

  std::size_t nv() const noexcept { return v_nodes.size(); }
  std::size_t nt() const noexcept { return t_nodes.size(); }
  double v_max() const { return v_nodes.back(); }
  double maturity() const { return t_nodes.back(); }
};

/// nv and nt are node counts. Throws InvalidGrid on nonpositive sizes.
Grid build_grid(double v_max, std::size_t nv, double maturity, std::size_t nt,
                const Spacing& spacing = {});

// ---------------------------------------------------------------------------
// Spatial discretization
// ---------------------------------------------------------------------------

/// Coefficients of (L u)_i = lower u_{i-1} + diag u_i + upper u_{i+1} for
/// L = diffusion d2/dv2 + drift d/dv - discount.
struct Stencil {
  double lower = 0.0;
  double diag = 0.0;
  double upper = 0.0;
};

/// Three-point stencil on a possibly non-uniform mesh. Central differences
/// for the drift, switching to one-sided differences where central ones would
/// produce a negative off-diagonal.
Stencil spatial_stencil(double h_minus, double h_plus, double diffusion, double drift,
                        double discount);

/// Thomas algorithm for a tridiagonal system. `lower[0]` and `upper[n-1]` are
/// ignored. Returns the solution.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

// ---------------------------------------------------------------------------
// Linear complementarity problem
// ---------------------------------------------------------------------------

/// Upper: F <= obstacle with dF/dt + L F >= 0 (minimal stopping value).
/// Lower: F >= obstacle with dF/dt + L F <= 0 (American option value).
enum class ObstacleSide { Upper, Lower };

struct DirichletBoundary {
  std::function<double(double t)> value;
};
/// Zero second derivative at v_max; the boundary row keeps drift and discount.
struct LinearBoundary {};
using RightBoundary = std::variant<LinearBoundary, DirichletBoundary>;

/// Backward parabolic problem dF/dt + L F (>=, =, <=) 0 on [0, v_max] x [0, T].
struct LcpProblem {
  std::function<double(double v, double t)> drift;      // coefficient of dF/dv
  std::function<double(double v, double t)> diffusion;  // coefficient of d2F/dv2
  std::function<double(double t)> discount;            // may be empty (zero)
  std::function<double(double v, double t)> obstacle;   // empty: unconstrained
  ObstacleSide side = ObstacleSide::Upper;
  std::function<double(double v)> terminal;
  std::function<double(double t)> left_boundary;
  RightBoundary right_boundary = LinearBoundary{};
};

/// theta = 1 implicit, 0.5 Crank-Nicolson. The first `rannacher_steps` steps
/// after the terminal date are taken fully implicit.
struct ThetaScheme {
  double theta = 0.5;
  int rannacher_steps = 4;
};

struct PsorSettings {
  double omega = 1.4;
  double tol = 1e-9;  // on the per-sweep update, relative to max(1, |F|)
  int max_iter = 10000;
  bool record_history = false;
};

struct LcpSolution {
  std::size_t nt = 0;
  std::size_t nv = 0;
  std::vector<double> surface;             // row-major, time index major
  std::vector<std::uint8_t> active_mask;   // 1 where the obstacle binds
  std::vector<int> psor_iterations;        // per time step; index = time node
  /// max over steps and interior nodes of |min(row residual, obstacle gap)|,
  /// row residual normalized by its diagonal and oriented so it is
  /// non-negative when feasible.
  double max_residual = 0.0;
  /// Per-step PSOR update norms per sweep, when requested.
  std::vector<std::vector<double>> history;

  double at(std::size_t n, std::size_t i) const { return surface[n * nv + i]; }
  std::span<const double> row(std::size_t n) const {
    return std::span<const double>(surface).subspan(n * nv, nv);
  }
  bool active(std::size_t n, std::size_t i) const { return active_mask[n * nv + i] != 0; }
};

/// Backward time-marching theta-scheme; each step solves the discrete LCP by
/// projected SOR, or a tridiagonal solve when the problem has no obstacle.
/// Throws PsorDivergence when a step exceeds max_iter.
LcpSolution solve_lcp(const LcpProblem& problem, const Grid& grid, const ThetaScheme& scheme,
                      const PsorSettings& psor);

/// Quadratic Lagrange interpolation of nodal values at x through the three
/// nodes nearest to x. Exact at nodes.
double interpolate(std::span<const double> nodes, std::span<const double> values, double x);

}  // namespace stockloan
