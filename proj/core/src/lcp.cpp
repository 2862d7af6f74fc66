#include "stockloan/lcp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stockloan/error.hpp"

namespace stockloan {
namespace {

void require_grid(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::InvalidGrid, message);
}

std::vector<double> uniform_nodes(double upper, std::size_t n) {
  std::vector<double> nodes(n);
  const double last = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = upper * static_cast<double>(i) / last;
  nodes.back() = upper;
  return nodes;
}

std::vector<double> sinh_nodes(double upper, std::size_t n, double center, double width) {
  require_grid(center > 0.0 && center < upper, "sinh spacing center must lie inside (0, v_max)");
  require_grid(width > 0.0 && std::isfinite(width), "sinh spacing width must be positive");
  const double c_hi = std::asinh((upper - center) / width);
  const double c_lo = std::asinh(-center / width);
  std::vector<double> nodes(n);
  const double last = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = static_cast<double>(i) / last;
    nodes[i] = center + width * std::sinh(c_lo + xi * (c_hi - c_lo));
  }
  nodes.front() = 0.0;
  nodes.back() = upper;
  return nodes;
}

// Tridiagonal system rows; row i couples x_{i-1}, x_i, x_{i+1}.
struct TridiagonalRows {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  explicit TridiagonalRows(std::size_t n) : lower(n), diag(n), upper(n) {}

  double apply(std::span<const double> x, std::size_t i) const {
    double y = diag[i] * x[i];
    if (i > 0) y += lower[i] * x[i - 1];
    if (i + 1 < x.size()) y += upper[i] * x[i + 1];
    return y;
  }
};

}  // namespace

Grid build_grid(double v_max, std::size_t nv, double maturity, std::size_t nt,
                const Spacing& spacing) {
  require_grid(std::isfinite(v_max) && v_max > 0.0, "v_max must be positive");
  require_grid(std::isfinite(maturity) && maturity > 0.0, "maturity must be positive");
  require_grid(nv >= 3, "need at least 3 v nodes");
  require_grid(nt >= 2, "need at least 2 time nodes");

  Grid grid;
  grid.v_nodes = spacing.kind == SpacingKind::Uniform
                     ? uniform_nodes(v_max, nv)
                     : sinh_nodes(v_max, nv, spacing.center, spacing.width);
  grid.t_nodes = uniform_nodes(maturity, nt);
  for (std::size_t i = 1; i < nv; ++i) {
    require_grid(grid.v_nodes[i] > grid.v_nodes[i - 1], "v nodes must be strictly increasing");
  }
  return grid;
}

Stencil spatial_stencil(double h_minus, double h_plus, double diffusion, double drift,
                        double discount) {
  const double span = h_minus + h_plus;
  const double lower2 = 2.0 * diffusion / (h_minus * span);
  const double upper2 = 2.0 * diffusion / (h_plus * span);
  double lower1 = -drift * h_plus / (h_minus * span);
  double upper1 = drift * h_minus / (h_plus * span);
  double diag1 = drift * (h_plus - h_minus) / (h_minus * h_plus);
  if (lower2 + lower1 < 0.0 || upper2 + upper1 < 0.0) {
    if (drift > 0.0) {
      lower1 = 0.0;
      upper1 = drift / h_plus;
      diag1 = -drift / h_plus;
    } else {
      lower1 = -drift / h_minus;
      upper1 = 0.0;
      diag1 = drift / h_minus;
    }
  }
  return Stencil{lower2 + lower1, -lower2 - upper2 + diag1 - discount, upper2 + upper1};
}

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n), x(n);
  double denom = diag[0];
  c[0] = n > 1 ? upper[0] / denom : 0.0;
  x[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * c[i - 1];
    c[i] = i + 1 < n ? upper[i] / denom : 0.0;
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

LcpSolution solve_lcp(const LcpProblem& problem, const Grid& grid, const ThetaScheme& scheme,
                      const PsorSettings& psor) {
  require_grid(grid.nv() >= 3 && grid.nt() >= 2, "grid too small");
  if (!(scheme.theta >= 0.0 && scheme.theta <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "theta must lie in [0, 1]");
  }
  if (!(psor.omega > 0.0 && psor.omega < 2.0)) {
    throw Error(ErrorCode::InvalidParameter, "PSOR omega must lie in (0, 2)");
  }
  if (!problem.drift || !problem.diffusion || !problem.terminal || !problem.left_boundary) {
    throw Error(ErrorCode::InvalidParameter, "LCP problem is missing a coefficient function");
  }

  const auto& v = grid.v_nodes;
  const auto& t = grid.t_nodes;
  const std::size_t nv = grid.nv();
  const std::size_t nt = grid.nt();
  const std::size_t last = nv - 1;
  const bool constrained = static_cast<bool>(problem.obstacle);
  const bool upper_side = problem.side == ObstacleSide::Upper;
  const auto* dirichlet_right = std::get_if<DirichletBoundary>(&problem.right_boundary);

  LcpSolution sol;
  sol.nt = nt;
  sol.nv = nv;
  sol.surface.assign(nt * nv, 0.0);
  sol.active_mask.assign(nt * nv, 0);
  sol.psor_iterations.assign(nt, 0);

  auto discount = [&](double time) { return problem.discount ? problem.discount(time) : 0.0; };

  // Spatial operator rows at time `time`; rows 0 and `last` are boundary rows.
  auto assemble = [&](double time, TridiagonalRows& op) {
    const double disc = discount(time);
    for (std::size_t i = 1; i < last; ++i) {
      const Stencil s = spatial_stencil(v[i] - v[i - 1], v[i + 1] - v[i],
                                        problem.diffusion(v[i], time), problem.drift(v[i], time),
                                        disc);
      op.lower[i] = s.lower;
      op.diag[i] = s.diag;
      op.upper[i] = s.upper;
    }
    const double h = v[last] - v[last - 1];
    const double b = problem.drift(v[last], time);
    op.lower[last] = -b / h;
    op.diag[last] = b / h - disc;
    op.upper[last] = 0.0;
    op.lower[0] = op.diag[0] = op.upper[0] = 0.0;
  };

  std::vector<double> f(nv);
  for (std::size_t i = 0; i < nv; ++i) f[i] = problem.terminal(v[i]);
  std::copy(f.begin(), f.end(), sol.surface.begin() + static_cast<std::ptrdiff_t>((nt - 1) * nv));
  if (constrained) {
    for (std::size_t i = 0; i < nv; ++i) {
      const double gap = problem.obstacle(v[i], t[nt - 1]) - f[i];
      sol.active_mask[(nt - 1) * nv + i] = (upper_side ? gap : -gap) <= 0.0;
    }
  }

  TridiagonalRows op_new(nv), op_old(nv), a(nv);
  std::vector<double> rhs(nv), kappa(nv), x(nv);

  for (std::size_t n = nt - 1; n-- > 0;) {
    const std::size_t step = nt - 2 - n;
    const double theta = static_cast<int>(step) < scheme.rannacher_steps ? 1.0 : scheme.theta;
    const double dt = t[n + 1] - t[n];

    assemble(t[n], op_new);
    if (theta < 1.0) assemble(t[n + 1], op_old);
    for (std::size_t i = 1; i <= last; ++i) {
      a.lower[i] = -theta * dt * op_new.lower[i];
      a.diag[i] = 1.0 - theta * dt * op_new.diag[i];
      a.upper[i] = -theta * dt * op_new.upper[i];
      rhs[i] = f[i];
      if (theta < 1.0) rhs[i] += (1.0 - theta) * dt * op_old.apply(f, i);
    }
    a.lower[0] = a.upper[0] = 0.0;
    a.diag[0] = 1.0;
    rhs[0] = problem.left_boundary(t[n]);
    const bool right_fixed = dirichlet_right != nullptr;
    if (right_fixed) {
      a.lower[last] = a.upper[last] = 0.0;
      a.diag[last] = 1.0;
      rhs[last] = dirichlet_right->value(t[n]);
    }
    const std::size_t first_free = 1;
    const std::size_t last_free = right_fixed ? last - 1 : last;

    if (!constrained) {
      x = solve_tridiagonal(a.lower, a.diag, a.upper, rhs);
    } else {
      for (std::size_t i = 0; i < nv; ++i) kappa[i] = problem.obstacle(v[i], t[n]);
      x = f;
      x[0] = rhs[0];
      if (right_fixed) x[last] = rhs[last];
      for (std::size_t i = first_free; i <= last_free; ++i) {
        x[i] = upper_side ? std::min(x[i], kappa[i]) : std::max(x[i], kappa[i]);
      }

      std::vector<double> history;
      int iter = 0;
      bool converged = false;
      while (iter < psor.max_iter) {
        ++iter;
        double max_change = 0.0;
        for (std::size_t i = first_free; i <= last_free; ++i) {
          double s = rhs[i] - a.lower[i] * x[i - 1];
          if (i < last) s -= a.upper[i] * x[i + 1];
          const double gs = s / a.diag[i];
          double y = x[i] + psor.omega * (gs - x[i]);
          y = upper_side ? std::min(y, kappa[i]) : std::max(y, kappa[i]);
          max_change = std::max(max_change, std::abs(y - x[i]) / std::max(1.0, std::abs(y)));
          x[i] = y;
        }
        if (psor.record_history) history.push_back(max_change);
        if (max_change < psor.tol) {
          converged = true;
          break;
        }
      }
      if (!converged) {
        std::ostringstream msg;
        msg << "PSOR did not converge within " << psor.max_iter << " sweeps at t=" << t[n];
        throw Error(ErrorCode::PsorDivergence, msg.str());
      }
      sol.psor_iterations[n] = iter;
      if (psor.record_history) sol.history.push_back(std::move(history));
    }

    // Complementarity audit over the free rows.
    for (std::size_t i = first_free; i <= last_free; ++i) {
      const double res = (rhs[i] - a.apply(x, i)) / a.diag[i];
      double measure = std::abs(res);
      if (constrained) {
        const double oriented = upper_side ? res : -res;
        const double gap = upper_side ? kappa[i] - x[i] : x[i] - kappa[i];
        measure = std::abs(std::min(oriented, gap));
        sol.active_mask[n * nv + i] = gap <= 0.0;
      }
      sol.max_residual = std::max(sol.max_residual, measure);
    }

    f = x;
    std::copy(f.begin(), f.end(), sol.surface.begin() + static_cast<std::ptrdiff_t>(n * nv));
  }
  return sol;
}

double interpolate(std::span<const double> nodes, std::span<const double> values, double x) {
  const std::size_t n = nodes.size();
  if (n == 1) return values[0];
  auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
  if (it != nodes.end() && *it == x) return values[static_cast<std::size_t>(it - nodes.begin())];
  std::size_t hi = std::clamp<std::size_t>(static_cast<std::size_t>(it - nodes.begin()), 1, n - 1);
  if (n == 2) {
    const double w = (x - nodes[0]) / (nodes[1] - nodes[0]);
    return values[0] + w * (values[1] - values[0]);
  }
  // Three nodes around x, preferring the side of the nearer neighbour.
  std::size_t mid = (x - nodes[hi - 1] < nodes[hi] - x) ? hi - 1 : hi;
  mid = std::clamp<std::size_t>(mid, 1, n - 2);
  const double x0 = nodes[mid - 1], x1 = nodes[mid], x2 = nodes[mid + 1];
  const double l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
  const double l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
  const double l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
  return l0 * values[mid - 1] + l1 * values[mid] + l2 * values[mid + 1];
}

}  // namespace stockloan
