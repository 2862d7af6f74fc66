#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stockloan {

/// Borrower's exercise boundary V*(t) on a time grid. Levels are +inf at
/// times where no exercise was detected inside the computational domain.
struct ExerciseBoundary {
  std::vector<double> times;
  std::vector<double> levels;
  double detection_tol = 0.0;
  std::size_t missing_steps = 0;  // number of +inf levels

  /// Piecewise-linear interpolation in t; +inf if either bracketing level is.
  double at(double t) const;
};

enum class FeeBranch {
  Continuation,       // V0 below the threshold; fee from the barrier cost
  ImmediateExercise,  // V0 at or above the threshold; fee is zero
  CompleteMarket,     // complete-market limit formula
  NeverExercised,     // complete market with delta = 0: fee equals L
  FiniteHorizon,      // LCP + barrier PDE
};

std::string_view to_string(FeeBranch branch);

struct FeeDiagnostics {
  FeeBranch branch = FeeBranch::Continuation;
  int root_iterations = 0;
  double threshold_residual = 0.0;
  int psor_max_iterations = 0;
  long long psor_total_iterations = 0;
  double max_complementarity = 0.0;
  std::size_t boundary_missing_steps = 0;
  bool clamped = false;
  double raw_fee = 0.0;  // fee before clamping
  std::vector<std::string> warnings;
};

/// Fee c = L + C - V0 with the bank cost C and borrower indifference value.
struct FeeQuote {
  double fee = 0.0;
  double bank_cost = 0.0;
  double indifference_value = 0.0;
  std::variant<double, ExerciseBoundary> boundary = 0.0;
  FeeDiagnostics diagnostics;

  /// Scalar threshold, or V*(0) for a time-dependent boundary.
  double threshold_at_inception() const;
};

}  // namespace stockloan
