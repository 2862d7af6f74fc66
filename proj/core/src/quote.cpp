#include "stockloan/quote.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stockloan {

double ExerciseBoundary::at(double t) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (times.empty()) return inf;
  if (t <= times.front()) return levels.front();
  if (t >= times.back()) return levels.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  if (!std::isfinite(levels[lo]) || !std::isfinite(levels[hi])) return inf;
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  return levels[lo] + w * (levels[hi] - levels[lo]);
}

std::string_view to_string(FeeBranch branch) {
  switch (branch) {
    case FeeBranch::Continuation: return "continuation";
    case FeeBranch::ImmediateExercise: return "immediate_exercise";
    case FeeBranch::CompleteMarket: return "complete_market";
    case FeeBranch::NeverExercised: return "never_exercised";
    case FeeBranch::FiniteHorizon: return "finite_horizon";
  }
  return "unknown";
}

double FeeQuote::threshold_at_inception() const {
  if (const auto* v = std::get_if<double>(&boundary)) return *v;
  const auto& b = std::get<ExerciseBoundary>(boundary);
  return b.levels.empty() ? std::numeric_limits<double>::infinity() : b.levels.front();
}

}  // namespace stockloan
