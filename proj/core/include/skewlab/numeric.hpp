#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include <boost/math/tools/roots.hpp>

namespace skewlab {

inline constexpr double kCriticalTolerance = 1e-12;

/// Root of a monotone function on [a, b], refined until the bracket holds two
/// adjacent doubles. Returns the bracket end with the smaller residual. When
/// f(a) and f(b) share a sign the closer end is returned (the target lies on
/// or just beyond the boundary).
template <class F>
double solve_monotone(F&& f, double a, double b) {
  if (a > b) std::swap(a, b);
  const double fa = f(a);
  const double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) return std::fabs(fa) <= std::fabs(fb) ? a : b;
  auto adjacent = [](double lo, double hi) { return std::nextafter(lo, hi) >= hi; };
  std::uintmax_t max_iter = 2200;
  const auto [lo, hi] = boost::math::tools::bisect(f, a, b, adjacent, max_iter);
  return std::fabs(f(lo)) <= std::fabs(f(hi)) ? lo : hi;
}

}  // namespace skewlab
