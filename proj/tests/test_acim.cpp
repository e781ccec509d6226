#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "skewlab/acim.hpp"
#include "skewlab/error.hpp"

using namespace skewlab;

namespace {

double arcsine_cdf(double x) {
  return 2.0 / std::numbers::pi * std::asin(std::sqrt(std::clamp(x, 0.0, 1.0)));
}

double arcsine_density(double x) { return 1.0 / (std::numbers::pi * std::sqrt(x * (1.0 - x))); }

const System& logistic() {
  static const System sys = System::interval(families::logistic());
  return sys;
}

double weight_sum(const EmpiricalMeasure& m) {
  return std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
}

EmpiricalMeasure uniform_measure(const BinGrid& g) {
  EmpiricalMeasure m;
  m.grid = g;
  m.counts.assign(g.size(), 1);
  m.normalize();
  return m;
}

}  // namespace

TEST_CASE("bin grid indexing") {
  const BinGrid g{{0.0, 1.0}, 4, 0};
  CHECK(g.index({0.0, 0.0}) == 0);
  CHECK(g.index({0.0, 0.26}) == 1);
  CHECK(g.index({0.0, 1.0}) == 3);
  CHECK(g.index({0.0, -0.1}) == 0);
  CHECK(g.bin_hi(3) == 1.0);
  const BinGrid g2{{0.0, 1.0}, 4, 2};
  CHECK(g2.size() == 8);
  CHECK(g2.index({0.75, 0.3}) == 5);
}

TEST_CASE("identity map gives the uniform histogram") {
  const auto sys = System::interval(families::identity());
  const std::size_t samples = 20000;
  const auto m = empirical_measure(sys, samples, 5, BinGrid::for_system(sys, 64), 3);
  CHECK(weight_sum(m) == doctest::Approx(1.0).epsilon(1e-12));
  const double p = 1.0 / 64;
  const double sd = std::sqrt(p * (1 - p) / samples);
  for (double w : m.weights) {
    CHECK(std::fabs(w - p) <= 3.0 / std::sqrt(static_cast<double>(samples)));
    CHECK(std::fabs(w - p) <= 5 * sd);
  }
}

TEST_CASE("doubling map keeps Lebesgue") {
  // Doubling in floating point shifts out one bit per step, so orbits are short.
  const auto sys = System::interval(families::doubling());
  const std::size_t samples = 20000;
  const auto m = empirical_measure(sys, samples, 10, BinGrid::for_system(sys, 32), 5);
  const double p = 1.0 / 32;
  for (double w : m.weights) CHECK(std::fabs(w - p) <= 3.0 / std::sqrt(static_cast<double>(samples)));
  CHECK(invariance_defect(uniform_measure(BinGrid::for_system(sys, 256)), sys, 1000000, 1) <= 0.02);
}

TEST_CASE("logistic measure matches the arcsine density") {
  const auto g = BinGrid::for_system(logistic(), 256);
  const auto m = empirical_measure(logistic(), 10000, 1000, g, 1);
  CHECK(weight_sum(m) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(density_compare(m, bin_masses_cdf(g, arcsine_cdf)) <= 0.05);
  CHECK(density_compare(m, arcsine_density) <= 0.05);
}

TEST_CASE("density comparison oracle values") {
  const auto g = BinGrid::for_system(logistic(), 256);
  const auto oracle = bin_masses_cdf(g, arcsine_cdf);
  const auto quad = bin_masses(g, arcsine_density);
  for (std::size_t i = 0; i < g.nx; ++i) CHECK(quad[i] == doctest::Approx(oracle[i]).epsilon(1e-6));
  EmpiricalMeasure exact;
  exact.grid = g;
  exact.weights = oracle;
  CHECK(density_compare(exact, oracle) == 0.0);
  // Uniform against the arcsine law: sum over bins of |1/256 - mass|.
  CHECK(density_compare(uniform_measure(g), oracle) == doctest::Approx(0.4210175573050786).epsilon(1e-12));
  CHECK(density_compare(uniform_measure(g), arcsine_density) ==
        doctest::Approx(0.4210175573050786).epsilon(1e-7));
}

TEST_CASE("telescoping of the orbit average") {
  const auto g = BinGrid::for_system(logistic(), 128);
  const auto t = tally_orbits(logistic(), 3000, 50, g, 9);
  const double scale = 1.0 / (3000.0 * 50.0);
  for (std::size_t b = 0; b < g.size(); ++b) {
    const auto lhs = static_cast<std::int64_t>(t.average[b]) - static_cast<std::int64_t>(t.shifted[b]);
    const auto rhs = static_cast<std::int64_t>(t.first[b]) - static_cast<std::int64_t>(t.last[b]);
    CHECK(lhs == rhs);
    CHECK(std::fabs(lhs * scale - rhs * scale) <= 1e-12);
  }
}

TEST_CASE("invariance defect") {
  const auto g = BinGrid::for_system(logistic(), 256);
  EmpiricalMeasure point;
  point.grid = g;
  point.counts.assign(g.size(), 0);
  point.counts[g.index({0.0, 0.3})] = 1;
  point.normalize();
  CHECK(invariance_defect(point, logistic(), 10000, 2) == doctest::Approx(2.0));

  // Transfer by bins adds a discretization term that shrinks with the bin size.
  const auto m = empirical_measure(logistic(), 10000, 1000, g, 1);
  const double coarse = invariance_defect(m, logistic(), 1000000, 3);
  const auto fine_grid = BinGrid::for_system(logistic(), 1024);
  const double fine =
      invariance_defect(empirical_measure(logistic(), 10000, 1000, fine_grid, 1), logistic(), 1000000, 3);
  CHECK(coarse <= 0.06);
  CHECK(fine < coarse);
}

TEST_CASE("coarsening matches a direct build") {
  const auto fine = empirical_measure(logistic(), 2000, 100, BinGrid::for_system(logistic(), 512), 4);
  const auto direct =
      empirical_measure(logistic(), 2000, 100, BinGrid::for_system(logistic(), 256), 4);
  const auto c = coarsen(fine, 2);
  CHECK(c.grid == direct.grid);
  CHECK(c.counts == direct.counts);
  CHECK(c.weights == direct.weights);
  CHECK_THROWS_AS(coarsen(fine, 3), Error);
}

TEST_CASE("seed determinism and thread independence") {
  const auto g = BinGrid::for_system(logistic(), 64);
  const auto a = empirical_measure(logistic(), 9000, 20, g, 17, 1);
  const auto b = empirical_measure(logistic(), 9000, 20, g, 17, 3);
  const auto c = empirical_measure(logistic(), 9000, 20, g, 18, 1);
  CHECK(a.weights == b.weights);
  CHECK(a.weights != c.weights);
}

TEST_CASE("skew-product measures") {
  const auto sys = System::skew(families::viana());
  const auto g = BinGrid::for_system(sys, 32, 16);
  const auto m = empirical_measure(sys, 2000, 50, g, 2);
  CHECK(m.weights.size() == 512);
  CHECK(weight_sum(m) == doctest::Approx(1.0).epsilon(1e-12));
  std::ostringstream os;
  write_measure_csv(os, m);
  CHECK(os.str().rfind("theta_lo,theta_hi,bin_lo,bin_hi,weight\n", 0) == 0);
}

TEST_CASE("ergodic components") {
  const auto wells = System::interval(families::two_well());
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto one = ergodic_components(logistic(), 100, 100000, BinGrid::for_system(logistic()), seed);
    CHECK(one.components == 1);
    CHECK(one.sensitivity.size() == 4);
    const auto two = ergodic_components(wells, 100, 100000, BinGrid::for_system(wells), seed);
    CHECK(two.components == 2);
    CHECK(two.collapsed == 0);
    // The wells are [-1, 0] and [0, 1]; clusters follow the sign of the start.
    for (std::size_t p = 0; p < 100; ++p) {
      CounterRng rng(seed, p);
      const bool right = wells.sample(rng).x > 0;
      CounterRng first(seed, 0);
      const bool first_right = wells.sample(first).x > 0;
      CHECK(two.assignment[p] == (right == first_right ? 0u : 1u));
    }
  }
  const auto id = System::interval(families::identity());
  CHECK(ergodic_components(id, 100, 100, BinGrid::for_system(id), 1, 2.5).components == 1);
  CHECK(ergodic_components(id, 100, 100, BinGrid::for_system(id), 1, 0.3).components > 1);
}

TEST_CASE("collapsed floating-point orbits are set aside") {
  // Seed 1 has a probe whose orbit rounds onto 1 and then stays at 0.
  const auto rep = ergodic_components(logistic(), 100, 100000, BinGrid::for_system(logistic()), 1);
  CHECK(rep.collapsed == 1);
  CHECK(std::count(rep.assignment.begin(), rep.assignment.end(), SIZE_MAX) == 1);
}

TEST_CASE("nu-like mass lower bound") {
  const auto g = BinGrid::for_system(logistic(), 64);
  const auto rep = nu_like_mass(logistic(), 4000, 200, 0.05, g, 4);
  CHECK(rep.zeta == doctest::Approx(0.05 / 0.95));
  CHECK(rep.mass > 0.0);
  CHECK(rep.mass <= 1.0);
  CHECK(rep.bound_holds);
  CHECK(weight_sum(rep.measure) == doctest::Approx(1.0).epsilon(1e-12));
  const auto sys = System::skew(families::viana());
  const auto v = nu_like_mass(sys, 2000, 60, 0.2, BinGrid::for_system(sys, 32, 16), 4);
  CHECK(v.bound_holds);
  CHECK_THROWS_AS(nu_like_mass(logistic(), 4000, 10, 1.5, g, 4), Error);
}

TEST_CASE("measure csv") {
  const auto g = BinGrid::for_system(logistic(), 4);
  std::ostringstream os;
  write_measure_csv(os, uniform_measure(g));
  CHECK(os.str() == "bin_lo,bin_hi,weight\n0,0.25,0.25\n0.25,0.5,0.25\n0.5,0.75,0.25\n0.75,1,0.25\n");
}
