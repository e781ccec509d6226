#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewlab/branch.hpp"
#include "skewlab/error.hpp"
#include "skewlab/markov.hpp"
#include "skewlab/rng.hpp"

using namespace skewlab;

namespace {

const IntervalMap& logistic() {
  static const IntervalMap f = families::logistic();
  return f;
}

const MarkovPartition& depth1() {
  static const MarkovPartition p = build_partition(logistic(), 1);
  return p;
}

const MarkovReport& logistic_report() {
  static const MarkovReport r = assemble_markov(logistic(), depth1(), 10000, 6, 60, 1);
  return r;
}

double iterate(const IntervalMap& f, int k, double x) {
  for (int j = 0; j < k; ++j) x = f(x);
  return x;
}

}  // namespace

TEST_CASE("partition endpoints") {
  const double s = std::sqrt(2.0);
  const auto& p = depth1();
  REQUIRE(p.endpoints.size() == 5);
  const double expect[] = {0.0, (2 - s) / 4, 0.5, (2 + s) / 4, 1.0};
  for (int i = 0; i < 5; ++i) CHECK(p.endpoints[i] == doctest::Approx(expect[i]).epsilon(1e-14));
  CHECK(p.min_len == doctest::Approx((2 - s) / 4).epsilon(1e-14));
  CHECK(p.forward_defect(logistic()) <= 1e-9);

  const auto p0 = build_partition(logistic(), 0);
  CHECK(p0.endpoints == std::vector<double>{0.0, 0.5, 1.0});

  const auto plain = build_partition(families::smooth_diffeo(), 3);
  CHECK(plain.endpoints == std::vector<double>{0.0, 1.0});

  for (int depth = 2; depth <= 4; ++depth) {
    const auto q = build_partition(logistic(), depth);
    CHECK(q.cell_count() == (std::size_t{4} << (depth - 1)));
    CHECK(q.forward_defect(logistic()) <= 1e-9);
  }
}

TEST_CASE("closure that does not stabilize") {
  // The critical orbit of a - x^2 at a = 1.5 is not eventually periodic.
  CHECK_THROWS_AS(build_partition(families::quadratic(1.5), 1), Error);
  try {
    build_partition(families::quadratic(1.5), 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kClosureDiverges);
  }
}

TEST_CASE("partition lookups") {
  const auto& p = depth1();
  CHECK(p.cell_of(0.1) == 0);
  CHECK(p.cell_of(0.5) == 1);
  CHECK(p.cell_of(0.9) == 3);
  CHECK(p.endpoint_distance(0.55) == doctest::Approx(0.05));
}

TEST_CASE("start depth from monotonicity cells") {
  // Depth-n cells of the logistic map have longest length sin^2(pi / 2^(n+1)).
  CHECK(markov_start_depth(logistic(), depth1()) == 6);
  CHECK_THROWS_AS(markov_start_depth(logistic(), depth1(), 3), Error);
}

TEST_CASE("inducing time covers the cell and its neighbours") {
  const auto& p = depth1();
  CounterRng rng(11, 0);
  for (int s = 0; s < 1000; ++s) {
    const double x = rng.uniform();
    if (p.endpoint_distance(x) <= 1e-12) continue;
    const auto b = inducing_time(logistic(), p, x, 6, 60);
    CHECK(b.k >= 6);
    CHECK(b.lo < x);
    CHECK(x < b.hi);
    // Recompute the monotone branch and check the covering directly.
    const auto t = track_branch(MapSequence::constant(logistic()), x, b.k);
    const std::size_t j = p.cell_of(t.image_point);
    const double need_lo = p.cell_lo(j > 0 ? j - 1 : j);
    const double need_hi = p.cell_hi(j + 1 < p.cell_count() ? j + 1 : j);
    CHECK(t.img_lo <= need_lo + 1e-9);
    CHECK(t.img_hi >= need_hi - 1e-9);
    CHECK(b.image_cell == j);
    const double a = iterate(logistic(), b.k, b.lo), c = iterate(logistic(), b.k, b.hi);
    CHECK(std::min(a, c) == doctest::Approx(p.cell_lo(j)).epsilon(1e-9));
    CHECK(std::max(a, c) == doctest::Approx(p.cell_hi(j)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(inducing_time(logistic(), p, 0.5, 6, 60), Error);
  try {
    inducing_time(logistic(), p, 0.3, 6, 5);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotFound);
  }
}

TEST_CASE("logistic Markov certification") {
  const auto& r = logistic_report();
  CHECK(r.branches.size() > 0);
  CHECK(r.m2_ok());
  CHECK(r.m3_ok());
  CHECK(r.overlaps == 0);
  CHECK(r.seed_failures == 0);
  CHECK(r.coverage >= 0.99);
  CHECK(r.constancy_checks == 10 * r.branches.size());
  CHECK(r.constancy_failures == 0);
  CHECK(std::isfinite(r.K_hat));
  CHECK(r.K_hat >= r.K_branch);
  for (std::size_t i = 1; i < r.branches.size(); ++i) CHECK(r.branches[i - 1].hi <= r.branches[i].lo + 1e-9);
}

TEST_CASE("one-branch Markov map") {
  const auto f = families::smooth_diffeo();
  const auto p = build_partition(f, 1);
  const auto r = assemble_markov(f, p, 100, 1, 5, 1);
  REQUIRE(r.branches.size() == 1);
  CHECK(r.branches[0].k == 1);
  CHECK(r.m2_ok());
  CHECK(r.m3_ok());
  CHECK(r.coverage == doctest::Approx(1.0));
  // f' = (1 + 2x) / 2 at the 33 midpoints: (1 + 65/33) / (1 + 1/33) = 49/17.
  CHECK(r.K_branch == doctest::Approx(49.0 / 17.0).epsilon(1e-12));
  const auto st = summability_stat(r.branches, f, 50, 20, 1);
  CHECK(st.mean == 1.0);
  CHECK(st.dispersion == 0.0);
}

TEST_CASE("non-invariant endpoint breaks the Markov property") {
  auto ends = depth1().endpoints;
  ends.push_back(0.3);
  const auto bad = MarkovPartition::unchecked(ends);
  CHECK(bad.forward_defect(logistic()) > 1e-9);
  const auto r = assemble_markov(logistic(), bad, 2000, 6, 60, 1);
  CHECK(r.m2_failures > 0);
  CHECK_FALSE(r.m2_ok());
}

TEST_CASE("branch lookup") {
  const std::vector<InducedBranch> br{{0.0, 0.25, 1, 0, 1.0}, {0.5, 1.0, 2, 1, 1.0}};
  CHECK(find_branch(br, 0.1) == 0);
  CHECK(find_branch(br, 0.75) == 1);
  CHECK(find_branch(br, 0.3) == SIZE_MAX);
  CHECK(find_branch(br, 0.25) == SIZE_MAX);
  CHECK(find_branch(br, -1.0) == SIZE_MAX);
}

TEST_CASE("cross ratio") {
  CHECK(cross_ratio({0.0, 1.0}, {0.25, 0.75}) == doctest::Approx(8.0).epsilon(1e-15));
  CHECK_THROWS_AS(cross_ratio({0.0, 1.0}, {0.0, 0.5}), Error);
  try {
    cross_ratio({0.0, 1.0}, {0.5, 1.0 - 1e-13});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateGap);
  }

  const auto aff = families::affine(-0.5, 0.75, {0.0, 1.0});
  CHECK(cross_ratio_operator(aff, 3, {0.1, 0.9}, {0.2, 0.3}) == doctest::Approx(1.0).epsilon(1e-12));

  const auto mob = families::mobius(1.0, 0.0, 1.0, 1.0, {0.0, 1.0});
  CounterRng rng(5, 0);
  for (int s = 0; s < 200; ++s) {
    double u[4];
    for (double& v : u) v = rng.uniform();
    std::sort(u, u + 4);
    if (u[1] - u[0] < 1e-3 || u[3] - u[2] < 1e-3) continue;
    const int k = 1 + s % 3;
    CHECK(std::fabs(cross_ratio_operator(mob, k, {u[0], u[3]}, {u[1], u[2]}) - 1.0) <= 1e-12);
  }

  try {
    cross_ratio_operator(logistic(), 1, {0.2, 0.8}, {0.3, 0.4});
    FAIL("expected NotMonotone");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotMonotone);
  }
}

TEST_CASE("Koebe-type lower bound and negative Schwarzian") {
  const auto a = koebe_fit(logistic(), 1000, 10, 1);
  const auto b = koebe_fit(logistic(), 1000, 10, 2);
  CHECK(a.samples > 900);
  CHECK(std::isfinite(a.C_hat));
  CHECK(std::isfinite(b.C_hat));
  // With Sf < 0 the cross ratio only grows, so no violating constant is needed.
  CHECK(a.min_B >= 1.0 - 1e-9);
  CHECK(a.C_hat == b.C_hat);
  for (int i = 1; i < 100; ++i) {
    const double x = i / 100.0;
    if (std::fabs(x - 0.5) < 1e-9) continue;
    CHECK(schwarzian(logistic(), x) < 0.0);
  }
}

TEST_CASE("summability statistic") {
  const auto& r = logistic_report();
  double lo = 1e300, hi = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto st = summability_stat(r.branches, logistic(), 100, 1000, seed);
    CHECK(std::isfinite(st.mean));
    CHECK(st.probes > 0);
    lo = std::min(lo, st.mean);
    hi = std::max(hi, st.mean);
  }
  CHECK((hi - lo) / lo <= 0.1);

  std::vector<InducedBranch> half{{0.0, 0.5, 1, 0, 1.0}};
  CHECK_THROWS_AS(summability_stat(half, logistic(), 10, 10, 1), Error);
}

TEST_CASE("seed determinism") {
  const auto a = assemble_markov(logistic(), depth1(), 500, 6, 60, 3);
  const auto b = assemble_markov(logistic(), depth1(), 500, 6, 60, 3);
  REQUIRE(a.branches.size() == b.branches.size());
  for (std::size_t i = 0; i < a.branches.size(); ++i) {
    CHECK(a.branches[i].lo == b.branches[i].lo);
    CHECK(a.branches[i].hi == b.branches[i].hi);
  }
  CHECK(a.K_chain == b.K_chain);
}

TEST_CASE("branch csv") {
  std::ostringstream os;
  write_branch_csv(os, {{0.0, 0.5, 2, 1, 1.5}});
  CHECK(os.str() == "i,lo,hi,k,image_cell,distortion_sample\n0,0,0.5,2,1,1.5\n");
}
