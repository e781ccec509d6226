// One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "skewlab/acim.hpp"
#include "skewlab/branch.hpp"
#include "skewlab/expansion.hpp"
#include "skewlab/experiment/runner.hpp"
#include "skewlab/hyperbolic_times.hpp"
#include "skewlab/markov.hpp"
#include "skewlab/rng.hpp"

using namespace skewlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += !o.pass;
  std::printf("%s %2d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), s);
  std::fflush(stdout);
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const MapSequence& logistic_seq() {
  static const MapSequence seq = MapSequence::constant(families::logistic());
  return seq;
}

fs::path out_dir() {
  static const fs::path p = [] {
    const fs::path d = fs::current_path() / "acceptance_out";
    fs::create_directories(d);
    return d;
  }();
  return p;
}

// ------------------------------------------------------------------ criteria

Outcome lyapunov() {
  constexpr double kTol = 0.01, kLimit = 5.0;
  constexpr int kSeeds = 20, kNeed = 19;
  const auto t0 = std::chrono::steady_clock::now();
  int good = 0;
  double worst = 0.0;
  for (int s = 1; s <= kSeeds; ++s) {
    CounterRng rng(static_cast<std::uint64_t>(s), 0);
    const double v = ftle_fiber(logistic_seq(), rng.uniform(1e-9, 1.0 - 1e-9), 1000000);
    const double err = std::fabs(v - std::log(2.0));
    worst = std::max(worst, err);
    good += err <= kTol;
  }
  const double wall = seconds_since(t0);
  return {good >= kNeed && wall < kLimit,
          fmt("%d/%d seeds within %.2g of log 2 (need %d), worst error %.2e, %.2f s (limit %.0f s)", good, kSeeds,
              kTol, kNeed, worst, wall, kLimit)};
}

Outcome acim_oracle() {
  constexpr double kTol = 0.05, kLimit = 60.0;
  const auto t0 = std::chrono::steady_clock::now();
  const System sys = System::interval(families::logistic());
  const auto grid = BinGrid::for_system(sys, 256);
  const auto m = empirical_measure(sys, 10000, 1000, grid, 1);
  const double wall = seconds_since(t0);
  const double l1 =
      density_compare(m, [](double x) { return 1.0 / (std::numbers::pi * std::sqrt(x * (1.0 - x))); });
  return {l1 <= kTol && wall < kLimit,
          fmt("L1 = %.5f (limit %.2f), estimator %.2f s (limit %.0f s)", l1, kTol, wall, kLimit)};
}

Outcome branch_certificates() {
  constexpr double kTol = 1e-9;
  constexpr int kAnchors = 1000, kDepth = 20, kSamples = 100;
  const auto& seq = logistic_seq();
  const auto f = families::logistic();
  int endpoint_fail = 0, sign_fail = 0, nest_fail = 0, endpoints = 0;
  for (int i = 0; i < kAnchors; ++i) {
    CounterRng rng(31, static_cast<std::uint64_t>(i));
    const double x = rng.uniform(1e-9, 1.0 - 1e-9);
    BranchWalker w(seq, x);
    double lo = w.branch().t_lo, hi = w.branch().t_hi;
    for (int n = 1; n <= kDepth + 1; ++n) {
      w.step();
      const auto& b = w.branch();
      if (b.t_lo < lo || b.t_hi > hi) ++nest_fail;
      lo = b.t_lo;
      hi = b.t_hi;
      if (n != kDepth) continue;
      for (auto [e, step, boundary] : {std::tuple{b.t_lo, b.lo_step, 0.0}, std::tuple{b.t_hi, b.hi_step, 1.0}}) {
        if (step < 0) {
          endpoint_fail += e != boundary;
          continue;
        }
        ++endpoints;
        endpoint_fail += !certify_endpoint(seq, e, step, kTol).certified;
      }
      int sign = 0;
      for (int s = 0; s < kSamples; ++s) {
        double y = b.t_lo + (b.t_hi - b.t_lo) * (s + 0.5) / kSamples;
        double d = 1.0;
        for (int j = 0; j < kDepth; ++j) {
          d *= f.derivative(y) > 0 ? 1.0 : -1.0;
          y = f(y);
        }
        const int sg = d > 0 ? 1 : -1;
        if (sign != 0 && sg != sign) {
          ++sign_fail;
          break;
        }
        sign = sg;
      }
    }
  }
  return {endpoint_fail == 0 && sign_fail == 0 && nest_fail == 0,
          fmt("%d anchors, n = %d: %d/%d endpoints uncertified (tol %.0e), %d sign changes over %d samples, %d "
              "nesting violations",
              kAnchors, kDepth, endpoint_fail, endpoints, kTol, sign_fail, kSamples, nest_fail)};
}

Outcome worked_values() {
  constexpr double kTol = 1e-9;
  const auto b = track_branch(logistic_seq(), 0.25, 2);
  const double lo = (2.0 - std::sqrt(2.0)) / 4.0;
  const double e1 = std::fabs(b.r_history.at(0) - 0.25), e2 = std::fabs(b.r_history.at(1) - 0.25);
  const double e3 = std::fabs(b.t_lo - lo), e4 = std::fabs(b.t_hi - 0.5);
  const double worst = std::max({e1, e2, e3, e4});
  return {worst <= kTol, fmt("r1 = %.12f, r2 = %.12f, T2 = [%.12f, %.12f], max error %.1e (tol %.0e)", b.r_history[0],
                             b.r_history[1], b.t_lo, b.t_hi, worst, kTol)};
}

std::vector<int> brute_pliss(const std::vector<double>& v, double c1) {
  std::vector<int> out;
  for (std::size_t n = 1; n <= v.size(); ++n) {
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) {
      double s = 0.0;
      for (std::size_t j = k; j < n; ++j) s += v[j];
      ok = s >= c1 * static_cast<double>(n - k);
    }
    if (ok) out.push_back(static_cast<int>(n));
  }
  return out;
}

Outcome pliss() {
  int mismatches = 0, guaranteed = 0, density_fail = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    CounterRng rng(55, i);
    const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform() * 200);
    std::vector<double> v(len);
    // Integer values and dyadic constants keep every partial sum exact.
    for (auto& x : v) x = std::floor(rng.uniform(-2.0, 4.0));
    const double c1 = std::floor(rng.uniform(0.0, 2.0));
    const auto r = pliss_times({v, c1, c1 + 0.5, 3.0});
    mismatches += r.indices != brute_pliss(v, c1);
    if (r.guaranteed) {
      ++guaranteed;
      density_fail += r.density < r.zeta;
    }
  }
  return {mismatches == 0 && density_fail == 0 && guaranteed > 0,
          fmt("1000 sequences: %d mismatches with the all-suffix checker; %d/%d guaranteed instances below density "
              "(c2-c1)/(A-c1)",
              mismatches, density_fail, guaranteed)};
}

Outcome component_claims() {
  constexpr double kLimit = 120.0;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t c1 = 0, c2 = 0, v1 = 0, v2 = 0;
  double worst = 0.0;
  for (double delta : {0.05, 0.1}) {
    for (int n = 1; n <= 8; ++n) {
      const auto census = component_census(logistic_seq(), n, delta);
      const auto rep = check_component_claims(census, 1);
      c1 += rep.claim1_instances;
      c2 += rep.claim2_instances;
      v1 += rep.claim1_violations;
      v2 += rep.claim2_violations;
      worst = std::max(worst, rep.claim1_worst_ratio);
    }
  }
  const double wall = seconds_since(t0);
  return {v1 == 0 && v2 == 0 && c1 > 0 && c2 > 0 && wall < kLimit,
          fmt("first bound (factor 6): %zu/%zu violated, worst ratio %.3f; second bound (i+1): %zu/%zu violated; %.2f s "
              "(limit %.0f s)",
              v1, c1, worst, v2, c2, wall, kLimit)};
}

Outcome ay_decay() {
  const std::vector<int> ns{30, 40, 50, 60};
  const auto deltas = default_delta_grid();
  const auto rows = measure_AY_decay(logistic_seq(), ns, deltas, 0.3, 100000, 1);
  const fs::path table = out_dir() / "ay_decay.csv";
  std::ofstream os(table);
  os.precision(17);
  write_decay_csv(os, rows);
  int good = 0;
  double best_delta = 0.0;
  for (double d : deltas) {
    bool all = true;
    for (const auto& r : rows)
      if (r.delta == d) all = all && r.within_bound(1.0);
    if (all && good++ == 0) best_delta = d;
  }
  return {good > 0, fmt("%d/%zu deltas within exp(-n lambda/2) for all n in {30,40,50,60} (first %.4f), lambda 0.3, "
                        "1e5 samples; table in %s",
                        good, deltas.size(), best_delta, table.string().c_str())};
}

Outcome curves() {
  constexpr double kHeadroom = 1.1, kAlpha = 0.01;
  const auto skew = families::viana();
  const auto cc = curve_constants(skew, kAlpha);
  double worst = 0.0, worst_ratio = 0.0;
  std::size_t checked = 0, violations = 0, pieces = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    CounterRng rng(8, s);
    const double lo = rng.uniform(0.0, 0.5);
    const double hi = lo + rng.uniform(0.01, 0.5);
    const double x0 = rng.uniform(-0.9, 0.9);
    const double m = 1 + std::floor(rng.uniform(0.0, 4.0));
    const double phase = rng.uniform(0.0, 2 * std::numbers::pi);
    const double amp = kAlpha / (2 * std::numbers::pi * m);
    const auto curve = CurveGraph::sample(
        lo, hi, [&](double t) { return x0 + amp * std::sin(2 * std::numbers::pi * m * t + phase); }, 257);
    if (curve.max_slope > kAlpha) return {false, "initial curve steeper than alpha"};
    const auto its = propagate_curve(skew, curve, 100);
    for (std::size_t k = 1; k < its.size(); ++k) {
      worst = std::max(worst, its[k].max_slope);
      pieces += its[k].pieces.size();
    }
    const auto rep = check_contraction(skew, its, cc.C2);
    checked += rep.checked;
    violations += rep.violations;
    worst_ratio = std::max(worst_ratio, rep.worst_ratio);
  }
  return {worst <= kHeadroom * cc.C1 && violations == 0 && checked > 0,
          fmt("10 curves x 100 iterations, %zu pieces: max slope %.5f vs %.1f C1 = %.5f; arc-length bound C2 = %.5f: "
              "%zu/%zu violated, worst ratio %.4f",
              pieces, worst, kHeadroom, kHeadroom * cc.C1, cc.C2, violations, checked, worst_ratio)};
}

Outcome markov() {
  constexpr double kCoverage = 0.99, kMobiusTol = 1e-12;
  const auto f = families::logistic();
  const auto part = build_partition(f, 1);
  const int N = markov_start_depth(f, part);
  const auto rep = assemble_markov(f, part, 10000, N, 60, 1);
  const bool constancy = rep.constancy_failures == 0 && rep.constancy_checks == 10 * rep.branches.size();

  const auto mob = families::mobius(2.0, 1.0, 1.0, 3.0, {0.0, 1.0});
  double worst = 0.0;
  int pairs = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    CounterRng rng(9, s);
    double u[4];
    for (double& v : u) v = rng.uniform();
    std::sort(u, u + 4);
    if (u[1] - u[0] < 1e-3 || u[3] - u[2] < 1e-3 || u[2] - u[1] < 1e-3) continue;
    const int k = 1 + static_cast<int>(s % 4);
    worst = std::max(worst, std::fabs(cross_ratio_operator(mob, k, {u[0], u[3]}, {u[1], u[2]}) - 1.0));
    ++pairs;
  }
  const bool ok = rep.m2_ok() && rep.m3_ok() && rep.coverage >= kCoverage && constancy && std::isfinite(rep.K_hat) &&
                  !rep.branches.empty() && worst <= kMobiusTol;
  return {ok, fmt("N = %d, %zu branches: image/M2/M3 failures %zu/%zu/%zu, coverage %.6f (need %.2f), constancy %zu/%zu "
                  "failed, K_hat %.2f; Mobius |B-1| max %.1e over %d pairs (tol %.0e)",
                  N, rep.branches.size(), rep.image_failures, rep.m2_failures, rep.m3_failures, rep.coverage, kCoverage,
                  rep.constancy_failures, rep.constancy_checks, rep.K_hat, worst, pairs, kMobiusTol)};
}

Outcome components() {
  constexpr double kThreshold = 0.3;
  const System logistic = System::interval(families::logistic());
  const System wells = System::interval(families::two_well());
  std::string counts;
  bool ok = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto a = ergodic_components(logistic, 100, 100000, BinGrid::for_system(logistic), seed, kThreshold);
    const auto b = ergodic_components(wells, 100, 100000, BinGrid::for_system(wells), seed, kThreshold);
    ok = ok && a.components == 1 && b.components == 2;
    counts += fmt(" seed %d: %zu/%zu (collapsed %zu/%zu);", static_cast<int>(seed), a.components, b.components,
                  a.collapsed, b.collapsed);
  }
  return {ok, "logistic/two-well clusters, 100 probes, threshold 0.3:" + counts};
}

Outcome determinism() {
  using namespace skewlab::experiment;
  int mismatched = 0, files = 0;
  std::string failed;
  for (const auto& name : kExperiments) {
    ExperimentConfig c;
    c.name = name;
    c.seed = 5;
    c.n = 200;
    c.samples = 100;
    if (name == "curve" || name == "probe") {
      c.system.family = "viana";
      c.n = name == "curve" ? 20 : 30;
      c.samples = 5;
      c.grid = 32;
    }
    if (name == "census") c.n = 8;
    if (name == "ay_decay") c.samples = 10000;
    if (name == "acim") c.samples = 5000;
    if (name == "components") {
      c.system.family = "two_well";
      c.n = 10000;
    }
    if (name == "markov") c.seeds = 2000;
    c.out = (out_dir() / ("rerun_" + name)).string();
    const auto a = run_experiment(c);
    const auto b = run_experiment(c);
    if (a.exit_code != 0 || b.exit_code != 0 || a.outputs.size() != b.outputs.size() || a.outputs.empty()) {
      ++mismatched;
      failed += " " + name;
      continue;
    }
    for (std::size_t i = 0; i < a.outputs.size(); ++i) {
      ++files;
      if (a.outputs[i].sha256 != b.outputs[i].sha256) {
        ++mismatched;
        failed += " " + name + "/" + a.outputs[i].name;
      }
    }
  }
  return {mismatched == 0, fmt("%zu experiments rerun, %d output files, %d digest mismatches", kExperiments.size(),
                               files, mismatched) +
                               failed};
}

}  // namespace

int main() {
  report(1, "Lyapunov oracle", lyapunov);
  report(2, "ACIM oracle", acim_oracle);
  report(3, "branch certificates", branch_certificates);
  report(4, "worked branch values", worked_values);
  report(5, "Pliss equivalence", pliss);
  report(6, "component-count bounds", component_claims);
  report(7, "A_n and Y_n decay", ay_decay);
  report(8, "curve preservation", curves);
  report(9, "Markov certification", markov);
  report(10, "ergodic components", components);
  report(11, "determinism", determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
