#include "skewlab/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "skewlab/branch.hpp"
#include "skewlab/error.hpp"
#include "skewlab/numeric.hpp"
#include "skewlab/rng.hpp"

namespace skewlab {
namespace {

constexpr double kInterior = 1e-12;

double iterate(const IntervalMap& f, int k, double x) {
  for (int j = 0; j < k; ++j) x = f(x);
  return x;
}

double abs_derivative(const IntervalMap& f, int k, double x) {
  double d = 1.0;
  for (int j = 0; j < k; ++j) {
    d *= std::fabs(f.derivative(x));
    x = f(x);
  }
  return d;
}

double sampled_distortion(const IntervalMap& f, int k, double lo, double hi, int count) {
  double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
  for (int s = 0; s < count; ++s) {
    const double d = abs_derivative(f, k, lo + (hi - lo) * (s + 0.5) / count);
    mn = std::min(mn, d);
    mx = std::max(mx, d);
  }
  return mn > 0.0 ? mx / mn : std::numeric_limits<double>::infinity();
}

// f^k(t) lands on c within tol, or passes through c within tol of t.
bool lands_on(const IntervalMap& f, int k, double t, double c, double tol) {
  if (std::fabs(iterate(f, k, t) - c) <= tol) return true;
  const double a = iterate(f, k, t - tol) - c;
  const double b = iterate(f, k, t + tol) - c;
  return (a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0);
}

// Solution of f^k(t) = y on [a, b] where f^k is monotone.
double pull_back(const IntervalMap& f, int k, double y, double a, double b) {
  return solve_monotone([&](double t) { return iterate(f, k, t) - y; }, a, b);
}

}  // namespace

// --------------------------------------------------------------- partition

MarkovPartition MarkovPartition::unchecked(std::vector<double> endpoints) {
  std::sort(endpoints.begin(), endpoints.end());
  if (endpoints.size() < 2) throw Error(ErrorCode::kInvalidArgument, "partition needs two endpoints");
  MarkovPartition p;
  p.endpoints = std::move(endpoints);
  p.min_len = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < p.endpoints.size(); ++i)
    p.min_len = std::min(p.min_len, p.endpoints[i + 1] - p.endpoints[i]);
  if (!(p.min_len > 0.0)) throw Error(ErrorCode::kInvalidArgument, "partition has an empty cell");
  return p;
}

std::size_t MarkovPartition::cell_of(double x) const {
  auto it = std::lower_bound(endpoints.begin() + 1, endpoints.end() - 1, x);
  return static_cast<std::size_t>(it - endpoints.begin()) - 1;
}

double MarkovPartition::endpoint_distance(double x) const {
  auto it = std::lower_bound(endpoints.begin(), endpoints.end(), x);
  double d = std::numeric_limits<double>::infinity();
  if (it != endpoints.end()) d = *it - x;
  if (it != endpoints.begin()) d = std::min(d, x - *(it - 1));
  return d;
}

double MarkovPartition::forward_defect(const IntervalMap& f) const {
  double worst = 0.0;
  for (double e : endpoints) worst = std::max(worst, endpoint_distance(f(e)));
  return worst;
}

MarkovPartition build_partition(const IntervalMap& f, int depth, int cap) {
  if (depth < 0) throw Error(ErrorCode::kInvalidArgument, "depth must be >= 0");
  const IntervalDomain& dom = f.domain();
  std::vector<double> pts;
  auto known = [&](double v) {
    return std::any_of(pts.begin(), pts.end(),
                       [&](double p) { return std::fabs(p - v) <= kEndpointSnap; });
  };
  auto add = [&](double v) {
    if (known(v)) return false;
    pts.push_back(v);
    return true;
  };
  auto close = [&](std::size_t from) {
    for (std::size_t i = from; i < pts.size(); ++i) {
      double y = f(pts[i]);
      int added = 0;
      while (add(y)) {
        if (++added > cap)
          throw Error(ErrorCode::kClosureDiverges,
                      "forward orbit of " + std::to_string(pts[i]) + " does not close");
        y = f(y);
      }
    }
  };

  add(dom.lo);
  add(dom.hi);
  for (double c : f.critical_points()) add(c);
  close(0);

  std::vector<double> laps{dom.lo};
  for (double c : f.critical_points()) laps.push_back(c);
  laps.push_back(dom.hi);
  std::sort(laps.begin(), laps.end());
  for (int round = 0; round < depth; ++round) {
    const std::vector<double> targets = pts;
    const std::size_t before = pts.size();
    for (std::size_t l = 0; l + 1 < laps.size(); ++l) {
      const double a = laps[l], b = laps[l + 1];
      const double fa = f(a), fb = f(b);
      for (double e : targets) {
        if (e < std::min(fa, fb) || e > std::max(fa, fb)) continue;
        add(solve_monotone([&](double t) { return f(t) - e; }, a, b));
      }
    }
    close(before);
  }
  return MarkovPartition::unchecked(std::move(pts));
}

int markov_start_depth(const IntervalMap& f, const MarkovPartition& part, int n_max) {
  const MapSequence seq = MapSequence::constant(f);
  for (int n = 1; n <= n_max; ++n) {
    const auto bp = monotonicity_partition(seq, n);
    double longest = 0.0;
    for (const auto& c : bp.cells) longest = std::max(longest, c.hi - c.lo);
    if (longest < part.min_len / 4.0) return n;
  }
  throw Error(ErrorCode::kNotFound, "monotonicity cells stay longer than min_len / 4", n_max);
}

// ---------------------------------------------------------------- inducing

InducedBranch inducing_time(const IntervalMap& f, const MarkovPartition& part, double x, int N,
                            int k_max) {
  if (!(part.endpoint_distance(x) > kInterior))
    throw Error(ErrorCode::kInvalidArgument, "x must be interior to a partition cell");
  if (N < 1) throw Error(ErrorCode::kInvalidArgument, "N must be >= 1");
  if (k_max < N) throw Error(ErrorCode::kNotFound, "empty search range", k_max);
  BranchWalker walker(MapSequence::constant(f), x, true);
  const std::size_t cells = part.cell_count();
  for (int k = 1; k <= k_max; ++k) {
    walker.step();
    if (k < N) continue;
    const MonotoneBranch& b = walker.branch();
    const std::size_t j = part.cell_of(b.image_point);
    const double need_lo = part.cell_lo(j > 0 ? j - 1 : j);
    const double need_hi = part.cell_hi(j + 1 < cells ? j + 1 : j);
    if (b.img_lo > need_lo + kEndpointSnap || b.img_hi < need_hi - kEndpointSnap) continue;
    auto pre = [&](double y) {
      return solve_monotone([&](double t) { return walker.iterate(k, t) - y; }, b.t_lo, b.t_hi);
    };
    const double p = pre(part.cell_lo(j)), q = pre(part.cell_hi(j));
    InducedBranch out;
    out.lo = std::min(p, q);
    out.hi = std::max(p, q);
    out.k = k;
    out.image_cell = j;
    out.distortion_sample = sampled_distortion(f, k, out.lo, out.hi, 33);
    return out;
  }
  throw Error(ErrorCode::kNotFound, "no inducing time up to k_max", k_max);
}

std::size_t find_branch(const std::vector<InducedBranch>& branches, double x) {
  auto it = std::upper_bound(branches.begin(), branches.end(), x,
                             [](double v, const InducedBranch& b) { return v < b.lo; });
  if (it == branches.begin()) return SIZE_MAX;
  --it;
  return x > it->lo && x < it->hi ? static_cast<std::size_t>(it - branches.begin()) : SIZE_MAX;
}

// ---------------------------------------------------------------- assembly

MarkovReport assemble_markov(const IntervalMap& f, const MarkovPartition& part,
                             std::size_t seeds, int N, int k_max, std::uint64_t seed,
                             const MarkovOptions& options) {
  const IntervalDomain& dom = f.domain();
  MarkovReport rep;
  rep.N = N;

  std::vector<double> starts;
  const auto cells = monotonicity_partition(MapSequence::constant(f), options.cell_depth).cells;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CounterRng rng(seed, (std::uint64_t{1} << 40) + i);
    starts.push_back(rng.uniform(cells[i].lo, cells[i].hi));
  }
  for (std::size_t i = 0; i < seeds; ++i) {
    CounterRng rng(seed, i);
    starts.push_back(dom.lo + dom.length() * (static_cast<double>(i) + rng.uniform()) /
                                  static_cast<double>(seeds));
  }
  std::sort(starts.begin(), starts.end());
  rep.seeds = starts.size();

  auto& br = rep.branches;
  for (double x : starts) {
    if (!(part.endpoint_distance(x) > kInterior) || find_branch(br, x) != SIZE_MAX) continue;
    InducedBranch b;
    try {
      b = inducing_time(f, part, x, N, k_max);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotFound && e.code() != ErrorCode::kHitCritical) throw;
      ++rep.seed_failures;
      continue;
    }
    auto pos = std::lower_bound(br.begin(), br.end(), b.lo,
                                [](const InducedBranch& a, double v) { return a.lo < v; });
    bool clash = false;
    for (auto it = pos == br.begin() ? pos : pos - 1; it != br.end() && it->lo < b.hi; ++it) {
      if (std::fabs(it->lo - b.lo) <= kEndpointSnap && std::fabs(it->hi - b.hi) <= kEndpointSnap) {
        clash = true;  // duplicate
        break;
      }
      if (std::min(it->hi, b.hi) - std::max(it->lo, b.lo) > kEndpointSnap) {
        ++rep.overlaps;
        clash = true;
        break;
      }
    }
    if (!clash) br.insert(pos, b);
  }

  double covered = 0.0;
  for (const auto& b : br) {
    covered += b.hi - b.lo;
    rep.K_branch = std::max(rep.K_branch, b.distortion_sample);

    const double A = part.cell_lo(b.image_cell), B = part.cell_hi(b.image_cell);
    const bool increasing = iterate(f, b.k, b.hi) > iterate(f, b.k, b.lo);
    const double at_lo = increasing ? A : B, at_hi = increasing ? B : A;
    if (!lands_on(f, b.k, b.lo, at_lo, kEndpointSnap) || !lands_on(f, b.k, b.hi, at_hi, kEndpointSnap))
      ++rep.image_failures;
    if (std::fabs(iterate(f, b.k, b.hi) - iterate(f, b.k, b.lo)) < part.min_len - kEndpointSnap)
      ++rep.m3_failures;

    // (M2): every domain meeting the image cell lies inside it.
    auto it = std::lower_bound(br.begin(), br.end(), A,
                               [](const InducedBranch& a, double v) { return a.hi <= v; });
    for (; it != br.end() && it->lo < B; ++it) {
      if (std::min(it->hi, B) - std::max(it->lo, A) <= kEndpointSnap) continue;
      if (it->lo < A - kEndpointSnap || it->hi > B + kEndpointSnap) {
        ++rep.m2_failures;
        break;
      }
    }

    for (int s = 0; s < options.constancy_samples; ++s) {
      const double y = b.lo + (b.hi - b.lo) * (s + 0.5) / options.constancy_samples;
      ++rep.constancy_checks;
      try {
        const auto c = inducing_time(f, part, y, N, k_max);
        if (c.k != b.k || std::fabs(c.lo - b.lo) > kEndpointSnap ||
            std::fabs(c.hi - b.hi) > kEndpointSnap)
          ++rep.constancy_failures;
      } catch (const Error&) {
        ++rep.constancy_failures;
      }
    }
  }
  rep.coverage = covered / dom.length();

  // Distortion of F^s on the cylinders of sampled chains, s = 2, 3.
  for (int s = 0; s < options.chain_samples && !br.empty(); ++s) {
    CounterRng rng(seed ^ 0x9e3779b97f4a7c15ULL, static_cast<std::uint64_t>(s));
    double y = rng.uniform(dom.lo, dom.hi);
    std::vector<std::size_t> chain;
    for (int level = 0; level < 3; ++level) {
      const std::size_t i = find_branch(br, y);
      if (i == SIZE_MAX) break;
      chain.push_back(i);
      y = iterate(f, br[i].k, y);
    }
    for (std::size_t len = 2; len <= chain.size(); ++len) {
      double lo = br[chain[len - 1]].lo, hi = br[chain[len - 1]].hi;
      for (std::size_t l = len - 1; l-- > 0;) {
        const InducedBranch& b = br[chain[l]];
        const double p = pull_back(f, b.k, lo, b.lo, b.hi);
        const double q = pull_back(f, b.k, hi, b.lo, b.hi);
        lo = std::min(p, q);
        hi = std::max(p, q);
      }
      if (!(hi > lo)) continue;
      double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
      for (int t = 0; t < 9; ++t) {
        double z = lo + (hi - lo) * (t + 0.5) / 9.0;
        double d = 1.0;
        for (std::size_t l = 0; l < len; ++l) {
          d *= abs_derivative(f, br[chain[l]].k, z);
          z = iterate(f, br[chain[l]].k, z);
        }
        mn = std::min(mn, d);
        mx = std::max(mx, d);
      }
      if (mn > 0.0) rep.K_chain = std::max(rep.K_chain, mx / mn);
    }
  }
  rep.K_hat = std::max(rep.K_branch, rep.K_chain);
  return rep;
}

// ------------------------------------------------------------- cross ratio

double cross_ratio(std::pair<double, double> T, std::pair<double, double> J) {
  if (T.first > T.second) std::swap(T.first, T.second);
  if (J.first > J.second) std::swap(J.first, J.second);
  if (J.first < T.first || J.second > T.second)
    throw Error(ErrorCode::kInvalidArgument, "J must lie inside T");
  const double L = J.first - T.first, R = T.second - J.second;
  if (L <= 1e-12 || R <= 1e-12) throw Error(ErrorCode::kDegenerateGap, "a gap of T minus J is degenerate");
  return (J.second - J.first) * (T.second - T.first) / (L * R);
}

namespace {

// f(p + g) - f(p) as g times the mean of f' over the gap. Unlike a difference of
// images this stays accurate relative to g when g is small.
double image_gap(const IntervalMap& f, double p, double g) {
  const auto fp = [&](double s) { return f.derivative(p + g * s); };
  double err = 0.0;
  const double q = g * boost::math::quadrature::gauss_kronrod<double, 15>::integrate(fp, 0.0, 1.0, 8, 1e-15, &err);
  const double direct = f(p + g) - f(p);
  const double roundoff = 4 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(f(p)), std::fabs(f(p + g)));
  return std::fabs(err * g) <= roundoff ? q : direct;
}

}  // namespace

double cross_ratio_operator(const IntervalMap& f, int k, std::pair<double, double> T,
                            std::pair<double, double> J) {
  const double before = cross_ratio(T, J);
  if (T.first > T.second) std::swap(T.first, T.second);
  if (J.first > J.second) std::swap(J.first, J.second);
  // Track the left end and the three consecutive gaps L, |J|, R.
  double p = T.first;
  double g[3] = {J.first - T.first, J.second - J.first, T.second - J.second};
  for (int j = 0; j < k; ++j) {
    const double lo = p, hi = p + g[0] + g[1] + g[2];
    for (double c : f.critical_points())
      if (c > lo && c < hi) throw Error(ErrorCode::kNotMonotone, "f^k is not monotone on T", j);
    double next[3];
    double q = p;
    for (int i = 0; i < 3; ++i) {
      next[i] = image_gap(f, q, g[i]);
      q += g[i];
    }
    p = f(p);
    if (next[0] < 0) {
      p = f(hi);
      std::swap(next[0], next[2]);
      for (double& v : next) v = -v;
    }
    std::copy(next, next + 3, g);
  }
  if (g[0] <= 1e-12 || g[2] <= 1e-12) throw Error(ErrorCode::kDegenerateGap, "a gap of T minus J is degenerate");
  return g[1] * (g[0] + g[1] + g[2]) / (g[0] * g[2]) / before;
}

KoebeFit koebe_fit(const IntervalMap& f, std::size_t samples, int n_max, std::uint64_t seed) {
  if (n_max < 1) throw Error(ErrorCode::kInvalidArgument, "n_max must be >= 1");
  const MapSequence seq = MapSequence::constant(f);
  const IntervalDomain& dom = f.domain();
  KoebeFit fit;
  fit.min_B = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    CounterRng rng(seed, s);
    const double x = rng.uniform(dom.lo, dom.hi);
    const int n = 1 + static_cast<int>(rng.uniform() * n_max);
    double u[4];
    for (double& v : u) v = rng.uniform();
    std::sort(u, u + 4);
    try {
      if (!dom.interior(x)) continue;
      const auto b = track_branch(seq, x, n);
      const double w = b.t_hi - b.t_lo;
      const std::pair<double, double> T{b.t_lo + w * u[0], b.t_lo + w * u[3]};
      const std::pair<double, double> J{b.t_lo + w * u[1], b.t_lo + w * u[2]};
      const double B = cross_ratio_operator(f, n, T, J);
      const double image = std::fabs(iterate(f, n, T.second) - iterate(f, n, T.first));
      ++fit.samples;
      fit.min_B = std::min(fit.min_B, B);
      if (B < 1.0 && image > 0.0) fit.C_hat = std::max(fit.C_hat, -std::log(B) / (image * image));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateGap && e.code() != ErrorCode::kHitCritical &&
          e.code() != ErrorCode::kNotMonotone)
        throw;
    }
  }
  return fit;
}

// ------------------------------------------------------------ summability

SummabilityStat summability_stat(const std::vector<InducedBranch>& branches, const IntervalMap& f,
                                 int orbit_len, std::size_t probes, std::uint64_t seed) {
  const IntervalDomain& dom = f.domain();
  double covered = 0.0;
  for (const auto& b : branches) covered += b.hi - b.lo;
  if (covered < 0.95 * dom.length())
    throw Error(ErrorCode::kInvalidArgument, "branches cover less than 95% of the domain");
  if (orbit_len < 1) throw Error(ErrorCode::kInvalidArgument, "orbit_len must be >= 1");
  SummabilityStat st;
  std::vector<double> means;
  for (std::size_t p = 0; p < probes; ++p) {
    CounterRng rng(seed, p);
    double x = rng.uniform(dom.lo, dom.hi);
    double sum = 0.0;
    int steps = 0;
    for (; steps < orbit_len; ++steps) {
      const std::size_t i = find_branch(branches, x);
      if (i == SIZE_MAX) {
        ++st.escapes;
        break;
      }
      sum += branches[i].k;
      x = iterate(f, branches[i].k, x);
    }
    if (steps > 0) means.push_back(sum / steps);
  }
  st.probes = means.size();
  if (means.empty()) return st;
  for (double m : means) st.mean += m;
  st.mean /= static_cast<double>(means.size());
  double var = 0.0;
  for (double m : means) var += (m - st.mean) * (m - st.mean);
  st.dispersion = std::sqrt(var / static_cast<double>(means.size())) / st.mean;
  return st;
}

void write_branch_csv(std::ostream& os, const std::vector<InducedBranch>& branches) {
  os << "i,lo,hi,k,image_cell,distortion_sample\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const auto& b = branches[i];
    os << i << ',' << b.lo << ',' << b.hi << ',' << b.k << ',' << b.image_cell << ','
       << b.distortion_sample << '\n';
  }
  os.precision(old);
}

}  // namespace skewlab
