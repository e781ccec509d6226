#include "skewlab/acim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <tuple>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "skewlab/branch.hpp"
#include "skewlab/error.hpp"
#include "skewlab/parallel.hpp"

namespace skewlab {

// ------------------------------------------------------------------ system

System System::interval(IntervalMap map) { return System(std::move(map)); }
System System::skew(SkewProduct skew) { return System(std::move(skew)); }

const IntervalDomain& System::domain() const {
  if (const auto* m = interval_map()) return m->domain();
  return skew_product()->fiber_domain();
}

const std::string& System::label() const {
  if (const auto* m = interval_map()) return m->label();
  return skew_product()->label();
}

System::Point System::step(Point z) const {
  if (const auto* m = interval_map()) return {0.0, (*m)(z.x)};
  return skew_product()->step(z);
}

System::Point System::sample(CounterRng& rng) const {
  const IntervalDomain& d = domain();
  Point z{0.0, 0.0};
  if (two_dimensional()) z.theta = rng.uniform();
  do {
    z.x = rng.uniform(d.lo, d.hi);
  } while (!d.interior(z.x));
  return z;
}

MapSequence System::fiber_sequence(Point z) const {
  if (const auto* m = interval_map()) return MapSequence::constant(*m);
  return skewlab::fiber_sequence(*skew_product(), z.theta);
}

// -------------------------------------------------------------------- grid

BinGrid BinGrid::for_system(const System& sys, std::size_t nx, std::size_t ntheta) {
  if (nx == 0) throw Error(ErrorCode::kInvalidArgument, "grid needs at least one bin");
  BinGrid g;
  g.x = sys.domain();
  g.nx = nx;
  g.ntheta = sys.two_dimensional() ? std::max<std::size_t>(ntheta, 1) : 0;
  return g;
}

std::size_t BinGrid::index(System::Point z) const {
  const double t = (z.x - x.lo) / x.length() * static_cast<double>(nx);
  const std::size_t ix =
      t <= 0.0 ? 0 : std::min(nx - 1, static_cast<std::size_t>(t));
  if (ntheta == 0) return ix;
  const double s = z.theta * static_cast<double>(ntheta);
  const std::size_t it = s <= 0.0 ? 0 : std::min(ntheta - 1, static_cast<std::size_t>(s));
  return it * nx + ix;
}

double BinGrid::bin_lo(std::size_t ix) const {
  return x.lo + x.length() * static_cast<double>(ix) / static_cast<double>(nx);
}

double BinGrid::bin_hi(std::size_t ix) const {
  return ix + 1 == nx ? x.hi : bin_lo(ix + 1);
}

// ----------------------------------------------------------------- measure

std::uint64_t EmpiricalMeasure::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void EmpiricalMeasure::normalize() {
  const double t = static_cast<double>(total());
  weights.assign(counts.size(), 0.0);
  if (t == 0.0) return;
  for (std::size_t b = 0; b < counts.size(); ++b) weights[b] = static_cast<double>(counts[b]) / t;
}

OrbitTally tally_orbits(const System& sys, std::size_t samples, std::size_t n,
                        const BinGrid& grid, std::uint64_t seed, unsigned threads) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "orbits need n >= 1");
  const std::size_t bins = grid.size();
  BatchPlan plan{samples, 4096, threads};
  const auto parts =
      run_batches<OrbitTally>(plan, [&](std::size_t, std::size_t begin, std::size_t end) {
        OrbitTally t{std::vector<std::uint64_t>(bins), std::vector<std::uint64_t>(bins),
                     std::vector<std::uint64_t>(bins), std::vector<std::uint64_t>(bins)};
        for (std::size_t i = begin; i < end; ++i) {
          CounterRng rng(seed, i);
          System::Point z = sys.sample(rng);
          std::size_t b = grid.index(z);
          ++t.first[b];
          for (std::size_t j = 0; j < n; ++j) {
            ++t.average[b];
            z = sys.step(z);
            b = grid.index(z);
            ++t.shifted[b];
          }
          ++t.last[b];
        }
        return t;
      });
  OrbitTally out{std::vector<std::uint64_t>(bins), std::vector<std::uint64_t>(bins),
                 std::vector<std::uint64_t>(bins), std::vector<std::uint64_t>(bins)};
  for (const auto& p : parts) {
    for (std::size_t b = 0; b < bins; ++b) {
      out.average[b] += p.average[b];
      out.shifted[b] += p.shifted[b];
      out.first[b] += p.first[b];
      out.last[b] += p.last[b];
    }
  }
  return out;
}

EmpiricalMeasure empirical_measure(const System& sys, std::size_t samples, std::size_t n,
                                   const BinGrid& grid, std::uint64_t seed, unsigned threads) {
  if (samples < 1000) throw Error(ErrorCode::kInvalidArgument, "measure needs >= 1000 samples");
  EmpiricalMeasure m;
  m.grid = grid;
  m.counts = tally_orbits(sys, samples, n, grid, seed, threads).average;
  m.samples = samples;
  m.iterations = n;
  m.seed = seed;
  m.label = sys.label();
  m.normalize();
  return m;
}

EmpiricalMeasure coarsen(const EmpiricalMeasure& m, std::size_t factor) {
  const BinGrid& g = m.grid;
  if (factor == 0 || g.nx % factor != 0 || (g.ntheta != 0 && g.ntheta % factor != 0))
    throw Error(ErrorCode::kInvalidArgument, "factor must divide the grid");
  EmpiricalMeasure out = m;
  out.grid.nx = g.nx / factor;
  out.grid.ntheta = g.ntheta / factor;
  out.counts.assign(out.grid.size(), 0);
  const std::size_t rows = g.ntheta == 0 ? 1 : g.ntheta;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < g.nx; ++c)
      out.counts[(g.ntheta == 0 ? 0 : r / factor) * out.grid.nx + c / factor] +=
          m.counts[r * g.nx + c];
  out.normalize();
  return out;
}

double invariance_defect(const EmpiricalMeasure& m, const System& sys,
                         std::size_t transfer_samples, std::uint64_t seed) {
  const BinGrid& g = m.grid;
  if (m.weights.size() != g.size()) throw Error(ErrorCode::kInvalidArgument, "measure not normalized");
  std::vector<double> pushed(g.size(), 0.0);
  const double theta_width = g.ntheta == 0 ? 0.0 : 1.0 / static_cast<double>(g.ntheta);
  for (std::size_t b = 0; b < g.size(); ++b) {
    const double w = m.weights[b];
    if (w == 0.0) continue;
    const std::size_t k =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(w * transfer_samples)));
    const std::size_t ix = b % g.nx;
    const double lo = g.bin_lo(ix), hi = g.bin_hi(ix);
    const double t0 = g.ntheta == 0 ? 0.0 : static_cast<double>(b / g.nx) * theta_width;
    CounterRng rng(seed, b);
    for (std::size_t j = 0; j < k; ++j) {
      System::Point z{t0 + theta_width * rng.uniform(),
                      lo + (hi - lo) * (static_cast<double>(j) + rng.uniform()) / k};
      pushed[g.index(sys.step(z))] += w / static_cast<double>(k);
    }
  }
  double d = 0.0;
  for (std::size_t b = 0; b < g.size(); ++b) d += std::fabs(pushed[b] - m.weights[b]);
  return d;
}

std::vector<double> bin_masses(const BinGrid& grid, const std::function<double(double)>& density) {
  if (grid.ntheta != 0) throw Error(ErrorCode::kInvalidArgument, "oracle masses are 1-D");
  boost::math::quadrature::tanh_sinh<double> integrator;
  std::vector<double> out(grid.nx);
  for (std::size_t i = 0; i < grid.nx; ++i)
    out[i] = integrator.integrate(density, grid.bin_lo(i), grid.bin_hi(i), 1e-13);
  return out;
}

std::vector<double> bin_masses_cdf(const BinGrid& grid, const std::function<double(double)>& cdf) {
  if (grid.ntheta != 0) throw Error(ErrorCode::kInvalidArgument, "oracle masses are 1-D");
  std::vector<double> out(grid.nx);
  for (std::size_t i = 0; i < grid.nx; ++i) out[i] = cdf(grid.bin_hi(i)) - cdf(grid.bin_lo(i));
  return out;
}

double density_compare(const EmpiricalMeasure& m, const std::vector<double>& oracle_masses) {
  if (oracle_masses.size() != m.weights.size())
    throw Error(ErrorCode::kInvalidArgument, "oracle and measure grids differ");
  double d = 0.0;
  for (std::size_t b = 0; b < oracle_masses.size(); ++b) d += std::fabs(m.weights[b] - oracle_masses[b]);
  return d;
}

double density_compare(const EmpiricalMeasure& m, const std::function<double(double)>& density) {
  return density_compare(m, bin_masses(m.grid, density));
}

// -------------------------------------------------------------- components

namespace {

// z is a fixed point in floating point with an expanding fiber derivative.
// Real orbits reach such a point only from a null set, so landing there is
// a rounding artifact (4x(1-x) rounds to 1 near 1/2, then stays at 0).
bool collapsed_at(const System& sys, System::Point z, System::Point next) {
  if (next.x != z.x || next.theta != z.theta) return false;
  if (const auto* m = sys.interval_map()) return std::fabs(m->derivative(z.x)) > 1.0;
  return std::fabs(sys.skew_product()->fiber().dx(z.theta, z.x)) > 1.0;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::pair<std::size_t, std::vector<std::size_t>> clusters(const std::vector<double>& dist,
                                                          const std::vector<bool>& skip,
                                                          double threshold) {
  const std::size_t n = skip.size();
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!skip[i] && !skip[j] && dist[i * n + j] <= threshold) uf.unite(i, j);
  std::vector<std::size_t> label(n, SIZE_MAX), out(n, SIZE_MAX);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (skip[i]) continue;
    const std::size_t r = uf.find(i);
    if (label[r] == SIZE_MAX) label[r] = count++;
    out[i] = label[r];
  }
  return {count, out};
}

}  // namespace

ComponentReport ergodic_components(const System& sys, std::size_t probes, std::size_t n,
                                   const BinGrid& grid, std::uint64_t seed, double threshold,
                                   std::size_t burn_in) {
  if (probes < 100) throw Error(ErrorCode::kInvalidArgument, "component search needs >= 100 probes");
  if (burn_in == SIZE_MAX) burn_in = n / 10;
  if (burn_in >= n) throw Error(ErrorCode::kInvalidArgument, "burn-in leaves no orbit points");
  const std::size_t bins = grid.size();
  std::vector<std::vector<double>> hist(probes, std::vector<double>(bins, 0.0));
  std::vector<bool> collapsed(probes, false);
  const double w = 1.0 / static_cast<double>(n - burn_in);
  for (std::size_t p = 0; p < probes; ++p) {
    CounterRng rng(seed, p);
    System::Point z = sys.sample(rng);
    for (std::size_t j = 0; j < n; ++j) {
      if (j >= burn_in) hist[p][grid.index(z)] += w;
      const System::Point next = sys.step(z);
      if (collapsed_at(sys, z, next)) {
        collapsed[p] = true;
        break;
      }
      z = next;
    }
  }
  std::vector<double> dist(probes * probes, 0.0);
  for (std::size_t i = 0; i < probes; ++i)
    for (std::size_t j = i + 1; j < probes; ++j) {
      double d = 0.0;
      for (std::size_t b = 0; b < bins; ++b) d += std::fabs(hist[i][b] - hist[j][b]);
      dist[i * probes + j] = dist[j * probes + i] = d;
    }
  ComponentReport rep;
  rep.threshold = threshold;
  rep.burn_in = burn_in;
  rep.collapsed = static_cast<std::size_t>(std::count(collapsed.begin(), collapsed.end(), true));
  std::tie(rep.components, rep.assignment) = clusters(dist, collapsed, threshold);
  for (double t : kSensitivityThresholds)
    rep.sensitivity.emplace_back(t, clusters(dist, collapsed, t).first);
  return rep;
}

// ---------------------------------------------------------------- nu-like

NuLikeReport nu_like_mass(const System& sys, std::size_t samples, std::size_t n,
                          double delta_tilde, const BinGrid& grid, std::uint64_t seed,
                          unsigned threads) {
  if (samples < 1000) throw Error(ErrorCode::kInvalidArgument, "nu-like mass needs >= 1000 samples");
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "nu-like mass needs n >= 1");
  const double len = sys.domain().length();
  if (!(delta_tilde > 0.0 && delta_tilde < len))
    throw Error(ErrorCode::kInvalidArgument, "delta_tilde must lie in (0, |I0|)");
  struct Part {
    std::vector<std::uint64_t> counts;
    std::size_t anchors = 0;
  };
  const std::size_t bins = grid.size();
  BatchPlan plan{samples, 4096, threads};
  const auto parts = run_batches<Part>(plan, [&](std::size_t, std::size_t begin, std::size_t end) {
    Part part{std::vector<std::uint64_t>(bins), 0};
    for (std::size_t i = begin; i < end; ++i) {
      CounterRng rng(seed, i);
      System::Point z = sys.sample(rng);
      BranchWalker walker(sys.fiber_sequence(z), z.x, false);
      double r_sum = 0.0;
      try {
        for (std::size_t j = 1; j <= n; ++j) {
          walker.step();
          z = sys.step(z);
          const double r = walker.branch().r_last();
          r_sum += r;
          if (r >= delta_tilde) ++part.counts[grid.index(z)];
        }
      } catch (const Error& e) {
        // An exact critical hit ends the branch; later points are not deposited.
        if (e.code() != ErrorCode::kHitCritical) throw;
      }
      if (r_sum >= 2.0 * delta_tilde * static_cast<double>(n)) ++part.anchors;
    }
    return part;
  });
  NuLikeReport rep;
  rep.measure.grid = grid;
  rep.measure.counts.assign(bins, 0);
  std::size_t anchors = 0;
  for (const auto& p : parts) {
    anchors += p.anchors;
    for (std::size_t b = 0; b < bins; ++b) rep.measure.counts[b] += p.counts[b];
  }
  rep.measure.samples = samples;
  rep.measure.iterations = n;
  rep.measure.seed = seed;
  rep.measure.label = sys.label();
  rep.measure.normalize();
  const double denom = static_cast<double>(samples) * static_cast<double>(n);
  rep.mass = static_cast<double>(rep.measure.total()) / denom;
  rep.anchor_fraction = static_cast<double>(anchors) / static_cast<double>(samples);
  rep.zeta = delta_tilde / (len - delta_tilde);
  rep.lower_bound = rep.zeta * rep.anchor_fraction;
  rep.bound_holds = rep.mass >= rep.lower_bound;
  return rep;
}

void write_measure_csv(std::ostream& os, const EmpiricalMeasure& m) {
  const BinGrid& g = m.grid;
  const auto old = os.precision(17);
  if (g.ntheta == 0) {
    os << "bin_lo,bin_hi,weight\n";
    for (std::size_t i = 0; i < g.nx; ++i)
      os << g.bin_lo(i) << ',' << g.bin_hi(i) << ',' << m.weights[i] << '\n';
  } else {
    os << "theta_lo,theta_hi,bin_lo,bin_hi,weight\n";
    for (std::size_t r = 0; r < g.ntheta; ++r)
      for (std::size_t i = 0; i < g.nx; ++i)
        os << static_cast<double>(r) / g.ntheta << ',' << static_cast<double>(r + 1) / g.ntheta
           << ',' << g.bin_lo(i) << ',' << g.bin_hi(i) << ',' << m.weights[r * g.nx + i] << '\n';
  }
  os.precision(old);
}

}  // namespace skewlab
