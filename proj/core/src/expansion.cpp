#include "skewlab/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "skewlab/branch.hpp"
#include "skewlab/error.hpp"
#include "skewlab/parallel.hpp"
#include "skewlab/rng.hpp"

namespace skewlab {
namespace {

constexpr double kVanishing = 1e-300;

double interior_uniform(CounterRng& rng, const IntervalDomain& d) {
  double x;
  do {
    x = rng.uniform(d.lo, d.hi);
  } while (!d.interior(x));
  return x;
}

}  // namespace

double ftle_fiber(const MapSequence& seq, double x, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "ftle needs n >= 1");
  double sum = 0.0;
  auto step = [&](const IntervalMap& f, std::size_t j) {
    const double d = std::fabs(f.derivative(x));
    if (d <= kVanishing)
      throw Error(ErrorCode::kHitCritical, "derivative vanishes at step " + std::to_string(j),
                  static_cast<int>(j));
    sum += std::log(d);
    x = f(x);
  };
  if (const auto& f = seq.constant_map()) {
    for (std::size_t j = 0; j < n; ++j) step(*f, j);
  } else {
    auto next = seq.stream();
    for (std::size_t j = 0; j < n; ++j) step(next(), j);
  }
  return sum / static_cast<double>(n);
}

double smallest_singular_value(double a, double b, double c) {
  const double scale = std::max({std::fabs(a), std::fabs(b), std::fabs(c)});
  if (scale == 0.0) return 0.0;
  a /= scale;
  b /= scale;
  c /= scale;
  const double s = a * a + b * b + c * c;
  const double det = std::fabs(a * c);
  const double disc = std::sqrt(std::max(0.0, (s - 2 * det) * (s + 2 * det)));
  const double smax = std::sqrt(0.5 * (s + disc));
  return scale * det / smax;
}

double ftle_full(const SkewProduct& skew, SkewProduct::Point z, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "ftle needs n >= 1");
  const auto& base = skew.base();
  const auto& fb = skew.fiber();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = base.derivative(z.theta);
    const double b = fb.dtheta(z.theta, z.x);
    const double c = fb.dx(z.theta, z.x);
    if ((std::fabs(a) <= kVanishing && std::fabs(b) <= kVanishing) || std::fabs(c) <= kVanishing)
      throw Error(ErrorCode::kDegenerateDifferential,
                  "a column of the differential vanishes at step " + std::to_string(j),
                  static_cast<int>(j));
    sum += std::log(smallest_singular_value(a, b, c));
    z = skew.step(z);
  }
  return sum / static_cast<double>(n);
}

double visit_frequency(const MapSequence& seq, double x, std::size_t n, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be positive");
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "visit frequency needs n >= 1");
  std::size_t near = 0;
  auto next = seq.stream();
  for (std::size_t j = 0; j < n; ++j) {
    const IntervalMap f = next();
    for (double c : f.critical_points()) {
      if (std::fabs(x - c) < eps) {
        ++near;
        break;
      }
    }
    x = f(x);
  }
  return static_cast<double>(near) / static_cast<double>(n);
}

ExpansionRecord expansion_record(const MapSequence& seq, double x, std::size_t n, double lambda,
                                 double delta, double eps) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "record needs n >= 1");
  BranchOptions opt;
  opt.resolve_domain = false;
  const auto b = track_branch(seq, x, static_cast<int>(n), opt);
  ExpansionRecord rec;
  rec.x = x;
  rec.n = n;
  rec.ftle = b.log_derivative / static_cast<double>(n);
  double sum = 0.0;
  for (double r : b.r_history) sum += r;
  rec.r_mean = sum / static_cast<double>(n);
  rec.r_last = b.r_last();
  rec.in_Y = rec.ftle > lambda;
  rec.in_A = rec.r_mean < delta * delta && rec.r_last > 0.0;
  rec.visit_freq = visit_frequency(seq, x, n, eps);
  return rec;
}

std::vector<double> default_delta_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 5; ++k) g.push_back(0.02 * std::pow(10.0, k / 5.0));
  return g;
}

std::vector<DecayRow> measure_AY_decay(const MapSequence& seq, const std::vector<int>& n_list,
                                       const std::vector<double>& deltas, double lambda,
                                       std::size_t samples, std::uint64_t seed,
                                       unsigned threads) {
  if (samples < 1000) throw Error(ErrorCode::kInvalidArgument, "decay needs >= 1000 samples");
  if (n_list.empty() || deltas.empty())
    throw Error(ErrorCode::kInvalidArgument, "decay needs n values and deltas");
  for (int n : n_list)
    if (n < 1) throw Error(ErrorCode::kInvalidArgument, "decay depths must be >= 1");
  for (double d : deltas)
    if (!(d > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be positive");
  const int n_max = *std::max_element(n_list.begin(), n_list.end());
  const std::size_t cols = n_list.size() * deltas.size();
  const IntervalDomain dom = seq.domain();

  BatchPlan plan{samples, 4096, threads};
  const auto parts = run_batches<std::vector<std::size_t>>(
      plan, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<std::size_t> hits(cols, 0);
        for (std::size_t i = begin; i < end; ++i) {
          CounterRng rng(seed, i);
          BranchWalker walker(seq, interior_uniform(rng, dom), false);
          double r_sum = 0.0;
          try {
            for (int n = 1; n <= n_max; ++n) {
              walker.step();
              const auto& b = walker.branch();
              r_sum += b.r_last();
              for (std::size_t a = 0; a < n_list.size(); ++a) {
                if (n_list[a] != n) continue;
                if (!(b.log_derivative / n > lambda) || !(b.r_last() > 0.0)) continue;
                const double mean = r_sum / n;
                for (std::size_t k = 0; k < deltas.size(); ++k)
                  if (mean < deltas[k] * deltas[k]) ++hits[a * deltas.size() + k];
              }
            }
          } catch (const Error& e) {
            // An exact critical hit has measure zero; the sample leaves every set.
            if (e.code() != ErrorCode::kHitCritical) throw;
          }
        }
        return hits;
      });

  std::vector<std::size_t> hits(cols, 0);
  for (const auto& p : parts)
    for (std::size_t c = 0; c < cols; ++c) hits[c] += p[c];
  std::vector<DecayRow> rows;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    for (std::size_t a = 0; a < n_list.size(); ++a) {
      DecayRow r;
      r.n = n_list[a];
      r.delta = deltas[k];
      r.lambda = lambda;
      r.samples = samples;
      r.seed = seed;
      r.hits = hits[a * deltas.size() + k];
      r.fraction = static_cast<double>(r.hits) / static_cast<double>(samples);
      r.bound = dom.length() * std::exp(-r.n * lambda / 2.0);
      rows.push_back(r);
    }
  }
  return rows;
}

void write_decay_csv(std::ostream& os, const std::vector<DecayRow>& rows) {
  os << "n,fraction,bound,delta,lambda,samples,seed\n";
  const auto old = os.precision(17);
  for (const auto& r : rows)
    os << r.n << ',' << r.fraction << ',' << r.bound << ',' << r.delta << ',' << r.lambda << ','
       << r.samples << ',' << r.seed << '\n';
  os.precision(old);
}

double estimate_f2(const SkewProduct& skew, std::size_t samples, std::uint64_t seed) {
  if (samples < 1000) throw Error(ErrorCode::kInvalidArgument, "estimate_f2 needs >= 1000 samples");
  const auto& fb = skew.fiber();
  const IntervalDomain& dom = skew.fiber_domain();
  double best = 0.0;
  std::size_t admissible = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    CounterRng rng(seed, i);
    const double t = rng.uniform();
    const double x = rng.uniform(dom.lo, dom.hi);
    const auto crit = skew.fiber_critical_points(t);
    double dv = 1.0;
    if (!crit.empty()) {
      dv = std::numeric_limits<double>::infinity();
      for (double c : crit) dv = std::min(dv, std::fabs(x - c));
    }
    const double radius = 0.5 * dv;
    const double dt = rng.uniform(-radius, radius);
    const double dx = rng.uniform(-radius, radius);
    const double dist = std::hypot(dt, dx);
    if (!(dist > 0.0) || !(dist < radius)) continue;
    const double xw = x + dx;
    if (!dom.contains(xw)) continue;
    const double tw = wrap_unit(t + dt);
    const double dz = std::fabs(fb.dx(t, x));
    const double dw = std::fabs(fb.dx(tw, xw));
    if (dz <= kVanishing || dw <= kVanishing) continue;
    ++admissible;
    best = std::max(best, std::fabs(std::log(dz) - std::log(dw)) * dv / dist);
  }
  if (admissible == 0) throw Error(ErrorCode::kEmptySample, "no admissible pairs");
  return best;
}

ContainmentReport z_y_containment(const SkewProduct& skew, std::size_t n, double lambda,
                                  std::size_t samples, std::uint64_t seed) {
  ContainmentReport rep;
  const IntervalDomain& dom = skew.fiber_domain();
  for (std::size_t i = 0; i < samples; ++i) {
    CounterRng rng(seed, i);
    const SkewProduct::Point z{rng.uniform(), interior_uniform(rng, dom)};
    try {
      if (!(ftle_full(skew, z, n) > lambda)) {
        ++rep.samples;
        continue;
      }
      ++rep.samples;
      ++rep.in_Z;
      if (ftle_fiber(fiber_sequence(skew, z.theta), z.x, n) > lambda) ++rep.in_Z_and_Y;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateDifferential && e.code() != ErrorCode::kHitCritical)
        throw;
    }
  }
  return rep;
}

}  // namespace skewlab
