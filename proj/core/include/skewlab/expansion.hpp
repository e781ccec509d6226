#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "skewlab/map_core.hpp"

namespace skewlab {

/// (1/n) sum_{j<n} log |Df_j(f^j(x))|. HitCritical(j) when |Df_j| <= 1e-300.
double ftle_fiber(const MapSequence& seq, double x, std::size_t n);

/// Smallest singular value of [[a, 0], [b, c]] in closed form.
double smallest_singular_value(double a, double b, double c);

/// (1/n) sum_{j<n} log m(Dphi(phi^j(z))), m the smallest singular value of
/// [[g', 0], [d_theta f, d_x f]].
double ftle_full(const SkewProduct& skew, SkewProduct::Point z, std::size_t n);

/// Fraction of j < n with dist(f^j(x), C_j) < eps. Zero for empty C_j.
double visit_frequency(const MapSequence& seq, double x, std::size_t n, double eps);

struct ExpansionRecord {
  double x = 0.0;
  std::size_t n = 0;
  double ftle = 0.0;
  double r_mean = 0.0;
  double r_last = 0.0;
  bool in_Y = false;  // ftle > lambda
  bool in_A = false;  // r_mean < delta^2 and r_n > 0
  double visit_freq = 0.0;
};

ExpansionRecord expansion_record(const MapSequence& seq, double x, std::size_t n, double lambda,
                                 double delta, double eps);

struct DecayRow {
  int n = 0;
  double fraction = 0.0;
  double bound = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::size_t hits = 0;

  /// Measure estimate fraction * |I0| against |I0| exp(-n lambda / 2).
  bool within_bound(double domain_length) const { return fraction * domain_length <= bound; }
};

/// delta_k = 0.02 * 10^(k/5), k = 0..5: geometric grid from 0.02 to 0.2.
std::vector<double> default_delta_grid();

/// Monte-Carlo fraction of uniform points in A_n(delta) and Y_n(lambda) for
/// every n in n_list and delta in deltas (one orbit per sample). Sample i
/// draws from the stream (seed, i), so results do not depend on `threads`.
std::vector<DecayRow> measure_AY_decay(const MapSequence& seq, const std::vector<int>& n_list,
                                       const std::vector<double>& deltas, double lambda,
                                       std::size_t samples, std::uint64_t seed,
                                       unsigned threads = 1);

void write_decay_csv(std::ostream& os, const std::vector<DecayRow>& rows);

/// Empirical sup of |log|d_x f(z)| - log|d_x f(w)|| dist_v(z, C) / dist(z, w)
/// over pairs with dist(z, w) < dist_v(z, C) / 2. dist_v is 1 for a fiber
/// without critical points.
double estimate_f2(const SkewProduct& skew, std::size_t samples, std::uint64_t seed);

struct ContainmentReport {
  std::size_t samples = 0;
  std::size_t in_Z = 0;
  std::size_t in_Z_and_Y = 0;
};

/// Counts sampled z in Z_n(lambda) and, of those, the ones whose fiber orbit
/// lies in Y_n(theta, lambda).
ContainmentReport z_y_containment(const SkewProduct& skew, std::size_t n, double lambda,
                                  std::size_t samples, std::uint64_t seed);

}  // namespace skewlab
