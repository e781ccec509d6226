#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "skewlab/map_core.hpp"
#include "skewlab/rng.hpp"

namespace skewlab {

/// An autonomous system: an interval map or a skew-product. Interval maps
/// use Point::theta = 0.
class System {
 public:
  using Point = SkewProduct::Point;

  static System interval(IntervalMap map);
  static System skew(SkewProduct skew);

  bool two_dimensional() const { return std::holds_alternative<SkewProduct>(map_); }
  const IntervalDomain& domain() const;
  const std::string& label() const;
  Point step(Point z) const;
  /// Uniform point with x interior to the domain.
  Point sample(CounterRng& rng) const;
  /// Fiber sequence seen by the orbit of z.
  MapSequence fiber_sequence(Point z) const;

  const IntervalMap* interval_map() const { return std::get_if<IntervalMap>(&map_); }
  const SkewProduct* skew_product() const { return std::get_if<SkewProduct>(&map_); }

 private:
  explicit System(std::variant<IntervalMap, SkewProduct> map) : map_(std::move(map)) {}
  std::variant<IntervalMap, SkewProduct> map_;
};

/// nx bins over the fiber domain, times ntheta bins over [0, 1) in 2-D.
/// Bins are row-major: index = i_theta * nx + i_x.
struct BinGrid {
  IntervalDomain x;
  std::size_t nx = 256;
  std::size_t ntheta = 0;  // 0 for a 1-D grid

  static BinGrid for_system(const System& sys, std::size_t nx = 256, std::size_t ntheta = 128);
  std::size_t size() const { return nx * (ntheta == 0 ? 1 : ntheta); }
  std::size_t index(System::Point z) const;
  double bin_lo(std::size_t ix) const;
  double bin_hi(std::size_t ix) const;
  bool operator==(const BinGrid&) const = default;
};

struct EmpiricalMeasure {
  BinGrid grid;
  std::vector<std::uint64_t> counts;
  std::vector<double> weights;  // counts / total
  std::size_t samples = 0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::string label;

  std::uint64_t total() const;
  /// Recomputes weights from counts.
  void normalize();
};

/// Orbit counts of `samples` uniform points: `average` holds the points
/// 0..n-1, `shifted` the points 1..n, `first` point 0 and `last` point n.
struct OrbitTally {
  std::vector<std::uint64_t> average;
  std::vector<std::uint64_t> shifted;
  std::vector<std::uint64_t> first;
  std::vector<std::uint64_t> last;
};

/// Sample i starts from CounterRng(seed, i); points outside the domain are
/// binned at the nearest edge.
OrbitTally tally_orbits(const System& sys, std::size_t samples, std::size_t n,
                        const BinGrid& grid, std::uint64_t seed, unsigned threads = 1);

/// mu_n = (1/n) sum_{i<n} phi^i_* Leb from `samples` orbits.
EmpiricalMeasure empirical_measure(const System& sys, std::size_t samples, std::size_t n,
                                   const BinGrid& grid, std::uint64_t seed, unsigned threads = 1);

/// Sums groups of `factor` x-bins (and theta-bins in 2-D).
EmpiricalMeasure coarsen(const EmpiricalMeasure& m, std::size_t factor);

/// sum |phi_* m - m| with phi_* m estimated by stratified sampling inside
/// each bin, about transfer_samples points per unit weight.
double invariance_defect(const EmpiricalMeasure& m, const System& sys,
                         std::size_t transfer_samples, std::uint64_t seed);

/// Oracle mass of each 1-D bin by tanh-sinh quadrature of the density.
std::vector<double> bin_masses(const BinGrid& grid, const std::function<double(double)>& density);
/// Same from a cumulative distribution function.
std::vector<double> bin_masses_cdf(const BinGrid& grid, const std::function<double(double)>& cdf);

/// L1 distance between the weights and the oracle bin masses.
double density_compare(const EmpiricalMeasure& m, const std::vector<double>& oracle_masses);
double density_compare(const EmpiricalMeasure& m, const std::function<double(double)>& density);

struct ComponentReport {
  std::size_t components = 0;
  /// Cluster id per probe in order of first appearance; SIZE_MAX for a
  /// collapsed probe.
  std::vector<std::size_t> assignment;
  /// Probes whose floating-point orbit landed exactly on an expanding fixed
  /// point; they are left out of the clustering.
  std::size_t collapsed = 0;
  double threshold = 0.0;
  std::vector<std::pair<double, std::size_t>> sensitivity;
  std::size_t burn_in = 0;
};

inline const std::vector<double> kSensitivityThresholds{0.1, 0.2, 0.3, 0.5};

/// Single-linkage clusters of per-probe orbit histograms: probe i runs n
/// steps from CounterRng(seed, i), drops the first burn_in points (n / 10
/// by default) and links to probes within L1 distance <= threshold.
ComponentReport ergodic_components(const System& sys, std::size_t probes, std::size_t n,
                                   const BinGrid& grid, std::uint64_t seed,
                                   double threshold = 0.3, std::size_t burn_in = SIZE_MAX);

struct NuLikeReport {
  EmpiricalMeasure measure;  // counts at hyperbolic-like times only
  double mass = 0.0;         // deposits / (samples n)
  double anchor_fraction = 0.0;  // anchors with sum r_i >= 2 delta_tilde n
  double zeta = 0.0;             // delta_tilde / (|I0| - delta_tilde)
  double lower_bound = 0.0;      // zeta * anchor_fraction
  bool bound_holds = false;
};

/// Deposits orbit point i (1 <= i <= n) only when r_i >= delta_tilde for
/// the fiber branch of the anchor.
NuLikeReport nu_like_mass(const System& sys, std::size_t samples, std::size_t n,
                          double delta_tilde, const BinGrid& grid, std::uint64_t seed,
                          unsigned threads = 1);

/// Columns bin_lo,bin_hi,weight; 2-D adds theta_lo,theta_hi in front.
void write_measure_csv(std::ostream& os, const EmpiricalMeasure& m);

}  // namespace skewlab
