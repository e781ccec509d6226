#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "skewlab/map_core.hpp"

namespace skewlab {

inline constexpr double kEndpointSnap = 1e-9;

/// Finite partition of I0 whose endpoint set is forward invariant.
struct MarkovPartition {
  std::vector<double> endpoints;  // sorted, includes both ends of I0
  double min_len = 0.0;

  /// Skips the invariance requirement, for fault injection.
  static MarkovPartition unchecked(std::vector<double> endpoints);

  std::size_t cell_count() const { return endpoints.size() - 1; }
  double cell_lo(std::size_t i) const { return endpoints[i]; }
  double cell_hi(std::size_t i) const { return endpoints[i + 1]; }
  /// Cell containing x (the left one at an endpoint).
  std::size_t cell_of(double x) const;
  /// Distance from x to the nearest endpoint.
  double endpoint_distance(double x) const;
  /// max over endpoints e of dist(f(e), endpoints).
  double forward_defect(const IntervalMap& f) const;
};

/// Boundary, critical points and their forward orbits, then `depth` rounds
/// of preimages under every lap, closed again under f. Points within 1e-9
/// are merged. ClosureDiverges if an orbit needs more than `cap` new points.
MarkovPartition build_partition(const IntervalMap& f, int depth, int cap = 64);

/// Smallest n <= n_max whose monotonicity cells are all shorter than
/// min_len / 4. NotFound otherwise.
int markov_start_depth(const IntervalMap& f, const MarkovPartition& part, int n_max = 30);

struct InducedBranch {
  double lo = 0.0;
  double hi = 0.0;
  int k = 0;
  std::size_t image_cell = 0;
  /// max / min of |Df^k| on interior samples.
  double distortion_sample = 0.0;
};

/// Minimal k in [N, k_max] with f^k(T_k(x)) covering the cell of f^k(x)
/// and its two neighbours (a missing neighbour at the boundary counts as
/// covered), and the pullback of that cell. InvalidArgument if x is within
/// 1e-12 of a partition endpoint; NotFound if no k qualifies.
InducedBranch inducing_time(const IntervalMap& f, const MarkovPartition& part, double x, int N,
                            int k_max);

struct MarkovReport {
  std::vector<InducedBranch> branches;  // sorted by lo
  std::size_t seeds = 0;
  std::size_t seed_failures = 0;   // NotFound or critical hits
  std::size_t overlaps = 0;        // domains overlapping a kept one without matching it
  std::size_t image_failures = 0;  // f^k(I) endpoints off the cell endpoints
  std::size_t m2_failures = 0;     // a domain meeting F(I_i) but not inside it
  std::size_t m3_failures = 0;     // |F(I_i)| < min_len
  std::size_t constancy_checks = 0;
  std::size_t constancy_failures = 0;
  double K_branch = 0.0;  // max per-branch distortion
  double K_chain = 0.0;   // max distortion along sampled compositions of length <= 3
  double K_hat = 0.0;     // max of the two
  double coverage = 0.0;
  int N = 0;

  bool m2_ok() const { return image_failures == 0 && m2_failures == 0; }
  bool m3_ok() const { return m3_failures == 0; }
};

struct MarkovOptions {
  int cell_depth = 8;  // one seed per monotonicity cell of this depth
  int constancy_samples = 10;
  int chain_samples = 2000;
};

/// Branch discovery from stratified seeds, deduplication and (M1)-(M3)
/// certification.
MarkovReport assemble_markov(const IntervalMap& f, const MarkovPartition& part,
                             std::size_t seeds, int N, int k_max, std::uint64_t seed,
                             const MarkovOptions& options = {});

/// Index of the branch whose domain contains x, or SIZE_MAX.
std::size_t find_branch(const std::vector<InducedBranch>& branches, double x);

/// b(T, J) = |J||T| / (|L||R|) for J inside T. DegenerateGap if a gap is
/// <= 1e-12.
double cross_ratio(std::pair<double, double> T, std::pair<double, double> J);
/// b(f^k T, f^k J) / b(T, J). NotMonotone if some f^j(T), j < k, contains a
/// critical point.
double cross_ratio_operator(const IntervalMap& f, int k, std::pair<double, double> T,
                            std::pair<double, double> J);

struct KoebeFit {
  std::size_t samples = 0;
  double min_B = 0.0;
  /// max over samples of max(0, -log B) / |f^n(T)|^2.
  double C_hat = 0.0;
};

/// Nested pairs J inside T inside T_n(x) for random x and n <= n_max.
KoebeFit koebe_fit(const IntervalMap& f, std::size_t samples, int n_max, std::uint64_t seed);

struct SummabilityStat {
  double mean = 0.0;        // mean inducing time over the probes
  double dispersion = 0.0;  // std / mean across probes
  std::size_t probes = 0;   // probes with at least one induced step
  std::size_t escapes = 0;  // orbits that left the discovered domains
};

/// Birkhoff average of k along induced orbits of `orbit_len` steps. An
/// orbit that leaves the domains stops there and keeps its partial mean.
/// InvalidArgument if the branches cover less than 95% of I0.
SummabilityStat summability_stat(const std::vector<InducedBranch>& branches, const IntervalMap& f,
                                 int orbit_len, std::size_t probes, std::uint64_t seed);

/// Columns i,lo,hi,k,image_cell,distortion_sample.
void write_branch_csv(std::ostream& os, const std::vector<InducedBranch>& branches);

}  // namespace skewlab
