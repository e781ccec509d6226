#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "skewlab/map_core.hpp"

namespace skewlab {

/// Maximal interval T_n(x) on which f^n = f_{n-1} o ... o f_0 is monotone,
/// with the image sizes r_1(x), ..., r_n(x).
struct MonotoneBranch {
  double x = 0.0;
  int n = 0;
  /// Domain endpoints; NaN when tracked without domain resolution.
  double t_lo = std::numeric_limits<double>::quiet_NaN();
  double t_hi = std::numeric_limits<double>::quiet_NaN();
  /// Step j at which f^j maps the endpoint onto a critical point of f_j;
  /// -1 for an endpoint on the boundary of I0.
  int lo_step = -1;
  int hi_step = -1;
  double img_lo = 0.0;
  double img_hi = 0.0;
  double image_point = 0.0;  // f^n(x)
  int orientation = 1;
  std::vector<double> r_history;
  double log_derivative = 0.0;  // log |Df^n(x)|
  bool terminated = false;
  int terminated_at = -1;

  double r_last() const { return r_history.empty() ? 0.0 : r_history.back(); }
};

/// Incremental tracker: each step applies the next map to the image interval
/// and cuts it at the critical points nearest to the image of x.
class BranchWalker {
 public:
  BranchWalker(const MapSequence& seq, double x, bool resolve_domain = true);

  /// Advances one step. Throws HitCritical (with the step index) when the
  /// orbit lands within 1e-12 of a critical point; the branch is then
  /// marked terminated and further steps throw Terminated.
  void step();
  int depth() const { return branch_.n; }
  const MonotoneBranch& branch() const { return branch_; }
  /// f^j(t) for j <= depth(); requires domain resolution.
  double iterate(int j, double t) const;
  /// The maps applied so far (empty without domain resolution).
  const std::vector<IntervalMap>& applied() const { return applied_; }

 private:
  std::function<IntervalMap()> next_;
  bool resolve_;
  std::vector<IntervalMap> applied_;
  MonotoneBranch branch_;
};

struct BranchOptions {
  bool resolve_domain = true;
  /// If false, an exact critical hit returns a terminated branch.
  bool throw_on_critical = true;
};

MonotoneBranch track_branch(const MapSequence& seq, double x, int n, BranchOptions options = {});

struct EndpointCertificate {
  bool certified = false;
  /// min over critical points c of f_step of |f^step(e) - c|.
  double image_residual = std::numeric_limits<double>::infinity();
  /// f^step - c changes sign on [e - tol, e + tol] for some c.
  bool bracketed = false;
};

/// Checks that e is (within tol) a point mapped by f^step onto a critical
/// point of f_step: either the image residual is <= tol or a true preimage
/// lies within tol of e.
EndpointCertificate certify_endpoint(const MapSequence& seq, double e, int step,
                                     double tol = 1e-9);

struct BranchCell {
  double lo = 0.0;
  double hi = 0.0;
  /// Level at which each endpoint appears: j+1 for a preimage of a critical
  /// point of f_j, 0 for the boundary of I0.
  int lo_level = 0;
  int hi_level = 0;
  int orientation = 1;
  /// level_images[i-1] is the ordered image under f^i of the depth-i cell
  /// containing this one; the last entry is the image of the cell itself.
  std::vector<std::pair<double, double>> level_images;
};

struct BranchPartition {
  int depth = 0;
  IntervalDomain domain;
  std::vector<BranchCell> cells;

  /// Index of the cell whose closure contains x (the left one at a shared
  /// endpoint).
  std::size_t locate(double x) const;
};

inline constexpr std::size_t kDefaultCellCap = 100000;

BranchPartition monotonicity_partition(const MapSequence& seq, int n,
                                       std::size_t cap = kDefaultCellCap);

/// a_i = 1 if r_i >= delta, 0 otherwise, for i = 1..n.
std::vector<std::uint8_t> symbol_sequence(const MonotoneBranch& branch, double delta);

/// Binary word a_1 ... a_s as a string of '0'/'1'.
using Word = std::string;

struct CensusPiece {
  double lo = 0.0;
  double hi = 0.0;
  Word word;  // full depth-n word
  /// Level of the left endpoint when it is a cell endpoint, otherwise a
  /// value larger than any depth.
  int left_level = std::numeric_limits<int>::max();
};

struct CensusEntry {
  Word word;
  std::size_t components = 0;
  double measure = 0.0;
};

struct Census {
  int depth = 0;
  double delta = 0.0;
  IntervalDomain domain;
  std::vector<CensusPiece> pieces;
  /// All realized words of lengths 1..depth, ordered by length then value.
  std::vector<CensusEntry> entries;

  /// Entry for `word`; zero components if the word is not realized.
  CensusEntry find(const Word& word) const;
};

/// Components of C_delta(a_1..a_s) for every realized word of length <= n.
Census component_census(const MapSequence& seq, int n, double delta,
                        std::size_t cap = kDefaultCellCap);
/// Single-word query; InvalidWord for an empty, malformed or too long word.
CensusEntry component_census(const MapSequence& seq, int n, double delta, const Word& word,
                             std::size_t cap = kDefaultCellCap);

/// Components of C(prefix) for prefix lengths s, split at cut points of
/// level <= s and where the prefix changes.
std::vector<std::pair<std::size_t, std::size_t>> census_components(const Census& census, int s);

struct ClaimReport {
  std::size_t claim1_instances = 0;
  std::size_t claim1_violations = 0;
  double claim1_worst_ratio = 0.0;
  std::size_t claim2_instances = 0;
  std::size_t claim2_violations = 0;
};

/// Counting bounds on a census:
///  #C(w0) + #C(w1) <= 3(p+1) #C(w) for every realized prefix w;
///  for a component J of C(w0) with no cut points of levels s+2..s+i+1
///  inside, at most i+1 components of C(w 0^{i+1}) lie in J.
ClaimReport check_component_claims(const Census& census, int p);

void write_census_csv(std::ostream& os, const Census& census);

}  // namespace skewlab
