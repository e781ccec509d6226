#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace skewlab {

using RealFn = std::function<double(double)>;
using RealFn2 = std::function<double(double, double)>;

/// Closed interval [lo, hi] with lo < hi, both finite.
struct IntervalDomain {
  double lo = 0.0;
  double hi = 1.0;

  static IntervalDomain make(double lo, double hi);
  double length() const { return hi - lo; }
  bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
  bool interior(double x) const { return x > lo && x < hi; }
  bool operator==(const IntervalDomain&) const = default;
};

struct IntervalMapSpec {
  IntervalDomain domain;
  RealFn f;
  RealFn df;
  RealFn d2f;  // optional
  RealFn d3f;  // optional
  /// Closed-form critical points, if the family knows them. When present they
  /// are cross-checked against the bisection search at construction.
  std::optional<std::vector<double>> critical_points;
  std::string label;
};

/// A smooth self-map of an interval. Immutable; copies share state.
class IntervalMap {
 public:
  /// Validated construction: domain invariance on a 2^12 grid (tol 1e-9),
  /// critical points located by bisection and checked against any closed
  /// form, |f'(c)| <= 1e-9 at each, f' != 0 between them.
  static IntervalMap create(IntervalMapSpec spec);
  /// Trusted construction for maps already validated as a family (fiber
  /// maps of a checked skew-product). Critical points must be supplied.
  static IntervalMap unchecked(IntervalMapSpec spec);

  const IntervalDomain& domain() const;
  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  double third_derivative(double x) const;
  bool has_higher_derivatives() const;
  const std::vector<double>& critical_points() const;
  const std::string& label() const;

 private:
  struct Impl;
  explicit IntervalMap(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Zeros of `df` found from sign changes on a 2^grid_log2 grid, refined by
/// bisection to `tol`.
std::vector<double> find_critical_points(const RealFn& df, const IntervalDomain& domain,
                                         int grid_log2 = 14, double tol = 1e-12);

/// Sf = f'''/f' - 3/2 (f''/f')^2.
double schwarzian(const IntervalMap& map, double x);

/// Uniformly expanding circle map given by an increasing lift of degree d.
struct BaseMap {
  int degree = 2;
  RealFn lift;
  RealFn derivative;
  RealFn second_derivative;  // optional, used for the distortion constant

  static BaseMap linear(int degree);
  double operator()(double theta) const;
  /// Preimage in [0,1) of a lifted value y in [lift(0), lift(1)].
  double inverse_lift(double y) const;
};

/// Keeps theta in [0, 1).
double wrap_unit(double theta);

struct FiberFamily {
  RealFn2 f;
  RealFn2 dx;
  RealFn2 dtheta;
  RealFn2 dxx;   // optional
  RealFn2 dxxx;  // optional
  /// Closed-form critical set of f(theta, .); bisection is used when empty.
  std::function<std::vector<double>(double)> critical_points;
  int max_critical = 0;
};

/// (sigma_hat, C) with prod |d_x f| / |d_theta g^n| <= C sigma_hat^n.
struct Domination {
  double sigma_hat = 0.0;
  double C = 0.0;
};

struct DominationReport {
  std::vector<double> max_ratio;  // index n-1 holds the max over the grid for n
  double sigma_hat = 0.0;
  double C = 0.0;
  bool geometric_decay = false;
  /// Accumulated theta error bound n_max * d * eps of the base orbits.
  double theta_precision = 0.0;
};

enum class DominationPolicy { kRequire, kEstimateOnly };

class SkewProduct {
 public:
  struct Point {
    double theta;
    double x;
  };

  static SkewProduct create(BaseMap base, FiberFamily fiber, IntervalDomain fiber_domain,
                            std::string label,
                            DominationPolicy policy = DominationPolicy::kRequire,
                            std::optional<Domination> supplied = std::nullopt);

  const BaseMap& base() const;
  const FiberFamily& fiber() const;
  const IntervalDomain& fiber_domain() const;
  const std::string& label() const;
  /// Present when the map is dominated (estimated or supplied).
  const std::optional<Domination>& domination() const;
  const DominationReport& domination_report() const;
  /// Gamma: sup of |f| and |d_x f| on the verification grid.
  double uniform_bound() const;
  /// L = sup |d_theta f| / |g'|.
  double horizontal_slope_bound() const;
  /// D: distortion bound of the base iterates on diffeomorphic intervals.
  double base_distortion() const;

  Point step(Point z) const;
  double fiber_value(double theta, double x) const;
  std::vector<double> fiber_critical_points(double theta) const;
  IntervalMap fiber_map(double theta) const;

 private:
  struct Impl;
  explicit SkewProduct(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Ordered source f_0, f_1, ... of maps of a common interval.
class MapSequence {
 public:
  class Source {
   public:
    virtual ~Source() = default;
    virtual IntervalMap at(std::size_t k) const = 0;
    virtual std::vector<IntervalMap> prefix(std::size_t n) const;
    /// Generator yielding f_0, f_1, ... in order. The default calls at(k).
    virtual std::function<IntervalMap()> stream() const;
  };

  static MapSequence constant(IntervalMap map);
  static MapSequence indexed(IntervalDomain domain, int max_critical, double uniform_bound,
                             std::function<IntervalMap(std::size_t)> generator);
  static MapSequence from_source(IntervalDomain domain, int max_critical, double uniform_bound,
                                 std::shared_ptr<const Source> source);

  IntervalMap at(std::size_t k) const;
  std::vector<IntervalMap> prefix(std::size_t n) const;
  /// Sequential access f_0, f_1, ...; cheaper than at(k) for fiber orbits.
  std::function<IntervalMap()> stream() const;
  /// The single map of a constant sequence, for fast paths.
  const std::optional<IntervalMap>& constant_map() const { return constant_; }
  const IntervalDomain& domain() const { return domain_; }
  int max_critical_count() const { return max_critical_; }
  double uniform_bound() const { return uniform_bound_; }

 private:
  MapSequence(IntervalDomain domain, int p, double gamma, std::shared_ptr<const Source> source)
      : domain_(domain), max_critical_(p), uniform_bound_(gamma), source_(std::move(source)) {}
  void check(const IntervalMap& map) const;

  IntervalDomain domain_;
  int max_critical_;
  double uniform_bound_;
  std::shared_ptr<const Source> source_;
  std::optional<IntervalMap> constant_;
};

/// k -> f(g^k(theta), .), with g^k computed by k wrapped applications.
MapSequence fiber_sequence(const SkewProduct& skew, double theta);

DominationReport verify_partial_hyperbolicity(const SkewProduct& skew, int n_max, int grid);

/// Largest eps = |I0| j / 1024 such that |x-y| < eps implies
/// |f_k(x)-f_k(y)| < zeta and |Df_k(x)-Df_k(y)| < zeta for k <= k_probe on
/// the sample grid. Zero if no candidate qualifies.
double estimate_modulus(const MapSequence& seq, double zeta, int k_probe, int grid);

namespace families {

struct VianaParams {
  double a0 = 1.7;
  double alpha = 0.05;
  int d = 16;
  double lo = -1.8;
  double hi = 1.8;
};

IntervalMap logistic();
/// a - x^2 on its invariant interval [-b, b], b = (1 + sqrt(1 + 4a)) / 2.
IntervalMap quadratic(double a);
IntervalMap affine(double slope, double intercept, IntervalDomain domain);
IntervalMap identity(IntervalDomain domain = {0.0, 1.0});
/// 2x mod 1 on [0, 1).
IntervalMap doubling();
/// (a x + b) / (c x + d) restricted to `domain`.
IntervalMap mobius(double a, double b, double c, double d, IntervalDomain domain);
/// (x + x^2) / 2 on [0, 1]: increasing diffeomorphism fixing both ends.
IntervalMap smooth_diffeo();
/// (3 sqrt 3 / 2)(x - x^3) on [-1, 1]: [-1, 0] and [0, 1] are both invariant
/// and each carries a full unimodal branch pair.
IntervalMap two_well();

SkewProduct viana(const VianaParams& params = {});

}  // namespace families

}  // namespace skewlab
