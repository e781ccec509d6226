#include "skewlab/map_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "skewlab/error.hpp"
#include "skewlab/numeric.hpp"

namespace skewlab {
namespace {

constexpr int kInvarianceGrid = 1 << 12;
constexpr double kInvarianceTol = 1e-9;
constexpr double kClosedFormTol = 1e-10;
constexpr double kCriticalDerivativeTol = 1e-9;

double grid_point(const IntervalDomain& d, int i, int count) {
  if (i == count - 1) return d.hi;
  return d.lo + d.length() * static_cast<double>(i) / static_cast<double>(count - 1);
}

}  // namespace

IntervalDomain IntervalDomain::make(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw Error(ErrorCode::kInvalidArgument, "interval needs finite lo < hi");
  return {lo, hi};
}

struct IntervalMap::Impl {
  IntervalDomain domain;
  RealFn f, df, d2f, d3f;
  std::vector<double> critical;
  std::string label;
};

std::vector<double> find_critical_points(const RealFn& df, const IntervalDomain& domain,
                                         int grid_log2, double tol) {
  const int count = (1 << grid_log2) + 1;
  std::vector<double> roots;
  double x_prev = domain.lo;
  double v_prev = df(x_prev);
  if (v_prev == 0.0) roots.push_back(x_prev);
  for (int i = 1; i < count; ++i) {
    const double x = grid_point(domain, i, count);
    const double v = df(x);
    if (v == 0.0) {
      roots.push_back(x);
    } else if (v_prev != 0.0 && (v > 0.0) != (v_prev > 0.0)) {
      double a = x_prev, b = x;
      // Shrink to `tol` first, then finish at machine resolution.
      double fa = v_prev;
      while (b - a > tol) {
        const double m = 0.5 * (a + b);
        const double fm = df(m);
        if (fm == 0.0) { a = b = m; break; }
        if ((fm > 0.0) == (fa > 0.0)) { a = m; fa = fm; } else { b = m; }
      }
      roots.push_back(a == b ? a : solve_monotone(df, a, b));
    }
    x_prev = x;
    v_prev = v;
  }
  return roots;
}

IntervalMap IntervalMap::create(IntervalMapSpec spec) {
  if (!spec.f || !spec.df) throw Error(ErrorCode::kInvalidArgument, "map needs f and f'");
  const IntervalDomain& d = spec.domain;
  IntervalDomain::make(d.lo, d.hi);
  for (int i = 0; i < kInvarianceGrid; ++i) {
    const double x = grid_point(d, i, kInvarianceGrid);
    const double y = spec.f(x);
    if (!std::isfinite(y) || !d.contains(y, kInvarianceTol))
      throw Error(ErrorCode::kDomainViolation,
                  spec.label + ": f(" + std::to_string(x) + ") = " + std::to_string(y) +
                      " leaves the domain");
  }
  std::vector<double> found = find_critical_points(spec.df, d);
  std::vector<double> crit;
  if (spec.critical_points) {
    crit = *spec.critical_points;
    std::sort(crit.begin(), crit.end());
    if (crit.size() != found.size())
      throw Error(ErrorCode::kInvalidArgument,
                  spec.label + ": closed-form critical set disagrees with bisection");
    for (std::size_t i = 0; i < crit.size(); ++i)
      if (std::fabs(crit[i] - found[i]) > kClosedFormTol)
        throw Error(ErrorCode::kInvalidArgument,
                    spec.label + ": closed-form critical point off by more than 1e-10");
  } else {
    crit = std::move(found);
  }
  for (std::size_t i = 0; i < crit.size(); ++i) {
    if (i > 0 && !(crit[i] > crit[i - 1]))
      throw Error(ErrorCode::kInvalidArgument, spec.label + ": critical points not increasing");
    if (std::fabs(spec.df(crit[i])) > kCriticalDerivativeTol)
      throw Error(ErrorCode::kInvalidArgument, spec.label + ": |f'(c)| > 1e-9");
  }
  // f' must keep a sign strictly between consecutive critical points.
  std::vector<double> cuts{d.lo};
  cuts.insert(cuts.end(), crit.begin(), crit.end());
  cuts.push_back(d.hi);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    for (int j = 1; j < 256; ++j) {
      const double x = cuts[i] + (cuts[i + 1] - cuts[i]) * j / 256.0;
      if (spec.df(x) == 0.0)
        throw Error(ErrorCode::kInvalidArgument, spec.label + ": f' vanishes off the critical set");
    }
  }
  spec.critical_points = std::move(crit);
  return unchecked(std::move(spec));
}

IntervalMap IntervalMap::unchecked(IntervalMapSpec spec) {
  auto impl = std::make_shared<Impl>();
  impl->domain = spec.domain;
  impl->critical = spec.critical_points ? std::move(*spec.critical_points)
                                        : find_critical_points(spec.df, spec.domain);
  impl->f = std::move(spec.f);
  impl->df = std::move(spec.df);
  impl->d2f = std::move(spec.d2f);
  impl->d3f = std::move(spec.d3f);
  impl->label = std::move(spec.label);
  return IntervalMap(std::move(impl));
}

const IntervalDomain& IntervalMap::domain() const { return impl_->domain; }
double IntervalMap::operator()(double x) const { return impl_->f(x); }
double IntervalMap::derivative(double x) const { return impl_->df(x); }

double IntervalMap::second_derivative(double x) const {
  if (!impl_->d2f) throw Error(ErrorCode::kMissingDerivative, impl_->label + ": no f''");
  return impl_->d2f(x);
}

double IntervalMap::third_derivative(double x) const {
  if (!impl_->d3f) throw Error(ErrorCode::kMissingDerivative, impl_->label + ": no f'''");
  return impl_->d3f(x);
}

bool IntervalMap::has_higher_derivatives() const { return impl_->d2f && impl_->d3f; }
const std::vector<double>& IntervalMap::critical_points() const { return impl_->critical; }
const std::string& IntervalMap::label() const { return impl_->label; }

double schwarzian(const IntervalMap& map, double x) {
  const double d1 = map.derivative(x);
  if (std::fabs(d1) <= kCriticalTolerance)
    throw Error(ErrorCode::kDerivativeVanishes, "f'(x) = 0 at x = " + std::to_string(x));
  const double d2 = map.second_derivative(x);
  const double d3 = map.third_derivative(x);
  const double q = d2 / d1;
  return d3 / d1 - 1.5 * q * q;
}

// ---------------------------------------------------------------- base map

double wrap_unit(double theta) {
  double t = theta - std::floor(theta);
  if (t >= 1.0) t = 0.0;
  return t;
}

BaseMap BaseMap::linear(int degree) {
  const double d = degree;
  return BaseMap{degree, [d](double t) { return d * t; }, [d](double) { return d; },
                 [](double) { return 0.0; }};
}

double BaseMap::operator()(double theta) const { return wrap_unit(lift(theta)); }

double BaseMap::inverse_lift(double y) const {
  return solve_monotone([&](double t) { return lift(t) - y; }, 0.0, 1.0);
}

// ------------------------------------------------------------ skew product

struct SkewProduct::Impl {
  BaseMap base;
  FiberFamily fiber;
  IntervalDomain domain;
  std::string label;
  std::optional<Domination> domination;
  DominationReport report;
  double gamma = 0.0;
  double slope_bound = 0.0;
  double distortion = 1.0;
};

SkewProduct SkewProduct::create(BaseMap base, FiberFamily fiber, IntervalDomain fiber_domain,
                                std::string label, DominationPolicy policy,
                                std::optional<Domination> supplied) {
  if (base.degree < 2 || !base.lift || !base.derivative)
    throw Error(ErrorCode::kInvalidArgument, label + ": base needs degree >= 2, lift and g'");
  if (!fiber.f || !fiber.dx || !fiber.dtheta)
    throw Error(ErrorCode::kInvalidArgument, label + ": fiber needs f, d_x f, d_theta f");
  IntervalDomain::make(fiber_domain.lo, fiber_domain.hi);
  if (std::fabs(base.lift(1.0) - base.lift(0.0) - base.degree) > 1e-9)
    throw Error(ErrorCode::kInvalidArgument, label + ": lift is not of the declared degree");

  auto impl = std::make_shared<Impl>();
  constexpr int kThetaGrid = 4096;
  double inf_dg = std::numeric_limits<double>::infinity();
  double sup_d2g = 0.0;
  for (int i = 0; i < kThetaGrid; ++i) {
    const double t = static_cast<double>(i) / kThetaGrid;
    inf_dg = std::min(inf_dg, std::fabs(base.derivative(t)));
    if (base.second_derivative) {
      sup_d2g = std::max(sup_d2g, std::fabs(base.second_derivative(t)));
    } else {
      const double h = 1e-6;
      sup_d2g = std::max(sup_d2g,
                         std::fabs(base.derivative(t + h) - base.derivative(t - h)) / (2 * h));
    }
  }
  if (!(inf_dg > 1.0))
    throw Error(ErrorCode::kDomainViolation, label + ": base is not uniformly expanding");
  impl->distortion = std::exp(sup_d2g / inf_dg / (1.0 - 1.0 / inf_dg));

  for (int i = 0; i < 64; ++i) {
    const double t = i / 64.0;
    const double dg = std::fabs(base.derivative(t));
    for (int j = 0; j < kInvarianceGrid; ++j) {
      const double x = grid_point(fiber_domain, j, kInvarianceGrid);
      const double y = fiber.f(t, x);
      if (!std::isfinite(y) || !fiber_domain.contains(y, kInvarianceTol))
        throw Error(ErrorCode::kDomainViolation,
                    label + ": fiber image leaves the domain at theta=" + std::to_string(t) +
                        ", x=" + std::to_string(x));
      if (j % 16 == 0) {
        impl->gamma = std::max({impl->gamma, std::fabs(y), std::fabs(fiber.dx(t, x))});
        impl->slope_bound = std::max(impl->slope_bound, std::fabs(fiber.dtheta(t, x)) / dg);
      }
    }
  }
  for (int i = 0; i < 8; ++i) {
    const double t = i / 8.0;
    const RealFn dx = [&fiber, t](double x) { return fiber.dx(t, x); };
    // A fiber with d_x f identically zero has no isolated critical points.
    bool flat = true;
    for (int j = 0; flat && j < 64; ++j) flat = dx(grid_point(fiber_domain, j, 64)) == 0.0;
    if (flat) continue;
    const auto found = find_critical_points(dx, fiber_domain);
    if (static_cast<int>(found.size()) > fiber.max_critical)
      throw Error(ErrorCode::kInvalidArgument, label + ": more critical points than declared");
    if (fiber.critical_points) {
      auto closed = fiber.critical_points(t);
      std::sort(closed.begin(), closed.end());
      bool ok = closed.size() == found.size();
      for (std::size_t k = 0; ok && k < closed.size(); ++k)
        ok = std::fabs(closed[k] - found[k]) <= kClosedFormTol;
      if (!ok)
        throw Error(ErrorCode::kInvalidArgument,
                    label + ": closed-form fiber critical set disagrees with bisection");
    }
  }

  impl->base = std::move(base);
  impl->fiber = std::move(fiber);
  impl->domain = fiber_domain;
  impl->label = std::move(label);
  SkewProduct skew(impl);
  impl->report = verify_partial_hyperbolicity(skew, 8, 64);
  const DominationReport& rep = impl->report;
  if (supplied) {
    if (!(supplied->sigma_hat > 0.0 && supplied->sigma_hat < 1.0 && supplied->C > 0.0))
      throw Error(ErrorCode::kInvalidArgument, impl->label + ": domination needs 0<sigma<1, C>0");
    for (std::size_t n = 1; n <= rep.max_ratio.size(); ++n)
      if (rep.max_ratio[n - 1] > supplied->C * std::pow(supplied->sigma_hat, n) * (1 + 1e-9))
        throw Error(ErrorCode::kDomainViolation,
                    impl->label + ": supplied domination constants fail at n=" + std::to_string(n));
    impl->domination = supplied;
  } else if (rep.geometric_decay) {
    impl->domination = Domination{rep.sigma_hat, rep.C};
  } else if (policy == DominationPolicy::kRequire) {
    throw Error(ErrorCode::kDomainViolation, impl->label + ": fiber is not dominated by the base");
  }
  return skew;
}

const BaseMap& SkewProduct::base() const { return impl_->base; }
const FiberFamily& SkewProduct::fiber() const { return impl_->fiber; }
const IntervalDomain& SkewProduct::fiber_domain() const { return impl_->domain; }
const std::string& SkewProduct::label() const { return impl_->label; }
const std::optional<Domination>& SkewProduct::domination() const { return impl_->domination; }
const DominationReport& SkewProduct::domination_report() const { return impl_->report; }
double SkewProduct::uniform_bound() const { return impl_->gamma; }
double SkewProduct::horizontal_slope_bound() const { return impl_->slope_bound; }
double SkewProduct::base_distortion() const { return impl_->distortion; }

SkewProduct::Point SkewProduct::step(Point z) const {
  return {impl_->base(z.theta), impl_->fiber.f(z.theta, z.x)};
}

double SkewProduct::fiber_value(double theta, double x) const {
  return impl_->fiber.f(theta, x);
}

std::vector<double> SkewProduct::fiber_critical_points(double theta) const {
  const FiberFamily& fb = impl_->fiber;
  if (fb.critical_points) {
    auto c = fb.critical_points(theta);
    std::sort(c.begin(), c.end());
    return c;
  }
  return find_critical_points([&fb, theta](double x) { return fb.dx(theta, x); }, impl_->domain);
}

IntervalMap SkewProduct::fiber_map(double theta) const {
  auto self = impl_;
  IntervalMapSpec spec;
  spec.domain = self->domain;
  spec.f = [self, theta](double x) { return self->fiber.f(theta, x); };
  spec.df = [self, theta](double x) { return self->fiber.dx(theta, x); };
  if (self->fiber.dxx) spec.d2f = [self, theta](double x) { return self->fiber.dxx(theta, x); };
  if (self->fiber.dxxx) spec.d3f = [self, theta](double x) { return self->fiber.dxxx(theta, x); };
  spec.critical_points = fiber_critical_points(theta);
  spec.label = self->label + "@" + std::to_string(theta);
  return IntervalMap::unchecked(std::move(spec));
}

DominationReport verify_partial_hyperbolicity(const SkewProduct& skew, int n_max, int grid) {
  if (n_max < 1 || grid < 2)
    throw Error(ErrorCode::kInvalidArgument, "domination check needs n_max >= 1, grid >= 2");
  DominationReport rep;
  rep.max_ratio.assign(n_max, 0.0);
  const auto& base = skew.base();
  const auto& fiber = skew.fiber();
  const auto& dom = skew.fiber_domain();
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      double t = static_cast<double>(i) / grid;
      double x = grid_point(dom, j, grid);
      double log_ratio = 0.0;
      for (int n = 1; n <= n_max; ++n) {
        log_ratio += std::log(std::fabs(fiber.dx(t, x))) - std::log(std::fabs(base.derivative(t)));
        const double x_next = fiber.f(t, x);
        t = base(t);
        x = x_next;
        rep.max_ratio[n - 1] = std::max(rep.max_ratio[n - 1], std::exp(log_ratio));
      }
    }
  }
  rep.theta_precision = n_max * base.degree * std::numeric_limits<double>::epsilon();

  std::vector<double> ns, ys;
  for (int n = 1; n <= n_max; ++n) {
    if (rep.max_ratio[n - 1] > 0.0) {
      ns.push_back(n);
      ys.push_back(std::log(rep.max_ratio[n - 1]));
    }
  }
  if (ns.empty()) {
    rep.sigma_hat = 0.0;
    rep.C = 0.0;
    rep.geometric_decay = true;
    return rep;
  }
  if (ns.size() == 1) {
    rep.sigma_hat = std::exp(ys[0] / ns[0]);
  } else {
    const double m = static_cast<double>(ns.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < ns.size(); ++k) {
      sx += ns[k];
      sy += ys[k];
      sxx += ns[k] * ns[k];
      sxy += ns[k] * ys[k];
    }
    rep.sigma_hat = std::exp((m * sxy - sx * sy) / (m * sxx - sx * sx));
  }
  rep.C = 0.0;
  for (int n = 1; n <= n_max; ++n)
    rep.C = std::max(rep.C, rep.max_ratio[n - 1] / std::pow(rep.sigma_hat, n));
  rep.geometric_decay = rep.sigma_hat < 1.0 - 1e-6;
  return rep;
}

// ------------------------------------------------------------ sequences

std::vector<IntervalMap> MapSequence::Source::prefix(std::size_t n) const {
  std::vector<IntervalMap> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(at(k));
  return out;
}

std::function<IntervalMap()> MapSequence::Source::stream() const {
  return [this, k = std::size_t{0}]() mutable { return at(k++); };
}

namespace {

class ConstantSource final : public MapSequence::Source {
 public:
  explicit ConstantSource(IntervalMap map) : map_(std::move(map)) {}
  IntervalMap at(std::size_t) const override { return map_; }

 private:
  IntervalMap map_;
};

class IndexedSource final : public MapSequence::Source {
 public:
  explicit IndexedSource(std::function<IntervalMap(std::size_t)> gen) : gen_(std::move(gen)) {}
  IntervalMap at(std::size_t k) const override { return gen_(k); }

 private:
  std::function<IntervalMap(std::size_t)> gen_;
};

class FiberSource final : public MapSequence::Source {
 public:
  FiberSource(SkewProduct skew, double theta) : skew_(std::move(skew)), theta_(theta) {}

  IntervalMap at(std::size_t k) const override {
    double t = theta_;
    for (std::size_t j = 0; j < k; ++j) t = skew_.base()(t);
    return skew_.fiber_map(t);
  }

  std::function<IntervalMap()> stream() const override {
    return [skew = skew_, t = theta_]() mutable {
      IntervalMap m = skew.fiber_map(t);
      t = skew.base()(t);
      return m;
    };
  }

  std::vector<IntervalMap> prefix(std::size_t n) const override {
    std::vector<IntervalMap> out;
    out.reserve(n);
    double t = theta_;
    for (std::size_t k = 0; k < n; ++k) {
      out.push_back(skew_.fiber_map(t));
      t = skew_.base()(t);
    }
    return out;
  }

 private:
  SkewProduct skew_;
  double theta_;
};

double sup_value_and_derivative(const IntervalMap& map) {
  double gamma = 0.0;
  for (int i = 0; i < kInvarianceGrid; ++i) {
    const double x = grid_point(map.domain(), i, kInvarianceGrid);
    gamma = std::max({gamma, std::fabs(map(x)), std::fabs(map.derivative(x))});
  }
  return gamma;
}

}  // namespace

MapSequence MapSequence::constant(IntervalMap map) {
  const double gamma = sup_value_and_derivative(map);
  const int p = static_cast<int>(map.critical_points().size());
  MapSequence seq(map.domain(), p, gamma, std::make_shared<ConstantSource>(map));
  seq.constant_ = map;
  return seq;
}

MapSequence MapSequence::indexed(IntervalDomain domain, int max_critical, double uniform_bound,
                                 std::function<IntervalMap(std::size_t)> generator) {
  return from_source(domain, max_critical, uniform_bound,
                     std::make_shared<IndexedSource>(std::move(generator)));
}

MapSequence MapSequence::from_source(IntervalDomain domain, int max_critical,
                                     double uniform_bound, std::shared_ptr<const Source> source) {
  if (!source || max_critical < 0)
    throw Error(ErrorCode::kInvalidArgument, "sequence needs a source and p >= 0");
  return MapSequence(domain, max_critical, uniform_bound, std::move(source));
}

void MapSequence::check(const IntervalMap& map) const {
  if (!(map.domain() == domain_))
    throw Error(ErrorCode::kDomainViolation, "sequence map has a different domain");
  if (static_cast<int>(map.critical_points().size()) > max_critical_)
    throw Error(ErrorCode::kDomainViolation, "sequence map has more than p critical points");
}

IntervalMap MapSequence::at(std::size_t k) const {
  if (constant_) return *constant_;
  IntervalMap m = source_->at(k);
  check(m);
  return m;
}

std::vector<IntervalMap> MapSequence::prefix(std::size_t n) const {
  if (constant_) return std::vector<IntervalMap>(n, *constant_);
  auto maps = source_->prefix(n);
  for (const auto& m : maps) check(m);
  return maps;
}

std::function<IntervalMap()> MapSequence::stream() const {
  if (constant_) return [m = *constant_] { return m; };
  return [self = *this, inner = source_->stream()]() mutable {
    IntervalMap m = inner();
    self.check(m);
    return m;
  };
}

MapSequence fiber_sequence(const SkewProduct& skew, double theta) {
  if (!(theta >= 0.0 && theta < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "theta must lie in [0, 1)");
  return MapSequence::from_source(skew.fiber_domain(), skew.fiber().max_critical,
                                  skew.uniform_bound(),
                                  std::make_shared<FiberSource>(skew, theta));
}

double estimate_modulus(const MapSequence& seq, double zeta, int k_probe, int grid) {
  if (!(zeta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "zeta must be positive");
  if (grid < 2 || k_probe < 0) throw Error(ErrorCode::kInvalidArgument, "bad modulus grid");
  const IntervalDomain& d = seq.domain();
  const double h = d.length() / (grid - 1);
  // worst[m]: largest displacement over pairs m grid steps apart.
  std::vector<double> worst(grid, 0.0);
  std::vector<double> fv(grid), dv(grid);
  for (int k = 0; k <= k_probe; ++k) {
    const IntervalMap f = seq.at(k);
    for (int i = 0; i < grid; ++i) {
      const double x = grid_point(d, i, grid);
      fv[i] = f(x);
      dv[i] = f.derivative(x);
    }
    for (int m = 1; m < grid; ++m)
      for (int i = 0; i + m < grid; ++i)
        worst[m] = std::max({worst[m], std::fabs(fv[i + m] - fv[i]), std::fabs(dv[i + m] - dv[i])});
  }
  for (int m = 1; m < grid; ++m) worst[m] = std::max(worst[m], worst[m - 1]);
  double best = 0.0;
  for (int j = 1; j <= 1024; ++j) {
    const double eps = d.length() * j / 1024.0;
    // Largest gap index m with m*h < eps.
    int m = static_cast<int>(std::ceil(eps / h)) - 1;
    m = std::clamp(m, 0, grid - 1);
    if (worst[m] < zeta) best = eps;
    else break;
  }
  return best;
}

// ------------------------------------------------------------ families

namespace families {

IntervalMap logistic() {
  IntervalMapSpec s;
  s.domain = {0.0, 1.0};
  s.f = [](double x) { return 4.0 * x * (1.0 - x); };
  s.df = [](double x) { return 4.0 - 8.0 * x; };
  s.d2f = [](double) { return -8.0; };
  s.d3f = [](double) { return 0.0; };
  s.critical_points = std::vector<double>{0.5};
  s.label = "logistic";
  return IntervalMap::create(std::move(s));
}

IntervalMap quadratic(double a) {
  if (!(a > 0.0)) throw Error(ErrorCode::kInvalidArgument, "quadratic needs a > 0");
  const double b = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * a));
  IntervalMapSpec s;
  s.domain = IntervalDomain::make(-b, b);
  s.f = [a](double x) { return a - x * x; };
  s.df = [](double x) { return -2.0 * x; };
  s.d2f = [](double) { return -2.0; };
  s.d3f = [](double) { return 0.0; };
  s.critical_points = std::vector<double>{0.0};
  s.label = "quadratic(" + std::to_string(a) + ")";
  return IntervalMap::create(std::move(s));
}

IntervalMap affine(double slope, double intercept, IntervalDomain domain) {
  if (slope == 0.0) throw Error(ErrorCode::kInvalidArgument, "affine slope must be nonzero");
  IntervalMapSpec s;
  s.domain = IntervalDomain::make(domain.lo, domain.hi);
  s.f = [slope, intercept](double x) { return slope * x + intercept; };
  s.df = [slope](double) { return slope; };
  s.d2f = [](double) { return 0.0; };
  s.d3f = [](double) { return 0.0; };
  s.critical_points = std::vector<double>{};
  s.label = "affine";
  return IntervalMap::create(std::move(s));
}

IntervalMap identity(IntervalDomain domain) {
  IntervalMapSpec s;
  s.domain = IntervalDomain::make(domain.lo, domain.hi);
  s.f = [](double x) { return x; };
  s.df = [](double) { return 1.0; };
  s.d2f = [](double) { return 0.0; };
  s.d3f = [](double) { return 0.0; };
  s.critical_points = std::vector<double>{};
  s.label = "identity";
  return IntervalMap::create(std::move(s));
}

IntervalMap doubling() {
  IntervalMapSpec s;
  s.domain = {0.0, 1.0};
  s.f = [](double x) {
    const double y = 2.0 * x;
    return y >= 1.0 ? y - 1.0 : y;
  };
  s.df = [](double) { return 2.0; };
  s.d2f = [](double) { return 0.0; };
  s.d3f = [](double) { return 0.0; };
  s.critical_points = std::vector<double>{};
  s.label = "doubling";
  return IntervalMap::create(std::move(s));
}

IntervalMap mobius(double a, double b, double c, double d, IntervalDomain domain) {
  const double det = a * d - b * c;
  if (det == 0.0) throw Error(ErrorCode::kInvalidArgument, "mobius map is degenerate");
  const double p0 = c * domain.lo + d;
  const double p1 = c * domain.hi + d;
  if (p0 == 0.0 || p1 == 0.0 || (p0 > 0.0) != (p1 > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "mobius pole inside the domain");
  IntervalMapSpec s;
  s.domain = IntervalDomain::make(domain.lo, domain.hi);
  s.f = [=](double x) { return (a * x + b) / (c * x + d); };
  s.df = [=](double x) {
    const double q = c * x + d;
    return det / (q * q);
  };
  s.d2f = [=](double x) {
    const double q = c * x + d;
    return -2.0 * c * det / (q * q * q);
  };
  s.d3f = [=](double x) {
    const double q = c * x + d;
    return 6.0 * c * c * det / (q * q * q * q);
  };
  s.critical_points = std::vector<double>{};
  s.label = "mobius";
  return IntervalMap::create(std::move(s));
}

IntervalMap smooth_diffeo() {
  IntervalMapSpec s;
  s.domain = {0.0, 1.0};
  s.f = [](double x) { return 0.5 * (x + x * x); };
  s.df = [](double x) { return 0.5 + x; };
  s.d2f = [](double) { return 1.0; };
  s.d3f = [](double) { return 0.0; };
  s.critical_points = std::vector<double>{};
  s.label = "smooth_diffeo";
  return IntervalMap::create(std::move(s));
}

IntervalMap two_well() {
  const double k = 1.5 * std::sqrt(3.0);
  const double c = 1.0 / std::sqrt(3.0);
  IntervalMapSpec s;
  s.domain = {-1.0, 1.0};
  s.f = [k](double x) { return std::clamp(k * (x - x * x * x), -1.0, 1.0); };
  s.df = [k](double x) { return k * (1.0 - 3.0 * x * x); };
  s.d2f = [k](double x) { return -6.0 * k * x; };
  s.d3f = [k](double) { return -6.0 * k; };
  s.critical_points = std::vector<double>{-c, c};
  s.label = "two_well";
  return IntervalMap::create(std::move(s));
}

SkewProduct viana(const VianaParams& p) {
  const double a0 = p.a0, alpha = p.alpha;
  const double two_pi = 2.0 * std::numbers::pi;
  FiberFamily fb;
  fb.f = [=](double t, double x) { return a0 + alpha * std::sin(two_pi * t) - x * x; };
  fb.dx = [](double, double x) { return -2.0 * x; };
  fb.dtheta = [=](double t, double) { return two_pi * alpha * std::cos(two_pi * t); };
  fb.dxx = [](double, double) { return -2.0; };
  fb.dxxx = [](double, double) { return 0.0; };
  fb.critical_points = [](double) { return std::vector<double>{0.0}; };
  fb.max_critical = 1;
  return SkewProduct::create(BaseMap::linear(p.d), std::move(fb),
                             IntervalDomain::make(p.lo, p.hi), "viana");
}

}  // namespace families

}  // namespace skewlab
