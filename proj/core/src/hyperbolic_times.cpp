#include "skewlab/hyperbolic_times.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "skewlab/error.hpp"
#include "skewlab/numeric.hpp"

namespace skewlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lift of g extended to the real line by lift(t + 1) = lift(t) + d.
double lift_real(const BaseMap& g, double t) {
  const double m = std::floor(t);
  return g.lift(t - m) + g.degree * m;
}

double segment_slope(const SkewProduct::Point& a, const SkewProduct::Point& b) {
  return std::fabs((b.x - a.x) / (b.theta - a.theta));
}

}  // namespace

// ------------------------------------------------------------------- Pliss

PlissResult pliss_times(const PlissQuery& q) {
  if (!(q.c1 < q.c2) || !(q.c2 <= q.A))
    throw Error(ErrorCode::kInvalidConstants, "need c1 < c2 <= A");
  PlissResult res;
  res.zeta = (q.c2 - q.c1) / (q.A - q.c1);
  double s = 0.0;
  double best = 0.0;  // max over k < n of S_k - c1 k, starting with k = 0
  for (std::size_t i = 0; i < q.values.size(); ++i) {
    const double v = q.values[i];
    if (!(v <= q.A)) throw Error(ErrorCode::kInvalidConstants, "value exceeds the bound A");
    s += v - q.c1;
    if (s >= best) res.indices.push_back(static_cast<int>(i + 1));
    best = std::max(best, s);
  }
  const double n = static_cast<double>(q.values.size());
  if (!q.values.empty()) {
    res.density = static_cast<double>(res.indices.size()) / n;
    const double total = std::accumulate(q.values.begin(), q.values.end(), 0.0);
    res.guaranteed = total >= q.c2 * n;
  }
  return res;
}

std::vector<int> hyperbolic_like_times(const MonotoneBranch& branch, double delta_tilde) {
  std::vector<int> out;
  for (std::size_t i = 0; i < branch.r_history.size(); ++i)
    if (branch.r_history[i] >= delta_tilde) out.push_back(static_cast<int>(i + 1));
  return out;
}

// ------------------------------------------------------------------ curves

CurveGraph CurveGraph::from_samples(std::vector<SkewProduct::Point> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::kNotAGraph, "a curve needs two samples");
  CurveGraph c;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = samples[i].theta;
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::kNotAGraph, "theta outside [0, 1]");
    if (i > 0) {
      if (!(t > samples[i - 1].theta))
        throw Error(ErrorCode::kNotAGraph, "theta is not strictly increasing");
      c.max_slope = std::max(c.max_slope, segment_slope(samples[i - 1], samples[i]));
    }
  }
  c.lo = samples.front().theta;
  c.hi = samples.back().theta;
  c.samples = std::move(samples);
  return c;
}

CurveGraph CurveGraph::sample(double lo, double hi, const std::function<double(double)>& X,
                              std::size_t count) {
  if (count < 2 || !(lo < hi)) throw Error(ErrorCode::kInvalidArgument, "bad curve sampling");
  std::vector<SkewProduct::Point> pts;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = i + 1 == count ? hi : lo + (hi - lo) * i / (count - 1);
    pts.push_back({t, X(t)});
  }
  return from_samples(std::move(pts));
}

double CurveGraph::x_at(double theta) const {
  auto it = std::lower_bound(samples.begin(), samples.end(), theta,
                             [](const SkewProduct::Point& p, double t) { return p.theta < t; });
  if (it == samples.begin()) return samples.front().x;
  if (it == samples.end()) return samples.back().x;
  if (it->theta == theta) return it->x;
  const auto& a = *(it - 1);
  const auto& b = *it;
  return a.x + (b.x - a.x) * (theta - a.theta) / (b.theta - a.theta);
}

double CurveGraph::arc_length() const { return arc_length(lo, hi); }

double CurveGraph::arc_length(double a, double b) const {
  a = std::max(a, lo);
  b = std::min(b, hi);
  if (!(a < b)) return 0.0;
  SkewProduct::Point prev{a, x_at(a)};
  double len = 0.0;
  for (const auto& p : samples) {
    if (p.theta <= a) continue;
    if (p.theta >= b) break;
    len += std::hypot(p.theta - prev.theta, p.x - prev.x);
    prev = p;
  }
  len += std::hypot(b - prev.theta, x_at(b) - prev.x);
  return len;
}

namespace {

struct Image {
  double theta;  // source theta
  double x;      // source x
  double lifted; // lift of theta
  double fx;     // fiber image
  bool cut;      // lifted value is an integer crossing
};

Image map_point(const SkewProduct& skew, double t, double x, bool cut = false) {
  return {t, x, lift_real(skew.base(), t), skew.fiber_value(t, x), cut};
}

// Maps one piece, refining where image samples separate, and splits the
// image where the lift crosses an integer.
void map_piece(const SkewProduct& skew, const CurveGraph& piece, int index,
               const CurveOptions& opt, std::vector<CurveGraph>& out) {
  const BaseMap& g = skew.base();
  const double l_lo = lift_real(g, piece.lo);
  const double l_hi = lift_real(g, piece.hi);

  std::vector<double> cuts;
  for (double m = std::floor(l_lo) + 1.0; m < l_hi; m += 1.0)
    cuts.push_back(solve_monotone([&](double t) { return lift_real(g, t) - m; }, piece.lo,
                                  piece.hi));
  std::vector<Image> seeds;
  std::size_t ci = 0;
  for (const auto& p : piece.samples) {
    for (; ci < cuts.size() && cuts[ci] < p.theta; ++ci)
      if (seeds.empty() || cuts[ci] > seeds.back().theta)
        seeds.push_back(map_point(skew, cuts[ci], piece.x_at(cuts[ci]), true));
    const bool on_cut = ci < cuts.size() && cuts[ci] == p.theta;
    if (on_cut) ++ci;
    seeds.push_back(map_point(skew, p.theta, p.x, on_cut));
  }

  // Refinement between consecutive seeds.
  std::vector<Image> pts;
  pts.push_back(seeds.front());
  for (std::size_t i = 1; i < seeds.size(); ++i) {
    std::vector<Image> stack{seeds[i]};
    while (!stack.empty()) {
      const Image& a = pts.back();
      const Image b = stack.back();
      if (!(b.lifted > a.lifted))
        throw Error(ErrorCode::kNotAGraph, "image theta is not strictly increasing");
      if (std::fabs(b.fx - a.fx) > opt.max_x_gap || b.lifted - a.lifted > opt.max_theta_gap) {
        const double mid = 0.5 * (a.theta + b.theta);
        if (!(mid > a.theta && mid < b.theta))
          throw Error(ErrorCode::kNotAGraph, "theta projection below resolution");
        stack.push_back(map_point(skew, mid, piece.x_at(mid)));
        continue;
      }
      pts.push_back(b);
      stack.pop_back();
      if (pts.size() > opt.max_samples_per_piece)
        throw Error(ErrorCode::kCapExceeded, "curve piece needs too many samples");
    }
  }

  double shift = std::floor(l_lo);
  std::vector<SkewProduct::Point> cur;
  double src_lo = pts.front().theta;
  auto flush = [&](double src_hi) {
    if (cur.size() >= 2) {
      CurveGraph c = CurveGraph::from_samples(std::move(cur));
      c.parent = index;
      c.parent_lo = src_lo;
      c.parent_hi = src_hi;
      c.parent_shift = shift;
      out.push_back(std::move(c));
    }
    cur.clear();
  };
  auto push = [&](double t, double x) {
    t = std::clamp(t, 0.0, 1.0);
    if (!cur.empty() && !(t > cur.back().theta)) return;
    cur.push_back({t, x});
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Image& p = pts[i];
    if (p.cut && i > 0) {
      push(1.0, p.fx);
      flush(p.theta);
      shift += 1.0;
      src_lo = p.theta;
      push(0.0, p.fx);
      continue;
    }
    push(p.lifted - shift, p.fx);
  }
  flush(pts.back().theta);
}

}  // namespace

std::vector<CurveIterate> propagate_curve(const SkewProduct& skew, const CurveGraph& curve, int n,
                                          const CurveOptions& options) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "negative iterate count");
  if (options.max_pieces == 0) throw Error(ErrorCode::kInvalidArgument, "piece budget is zero");
  std::vector<CurveIterate> out;
  CurveIterate first;
  first.pieces.push_back(CurveGraph::from_samples(curve.samples));
  first.max_slope = first.pieces.front().max_slope;
  out.push_back(std::move(first));
  for (int k = 1; k <= n; ++k) {
    const auto& prev = out.back().pieces;
    std::vector<CurveGraph> next;
    for (std::size_t i = 0; i < prev.size(); ++i)
      map_piece(skew, prev[i], static_cast<int>(i), options, next);
    if (next.empty()) throw Error(ErrorCode::kNotAGraph, "curve degenerated");
    if (next.size() > options.max_pieces) {
      std::vector<std::size_t> order(next.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return next[a].hi - next[a].lo > next[b].hi - next[b].lo;
      });
      order.resize(options.max_pieces);
      std::sort(order.begin(), order.end());
      std::vector<CurveGraph> kept;
      for (std::size_t i : order) kept.push_back(std::move(next[i]));
      next = std::move(kept);
    }
    CurveIterate it;
    it.k = k;
    for (const auto& p : next) it.max_slope = std::max(it.max_slope, p.max_slope);
    it.pieces = std::move(next);
    out.push_back(std::move(it));
  }
  return out;
}

CurveConstants curve_constants(const SkewProduct& skew, double alpha) {
  const auto& dom = skew.domination();
  if (!dom) throw Error(ErrorCode::kInvalidConstants, "map has no domination constants");
  if (!(dom->sigma_hat < 1.0)) throw Error(ErrorCode::kInvalidConstants, "sigma_hat must be < 1");
  CurveConstants c;
  c.L = skew.horizontal_slope_bound();
  c.C = std::max(dom->C, 1.0);
  c.sigma_hat = dom->sigma_hat;
  c.A = 1.0 / (1.0 - c.sigma_hat);
  c.C1 = c.L * c.C * c.A + c.C * c.sigma_hat * alpha;
  c.C2 = std::sqrt(1.0 + c.C1 * c.C1);
  return c;
}

ContractionReport check_contraction(const SkewProduct& skew,
                                    const std::vector<CurveIterate>& iterates, double C2,
                                    int k_max) {
  const BaseMap& g = skew.base();
  ContractionReport rep;
  for (std::size_t j = 1; j < iterates.size(); ++j) {
    for (const auto& piece : iterates[j].pieces) {
      const double image_arc = piece.arc_length();
      if (!(image_arc > 0.0)) continue;
      // Walk up the parent links, carrying the theta range of the preimage.
      const CurveGraph* cur = &piece;
      double a = piece.parent_lo, b = piece.parent_hi;
      for (int k = 1; k <= k_max && static_cast<int>(j) - k >= 0; ++k) {
        const CurveGraph& anc = iterates[j - k].pieces.at(cur->parent);
        if (k > 1) {
          // Pull [a, b] (in cur's coordinates) back into anc.
          auto pull = [&](double t) {
            return solve_monotone(
                [&](double s) { return lift_real(g, s) - cur->parent_shift - t; },
                                  cur->parent_lo, cur->parent_hi);
          };
          a = pull(a);
          b = pull(b);
        }
        double min_deriv = kInf;
        for (int s = 0; s <= 16; ++s) {
          double t = a + (b - a) * s / 16.0;
          double dg = 1.0;
          for (int i = 0; i < k; ++i) {
            dg *= std::fabs(g.derivative(t));
            t = g(t);
          }
          min_deriv = std::min(min_deriv, dg);
        }
        const double ratio = anc.arc_length(a, b) / image_arc;
        const double bound = C2 / min_deriv;
        ++rep.checked;
        rep.worst_ratio = std::max(rep.worst_ratio, ratio / bound);
        if (ratio > bound * (1.0 + 1e-9)) ++rep.violations;
        cur = &anc;
        if (cur->parent < 0) break;
      }
    }
  }
  return rep;
}

// ------------------------------------------------------------------- probe

ProbeReport probe_neighborhood(const SkewProduct& skew, SkewProduct::Point z, int k,
                               double delta_tilde, int grid) {
  if (k < 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 0");
  if (!(delta_tilde > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta_tilde must be > 0");
  if (grid < 2) throw Error(ErrorCode::kInvalidArgument, "grid must be >= 2");
  const IntervalDomain& dom = skew.fiber_domain();
  const BaseMap& g = skew.base();

  ProbeReport rep;
  rep.theta = z.theta;
  rep.x = z.x;
  rep.k = k;
  rep.delta_tilde = delta_tilde;
  rep.grid = grid;

  // Branch T_k(z), its image and r_k.
  const MapSequence seq = fiber_sequence(skew, z.theta);
  BranchWalker walker(seq, z.x, true);
  try {
    for (int j = 0; j < k; ++j) walker.step();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kHitCritical) throw;
    throw Error(ErrorCode::kNotHyperbolicLike, "orbit hits a critical point", e.step());
  }
  const MonotoneBranch& br = walker.branch();
  const double r = k == 0 ? std::min(z.x - dom.lo, dom.hi - z.x) : br.r_last();
  if (!(r >= delta_tilde))
    throw Error(ErrorCode::kNotHyperbolicLike,
                "r_k = " + std::to_string(r) + " is below delta_tilde", k);
  const double y_lo = br.img_lo + delta_tilde / 2.0;
  const double y_hi = br.img_hi - delta_tilde / 2.0;
  if (k == 0) {
    rep.ik_lo = y_lo;
    rep.ik_hi = y_hi;
  } else {
    auto pre = [&](double y) {
      return solve_monotone([&](double t) { return walker.iterate(k, t) - y; }, br.t_lo, br.t_hi);
    };
    const double p = pre(y_lo), q = pre(y_hi);
    rep.ik_lo = std::min(p, q);
    rep.ik_hi = std::max(p, q);
  }

  // rho from C2 rho < (delta~/4)(D C)^-1 and rho C1 < delta~/4; rho' = rho / C2.
  const CurveConstants cc = curve_constants(skew, 0.0);
  const double D = skew.base_distortion();
  double rho = delta_tilde / (4.0 * D * cc.C * cc.C2);
  if (cc.C1 > 0.0) rho = std::min(rho, delta_tilde / (4.0 * cc.C1));
  rep.rho = 0.99 * rho;
  rep.rho_prime = std::min(rep.rho / cc.C2, 0.25);

  // g^k in offset coordinates along the base orbit of theta.
  std::vector<double> orbit(static_cast<std::size_t>(k));
  double t = z.theta;
  for (int j = 0; j < k; ++j) {
    orbit[j] = t;
    t = g(t);
  }
  // Offsets far below the spacing of doubles near theta would round away in
  // a difference of lifts, so small ones take a second-order Taylor step.
  auto offset_step = [&](int j, double u) {
    if (std::fabs(u) > 1e-6) return lift_real(g, orbit[j] + u) - lift_real(g, orbit[j]);
    const double g2 = g.second_derivative ? g.second_derivative(orbit[j]) : 0.0;
    return g.derivative(orbit[j]) * u + 0.5 * g2 * u * u;
  };
  auto offset_image = [&](double u) {
    for (int j = 0; j < k; ++j) u = offset_step(j, u);
    return u;
  };
  const double rp = rep.rho_prime;
  rep.eta2 = solve_monotone([&](double u) { return offset_image(u) - rp; }, 0.0, rp);
  rep.eta1 = -solve_monotone([&](double u) { return offset_image(u) + rp; }, -rp, 0.0);

  // Image of the mesh.
  const std::size_t G = static_cast<std::size_t>(grid);
  struct Node {
    double u, x, logdet;
    bool degenerate;
  };
  std::vector<Node> img(G * G);
  auto map_node = [&](double u, double x) {
    Node nd{u, x, 0.0, false};
    for (int j = 0; j < k; ++j) {
      const double th = wrap_unit(orbit[j] + nd.u);
      const double dx = std::fabs(skew.fiber().dx(th, nd.x));
      if (dx == 0.0) nd.degenerate = true;
      nd.logdet += std::log(std::fabs(g.derivative(th))) + std::log(dx);
      nd.x = skew.fiber_value(th, nd.x);
      nd.u = offset_step(j, nd.u);
    }
    return nd;
  };
  for (std::size_t i = 0; i < G; ++i) {
    const double u = i + 1 == G ? rep.eta2 : -rep.eta1 + (rep.eta1 + rep.eta2) * i / (G - 1);
    for (std::size_t j = 0; j < G; ++j) {
      const double x =
          j + 1 == G ? rep.ik_hi : rep.ik_lo + (rep.ik_hi - rep.ik_lo) * j / (G - 1);
      img[i * G + j] = map_node(u, x);
    }
  }

  // Injectivity: monotone columns and no two distant nodes within 1e-9.
  bool injective = true;
  for (std::size_t i = 0; i < G && injective; ++i) {
    int sign = 0;
    for (std::size_t j = 1; j < G; ++j) {
      const double d = img[i * G + j].x - img[i * G + j - 1].x;
      const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
      if (s == 0 || (sign != 0 && s != sign)) {
        injective = false;
        break;
      }
      sign = s;
    }
  }
  if (injective) {
    std::vector<std::size_t> order(img.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return img[a].u < img[b].u; });
    for (std::size_t a = 0; a < order.size() && injective; ++a) {
      for (std::size_t b = a + 1; b < order.size(); ++b) {
        const Node& p = img[order[a]];
        const Node& q = img[order[b]];
        if (q.u - p.u > 1e-9) break;
        if (std::fabs(q.x - p.x) > 1e-9) continue;
        const long ia = static_cast<long>(order[a] / G), ja = static_cast<long>(order[a] % G);
        const long ib = static_cast<long>(order[b] / G), jb = static_cast<long>(order[b] % G);
        if (std::labs(ia - ib) > 1 || std::labs(ja - jb) > 1) {
          injective = false;
          break;
        }
      }
    }
  }
  rep.injective = injective;

  double lo = kInf, hi = -kInf;
  bool degenerate = false;
  for (const auto& nd : img) {
    degenerate = degenerate || nd.degenerate;
    lo = std::min(lo, nd.logdet);
    hi = std::max(hi, nd.logdet);
  }
  rep.det_min = degenerate ? 0.0 : std::exp(lo);
  rep.det_max = std::exp(hi);
  rep.K_hat = degenerate ? kInf : std::exp(hi - lo);

  // Largest disk around phi^k(z) inside the boundary polygon.
  std::vector<std::pair<double, double>> poly;
  for (std::size_t i = 0; i < G; ++i) poly.emplace_back(img[i * G].u, img[i * G].x);
  for (std::size_t j = 1; j < G; ++j) poly.emplace_back(img[(G - 1) * G + j].u, img[(G - 1) * G + j].x);
  for (std::size_t i = G - 1; i-- > 0;) poly.emplace_back(img[i * G + G - 1].u, img[i * G + G - 1].x);
  for (std::size_t j = G - 1; j-- > 1;) poly.emplace_back(img[j].u, img[j].x);
  const double cx = 0.0;
  const double cy = k == 0 ? z.x : br.image_point;
  bool inside = false;
  double dist = kInf;
  for (std::size_t a = 0, b = poly.size() - 1; a < poly.size(); b = a++) {
    const auto [ax, ay] = poly[a];
    const auto [bx, by] = poly[b];
    if ((ay > cy) != (by > cy) && cx < (bx - ax) * (cy - ay) / (by - ay) + ax) inside = !inside;
    const double ex = bx - ax, ey = by - ay;
    const double len2 = ex * ex + ey * ey;
    double s = len2 > 0.0 ? ((cx - ax) * ex + (cy - ay) * ey) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    dist = std::min(dist, std::hypot(ax + s * ex - cx, ay + s * ey - cy));
  }
  rep.delta1_hat = inside ? dist : 0.0;
  return rep;
}

}  // namespace skewlab
