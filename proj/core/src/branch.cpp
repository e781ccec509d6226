#include "skewlab/branch.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "skewlab/error.hpp"
#include "skewlab/numeric.hpp"

namespace skewlab {
namespace {

constexpr double kInsideTol = 1e-14;
constexpr double kGuardBand = 1e-9;

double compose(const std::vector<IntervalMap>& maps, int j, double t) {
  for (int k = 0; k < j; ++k) t = maps[k](t);
  return t;
}

}  // namespace

BranchWalker::BranchWalker(const MapSequence& seq, double x, bool resolve_domain)
    : next_(seq.stream()), resolve_(resolve_domain) {
  const IntervalDomain& d = seq.domain();
  if (!d.interior(x))
    throw Error(ErrorCode::kInvalidArgument, "anchor must be interior to the domain");
  branch_.x = x;
  branch_.img_lo = d.lo;
  branch_.img_hi = d.hi;
  branch_.image_point = x;
  if (resolve_) {
    branch_.t_lo = d.lo;
    branch_.t_hi = d.hi;
  }
}

double BranchWalker::iterate(int j, double t) const {
  if (j > static_cast<int>(applied_.size()))
    throw Error(ErrorCode::kInvalidArgument, "iterate beyond the tracked depth");
  return compose(applied_, j, t);
}

void BranchWalker::step() {
  MonotoneBranch& b = branch_;
  const int j = b.n;
  if (b.terminated) throw Error(ErrorCode::kTerminated, "branch already terminated", b.terminated_at);
  const IntervalMap f = next_();
  const double y = b.image_point;
  const auto& crit = f.critical_points();
  for (double c : crit) {
    if (std::fabs(y - c) <= kCriticalTolerance) {
      b.terminated = true;
      b.terminated_at = j;
      throw Error(ErrorCode::kHitCritical, "orbit hits a critical point at step " + std::to_string(j), j);
    }
  }

  double cut_lo = b.img_lo;
  double cut_hi = b.img_hi;
  bool left_cut = false, right_cut = false;
  for (double c : crit) {
    if (!(c > b.img_lo + kInsideTol && c < b.img_hi - kInsideTol)) continue;
    if (c < y && c > cut_lo) {
      cut_lo = c;
      left_cut = true;
    } else if (c > y && c < cut_hi) {
      cut_hi = c;
      right_cut = true;
    }
  }

  if (resolve_) {
    auto solve = [&](double target, double a, double bnd) {
      if (j == 0) return target;
      return solve_monotone([&](double t) { return compose(applied_, j, t) - target; }, a, bnd);
    };
    // Image side -> domain side depends on the orientation of f^j.
    if (left_cut) {
      if (b.orientation > 0) {
        b.t_lo = solve(cut_lo, b.t_lo, b.x);
        b.lo_step = j;
      } else {
        b.t_hi = solve(cut_lo, b.x, b.t_hi);
        b.hi_step = j;
      }
    }
    if (right_cut) {
      if (b.orientation > 0) {
        b.t_hi = solve(cut_hi, b.x, b.t_hi);
        b.hi_step = j;
      } else {
        b.t_lo = solve(cut_hi, b.t_lo, b.x);
        b.lo_step = j;
      }
    }
    applied_.push_back(f);
  }

  const double fa = f(cut_lo);
  const double fb = f(cut_hi);
  const double fy = f(y);
  const double dy = f.derivative(y);
  b.img_lo = std::min(fa, fb);
  b.img_hi = std::max(fa, fb);
  b.image_point = std::clamp(fy, b.img_lo, b.img_hi);
  if (dy < 0.0) b.orientation = -b.orientation;
  b.log_derivative += std::log(std::fabs(dy));
  b.r_history.push_back(std::min(b.image_point - b.img_lo, b.img_hi - b.image_point));
  b.n = j + 1;
}

MonotoneBranch track_branch(const MapSequence& seq, double x, int n, BranchOptions options) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "depth must be non-negative");
  BranchWalker walker(seq, x, options.resolve_domain);
  for (int j = 0; j < n; ++j) {
    try {
      walker.step();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kHitCritical || options.throw_on_critical) throw;
      return walker.branch();
    }
  }
  return walker.branch();
}

EndpointCertificate certify_endpoint(const MapSequence& seq, double e, int step, double tol) {
  if (step < 0) throw Error(ErrorCode::kInvalidArgument, "step must be non-negative");
  const auto maps = seq.prefix(static_cast<std::size_t>(step) + 1);
  EndpointCertificate cert;
  const double ye = compose(maps, step, e);
  const double ya = compose(maps, step, e - tol);
  const double yb = compose(maps, step, e + tol);
  for (double c : maps[step].critical_points()) {
    cert.image_residual = std::min(cert.image_residual, std::fabs(ye - c));
    if ((ya - c) * (yb - c) <= 0.0) cert.bracketed = true;
  }
  cert.certified = cert.image_residual <= tol || cert.bracketed;
  return cert;
}

// ------------------------------------------------------------ partition

std::size_t BranchPartition::locate(double x) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), x,
                             [](const BranchCell& c, double v) { return c.hi < v; });
  if (it == cells.end()) return cells.size() - 1;
  return static_cast<std::size_t>(it - cells.begin());
}

BranchPartition monotonicity_partition(const MapSequence& seq, int n, std::size_t cap) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "partition depth must be >= 1");
  const IntervalDomain& d = seq.domain();
  const auto maps = seq.prefix(n);

  struct Work {
    BranchCell cell;
    double a, b;  // image under f^j
  };
  std::vector<Work> cur{{BranchCell{d.lo, d.hi, 0, 0, 1, {}}, d.lo, d.hi}};
  for (int j = 0; j < n; ++j) {
    const IntervalMap& f = maps[j];
    const auto& crit = f.critical_points();
    std::size_t total = 0;
    for (const Work& w : cur) {
      std::size_t inside = 0;
      for (double c : crit) inside += (c > w.a + kInsideTol && c < w.b - kInsideTol);
      total += inside + 1;
    }
    if (total > cap)
      throw Error(ErrorCode::kCapExceeded,
                  "partition needs " + std::to_string(total) + " cells at level " +
                      std::to_string(j + 1) + " (cap " + std::to_string(cap) + ")");
    std::vector<Work> next;
    next.reserve(total);
    for (const Work& w : cur) {
      std::vector<double> cuts{w.a};
      for (double c : crit)
        if (c > w.a + kInsideTol && c < w.b - kInsideTol) cuts.push_back(c);
      cuts.push_back(w.b);
      const std::size_t m = cuts.size() - 1;
      // Domain preimages of the interior cuts, in increasing image order.
      std::vector<double> pre(cuts.size());
      std::vector<int> level(cuts.size(), j + 1);
      const bool up = w.cell.orientation > 0;
      pre.front() = up ? w.cell.lo : w.cell.hi;
      pre.back() = up ? w.cell.hi : w.cell.lo;
      level.front() = up ? w.cell.lo_level : w.cell.hi_level;
      level.back() = up ? w.cell.hi_level : w.cell.lo_level;
      for (std::size_t k = 1; k < m; ++k) {
        const double c = cuts[k];
        pre[k] = j == 0 ? c
                        : solve_monotone([&](double t) { return compose(maps, j, t) - c; },
                                         w.cell.lo, w.cell.hi);
      }
      std::vector<Work> children;
      for (std::size_t k = 0; k < m; ++k) {
        const double ia = cuts[k], ib = cuts[k + 1];
        const double fa = f(ia), fb = f(ib);
        Work child;
        child.cell.level_images = w.cell.level_images;
        child.cell.level_images.emplace_back(std::min(fa, fb), std::max(fa, fb));
        child.a = std::min(fa, fb);
        child.b = std::max(fa, fb);
        child.cell.orientation = w.cell.orientation * (f.derivative(0.5 * (ia + ib)) < 0 ? -1 : 1);
        double lo = pre[k], hi = pre[k + 1];
        int lo_level = level[k], hi_level = level[k + 1];
        if (!up) {
          std::swap(lo, hi);
          std::swap(lo_level, hi_level);
        }
        child.cell.lo = lo;
        child.cell.hi = hi;
        child.cell.lo_level = lo_level;
        child.cell.hi_level = hi_level;
        children.push_back(std::move(child));
      }
      if (!up) std::reverse(children.begin(), children.end());
      for (auto& c : children) next.push_back(std::move(c));
    }
    cur = std::move(next);
  }
  BranchPartition part;
  part.depth = n;
  part.domain = d;
  part.cells.reserve(cur.size());
  for (auto& w : cur) part.cells.push_back(std::move(w.cell));
  return part;
}

std::vector<std::uint8_t> symbol_sequence(const MonotoneBranch& branch, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be positive");
  if (branch.terminated)
    throw Error(ErrorCode::kTerminated, "branch terminated before its depth", branch.terminated_at);
  std::vector<std::uint8_t> out;
  out.reserve(branch.r_history.size());
  for (double r : branch.r_history) out.push_back(r >= delta ? 1 : 0);
  return out;
}

// ------------------------------------------------------------ census

CensusEntry Census::find(const Word& word) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), word,
                             [](const CensusEntry& e, const Word& w) {
                               return e.word.size() != w.size() ? e.word.size() < w.size()
                                                                : e.word < w;
                             });
  if (it != entries.end() && it->word == word) return *it;
  return CensusEntry{word, 0, 0.0};
}

std::vector<std::pair<std::size_t, std::size_t>> census_components(const Census& census, int s) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto& pieces = census.pieces;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const bool join = k > 0 && pieces[k].left_level > s &&
                      pieces[k].word.compare(0, s, pieces[k - 1].word, 0, s) == 0;
    if (join) out.back().second = k;
    else out.emplace_back(k, k);
  }
  return out;
}

Census component_census(const MapSequence& seq, int n, double delta, std::size_t cap) {
  if (!(delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be positive");
  const BranchPartition part = monotonicity_partition(seq, n, cap);
  const auto maps = seq.prefix(n);
  Census census;
  census.depth = n;
  census.delta = delta;
  census.domain = seq.domain();

  for (const BranchCell& cell : part.cells) {
    std::vector<double> points{cell.lo, cell.hi};
    for (int i = 1; i <= n; ++i) {
      const auto [A, B] = cell.level_images[i - 1];
      for (double target : {A + delta, B - delta}) {
        const double t = solve_monotone([&](double u) { return compose(maps, i, u) - target; },
                                        cell.lo, cell.hi);
        if (t > cell.lo && t < cell.hi) points.push_back(t);
      }
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
      CensusPiece piece;
      piece.lo = points[k];
      piece.hi = points[k + 1];
      if (k == 0) piece.left_level = cell.lo_level;
      double y = 0.5 * (piece.lo + piece.hi);
      piece.word.resize(n);
      for (int i = 1; i <= n; ++i) {
        y = maps[i - 1](y);
        const auto [A, B] = cell.level_images[i - 1];
        const double r = std::min(y - A, B - y);
        piece.word[i - 1] = r >= delta - kGuardBand ? '1' : '0';
      }
      census.pieces.push_back(std::move(piece));
    }
  }

  std::map<std::pair<std::size_t, Word>, CensusEntry> acc;
  for (int s = 1; s <= n; ++s) {
    for (const auto& [a, b] : census_components(census, s)) {
      Word w = census.pieces[a].word.substr(0, s);
      auto& e = acc[{static_cast<std::size_t>(s), w}];
      e.word = w;
      e.components += 1;
      for (std::size_t k = a; k <= b; ++k) e.measure += census.pieces[k].hi - census.pieces[k].lo;
    }
  }
  census.entries.reserve(acc.size());
  for (auto& [key, e] : acc) census.entries.push_back(std::move(e));
  return census;
}

CensusEntry component_census(const MapSequence& seq, int n, double delta, const Word& word,
                             std::size_t cap) {
  if (word.empty() || static_cast<int>(word.size()) > n ||
      word.find_first_not_of("01") != Word::npos)
    throw Error(ErrorCode::kInvalidWord, "word must be 1.." + std::to_string(n) + " bits");
  return component_census(seq, n, delta, cap).find(word);
}

ClaimReport check_component_claims(const Census& census, int p) {
  ClaimReport rep;
  const int n = census.depth;
  const auto& pieces = census.pieces;
  auto count = [&](const Word& w) -> std::size_t {
    return w.empty() ? census_components(census, 0).size() : census.find(w).components;
  };

  std::vector<Word> prefixes{Word{}};
  for (const auto& e : census.entries)
    if (static_cast<int>(e.word.size()) < n) prefixes.push_back(e.word);
  for (const Word& w : prefixes) {
    const std::size_t base = count(w);
    if (base == 0) continue;
    const std::size_t children = count(w + "0") + count(w + "1");
    ++rep.claim1_instances;
    const double ratio = static_cast<double>(children) / static_cast<double>(base);
    rep.claim1_worst_ratio = std::max(rep.claim1_worst_ratio, ratio);
    if (children > static_cast<std::size_t>(3 * (p + 1)) * base) ++rep.claim1_violations;
  }

  for (int s = 1; s + 2 <= n; ++s) {
    for (const auto& [a, b] : census_components(census, s + 1)) {
      const Word& full = pieces[a].word;
      if (full[s] != '0') continue;
      for (int i = 1; s + i + 1 <= n; ++i) {
        const int top = s + i + 1;
        bool cut_inside = false;
        for (std::size_t k = a + 1; k <= b && !cut_inside; ++k)
          cut_inside = pieces[k].left_level >= s + 2 && pieces[k].left_level <= top;
        if (cut_inside) break;
        const Word target = full.substr(0, s + 1) + Word(i, '0');
        std::size_t runs = 0;
        bool in_run = false;
        for (std::size_t k = a; k <= b; ++k) {
          const bool match = pieces[k].word.compare(0, top, target) == 0;
          if (match && (!in_run || pieces[k].left_level <= top)) ++runs;
          in_run = match;
        }
        ++rep.claim2_instances;
        if (runs > static_cast<std::size_t>(i + 1)) ++rep.claim2_violations;
      }
    }
  }
  return rep;
}

void write_census_csv(std::ostream& os, const Census& census) {
  os << "word,component_count,total_measure\n";
  const auto old = os.precision(17);
  for (const auto& e : census.entries) os << e.word << ',' << e.components << ',' << e.measure << '\n';
  os.precision(old);
}

}  // namespace skewlab
