#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "skewlab/branch.hpp"
#include "skewlab/map_core.hpp"

namespace skewlab {

struct PlissQuery {
  std::vector<double> values;
  double c1 = 0.0;
  double c2 = 0.0;
  double A = 0.0;  // upper bound of the values
};

struct PlissResult {
  /// 1-based n with sum_{j=k+1}^{n} v_j >= c1 (n - k) for every 0 <= k < n.
  std::vector<int> indices;
  double density = 0.0;
  /// (c2 - c1) / (A - c1), guaranteed when sum v_j >= c2 n.
  double zeta = 0.0;
  bool guaranteed = false;
};

/// Single scan: n qualifies iff S_n - c1 n is at least the running max of
/// S_k - c1 k over k < n. InvalidConstants unless c1 < c2 <= A and v_j <= A.
PlissResult pliss_times(const PlissQuery& q);

/// {i <= n : r_i >= delta_tilde}, 1-based.
std::vector<int> hyperbolic_like_times(const MonotoneBranch& branch, double delta_tilde);

/// Piecewise-linear graph over [lo, hi] in [0, 1].
struct CurveGraph {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<SkewProduct::Point> samples;
  double max_slope = 0.0;
  /// Piece of the previous iterate this one came from, and the theta range
  /// of that piece mapped onto [lo, hi] by theta -> lift(theta) - shift.
  /// parent is -1 for an initial curve.
  int parent = -1;
  double parent_lo = 0.0;
  double parent_hi = 0.0;
  double parent_shift = 0.0;

  /// Builds a graph and computes max_slope; NotAGraph unless theta is
  /// strictly increasing inside [0, 1].
  static CurveGraph from_samples(std::vector<SkewProduct::Point> samples);
  static CurveGraph sample(double lo, double hi, const std::function<double(double)>& X,
                           std::size_t count);

  /// Linear interpolation of x at theta in [lo, hi].
  double x_at(double theta) const;
  double arc_length() const;
  /// Arc length of the part over [a, b].
  double arc_length(double a, double b) const;
};

struct CurveOptions {
  /// Insert a midpoint where adjacent image samples separate by more than
  /// this in x or in theta.
  double max_x_gap = 1e-3;
  double max_theta_gap = 1.0 / 64.0;
  /// Pieces kept per iterate, the widest in theta first.
  std::size_t max_pieces = 16;
  std::size_t max_samples_per_piece = 1 << 16;
};

struct CurveIterate {
  int k = 0;
  std::vector<CurveGraph> pieces;
  double max_slope = 0.0;
};

/// The curve (k = 0) and its images under phi, ..., phi^n, split where the lift of g
/// crosses an integer. NotAGraph when a required midpoint falls below the
/// theta resolution.
std::vector<CurveIterate> propagate_curve(const SkewProduct& skew, const CurveGraph& curve, int n,
                                          const CurveOptions& options = {});

struct CurveConstants {
  double L = 0.0;
  double C = 0.0;  // max(C, 1)
  double sigma_hat = 0.0;
  double A = 0.0;  // 1 / (1 - sigma_hat)
  double C1 = 0.0;
  double C2 = 0.0;
};

/// C1 = L C A + C sigma_hat alpha bounds the slope of every iterate n >= 1
/// of an alpha-curve; C2 = (1 + C1^2)^(1/2). InvalidConstants for a map
/// without domination.
CurveConstants curve_constants(const SkewProduct& skew, double alpha);

struct ContractionReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// max of (preimage arc / image arc) / (C2 max |d_theta g^k|^-1).
  double worst_ratio = 0.0;
};

/// For every piece at iterate j and 1 <= k <= min(j, k_max), compares the arc
/// length of its k-th preimage (through the parent links) with the piece's.
ContractionReport check_contraction(const SkewProduct& skew,
                                    const std::vector<CurveIterate>& iterates, double C2,
                                    int k_max = 3);

struct ProbeReport {
  double theta = 0.0;
  double x = 0.0;
  int k = 0;
  double delta_tilde = 0.0;
  int grid = 0;
  double rho = 0.0;
  double rho_prime = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double ik_lo = 0.0;  // trimmed fiber interval I_k(z)
  double ik_hi = 0.0;
  bool injective = false;
  double det_min = 0.0;
  double det_max = 0.0;
  double K_hat = 0.0;  // det_max / det_min, infinite if a det vanishes
  double delta1_hat = 0.0;
};

/// Maps a grid x grid mesh of (theta - eta1, theta + eta2) x I_k(z) by phi^k
/// and reports injectivity, determinant spread and the radius of the largest
/// disk around phi^k(z) inside the image of the mesh boundary. Theta is
/// measured as an offset from the orbit of z. For k = 0, T_0 = I0 and
/// r_0 is the distance of x to the boundary. NotHyperbolicLike if
/// r_k(z) < delta_tilde.
ProbeReport probe_neighborhood(const SkewProduct& skew, SkewProduct::Point z, int k,
                               double delta_tilde, int grid);

}  // namespace skewlab
