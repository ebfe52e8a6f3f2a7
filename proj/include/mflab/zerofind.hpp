#pragma once

#include <optional>
#include <vector>

#include <boost/rational.hpp>

#include "mflab/evaluate.hpp"

namespace mflab::zeros {

using Rational = boost::rational<long>;

/// Rectangle [x0, x1] x [y0, y1] in the upper half-plane.
struct Box {
  double x0, x1, y0, y1;
  double diameter() const;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct ZeroRecord {
  eval::HPoint location;
  int multiplicity = 1;
  Rational elliptic_weight{1};
  double box_radius = 0;
  double residual = 0;  // |y^{k/2} f| at the located point
};

struct ZeroSet {
  int weight = 0;
  std::vector<ZeroRecord> zeros;  // sorted by (y, x)
  int cusp_order = 0;
  Rational weighted_total{0};  // sum multiplicity * weight, plus cusp_order
  Rational expected{0};        // k / 12
  bool valence_holds() const { return weighted_total == expected; }
};

struct Options {
  double tol = 1e-10;       // Newton / localization tolerance
  double leaf = 0.02;       // subdivision size where Newton takes over for simple zeros
  int max_perturb = 5;
};

/// Winding number of f around the positively oriented boundary of `box`.
/// Throws ContourThroughZero when the boundary meets the indeterminate zone
/// and SamplingError when the phase cannot be tracked.
int winding_number(const eval::FormSeries& f, const Box& box);
/// Continuous change of arg f along the segment a -> b (same errors).
double phase_change(const eval::FormSeries& f, const eval::HPoint& a, const eval::HPoint& b);

/// Zeros inside `box` (no reduction), each with an isolating box whose winding
/// equals its multiplicity. Points near i or rho get elliptic weights.
ZeroSet zeros_in_region(const eval::FormSeries& f, const Box& box, const Options& opt = {});

/// Smallest height above which the leading q-term dominates twice over.
double no_zero_height(const eval::FormSeries& f);

/// All zeros in F, reduced, canonicalized and deduplicated; weighted total
/// includes the cusp order read off the expansion.
ZeroSet zeros_in_F(const eval::FormSeries& f, const Options& opt = {});
/// Same as zeros_in_F; UnresolvedCluster if located multiplicities disagree.
ZeroSet valence_check(const eval::FormSeries& f, const Options& opt = {});

/// Euclidean description of the hyperbolic ball B(z0, r).
struct Disk {
  double cx, cy, radius;
};
Disk hyperbolic_disk(const eval::HPoint& z0, double r);
double hyperbolic_distance(const eval::HPoint& a, const eval::HPoint& b);
bool ball_in_F(const eval::HPoint& z0, double r);
double ball_area(double r);

struct BallStatistic {
  double count = 0;
  double expected = 0;
  double ratio_error = 0;
};
BallStatistic ball_zero_statistic(const ZeroSet& zeros, const eval::HPoint& z0, double r);
BallStatistic ball_zero_statistic(const eval::FormSeries& f, const eval::HPoint& z0, double r);

/// phi(x, y) = psi((x - cx)/wx) psi((y - cy)/wy) with psi(t) = exp(-1/(1 - t^2)).
struct Bump {
  eval::HPoint center;
  double wx = 0.1, wy = 0.1;
  double scale = 1;

  double value(double x, double y) const;
  /// phi_xx + phi_yy
  double laplacian(double x, double y) const;
  /// -y^2 (phi_xx + phi_yy)
  double hyperbolic_laplacian(double x, double y) const { return -y * y * laplacian(x, y); }
  bool inside_F() const;
  Box support() const;
};

double psi(double t);
double dpsi(double t);
double d2psi(double t);

struct RudnickResult {
  double lhs = 0, rhs = 0, defect = 0;
  double main_term = 0, log_term = 0;
  double quad_error = 0;
};
/// sum phi(zeros) against (k/4 pi) int phi dmu - (1/2 pi) int log|F| Delta phi dmu.
RudnickResult rudnick_check(const eval::FormSeries& f, const ZeroSet& zeros, const Bump& bump, double quad_tol);
RudnickResult rudnick_check(const eval::FormSeries& f, const Bump& bump, double quad_tol);

struct EisensteinZeros {
  int weight = 0;
  ZeroSet set;
  double max_arc_deviation = 0;
  std::vector<double> arguments;  // arg z, ascending
};
EisensteinZeros rsd_eisenstein_zeros(int k, const Options& opt = {});

}  // namespace mflab::zeros
