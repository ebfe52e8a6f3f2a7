#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mflab/eigenforms.hpp"
#include "mflab/evaluate.hpp"

namespace mflab::cusp {

using eval::FormSeries;

/// Window constants (c2, c3): c2 < l <= c3 sqrt(k / log k).
struct WindowConstants {
  double c2 = 1, c3 = 1;
};
/// Integer window [lo, hi] (empty when lo > hi).
std::pair<int, int> lemma_window(int k, const WindowConstants& w = {});

/// y_l = (k - 1) / (4 pi l).
double y_ell(int k, int l);

struct CuspApprox {
  int l = 0;
  double x = 0, y = 0;
  std::complex<double> exact, approx;
  double error = 0;
  std::optional<std::string> warning;  // set when l lies outside the window
};

/// (e/l)^{(k-1)/2} f(x + i y_l) against lambda(l) e(x l), a_f(1) = 1.
CuspApprox cusp_approx_error(const eigen::HeckeEigenform& f, int l, double x, const WindowConstants& w = {});

enum class Parity { All, Odd };
const char* to_string(Parity p);

struct SignChangePair {
  int l1 = 0, l2 = 0;
  double lambda1 = 0, lambda2 = 0;
};

/// Greedy left-to-right scan of lambda on [lmin, lmax] (inclusive) for disjoint
/// pairs of consecutive threshold crossings of opposite sign.
std::vector<SignChangePair> sign_changes(const eigen::HeckeEigenform& f, int lmin, int lmax, Parity parity, double thr);
std::vector<SignChangePair> sign_changes(const std::vector<double>& lambda, int lmin, int lmax, Parity parity,
                                         double thr);

enum class Line { Re0, ReHalf };
const char* to_string(Line l);

/// f(x + iy) on the line x = 0 or x = -1/2, real there; value * e^{log_scale}.
struct GeodesicSample {
  double y = 0;
  double value = 0;
  double log_scale = 0;
  double tail = 0;  // absolute error bound, same scale as value
  bool verified() const { return std::abs(value) > tail; }
  int sign() const { return value > 0 ? 1 : (value < 0 ? -1 : 0); }
};
GeodesicSample geodesic_value(const FormSeries& f, Line line, double y);

struct GeodesicZero {
  double y = 0;         // bracket midpoint
  double lo = 0, hi = 0;  // verified bracket
};

struct GeodesicCount {
  Line line = Line::Re0;
  double Y = 0, y_top = 0;
  bool asymptotic_regime = false;  // sqrt(k log k) < Y < (k - 1)/(4 pi c2)
  std::vector<GeodesicZero> zeros;
  std::vector<double> skipped;  // grid ordinates with indeterminate sign
  long count() const { return static_cast<long>(zeros.size()); }
};

/// Sign changes of f on the line above Y, scanned on the y_l ordinates with 4x
/// oversampling and bisected to verified brackets. RangeError unless Y > 1.
GeodesicCount geodesic_zero_count(const FormSeries& f, double Y, Line line, const WindowConstants& w = {});

struct RegionCount {
  double Y = 0, y_top = 0;
  long count = 0;
};

/// Zeros of f in F_Y by the argument principle on the periodic strip; RangeError unless Y > 1.
RegionCount cusp_region_count(const FormSeries& f, double Y, double tol = 1e-10);

struct IntervalStat {
  double X = 0, L = 0;
  long samples = 0;
  double mean = 0, mean_square = 0;
  double main_term = 0;  // average main term (zero for the plain lambda sums)
};

struct ShortIntervalStats {
  IntervalStat lambda;   // sum_{x < n <= x + x/L} lambda(n)
  IntervalStat square;   // same with lambda(n)^2, centred by (6/pi^2) L(1, sym^2 f) x / L
  double l1sym2 = 0;
};

ShortIntervalStats short_interval_stats(const eigen::HeckeEigenform& f, long X, double L, long samples = 1000,
                                        std::uint64_t seed = 1);

/// g(n) for 1 <= n <= n_max: multiplicative, g(p^v) = sgn lambda(p^v) when
/// |lambda(p^v)| >= p^{-delta v} and p > 2, else 0.
std::vector<int> g_values(const eigen::HeckeEigenform& f, double delta, long n_max);

struct GIntervalStats {
  long X = 0, h = 0;
  double delta = 0;
  long samples = 0;
  double long_g = 0, long_abs_g = 0;
  std::vector<double> short_g, short_abs_g;  // per sample
  double max_gap_g = 0, max_gap_abs_g = 0;
  double gap_threshold = 0;  // (log h)^{-1/200}
  double violation_fraction = 0;
};

GIntervalStats g_interval_stats(const eigen::HeckeEigenform& f, double delta, long X, long h, long samples = 1000,
                                std::uint64_t seed = 1);

}  // namespace mflab::cusp
