#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mflab/common.hpp"
#include "mflab/eigenforms.hpp"
#include "mflab/qseries.hpp"
#include "mflab/quadrature.hpp"

namespace mflab::eval {

struct HPoint {
  double x = 0, y = 1;
  HPoint() = default;
  HPoint(double x_, double y_);
};

/// Element of SL2(Z).
struct Mobius {
  long a = 1, b = 0, c = 0, d = 1;

  static Mobius translation(long n) { return {1, n, 0, 1}; }
  static Mobius inversion() { return {0, -1, 1, 0}; }
  long det() const { return a * d - b * c; }
  Mobius operator*(const Mobius& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  HPoint apply(const HPoint& z) const;
  /// (x', y') = gamma (x + iy) in any real type.
  template <class T>
  std::pair<T, T> apply(const T& x, const T& y) const {
    const T cx = T(c) * x + T(d);
    const T den = cx * cx + T(c) * T(c) * y * y;
    const T nx = (T(a) * x + T(b)) * cx + T(a) * T(c) * y * y;
    return {T(nx / den), T(y / den)};
  }
};

/// Reduces z into the closure of F with the half-open tie convention
/// (Re = 1/2 goes to -1/2, the right half of the arc goes to the left).
std::pair<HPoint, Mobius> reduce_to_F(const HPoint& z);
bool in_fundamental_domain(const HPoint& z, double tol = 0);

enum class Normalization { FirstCoefficient, Petersson };
const char* to_string(Normalization n);

/// Evaluation model of a real-coefficient form: log|a(n)| and signs for the
/// double path, optional MPFR coefficients, and a majorant
/// |a(n)| <= exp(log_c) n^e for the omitted tail.
class FormSeries {
 public:
  static FormSeries from_eigenform(const eigen::HeckeEigenform& f, Normalization norm = Normalization::FirstCoefficient);
  static FormSeries from_eisenstein(int k, int N, int bits = 128);
  static FormSeries from_qexp(const qseries::QExpansion& q, double log_c, double e, int bits = 128);

  int weight() const { return weight_; }
  int truncation() const { return static_cast<int>(log_abs_.size()) - 1; }
  int order() const { return order_; }
  double log_abs(int n) const { return log_abs_[n]; }
  int sign(int n) const { return sign_[n]; }
  double log_scale() const { return log_scale_; }
  double majorant_log_c() const { return log_c_; }
  double majorant_exponent() const { return e_; }
  Normalization normalization() const { return norm_; }
  bool has_mp() const { return mp_ && !mp_->empty(); }
  const Real& mp(int n) const { return mp_->at(n); }
  int mp_bits() const { return mp_bits_; }

  /// log of the tail bound sum_{n>M} |a(n)| e^{-2 pi n y}, unscaled; +inf if the
  /// majorant does not decay.
  double log_tail(int M, double y) const;
  /// log max_n |a(n)| e^{-2 pi n y}, unscaled.
  double log_dominant(double y) const;
  /// Smallest M with tail < 2^-bits times the dominant term; InsufficientTruncation beyond N.
  int required_terms(double y, int bits) const;

 private:
  int weight_ = 0;
  int order_ = 0;
  std::vector<double> log_abs_;
  std::vector<signed char> sign_;
  std::shared_ptr<const std::vector<Real>> mp_;
  int mp_bits_ = 0;
  double log_scale_ = 0;
  double log_c_ = 0, e_ = 0;
  Normalization norm_ = Normalization::FirstCoefficient;
};

/// log(y^{k/2} |f(z)|), arg f(z) in [0, 2 pi), and a bound on the absolute
/// error of y^{k/2} f from truncation and rounding, as a log.
struct LogValue {
  double log_mag = 0;
  double phase = 0;
  double log_tail = -INFINITY;
  int terms = 0;
  double tail_bound() const;
  bool indeterminate() const { return log_tail >= log_mag; }
};

LogValue eval_logF(const FormSeries& f, const HPoint& z);
LogValue eval_logF(const eigen::HeckeEigenform& f, const HPoint& z);

struct LogValueMP {
  Real log_mag;
  Real phase;
  double log_tail = -INFINITY;
  int terms = 0;
};
/// Extended-precision evaluation without reduction; needs MPFR coefficients.
LogValueMP eval_logF_mp(const FormSeries& f, const Real& x, const Real& y, int bits);

/// f(z) and f'(z) = df/dz divided by exp(log_scale); the factor y^{k/2} is not applied.
struct Scaled {
  std::complex<double> f, df;
  double log_scale = 0;
  double log_tail = -INFINITY;  // absolute error bound of f, same scale
};
Scaled evaluate_scaled(const FormSeries& f, const HPoint& z);

/// Upper bound for y^{k/2} sum_{n>N} d(n) n^{(k-1)/2} e^{-2 pi n y}.
double truncation_bound(int k, int N, double y);
double log_truncation_bound(int k, int N, double y);

struct PeterssonNorm {
  double log_quadrature = 0;  // log <f, f>, a_f(1) = 1
  double rel_error_quadrature = 0;
  double strip = 0, bulk = 0;  // parts relative to exp(log_quadrature)
  long cells = 0;
  double log_l1sym2 = 0;
  double rel_error_l1sym2 = 0;
  eigen::L1Sym2 l1;
  double relative_difference() const;
};

/// <f, f> over F, once by strip closed form plus quadrature, once from L(1, sym^2 f).
PeterssonNorm petersson_norm(const eigen::HeckeEigenform& f, double quad_tol = 1e-10);
/// Copy of f carrying log_norm_const = -log<f,f>/2 and the L(1, sym^2 f) estimate.
eigen::HeckeEigenform normalized(const eigen::HeckeEigenform& f, const PeterssonNorm& n);
eigen::HeckeEigenform normalized(const eigen::HeckeEigenform& f);

/// Mass of {|x| <= 1/2, y >= Y} for Y >= 1 from the termwise closed form
/// sum |a(n)|^2 int_Y^inf y^{k-2} e^{-4 pi n y} dy, divided by exp(shift).
double strip_mass(const FormSeries& f, double Y, double shift);

/// Integral of y^k |f|^2 dx dy / y^2, divided by exp(shift), over
/// {x0 < x < x1, lo(x) < y < hi(x)}, mapped to the unit square via
/// y = lo + t (hi - lo). The x-range starts as `pieces` cells.
quad::Result mass_between(const FormSeries& f, double x0, double x1, const std::function<double(double)>& lo,
                          const std::function<double(double)>& hi, double shift, const quad::Options& opt,
                          int pieces = 4, bool parallel = true);

/// Arc height sqrt(1 - x^2).
inline double arc(double x) { return std::sqrt(std::max(0.0, 1 - x * x)); }

}  // namespace mflab::eval
