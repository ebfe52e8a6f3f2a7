#include "mflab/evaluate.hpp"

#include <cmath>
#include <limits>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <mpfr.h>

namespace mflab::eval {

namespace {

constexpr double kTwoPi = 2 * kPi;
constexpr double kLn2 = 0.69314718055994530942;

double log_abs_real(const Real& v, int* sign) {
  const mpfr_srcptr p = v.backend().data();
  if (mpfr_zero_p(p)) {
    *sign = 0;
    return -INFINITY;
  }
  *sign = mpfr_sgn(p) > 0 ? 1 : -1;
  long exp = 0;
  const double mant = mpfr_get_d_2exp(&exp, p, MPFR_RNDN);
  return std::log(std::abs(mant)) + static_cast<double>(exp) * kLn2;
}

// Fractional part of n x, kept small before multiplying by 2 pi.
double turn(long n, double x) {
  const double t = static_cast<double>(n) * x;
  return t - std::floor(t);
}

}  // namespace

HPoint::HPoint(double x_, double y_) : x(x_), y(y_) {
  if (!(y_ > 0) || !std::isfinite(x_) || !std::isfinite(y_))
    throw Error(ErrorKind::InvalidArgument, "point must lie in the upper half-plane");
}

HPoint Mobius::apply(const HPoint& z) const {
  auto [x, y] = apply<double>(z.x, z.y);
  return HPoint(x, y);
}

std::pair<HPoint, Mobius> reduce_to_F(const HPoint& z) {
  double x = z.x, y = z.y;
  Mobius g;
  for (int step = 0; step < 10000; ++step) {
    const double n = std::floor(x + 0.5);
    if (n != 0) {
      x -= n;
      g = Mobius::translation(-static_cast<long>(n)) * g;
    }
    const double r2 = x * x + y * y;
    if (r2 < 1) {
      x = -x / r2;
      y = y / r2;
      g = Mobius::inversion() * g;
      continue;
    }
    if (r2 == 1 && x > 0) {
      x = -x;
      g = Mobius::inversion() * g;
    }
    return {HPoint(x, y), g};
  }
  throw Error(ErrorKind::ReductionError, "reduction did not terminate in 10^4 steps");
}

bool in_fundamental_domain(const HPoint& z, double tol) {
  return z.x >= -0.5 - tol && z.x < 0.5 + tol && z.x * z.x + z.y * z.y >= 1 - tol;
}

const char* to_string(Normalization n) {
  return n == Normalization::Petersson ? "petersson" : "first_coefficient";
}

FormSeries FormSeries::from_eigenform(const eigen::HeckeEigenform& f, Normalization norm) {
  FormSeries s;
  s.weight_ = f.weight;
  s.order_ = 1;
  const int N = f.truncation();
  s.log_abs_.resize(N + 1);
  s.sign_.resize(N + 1);
  for (int n = 0; n <= N; ++n) {
    int sg = 0;
    s.log_abs_[n] = log_abs_real(f.a(n), &sg);
    s.sign_[n] = static_cast<signed char>(sg);
  }
  s.mp_ = f.a_coeffs;
  s.mp_bits_ = f.precision_bits;
  // d(n) <= 2 sqrt(n)
  s.log_c_ = std::log(2.0);
  s.e_ = f.weight / 2.0;
  s.norm_ = norm;
  if (norm == Normalization::Petersson) {
    if (!f.log_norm_const) throw Error(ErrorKind::InvalidArgument, "eigenform has no Petersson normalization yet");
    s.log_scale_ = *f.log_norm_const;
  }
  return s;
}

FormSeries FormSeries::from_qexp(const qseries::QExpansion& q, double log_c, double e, int bits) {
  FormSeries s;
  s.weight_ = q.weight();
  s.order_ = q.order();
  const int N = q.truncation();
  s.log_abs_.resize(N + 1);
  s.sign_.resize(N + 1);
  auto mp = std::make_shared<std::vector<Real>>();
  mp->reserve(N + 1);
  for (int n = 0; n <= N; ++n) {
    Real v(0, digits10_for_bits(bits));
    const mpq_class c = q.coefficient(n);
    mpfr_set_q(v.backend().data(), c.get_mpq_t(), MPFR_RNDN);
    int sg = 0;
    s.log_abs_[n] = log_abs_real(v, &sg);
    s.sign_[n] = static_cast<signed char>(sg);
    mp->push_back(std::move(v));
  }
  s.mp_ = std::move(mp);
  s.mp_bits_ = bits;
  s.log_c_ = log_c;
  s.e_ = e;
  return s;
}

FormSeries FormSeries::from_eisenstein(int k, int N, int bits) {
  const auto q = qseries::eisenstein_qexp(k, N);
  // |a(n)| = |2k / B_k| sigma_{k-1}(n) <= |2k / B_k| zeta(k-1) n^{k-1}
  const mpq_class b = qseries::bernoulli(k);
  const double log_b = std::log(std::abs(mpz_get_d(b.get_num_mpz_t()))) - std::log(mpz_get_d(b.get_den_mpz_t()));
  const double log_c = std::log(2.0 * k) - log_b + std::log(boost::math::zeta(static_cast<double>(k - 1)));
  return from_qexp(q, log_c, k - 1, bits);
}

double FormSeries::log_tail(int M, double y) const {
  const double ratio = e_ / (M + 1) - kTwoPi * y;
  if (ratio >= 0) return INFINITY;
  return log_c_ + e_ * std::log(M + 1.0) - kTwoPi * (M + 1) * y - std::log1p(-std::exp(ratio));
}

double FormSeries::log_dominant(double y) const {
  double best = -INFINITY;
  const int N = truncation();
  const double peak = e_ / (kTwoPi * y);
  for (int n = order_; n <= N; ++n) {
    best = std::max(best, log_abs_[n] - kTwoPi * n * y);
    if (n > peak && log_c_ + e_ * std::log(n) - kTwoPi * n * y < best - 60) break;
  }
  return best;
}

int FormSeries::required_terms(double y, int bits) const {
  const double target = log_dominant(y) - bits * kLn2;
  const int N = truncation();
  for (long M = order_; M < 100'000'000; ++M) {
    if (log_tail(static_cast<int>(M), y) < target) {
      if (M > N)
        throw Error(ErrorKind::InsufficientTruncation,
                    "evaluation at y = " + std::to_string(y) + " needs more coefficients", M);
      return static_cast<int>(M);
    }
  }
  throw Error(ErrorKind::InsufficientTruncation, "majorant does not decay at y = " + std::to_string(y));
}

double LogValue::tail_bound() const { return std::exp(log_tail); }

namespace {

struct RawSum {
  std::complex<double> f, df;
  double shift;      // terms are relative to exp(shift)
  double abs_sum;    // sum of |terms| relative to exp(shift)
  double max_t;
  int M;
};

RawSum raw_sum(const FormSeries& s, double x, double y, bool derivative) {
  RawSum r{};
  r.M = s.required_terms(y, 60);
  double shift = -INFINITY;
  for (int n = s.order(); n <= r.M; ++n) shift = std::max(shift, s.log_abs(n) - kTwoPi * n * y);
  r.shift = shift;
  for (int n = s.order(); n <= r.M; ++n) {
    if (s.sign(n) == 0) continue;
    const double t = s.log_abs(n) - kTwoPi * n * y;
    r.max_t = std::max(r.max_t, std::abs(t));
    const double m = std::exp(t - shift);
    const double ang = kTwoPi * turn(n, x);
    const std::complex<double> term = std::polar(s.sign(n) * m, ang);
    r.f += term;
    if (derivative) r.df += term * std::complex<double>(0, kTwoPi * n);
    r.abs_sum += m;
  }
  return r;
}

double wrap_phase(double p) {
  p = std::fmod(p, kTwoPi);
  if (p < 0) p += kTwoPi;
  return p;
}

// log(exp(a) + exp(b))
double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

LogValue eval_direct(const FormSeries& s, double x, double y) {
  const RawSum r = raw_sum(s, x, y, false);
  const double base = r.shift + s.weight() / 2.0 * std::log(y) + s.log_scale();
  LogValue v;
  v.terms = r.M;
  const double mag = std::abs(r.f);
  v.log_mag = mag > 0 ? base + std::log(mag) : -INFINITY;
  v.phase = wrap_phase(std::arg(r.f));
  const double rounding = 4e-16 * (r.M + r.max_t) * r.abs_sum;
  v.log_tail = log_add(s.log_tail(r.M, y) - r.shift, std::log(rounding)) + base;
  return v;
}

}  // namespace

LogValue eval_logF(const FormSeries& f, const HPoint& z) {
  if (z.y >= 0.5) return eval_direct(f, z.x, z.y);
  auto [w, g] = reduce_to_F(z);
  LogValue v = eval_direct(f, w.x, w.y);
  // F(z) = F(gz) exp(-i k arg(cz + d))
  const double arg = std::atan2(g.c * z.y, g.c * z.x + g.d);
  v.phase = wrap_phase(v.phase - f.weight() * arg);
  return v;
}

LogValue eval_logF(const eigen::HeckeEigenform& f, const HPoint& z) {
  return eval_logF(FormSeries::from_eigenform(f), z);
}

Scaled evaluate_scaled(const FormSeries& f, const HPoint& z) {
  const RawSum r = raw_sum(f, z.x, z.y, true);
  Scaled s;
  s.f = r.f;
  s.df = r.df;
  s.log_scale = r.shift + f.log_scale();
  const double rounding = 4e-16 * (r.M + r.max_t) * r.abs_sum;
  s.log_tail = log_add(f.log_tail(r.M, z.y) - r.shift, std::log(rounding));
  return s;
}

LogValueMP eval_logF_mp(const FormSeries& f, const Real& x, const Real& y, int bits) {
  if (!f.has_mp()) throw Error(ErrorKind::InvalidArgument, "form has no extended-precision coefficients");
  const double yd = y.convert_to<double>();
  const int M = f.required_terms(yd, bits + 8);
  PrecisionScope scope(bits + 32);
  const Real two_pi = 2 * boost::math::constants::pi<Real>();
  const Real r = exp(-two_pi * y);
  const Real qr = r * cos(two_pi * x), qi = r * sin(two_pi * x);
  Real pr = 1, pi = 0, sr = 0, si = 0;
  for (int n = 1; n <= M; ++n) {
    const Real t = pr * qr - pi * qi;
    pi = pr * qi + pi * qr;
    pr = t;
    if (n >= f.order()) {
      sr += f.mp(n) * pr;
      si += f.mp(n) * pi;
    }
  }
  if (f.order() == 0) sr += f.mp(0);
  LogValueMP v;
  v.terms = M;
  v.log_mag = log(sqrt(sr * sr + si * si)) + Real(f.weight()) / 2 * log(y) + Real(f.log_scale());
  Real ph = atan2(si, sr);
  if (ph < 0) ph += two_pi;
  v.phase = ph;
  v.log_tail = f.log_tail(M, yd) + f.weight() / 2.0 * std::log(yd) + f.log_scale();
  return v;
}

double log_truncation_bound(int k, int N, double y) {
  const double e = k / 2.0;
  const double ratio = e / (N + 1) - kTwoPi * y;
  if (ratio >= 0) return INFINITY;
  return std::log(2.0) + e * std::log(y) + e * std::log(N + 1.0) - kTwoPi * (N + 1) * y - std::log1p(-std::exp(ratio));
}

double truncation_bound(int k, int N, double y) { return std::exp(log_truncation_bound(k, N, y)); }

double strip_mass(const FormSeries& f, double Y, double shift) {
  if (Y < 1) throw Error(ErrorKind::RangeError, "strip closed form needs Y >= 1");
  const int k = f.weight();
  const double a = k - 1;
  double sum = 0;
  std::vector<double> terms;
  for (int n = std::max(1, f.order()); n <= f.truncation(); ++n) {
    if (f.sign(n) == 0) continue;
    const double x = 4 * kPi * n * Y;
    // log int_Y^inf y^{k-2} e^{-4 pi n y} dy
    double log_i;
    const double q = boost::math::gamma_q(a, x);
    if (q > 0) {
      log_i = boost::math::lgamma(a) - a * std::log(4 * kPi * n) + std::log(q);
    } else {
      log_i = (k - 2) * std::log(Y) - x - std::log(4 * kPi * n - (k - 2) / Y);
    }
    const double t = 2 * (f.log_abs(n) + f.log_scale()) + log_i - shift;
    terms.push_back(std::exp(t));
    if (x > a + 50 && t < -800) break;
  }
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) sum += *it;
  return sum;
}

quad::Result mass_between(const FormSeries& f, double x0, double x1, const std::function<double(double)>& lo,
                          const std::function<double(double)>& hi, double shift, const quad::Options& opt,
                          int pieces, bool parallel) {
  std::vector<quad::Cell> cells;
  for (int i = 0; i < pieces; ++i)
    cells.push_back({x0 + (x1 - x0) * i / pieces, x0 + (x1 - x0) * (i + 1) / pieces, 0.0, 1.0});
  quad::Integrand g = [&](double x, double t) {
    const double l = lo(x), h = hi(x);
    if (h <= l) return 0.0;
    const double y = l + t * (h - l);
    const LogValue v = eval_logF(f, HPoint(x, y));
    if (v.log_mag == -INFINITY) return 0.0;
    return std::exp(2 * v.log_mag - 2 * std::log(y) - shift) * (h - l);
  };
  return parallel ? quad::integrate(g, cells, opt) : quad::integrate_serial(g, cells, opt);
}

double PeterssonNorm::relative_difference() const { return std::abs(std::expm1(log_quadrature - log_l1sym2)); }

PeterssonNorm petersson_norm(const eigen::HeckeEigenform& f, double quad_tol) {
  const int k = f.weight;
  PeterssonNorm out;
  try {
    out.l1 = eigen::l1_sym2_afe(f);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientTruncation) throw;
    if (f.truncation() >= 400) {
      out.l1 = eigen::l1_sym2_smoothed(f);
    } else {
      int P = 0;
      for (int p : primes_up_to(f.truncation())) P = p;
      out.l1 = eigen::l1_sym2(f, P);
    }
  }
  out.log_l1sym2 = std::lgamma(static_cast<double>(k)) + std::log(out.l1.value) - std::log(2 * kPi * kPi) -
                   (k - 1) * std::log(4 * kPi);
  out.rel_error_l1sym2 = out.l1.error / out.l1.value;

  const FormSeries s = FormSeries::from_eigenform(f);
  const double shift = out.log_l1sym2;
  const double strip = strip_mass(s, 1.0, shift);
  quad::Options opt;
  opt.rel_tol = quad_tol;
  opt.abs_tol = quad_tol * 1e-3;
  const auto bulk = mass_between(s, -0.5, 0.5, arc, [](double) { return 1.0; }, shift, opt);
  if (!bulk.converged) throw Error(ErrorKind::QuadratureError, "Petersson bulk integral did not converge");
  const double total = strip + bulk.value;
  out.log_quadrature = shift + std::log(total);
  out.strip = strip / total;
  out.bulk = bulk.value / total;
  out.cells = bulk.cells;
  out.rel_error_quadrature = bulk.error / total + 1e-14;
  return out;
}

eigen::HeckeEigenform normalized(const eigen::HeckeEigenform& f, const PeterssonNorm& n) {
  eigen::HeckeEigenform g = f;
  g.log_norm_const = -0.5 * n.log_quadrature;
  g.l1sym2 = n.l1;
  return g;
}

eigen::HeckeEigenform normalized(const eigen::HeckeEigenform& f) { return normalized(f, petersson_norm(f)); }

}  // namespace mflab::eval
