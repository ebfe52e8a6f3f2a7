#include "mflab/eigenforms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <mpfr.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace mflab::eigen {

using qseries::QExpansion;

RationalMatrix hecke_matrix(int k, int p, const std::vector<QExpansion>& basis) {
  if (!is_prime(p)) throw Error(ErrorKind::InvalidArgument, "T_p needs a prime p");
  const int d = static_cast<int>(basis.size());
  RationalMatrix m(d, std::vector<mpq_class>(d));
  if (d == 0) return m;
  const int N = basis[0].truncation();
  if (N < p * (d + 1))
    throw Error(ErrorKind::InsufficientTruncation, "T_p matrix needs N >= p (dim + 1)", p * (d + 1));
  mpz_class pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k - 1));
  for (int i = 0; i < d; ++i) {
    for (int j = 1; j <= d; ++j) {
      mpq_class b = basis[i].coefficient(p * j);
      if (j % p == 0) b += mpq_class(pk) * basis[i].coefficient(j / p);
      m[i][j - 1] = b;
    }
  }
  return m;
}

RationalPoly characteristic_polynomial(const RationalMatrix& a) {
  // Faddeev-LeVerrier.
  const int d = static_cast<int>(a.size());
  RationalPoly c(d + 1);
  c[d] = 1;
  RationalMatrix m(d, std::vector<mpq_class>(d, 0));
  for (int step = 1; step <= d; ++step) {
    RationalMatrix next(d, std::vector<mpq_class>(d, 0));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        mpq_class s = 0;
        for (int l = 0; l < d; ++l) s += a[i][l] * m[l][j];
        next[i][j] = s;
      }
    for (int i = 0; i < d; ++i) next[i][i] += c[d - step + 1];
    mpq_class trace = 0;
    for (int i = 0; i < d; ++i)
      for (int l = 0; l < d; ++l) trace += a[i][l] * next[l][i];
    c[d - step] = -trace / step;
    m = std::move(next);
  }
  return c;
}

namespace {

void trim(RationalPoly& p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
}

mpq_class eval(const RationalPoly& p, const mpq_class& x) {
  mpq_class r = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * x + *it;
  return r;
}

RationalPoly derivative(const RationalPoly& p) {
  RationalPoly d(std::max<std::size_t>(p.size(), 2) - 1, 0);
  for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<long>(i);
  trim(d);
  return d;
}

RationalPoly remainder(RationalPoly a, const RationalPoly& b) {
  const int db = static_cast<int>(b.size()) - 1;
  while (static_cast<int>(a.size()) - 1 >= db && !(a.size() == 1 && a[0] == 0)) {
    const int shift = static_cast<int>(a.size()) - 1 - db;
    const mpq_class f = a.back() / b.back();
    for (int i = 0; i <= db; ++i) a[i + shift] -= f * b[i];
    a.pop_back();
    trim(a);
    if (a.empty()) a.push_back(0);
    if (db == 0) break;
  }
  return a;
}

bool is_zero(const RationalPoly& p) { return p.size() == 1 && p[0] == 0; }

int sign_variations(const std::vector<RationalPoly>& chain, const mpq_class& x) {
  int count = 0, last = 0;
  for (const auto& p : chain) {
    const int s = sgn(eval(p, x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++count;
    last = s;
  }
  return count;
}

Real eval_real(const std::vector<Real>& p, const Real& x) {
  Real r = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * x + *it;
  return r;
}

Real to_real(const mpq_class& q) {
  Real r = 0;
  mpfr_set_q(r.backend().data(), q.get_mpq_t(), MPFR_RNDN);
  return r;
}

}  // namespace

std::vector<Real> real_roots(const RationalPoly& input, int bits) {
  RationalPoly p = input;
  trim(p);
  if (p.size() < 2) return {};
  std::vector<RationalPoly> chain{p, derivative(p)};
  while (!is_zero(chain.back()) && chain.back().size() > 1) {
    RationalPoly r = remainder(chain[chain.size() - 2], chain.back());
    for (auto& c : r) c = -c;
    if (is_zero(r)) break;
    chain.push_back(r);
  }
  if (chain.back().size() > 1)
    throw Error(ErrorKind::DegenerateSpectrum, "characteristic polynomial has a repeated root");

  mpq_class bound = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) bound = std::max(bound, mpq_class(abs(p[i] / p.back())));
  bound += 1;

  struct Interval {
    mpq_class a, b;
    int count;
  };
  std::vector<Interval> isolated;
  std::vector<Interval> stack{{-bound, bound, sign_variations(chain, -bound) - sign_variations(chain, bound)}};
  while (!stack.empty()) {
    Interval iv = stack.back();
    stack.pop_back();
    if (iv.count == 0) continue;
    if (iv.count == 1) {
      isolated.push_back(iv);
      continue;
    }
    mpq_class mid = (iv.a + iv.b) / 2;
    mpq_class nudge = (iv.b - iv.a) / 1024;
    while (eval(p, mid) == 0) mid += nudge;
    const int vm = sign_variations(chain, mid);
    stack.push_back({mid, iv.b, vm - sign_variations(chain, iv.b)});
    stack.push_back({iv.a, mid, sign_variations(chain, iv.a) - vm});
  }
  std::sort(isolated.begin(), isolated.end(), [](const Interval& x, const Interval& y) { return x.a < y.a; });

  PrecisionScope scope(bits + 16);
  std::vector<Real> pr, dpr;
  for (const auto& c : p) pr.push_back(to_real(c));
  for (const auto& c : derivative(p)) dpr.push_back(to_real(c));
  std::vector<Real> roots;
  for (const auto& iv : isolated) {
    if (eval(p, iv.b) == 0) {
      roots.push_back(to_real(iv.b));
      continue;
    }
    Real lo = to_real(iv.a), hi = to_real(iv.b);
    const int s_lo = sgn(eval(p, iv.a));
    Real x = (lo + hi) / 2;
    const Real eps = ldexp(Real(1), -bits - 4);
    for (int iter = 0; iter < 8 * bits + 200; ++iter) {
      const Real fx = eval_real(pr, x);
      if (fx == 0) break;
      if ((fx > 0 ? 1 : -1) == s_lo) lo = x; else hi = x;
      const Real dfx = eval_real(dpr, x);
      Real nx = dfx != 0 ? Real(x - fx / dfx) : Real((lo + hi) / 2);
      if (!(nx > lo && nx < hi)) nx = (lo + hi) / 2;
      const Real scale = std::max(Real(1), Real(abs(x)));
      const bool done = abs(nx - x) < eps * scale || (hi - lo) < eps * scale;
      x = nx;
      if (done) break;
    }
    roots.push_back(x);
  }
  return roots;
}

namespace {

// Bits lost when a_f(n) = sum c_j g_j(n) is formed from large basis entries.
int cancellation_guard(int k, const std::vector<QExpansion>& basis) {
  const int d = static_cast<int>(basis.size());
  const int N = basis[0].truncation();
  const double half = (k - 1) / 2.0;
  auto divisors = divisor_counts(d);
  std::vector<double> cbound(d);
  for (int j = 1; j <= d; ++j) cbound[j - 1] = std::log2(divisors[j]) + half * std::log2(j);
  double worst = 0;
  for (int n = 1; n <= N; ++n) {
    double m = -1e300;
    for (int j = 0; j < d; ++j) {
      const auto& g = basis[j].numerator(n);
      if (g == 0) continue;
      m = std::max(m, cbound[j] + static_cast<double>(mpz_sizeinbase(g.get_mpz_t(), 2)));
    }
    worst = std::max(worst, m - half * std::log2(n));
  }
  return static_cast<int>(std::ceil(worst)) + 32;
}

int matrix_bits(const RationalMatrix& m) {
  std::size_t bits = 0;
  for (const auto& row : m)
    for (const auto& v : row)
      bits = std::max({bits, mpz_sizeinbase(v.get_num_mpz_t(), 2), mpz_sizeinbase(v.get_den_mpz_t(), 2)});
  return static_cast<int>(bits);
}

// Solves (M^T - theta) c = 0 with c_1 = 1 by Gaussian elimination with partial pivoting.
std::vector<Real> eigenvector(const std::vector<std::vector<Real>>& mt, const Real& theta) {
  const int d = static_cast<int>(mt.size());
  std::vector<Real> c(d, Real(0));
  c[0] = 1;
  if (d == 1) return c;
  const int unknowns = d - 1;
  std::vector<std::vector<Real>> a(d, std::vector<Real>(unknowns + 1));
  for (int r = 0; r < d; ++r) {
    for (int j = 1; j < d; ++j) a[r][j - 1] = mt[r][j] - (r == j ? theta : Real(0));
    a[r][unknowns] = -(mt[r][0] - (r == 0 ? theta : Real(0)));
  }
  std::vector<int> rows(d);
  for (int r = 0; r < d; ++r) rows[r] = r;
  for (int col = 0; col < unknowns; ++col) {
    int best = col;
    for (int r = col + 1; r < d; ++r)
      if (abs(a[rows[r]][col]) > abs(a[rows[best]][col])) best = r;
    std::swap(rows[col], rows[best]);
    const auto& piv = a[rows[col]];
    if (piv[col] == 0) throw Error(ErrorKind::DegenerateSpectrum, "eigenvector has a(1) = 0");
    for (int r = col + 1; r < d; ++r) {
      auto& row = a[rows[r]];
      const Real f = row[col] / piv[col];
      if (f == 0) continue;
      for (int j = col; j <= unknowns; ++j) row[j] -= f * piv[j];
    }
  }
  for (int col = unknowns - 1; col >= 0; --col) {
    const auto& row = a[rows[col]];
    Real s = row[unknowns];
    for (int j = col + 1; j < unknowns; ++j) s -= row[j] * c[j + 1];
    c[col + 1] = s / row[col];
  }
  return c;
}

std::vector<std::vector<Real>> transpose_real(const RationalMatrix& m) {
  const int d = static_cast<int>(m.size());
  std::vector<std::vector<Real>> t(d, std::vector<Real>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t[j][i] = to_real(m[i][j]);
  return t;
}

Real with_bits(const Real& v, int bits) {
  Real r(0, digits10_for_bits(bits));
  mpfr_set_prec(r.backend().data(), bits);
  mpfr_set(r.backend().data(), v.backend().data(), MPFR_RNDN);
  return r;
}

}  // namespace

std::vector<HeckeEigenform> eigenbasis(int k, int N, int precision_bits) {
  if (k < 12 || k % 2 != 0 || qseries::dim_cusp_forms(k) == 0)
    throw Error(ErrorKind::NoCuspForms, "S_" + std::to_string(k) + " is zero");
  const int d = qseries::dim_cusp_forms(k);
  qseries::FormRing ring(std::max(N, 3 * (d + 1)));
  return eigenbasis(k, ring, precision_bits);
}

std::vector<HeckeEigenform> eigenbasis(int k, qseries::FormRing& ring, int precision_bits) {
  if (k < 12 || k % 2 != 0 || qseries::dim_cusp_forms(k) == 0)
    throw Error(ErrorKind::NoCuspForms, "S_" + std::to_string(k) + " is zero");
  if (precision_bits < 32) throw Error(ErrorKind::InvalidArgument, "precision below 32 bits");
  const auto basis = qseries::miller_basis(k, ring);
  const int d = static_cast<int>(basis.size());
  const int N = ring.truncation();
  if (N < 3 * (d + 1)) throw Error(ErrorKind::InsufficientTruncation, "eigenbasis needs N >= 3 (dim + 1)", 3 * (d + 1));

  const auto m2 = hecke_matrix(k, 2, basis);
  const auto m3 = hecke_matrix(k, 3, basis);
  const int wp = precision_bits + cancellation_guard(k, basis) + matrix_bits(m2) + 64;
  PrecisionScope scope(wp);

  RationalMatrix m2t(d, std::vector<mpq_class>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m2t[i][j] = m2[j][i];
  const auto thetas = real_roots(characteristic_polynomial(m2t), wp);
  if (static_cast<int>(thetas.size()) != d)
    throw Error(ErrorKind::DegenerateSpectrum, "T_2 has non-real or missing eigenvalues");

  const Real norm2 = pow(Real(2), Real(k - 1) / 2);
  const Real sep = ldexp(Real(1), -precision_bits / 2);
  for (int i = 1; i < d; ++i)
    if ((thetas[i] - thetas[i - 1]) / norm2 < sep)
      throw Error(ErrorKind::DegenerateSpectrum, "T_2 eigenvalues closer than 2^-(prec/2)");

  const auto mt2 = transpose_real(m2);
  const auto mt3 = transpose_real(m3);

  // Basis coefficients as MPFR values once, reused for every eigenvector.
  std::vector<std::vector<Real>> g(d, std::vector<Real>(N + 1));
  for (int j = 0; j < d; ++j)
    for (int n = 0; n <= N; ++n) mpfr_set_z(g[j][n].backend().data(), basis[j].numerator(n).get_mpz_t(), MPFR_RNDN);

  std::vector<HeckeEigenform> forms;
  for (int idx = 0; idx < d; ++idx) {
    const Real& theta = thetas[idx];
    const auto c = eigenvector(mt2, theta);

    // T_3 must act by the scalar a_f(3) on the same vector.
    Real a3 = 0;
    for (int j = 0; j < d; ++j) a3 += c[j] * g[j][3];
    Real resid = 0, scale = 0;
    for (int r = 0; r < d; ++r) {
      Real s = 0;
      for (int j = 0; j < d; ++j) s += mt3[r][j] * c[j];
      resid = std::max(resid, Real(abs(s - a3 * c[r])));
      scale = std::max(scale, Real(abs(a3 * c[r])));
    }
    if (resid > sep * std::max(scale, Real(1)))
      throw Error(ErrorKind::DegenerateSpectrum, "eigenvector of T_2 is not a T_3 eigenvector");

    auto a = std::make_shared<std::vector<Real>>();
    auto lam = std::make_shared<std::vector<Real>>();
    auto lam_d = std::make_shared<std::vector<double>>(N + 1, 0.0);
    a->reserve(N + 1);
    lam->reserve(N + 1);
    const int lb = precision_bits + 32;
    for (int n = 0; n <= N; ++n) {
      Real s = 0;
      for (int j = 0; j < d; ++j)
        if (!mpfr_zero_p(g[j][n].backend().data())) s += c[j] * g[j][n];
      if (n == 1) s = 1;
      a->push_back(with_bits(s, precision_bits));
      // lambda(n) = a(n) / (n^{(k-2)/2} sqrt n)
      Real l(0, digits10_for_bits(lb));
      if (n > 0) {
        mpz_class np;
        mpz_ui_pow_ui(np.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>((k - 2) / 2));
        Real root(0, digits10_for_bits(lb));
        mpfr_sqrt_ui(root.backend().data(), static_cast<unsigned long>(n), MPFR_RNDN);
        mpfr_div_z(l.backend().data(), s.backend().data(), np.get_mpz_t(), MPFR_RNDN);
        mpfr_div(l.backend().data(), l.backend().data(), root.backend().data(), MPFR_RNDN);
      }
      (*lam_d)[n] = mpfr_get_d(l.backend().data(), MPFR_RNDN);
      lam->push_back(with_bits(l, precision_bits));
    }

    HeckeEigenform f;
    f.weight = k;
    f.precision_bits = precision_bits;
    f.t2_eigenvalue = with_bits(theta, precision_bits);
    for (const auto& v : c) f.coordinates.push_back(with_bits(v, precision_bits));
    f.a_coeffs = std::move(a);
    f.lambda = std::move(lam);
    f.lambda_d = std::move(lam_d);
    forms.push_back(std::move(f));
  }
  return forms;
}

HeckeResiduals hecke_residuals(const HeckeEigenform& f, int nmax, int pmax) {
  HeckeResiduals r;
  const int N = f.truncation();
  nmax = std::min(nmax, N);
  pmax = std::min(pmax, N);
  PrecisionScope scope(f.precision_bits);
  for (int m = 2; m <= nmax; ++m)
    for (int n = m + 1; static_cast<long>(m) * n <= nmax; ++n) {
      if (std::gcd(m, n) != 1) continue;
      const Real diff = f.lam(m * n) - f.lam(m) * f.lam(n);
      r.multiplicativity = std::max(r.multiplicativity, std::abs(diff.convert_to<double>()));
    }
  for (int p : primes_up_to(nmax)) {
    long pv = p, prev = 1;
    while (pv * p <= nmax) {
      const Real diff = f.lam(p) * f.lam(static_cast<int>(pv)) - f.lam(static_cast<int>(pv * p)) - f.lam(static_cast<int>(prev));
      r.recursion = std::max(r.recursion, std::abs(diff.convert_to<double>()));
      prev = pv;
      pv *= p;
    }
  }
  r.deligne_excess = -2;
  for (int p : primes_up_to(pmax)) {
    const double excess = std::abs(f.lam_d(p)) - 2;
    if (excess > r.deligne_excess) {
      r.deligne_excess = excess;
      r.deligne_worst_prime = p;
    }
  }
  return r;
}

double lambda_p2(const HeckeEigenform& f, int p) {
  if (p > f.truncation()) throw Error(ErrorKind::InsufficientTruncation, "lambda(p) beyond truncation", p);
  const long p2 = static_cast<long>(p) * p;
  if (p2 <= f.truncation()) return f.lam_d(static_cast<int>(p2));
  const double l = f.lam_d(p);
  return l * l - 1;
}

L1Sym2 l1_sym2_from(const std::vector<double>& lambda_p2_values, int P) {
  if (P < 100) throw Error(ErrorKind::CutoffTooSmall, "prime cutoff below 100");
  const auto primes = primes_up_to(P);
  if (lambda_p2_values.size() < primes.size())
    throw Error(ErrorKind::InvalidArgument, "need lambda(p^2) for every p <= P");
  long double log_value = 0;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const long double x = 1.0L / primes[i];
    // (1 - alpha^2 x)(1 - x)(1 - beta^2 x) with alpha^2 + beta^2 = lambda(p^2) - 1
    const long double inv = (1 - (lambda_p2_values[i] - 1) * x + x * x) * (1 - x);
    log_value -= std::log(inv);
  }
  L1Sym2 out;
  out.value = static_cast<double>(std::exp(log_value));
  out.error = out.value / std::sqrt(P * std::log(static_cast<double>(P)));
  out.method = "euler_product";
  return out;
}

L1Sym2 l1_sym2(const HeckeEigenform& f, int P) {
  if (P < 100) throw Error(ErrorKind::CutoffTooSmall, "prime cutoff below 100");
  if (P > f.truncation()) throw Error(ErrorKind::InsufficientTruncation, "Euler product needs lambda(p) for p <= P", P);
  std::vector<double> v;
  for (int p : primes_up_to(P)) v.push_back(lambda_p2(f, p));
  return l1_sym2_from(v, P);
}

L1Sym2 l1_sym2_smoothed(const HeckeEigenform& f) {
  const int N = f.truncation();
  if (N < 400) throw Error(ErrorKind::InsufficientTruncation, "smoothed estimator needs N >= 400", 400);
  const double X = N / 40.0;
  auto S = [&](double x) {
    long double s = 0;
    for (int n = 1; n <= N; ++n) {
      const long double l = f.lam_d(n);
      s += l * l * std::exp(-static_cast<long double>(n) / x);
    }
    return s;
  };
  // x S(x) = A x^2 + B x + C through x = X, X/2, X/3; A is the second divided difference.
  const long double x1 = X, x2 = X / 2, x3 = X / 3;
  const long double y1 = x1 * S(x1), y2 = x2 * S(x2), y3 = x3 * S(x3);
  const long double d12 = (y1 - y2) / (x1 - x2), d23 = (y2 - y3) / (x2 - x3);
  const long double a3 = (d12 - d23) / (x1 - x3);
  const long double a2 = (S(x1) - S(x2)) / (x1 - x2);
  const double zeta2 = kPi * kPi / 6;
  L1Sym2 out;
  out.value = static_cast<double>(a3) * zeta2;
  out.error = std::abs(static_cast<double>(a3 - a2)) * zeta2;
  out.method = "rankin_selberg_smoothed";
  return out;
}

namespace {

using cplx = std::complex<double>;

// log Gamma(z) for Re z > 0 by Stirling after shifting to Re z >= 15.
cplx lgamma_c(cplx z) {
  cplx shift = 0;
  while (z.real() < 15) {
    shift += std::log(z);
    z += 1.0;
  }
  static const double b[] = {1.0 / 12,   -1.0 / 360,         1.0 / 1260, -1.0 / 1680,
                             1.0 / 1188, -691.0 / 360360.0, 1.0 / 156,  -3617.0 / 122400.0};
  const cplx w = 1.0 / (z * z);
  cplx series = 0, p = 1.0 / z;
  for (double c : b) {
    series += c * p;
    p *= w;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2 * kPi) + series - shift;
}

// log of pi^{-3s/2} Gamma((s+1)/2) Gamma((s+k-1)/2) Gamma((s+k)/2).
cplx log_gamma_factor(cplx s, int k) {
  return -1.5 * s * std::log(kPi) + lgamma_c((s + 1.0) / 2.0) + lgamma_c((s + (k - 1.0)) / 2.0) +
         lgamma_c((s + static_cast<double>(k)) / 2.0);
}

// V_s(y) = (1/2 pi i) int_{(1)} gamma(s+u)/gamma(s) y^{-u} e^{a u^2} du/u.
}  // namespace

double afe_weight(double s, double y, int k, double a) {
  const cplx g0 = log_gamma_factor(cplx(s, 0), k);
  const double ly = std::log(y);
  // Contour through the real saddle of the integrand (kept right of the pole at 0).
  auto h = [&](double c) { return std::real(log_gamma_factor(cplx(s + c, 0), k)) - c * ly + a * c * c - std::log(c); };
  double lo = 0.5, hi = 4.0 * k + 20;
  for (int it = 0; it < 80; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    (h(m1) < h(m2) ? hi : lo) = h(m1) < h(m2) ? m2 : m1;
  }
  const double c = 0.5 * (lo + hi);
  const double dc = 1e-3 * std::max(1.0, c);
  const double curv = (h(c + dc) - 2 * h(c) + h(c - dc)) / (dc * dc);
  const double sigma = 1 / std::sqrt(std::max(curv, 1e-6));
  auto integrand = [&](double tau) {
    const cplx u(c, sigma * tau);
    return std::real(std::exp(log_gamma_factor(s + u, k) - g0 - u * ly + a * u * u) / u);
  };
  double err = 0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0, INFINITY, 15, 1e-13, &err);
  return sigma * v / kPi;
}

L1Sym2 l1_sym2_afe(const HeckeEigenform& f, double a) {
  const int k = f.weight;
  const double w0 = 2 * kPi * kPi / (k - 1);  // gamma(0) / gamma(1)
  std::vector<double> v1{0}, v0{0};
  for (int n = 1;; ++n) {
    v1.push_back(afe_weight(1, n, k, a));
    v0.push_back(afe_weight(0, n, k, a));
    if (n >= 8 && std::abs(v1[n]) / n + w0 * std::abs(v0[n]) < 1e-18) break;
    if (n > 100000) throw Error(ErrorKind::CutoffTooSmall, "functional-equation weights do not decay");
  }
  const int M = static_cast<int>(v1.size()) - 1;
  if (M > f.truncation())
    throw Error(ErrorKind::InsufficientTruncation, "functional equation needs lambda(p) for p <= M", M);

  // c(n): Dirichlet coefficients of L(s, sym^2 f), multiplicative with
  // c(p^v) = e c(p^{v-1}) - e c(p^{v-2}) + c(p^{v-3}), e = lambda(p)^2 - 1.
  std::vector<int> spf(M + 1, 0);
  for (int i = 2; i <= M; ++i)
    if (spf[i] == 0)
      for (int j = i; j <= M; j += i)
        if (spf[j] == 0) spf[j] = i;
  std::vector<double> c(M + 1, 0.0);
  c[1] = 1;
  for (int n = 2; n <= M; ++n) {
    const int p = spf[n];
    int m = n, v = 0;
    while (m % p == 0) m /= p, ++v;
    const double e = f.lam_d(p) * f.lam_d(p) - 1;
    double c1 = 1, c2 = 0, c3 = 0;  // c(p^{j-1}), c(p^{j-2}), c(p^{j-3})
    for (int j = 1; j <= v; ++j) {
      const double cj = e * c1 - e * c2 + c3;
      c3 = c2, c2 = c1, c1 = cj;
    }
    c[n] = c1 * c[m];
  }
  long double sum = 0;
  for (int n = 1; n <= M; ++n) sum += c[n] * (v1[n] / n + w0 * v0[n]);
  L1Sym2 out;
  out.value = static_cast<double>(sum);
  out.error = 1e-12 * (1 + std::abs(out.value));
  out.method = "approximate_functional_equation";
  return out;
}

EulerProducts euler_products_from(const std::vector<double>& lambda_p, const std::vector<double>& lambda_p2, int P) {
  const auto primes = primes_up_to(P);
  if (lambda_p.size() < primes.size() || lambda_p2.size() < primes.size())
    throw Error(ErrorKind::InvalidArgument, "need lambda(p) and lambda(p^2) for every p <= P");
  EulerProducts e;
  e.P = P;
  bool first = true;
  auto apply = [&](EulerProducts::Product& prod, double factor, int p) {
    if (first) {
      prod.min_factor = prod.max_factor = factor;
    } else {
      prod.min_factor = std::min(prod.min_factor, factor);
      prod.max_factor = std::max(prod.max_factor, factor);
    }
    if (factor <= 0) prod.nonpositive_factor_primes.push_back(p);
    prod.value *= factor;
  };
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const int p = primes[i];
    const double l = lambda_p[i], l2 = lambda_p2[i];
    const double np = l2 + 0.25 * (1 - l2 * l2);
    const double h = (std::abs(l) - 1) * (std::abs(l) - 1);
    apply(e.prod_n, 1 - np / p, p);
    apply(e.prod_eis, 1 - (l2 + 1) / p, p);
    apply(e.prod_hol, 1 - h / p, p);
    apply(e.prod_hol_half, 1 - 0.5 * h / p, p);
    first = false;
  }
  return e;
}

EulerProducts euler_products(const HeckeEigenform& f, int P) {
  if (P > f.truncation()) throw Error(ErrorKind::InsufficientTruncation, "Euler products need lambda(p) for p <= P", P);
  std::vector<double> l, l2;
  for (int p : primes_up_to(P)) {
    l.push_back(f.lam_d(p));
    l2.push_back(lambda_p2(f, p));
  }
  return euler_products_from(l, l2, P);
}

namespace {

void check_prime_range(int P, int Q, int v) {
  if (P < 2 || Q <= P || Q > 2 * P) throw Error(ErrorKind::RangeError, "need 2 <= P < Q <= 2P");
  if (v < 1) throw Error(ErrorKind::RangeError, "power v must be >= 1");
}

long ipow(long b, int e) {
  long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

PrimeSumStats family_prime_sum_stats(const std::vector<HeckeEigenform>& family, int P, int Q, int v) {
  check_prime_range(P, Q, v);
  PrimeSumStats s;
  s.P = P;
  s.Q = Q;
  s.v = v;
  if (family.empty()) return s;
  s.weight = family[0].weight;
  for (const auto& f : family) {
    double sum = 0;
    for (int p : primes_up_to(Q)) {
      if (p <= P) continue;
      const long pv = ipow(p, v);
      if (pv > f.truncation()) throw Error(ErrorKind::InsufficientTruncation, "lambda(p^v) beyond truncation", pv);
      sum += f.lam_d(static_cast<int>(pv)) / p;
    }
    s.per_form.push_back(sum * sum);
    s.family_sum += sum * sum;
  }
  return s;
}

PrimeSumStats family_prime_sum_stats(int k, int P, int Q, int v) {
  check_prime_range(P, Q, v);
  if (k < 12 || k % 2 != 0 || qseries::dim_cusp_forms(k) == 0) {
    PrimeSumStats s;
    s.weight = k;
    s.P = P;
    s.Q = Q;
    s.v = v;
    return s;
  }
  const int d = qseries::dim_cusp_forms(k);
  const long need = std::max<long>(ipow(Q, v), 3 * (d + 1));
  return family_prime_sum_stats(eigenbasis(k, static_cast<int>(need)), P, Q, v);
}

}  // namespace mflab::eigen
