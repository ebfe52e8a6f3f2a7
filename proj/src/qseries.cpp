#include "mflab/qseries.hpp"

#include <algorithm>
#include <cstring>

#include "mflab/common.hpp"

namespace mflab::qseries {

QExpansion::QExpansion(int weight, std::vector<mpz_class> numerators, mpz_class denominator)
    : weight_(weight), num_(std::move(numerators)), den_(std::move(denominator)) {
  if (num_.empty()) throw Error(ErrorKind::InvalidTruncation, "q-expansion needs at least one coefficient");
  if (den_ == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator");
  normalize();
}

void QExpansion::normalize() {
  if (den_ < 0) {
    den_ = -den_;
    for (auto& c : num_) c = -c;
  }
  mpz_class g = den_;
  for (const auto& c : num_) {
    if (g == 1) break;
    if (c != 0) g = gcd(g, c);
  }
  if (g != 1) {
    den_ /= g;
    for (auto& c : num_) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
  }
}

mpq_class QExpansion::coefficient(int n) const {
  mpq_class q(num_.at(n), den_);
  q.canonicalize();
  return q;
}

int QExpansion::order() const {
  for (std::size_t n = 0; n < num_.size(); ++n)
    if (num_[n] != 0) return static_cast<int>(n);
  return truncation() + 1;
}

std::size_t QExpansion::max_bits() const {
  std::size_t bits = 0;
  for (const auto& c : num_)
    if (c != 0) bits = std::max(bits, mpz_sizeinbase(c.get_mpz_t(), 2));
  return bits;
}

QExpansion QExpansion::truncated(int n) const {
  if (n < 0) throw Error(ErrorKind::InvalidTruncation, "negative truncation");
  if (n > truncation()) throw Error(ErrorKind::InsufficientTruncation, "cannot extend a truncated series", n);
  return QExpansion(weight_, std::vector<mpz_class>(num_.begin(), num_.begin() + n + 1), den_);
}

QExpansion QExpansion::scaled(const mpq_class& c) const {
  std::vector<mpz_class> out(num_.size());
  for (std::size_t i = 0; i < num_.size(); ++i) out[i] = num_[i] * c.get_num();
  return QExpansion(weight_, std::move(out), den_ * c.get_den());
}

QExpansion QExpansion::pow(unsigned e) const {
  std::vector<mpz_class> one(num_.size(), 0);
  one[0] = 1;
  QExpansion result(0, std::move(one));
  QExpansion base = *this;
  while (e) {
    if (e & 1u) result = result * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return result;
}

namespace {

QExpansion add_impl(const QExpansion& a, const QExpansion& b, int sign) {
  if (a.weight() != b.weight())
    throw Error(ErrorKind::InvalidArgument, "cannot add forms of different weight");
  const int N = std::min(a.truncation(), b.truncation());
  std::vector<mpz_class> out(N + 1);
  for (int n = 0; n <= N; ++n) {
    if (sign > 0)
      out[n] = a.numerator(n) * b.denominator() + b.numerator(n) * a.denominator();
    else
      out[n] = a.numerator(n) * b.denominator() - b.numerator(n) * a.denominator();
  }
  return QExpansion(a.weight(), std::move(out), a.denominator() * b.denominator());
}

}  // namespace

QExpansion operator+(const QExpansion& a, const QExpansion& b) { return add_impl(a, b, +1); }
QExpansion operator-(const QExpansion& a, const QExpansion& b) { return add_impl(a, b, -1); }

QExpansion operator*(const QExpansion& a, const QExpansion& b) {
  return QExpansion(a.weight() + b.weight(), multiply(a.numerators(), b.numerators()),
                    a.denominator() * b.denominator());
}

bool operator==(const QExpansion& a, const QExpansion& b) {
  return a.weight_ == b.weight_ && a.den_ == b.den_ && a.num_ == b.num_;
}

std::vector<mpz_class> multiply_schoolbook(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b) {
  const std::size_t N = std::min(a.size(), b.size());
  std::vector<mpz_class> c(N, 0);
  for (std::size_t i = 0; i < N; ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; i + j < N; ++j)
      if (b[j] != 0) mpz_addmul(c[i + j].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
  }
  return c;
}

namespace {

// Packs sign-split coefficients into slots of `slot_limbs` limbs each and
// returns positive part minus negative part.
mpz_class kronecker_pack(const std::vector<mpz_class>& v, std::size_t count, std::size_t slot_limbs) {
  mpz_class pos, neg;
  const std::size_t total = count * slot_limbs;
  mp_limb_t* p = mpz_limbs_write(pos.get_mpz_t(), static_cast<mp_size_t>(total));
  mp_limb_t* m = mpz_limbs_write(neg.get_mpz_t(), static_cast<mp_size_t>(total));
  std::memset(p, 0, total * sizeof(mp_limb_t));
  std::memset(m, 0, total * sizeof(mp_limb_t));
  for (std::size_t i = 0; i < count; ++i) {
    const int s = sgn(v[i]);
    if (s == 0) continue;
    const mp_limb_t* src = mpz_limbs_read(v[i].get_mpz_t());
    const std::size_t n = mpz_size(v[i].get_mpz_t());
    std::memcpy((s > 0 ? p : m) + i * slot_limbs, src, n * sizeof(mp_limb_t));
  }
  mpz_limbs_finish(pos.get_mpz_t(), static_cast<mp_size_t>(total));
  mpz_limbs_finish(neg.get_mpz_t(), static_cast<mp_size_t>(total));
  return pos - neg;
}

}  // namespace

std::vector<mpz_class> multiply_kronecker(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b) {
  const std::size_t N = std::min(a.size(), b.size());
  std::vector<mpz_class> c(N, 0);
  std::size_t bits_a = 0, bits_b = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (a[i] != 0) bits_a = std::max(bits_a, mpz_sizeinbase(a[i].get_mpz_t(), 2));
    if (b[i] != 0) bits_b = std::max(bits_b, mpz_sizeinbase(b[i].get_mpz_t(), 2));
  }
  if (bits_a == 0 || bits_b == 0) return c;
  std::size_t log_n = 1;
  while ((std::size_t{1} << log_n) < N) ++log_n;
  const std::size_t slot_bits = bits_a + bits_b + log_n + 2;
  const std::size_t slot_limbs = (slot_bits + GMP_NUMB_BITS - 1) / GMP_NUMB_BITS;

  const mpz_class A = kronecker_pack(a, N, slot_limbs);
  const mpz_class B = kronecker_pack(b, N, slot_limbs);
  mpz_class C = A * B;
  const int sign = sgn(C);
  if (sign == 0) return c;
  if (sign < 0) C = -C;

  // Balanced-digit extraction in base 2^(64 * slot_limbs).
  const mp_limb_t* limbs = mpz_limbs_read(C.get_mpz_t());
  const std::size_t nlimbs = mpz_size(C.get_mpz_t());
  const std::size_t w = slot_limbs * GMP_NUMB_BITS;
  mpz_class half, full;
  mpz_ui_pow_ui(full.get_mpz_t(), 2, w);
  half = full / 2;
  int carry = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t lo = i * slot_limbs;
    mpz_class u;
    if (lo < nlimbs) {
      const std::size_t take = std::min(slot_limbs, nlimbs - lo);
      mp_limb_t* dst = mpz_limbs_write(u.get_mpz_t(), static_cast<mp_size_t>(take));
      std::memcpy(dst, limbs + lo, take * sizeof(mp_limb_t));
      mpz_limbs_finish(u.get_mpz_t(), static_cast<mp_size_t>(take));
    }
    if (carry) u += 1;
    if (u >= half) {
      u -= full;
      carry = 1;
    } else {
      carry = 0;
    }
    c[i] = sign > 0 ? u : mpz_class(-u);
  }
  return c;
}

std::vector<mpz_class> multiply(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b) {
  const std::size_t N = std::min(a.size(), b.size());
  if (N <= 48) return multiply_schoolbook(a, b);
  return multiply_kronecker(a, b);
}

mpq_class bernoulli(int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative Bernoulli index");
  static std::mutex mutex;
  static std::vector<mpq_class> cache{mpq_class(1)};
  std::lock_guard<std::mutex> lock(mutex);
  // sum_{j=0}^{m} C(m+1, j) B_j = 0 for m >= 1.
  while (static_cast<int>(cache.size()) <= n) {
    const int m = static_cast<int>(cache.size());
    mpq_class s = 0;
    mpz_class binom = 1;  // C(m+1, 0)
    for (int j = 0; j < m; ++j) {
      s += mpq_class(binom) * cache[j];
      binom = binom * (m + 1 - j) / (j + 1);
    }
    mpq_class b = -s / mpq_class(m + 1);
    b.canonicalize();
    cache.push_back(b);
  }
  return cache[n];
}

std::vector<mpz_class> divisor_sigma(unsigned e, int limit) {
  std::vector<mpz_class> sigma(limit + 1, 0);
  for (int d = 1; d <= limit; ++d) {
    mpz_class pd;
    mpz_ui_pow_ui(pd.get_mpz_t(), static_cast<unsigned long>(d), e);
    for (int m = d; m <= limit; m += d) sigma[m] += pd;
  }
  return sigma;
}

QExpansion eisenstein_qexp(int k, int N) {
  if (k < 4 || k % 2 != 0) throw Error(ErrorKind::InvalidWeight, "Eisenstein series needs even k >= 4");
  if (N < 0) throw Error(ErrorKind::InvalidTruncation, "negative truncation");
  mpq_class c = mpq_class(-2 * k) / bernoulli(k);
  c.canonicalize();
  auto sigma = divisor_sigma(static_cast<unsigned>(k - 1), N);
  std::vector<mpz_class> num(N + 1);
  num[0] = c.get_den();
  for (int n = 1; n <= N; ++n) num[n] = c.get_num() * sigma[n];
  return QExpansion(k, std::move(num), c.get_den());
}

QExpansion delta_qexp(int N) {
  if (N < 1) throw Error(ErrorKind::InvalidTruncation, "Delta needs N >= 1");
  // prod (1 - q^n)^3 = sum_m (-1)^m (2m+1) q^{m(m+1)/2}
  std::vector<mpz_class> eta3(N, 0);
  for (long m = 0; m * (m + 1) / 2 < N; ++m) eta3[m * (m + 1) / 2] = (m % 2 ? -1 : 1) * (2 * m + 1);
  auto p6 = multiply(eta3, eta3);
  auto p12 = multiply(p6, p6);
  auto p24 = multiply(p12, p12);
  std::vector<mpz_class> num(N + 1, 0);
  for (int n = 1; n <= N; ++n) num[n] = p24[n - 1];
  return QExpansion(12, std::move(num));
}

int dim_modular_forms(int k) {
  if (k < 0 || k % 2 != 0) return 0;
  if (k == 2) return 0;
  return k / 12 + (k % 12 == 2 ? 0 : 1);
}

int dim_cusp_forms(int k) {
  if (k < 4) return 0;
  return std::max(0, dim_modular_forms(k) - 1);
}

FormRing::FormRing(int N)
    : N_(N), e4_(eisenstein_qexp(4, N)), e6_(eisenstein_qexp(6, N)), delta_(delta_qexp(std::max(N, 1)).truncated(N)) {}

const QExpansion& FormRing::power(int which, int e) {
  auto key = std::make_pair(which, e);
  auto it = powers_.find(key);
  if (it != powers_.end()) return it->second;
  const QExpansion& base = which == 0 ? e4_ : which == 1 ? e6_ : delta_;
  QExpansion value;
  if (e == 0) {
    std::vector<mpz_class> one(N_ + 1, 0);
    one[0] = 1;
    value = QExpansion(0, std::move(one));
  } else if (e == 1) {
    value = base;
  } else {
    value = power(which, e - 1) * base;
  }
  return powers_.emplace(key, std::move(value)).first->second;
}

QExpansion FormRing::product(int a, int b, int c) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto key = std::make_tuple(a, b, c);
  auto it = products_.find(key);
  if (it != products_.end()) return it->second;
  QExpansion eis = power(0, a);
  if (b > 0) eis = eis * power(1, b);
  QExpansion value = c > 0 ? eis * power(2, c) : eis;
  products_.emplace(key, value);
  return value;
}

std::vector<QExpansion> miller_basis(int k, FormRing& ring) {
  if (k < 4 || k % 2 != 0) throw Error(ErrorKind::InvalidWeight, "weight must be even and >= 4");
  const int d = dim_cusp_forms(k);
  const int N = ring.truncation();
  if (N < d + 1) throw Error(ErrorKind::InsufficientTruncation, "Miller basis needs N >= dim + 1", d + 1);
  if (d == 0) return {};
  const int r = k - 12 * d;
  int a = 0, b = 0;
  switch (r) {
    case 0: break;
    case 4: a = 1; break;
    case 6: b = 1; break;
    case 8: a = 2; break;
    case 10: a = 1; b = 1; break;
    case 14: a = 2; b = 1; break;
    default: throw Error(ErrorKind::InvalidWeight, "unexpected weight residue");
  }
  std::vector<std::vector<mpz_class>> rows;
  rows.reserve(d);
  for (int j = 1; j <= d; ++j) rows.push_back(ring.product(a, b + 2 * (d - j), j).numerators());

  // Leading block is unitriangular; clear entries above the diagonal using
  // integer multiples of later rows (later rows are already reduced).
  for (int i = d - 1; i >= 1; --i) {
    auto& row = rows[i - 1];
    for (int m = i + 1; m <= d; ++m) {
      const mpz_class factor = row[m];
      if (factor == 0) continue;
      const auto& other = rows[m - 1];
      for (int n = m; n <= N; ++n)
        if (other[n] != 0) mpz_submul(row[n].get_mpz_t(), factor.get_mpz_t(), other[n].get_mpz_t());
    }
  }
  std::vector<QExpansion> basis;
  basis.reserve(d);
  for (auto& row : rows) basis.emplace_back(k, std::move(row));
  return basis;
}

std::vector<QExpansion> miller_basis(int k, int N) {
  if (k < 4 || k % 2 != 0) throw Error(ErrorKind::InvalidWeight, "weight must be even and >= 4");
  const int d = dim_cusp_forms(k);
  if (N < d + 1) throw Error(ErrorKind::InsufficientTruncation, "Miller basis needs N >= dim + 1", d + 1);
  if (d == 0) return {};
  FormRing ring(N);
  return miller_basis(k, ring);
}

}  // namespace mflab::qseries
