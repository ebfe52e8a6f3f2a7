#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include <gmpxx.h>

namespace mflab::qseries {

/// Exact truncated q-expansion a(0) + a(1) q + ... + a(N) q^N of a weight-k
/// form. Coefficients are stored as integer numerators over one positive
/// common denominator, kept in lowest terms.
class QExpansion {
 public:
  QExpansion() = default;
  QExpansion(int weight, std::vector<mpz_class> numerators, mpz_class denominator = 1);

  int weight() const noexcept { return weight_; }
  /// Index N of the last stored coefficient.
  int truncation() const noexcept { return static_cast<int>(num_.size()) - 1; }
  mpq_class coefficient(int n) const;
  const mpz_class& numerator(int n) const { return num_.at(n); }
  const std::vector<mpz_class>& numerators() const noexcept { return num_; }
  const mpz_class& denominator() const noexcept { return den_; }
  bool is_integral() const { return den_ == 1; }
  /// Smallest n with a(n) != 0, or truncation()+1 for the zero series.
  int order() const;
  /// Largest bit length of any numerator.
  std::size_t max_bits() const;

  QExpansion truncated(int n) const;
  QExpansion scaled(const mpq_class& c) const;
  QExpansion pow(unsigned e) const;

  friend QExpansion operator+(const QExpansion& a, const QExpansion& b);
  friend QExpansion operator-(const QExpansion& a, const QExpansion& b);
  friend QExpansion operator*(const QExpansion& a, const QExpansion& b);
  friend bool operator==(const QExpansion& a, const QExpansion& b);

 private:
  void normalize();

  int weight_ = 0;
  std::vector<mpz_class> num_;
  mpz_class den_ = 1;
};

/// Truncated product of integer coefficient vectors, result length
/// min(a.size(), b.size()).
std::vector<mpz_class> multiply_schoolbook(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b);
/// Same product by Kronecker substitution into a single GMP multiplication.
std::vector<mpz_class> multiply_kronecker(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b);
std::vector<mpz_class> multiply(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b);

/// Exact Bernoulli number B_n (B_1 = -1/2), cached per process.
mpq_class bernoulli(int n);
/// sigma_e(n) for 0 <= n <= limit (entry 0 is zero).
std::vector<mpz_class> divisor_sigma(unsigned e, int limit);

/// E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n.
QExpansion eisenstein_qexp(int k, int N);
/// Delta = q prod (1 - q^n)^24.
QExpansion delta_qexp(int N);

/// dim S_k for SL2(Z).
int dim_cusp_forms(int k);
int dim_modular_forms(int k);

/// Caches E4^a E6^b Delta^c products at a fixed truncation. Thread-safe.
class FormRing {
 public:
  explicit FormRing(int N);
  int truncation() const noexcept { return N_; }
  const QExpansion& e4() const { return e4_; }
  const QExpansion& e6() const { return e6_; }
  const QExpansion& delta() const { return delta_; }
  QExpansion product(int a, int b, int c);

 private:
  const QExpansion& power(int which, int e);

  int N_;
  QExpansion e4_, e6_, delta_;
  std::map<std::pair<int, int>, QExpansion> powers_;
  std::map<std::tuple<int, int, int>, QExpansion> products_;
  std::mutex mutex_;
};

/// Echelonized integral basis g_1..g_d of S_k with g_i = q^i + O(q^{d+1}).
std::vector<QExpansion> miller_basis(int k, int N);
std::vector<QExpansion> miller_basis(int k, FormRing& ring);

}  // namespace mflab::qseries
