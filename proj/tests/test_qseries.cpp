#include <doctest.h>

#include <random>

#include "mflab/common.hpp"
#include "mflab/qseries.hpp"

using namespace mflab;
using namespace mflab::qseries;

namespace {

// q * prod_{n<=N} (1 - q^n)^24 by repeated multiplication with machine integers.
std::vector<long long> tau_oracle(int N) {
  std::vector<long long> p(N, 0);
  p[0] = 1;
  for (int n = 1; n < N; ++n)
    for (int rep = 0; rep < 24; ++rep)
      for (int i = N - 1; i >= n; --i) p[i] -= p[i - n];
  std::vector<long long> tau(N + 1, 0);
  for (int n = 1; n <= N; ++n) tau[n] = p[n - 1];
  return tau;
}

int dim_oracle(int k) {
  // dim M_k = #{(a, b) : 4a + 6b = k}
  int count = 0;
  for (int a = 0; 4 * a <= k; ++a)
    if ((k - 4 * a) % 6 == 0) ++count;
  return k == 0 ? 0 : count - 1;
}

std::vector<mpz_class> random_vector(std::mt19937_64& rng, int n, int bits) {
  std::vector<mpz_class> v(n);
  gmp_randclass r(gmp_randinit_default);
  r.seed(static_cast<unsigned long>(rng()));
  for (auto& c : v) {
    c = r.get_z_bits(1 + rng() % bits);
    if (rng() & 1) c = -c;
    if (rng() % 5 == 0) c = 0;
  }
  return v;
}

}  // namespace

TEST_CASE("Eisenstein series small cases") {
  auto e4 = eisenstein_qexp(4, 2);
  CHECK(e4.coefficient(0) == 1);
  CHECK(e4.coefficient(1) == 240);
  CHECK(e4.coefficient(2) == 2160);
  for (int k : {4, 6, 12, 30}) {
    auto c = eisenstein_qexp(k, 0);
    CHECK(c.truncation() == 0);
    CHECK(c.coefficient(0) == 1);
  }
  auto e12 = eisenstein_qexp(12, 3);
  CHECK(e12.coefficient(1) == mpq_class(65520, 691));
  CHECK_THROWS_AS(eisenstein_qexp(5, 3), Error);
  CHECK_THROWS_AS(eisenstein_qexp(2, 3), Error);
}

TEST_CASE("E4^3 - E6^2 = 1728 Delta") {
  auto e4 = eisenstein_qexp(4, 10), e6 = eisenstein_qexp(6, 10);
  auto lhs = e4.pow(3) - e6 * e6;
  auto rhs = delta_qexp(10).scaled(1728);
  CHECK(lhs == rhs);
}

TEST_CASE("Delta against product expansion") {
  CHECK(delta_qexp(1).coefficient(1) == 1);
  auto d3 = delta_qexp(3);
  CHECK(d3.coefficient(0) == 0);
  CHECK(d3.coefficient(2) == -24);
  CHECK(d3.coefficient(3) == 252);
  CHECK(delta_qexp(5).coefficient(5) == 4830);
  auto oracle = tau_oracle(60);
  auto d = delta_qexp(60);
  for (int n = 0; n <= 60; ++n) CHECK(d.numerator(n) == mpz_class(std::to_string(oracle[n])));
  CHECK_THROWS_AS(delta_qexp(0), Error);
}

TEST_CASE("Ramanujan congruence mod 691") {
  auto d = delta_qexp(50);
  auto sigma = divisor_sigma(11, 50);
  for (int n = 1; n <= 50; ++n) {
    mpz_class diff = d.numerator(n) - sigma[n];
    CHECK(mpz_divisible_ui_p(diff.get_mpz_t(), 691) != 0);
  }
}

TEST_CASE("Bernoulli numbers") {
  CHECK(bernoulli(1) == mpq_class(-1, 2));
  CHECK(bernoulli(2) == mpq_class(1, 6));
  CHECK(bernoulli(3) == 0);
  CHECK(bernoulli(12) == mpq_class(-691, 2730));
}

TEST_CASE("dimension formula") {
  for (int k = 12; k <= 60; k += 2) CHECK(dim_cusp_forms(k) == dim_oracle(k));
  for (int k = 12; k <= 60; k += 2) CHECK(static_cast<int>(miller_basis(k, 80).size()) == k / 12 - (k % 12 == 2 ? 1 : 0));
}

TEST_CASE("Miller basis") {
  auto b12 = miller_basis(12, 10);
  REQUIRE(b12.size() == 1);
  CHECK(b12[0] == delta_qexp(10));
  CHECK(miller_basis(10, 10).empty());
  auto b24 = miller_basis(24, 10);
  REQUIRE(b24.size() == 2);
  CHECK(b24[0].coefficient(1) == 1);
  CHECK(b24[0].coefficient(2) == 0);
  CHECK(b24[1].coefficient(1) == 0);
  CHECK(b24[1].coefficient(2) == 1);
  for (int k = 12; k <= 60; k += 2) {
    auto basis = miller_basis(k, 40);
    const int d = static_cast<int>(basis.size());
    for (int i = 0; i < d; ++i) {
      CHECK(basis[i].is_integral());
      CHECK(basis[i].weight() == k);
      CHECK(basis[i].coefficient(0) == 0);
      for (int j = 1; j <= d; ++j) CHECK(basis[i].coefficient(j) == (i + 1 == j ? 1 : 0));
    }
  }
  CHECK_THROWS_AS(miller_basis(48, 3), Error);
  try {
    miller_basis(48, 3);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientTruncation);
    CHECK(e.required().value() == 5);
  }
}

TEST_CASE("Kronecker product equals schoolbook") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 300);
    auto a = random_vector(rng, n, 400);
    auto b = random_vector(rng, n + static_cast<int>(rng() % 3), 300);
    CHECK(multiply_kronecker(a, b) == multiply_schoolbook(a, b));
  }
  std::vector<mpz_class> zero(10, 0), one(10, 0);
  one[0] = 1;
  CHECK(multiply_kronecker(zero, one) == zero);
}

TEST_CASE("series ring axioms on random rational inputs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    auto make = [&] {
      return QExpansion(4, random_vector(rng, 51, 80), mpz_class(static_cast<unsigned long>(1 + rng() % 97)));
    };
    auto a = make(), b = make(), c = make();
    CHECK(a * b == b * a);
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK((a * b).truncation() == 50);
  }
}

TEST_CASE("truncation respects the shorter operand") {
  auto a = eisenstein_qexp(4, 20), b = eisenstein_qexp(4, 7);
  CHECK((a + b).truncation() == 7);
  CHECK((a * b).truncation() == 7);
  CHECK(a.truncated(7) == b);
  CHECK_THROWS_AS(b.truncated(8), Error);
}
