#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/constants/constants.hpp>
#include <mpfr.h>

#include "mflab/cuspzone.hpp"
#include "mflab/zerofind.hpp"

using namespace mflab;
using namespace mflab::cusp;

namespace {

const std::vector<eigen::HeckeEigenform>& basis(int k) {
  static std::map<int, std::vector<eigen::HeckeEigenform>> cache;
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, eigen::eigenbasis(k, 240, 128)).first;
  return it->second;
}

const eigen::HeckeEigenform& delta_long() {
  static const auto f = eigen::eigenbasis(12, 40001, 128)[0];
  return f;
}

// lambda(n) for Delta from exact tau(n).
std::vector<double> tau_lambda(int n_max) {
  const auto d = qseries::delta_qexp(n_max);
  std::vector<double> out(n_max + 1, 0.0);
  for (int n = 1; n <= n_max; ++n) out[n] = d.numerator(n).get_d() / std::pow(n, 5.5);
  return out;
}

}  // namespace

TEST_CASE("window and ordinates") {
  CHECK(lemma_window(100) == std::pair<int, int>(2, 4));
  CHECK(lemma_window(160) == std::pair<int, int>(2, 5));
  const auto spec_default = lemma_window(160, {10, 0.5});
  CHECK(spec_default.first > spec_default.second);
  CHECK(y_ell(100, 3) == doctest::Approx(99 / (12 * kPi)));
}

TEST_CASE("one-term approximation in the cusp") {
  const auto& f = basis(40)[0];
  for (int l = 1; l <= 4; ++l) {
    const auto r0 = cusp_approx_error(f, l, 0);
    CHECK(std::abs(r0.exact.imag()) <= 1e-12 * std::abs(r0.exact.real()));
    const auto rh = cusp_approx_error(f, l, -0.5);
    CHECK(rh.approx.real() == doctest::Approx(f.lam_d(l) * (l % 2 ? -1 : 1)).epsilon(1e-15));
    CHECK(std::abs(rh.approx.imag()) < 1e-15);
  }
  CHECK(cusp_approx_error(f, 1, 0.1).warning.has_value());
  CHECK(!cusp_approx_error(f, 2, 0.1).warning.has_value());

  double prev = INFINITY;
  for (int k : {24, 40, 80}) {
    double worst = 0;
    for (const auto& g : basis(k))
      for (int i = 0; i < 16; ++i) worst = std::max(worst, cusp_approx_error(g, 2, -0.5 + i / 16.0).error);
    CAPTURE(k);
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("sign changes of lambda") {
  const auto lam = tau_lambda(40);
  const auto& d = delta_long();
  for (int n = 1; n <= 40; ++n) CHECK(d.lam_d(n) == doctest::Approx(lam[n]).epsilon(1e-13));
  const auto pairs = sign_changes(d, 2, 10, Parity::All, 0.01);
  REQUIRE(!pairs.empty());
  CHECK(pairs[0].l1 == 2);
  CHECK(pairs[0].l2 == 3);
  CHECK(sign_changes(lam, 2, 10, Parity::All, 2.5).empty());

  const auto odd = sign_changes(lam, 3, 25, Parity::Odd, 0.01);
  CHECK(!odd.empty());
  int prev_end = 0;
  for (const auto& p : odd) {
    CHECK(p.l1 % 2 == 1);
    CHECK(p.l2 % 2 == 1);
    CHECK(p.l1 > prev_end);
    CHECK(p.l1 < p.l2);
    CHECK(p.lambda1 * p.lambda2 < 0);
    CHECK(std::abs(p.lambda1) > 0.01);
    CHECK(std::abs(p.lambda2) > 0.01);
    prev_end = p.l2;
  }
}

TEST_CASE("geodesic restriction is real and has the right parity") {
  const auto& f = basis(48)[1];
  const auto s = eval::FormSeries::from_eigenform(f);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uy(1.1, 4);
  for (int i = 0; i < 20; ++i) {
    const double y = uy(rng);
    const auto g = geodesic_value(s, Line::ReHalf, y);
    // Oracle: sum a(n) (-1)^n e^{-2 pi n y} at 128 bits.
    PrecisionScope scope(128);
    const Real q = exp(-2 * boost::math::constants::pi<Real>() * Real(y));
    Real sum = 0, qn = 1;
    for (int n = 1; n <= f.truncation(); ++n) {
      qn *= q;
      sum += (n % 2 ? -1 : 1) * f.a(n) * qn;
    }
    const double direct = sum.convert_to<double>();
    CHECK(g.value * std::exp(g.log_scale) == doctest::Approx(direct).epsilon(1e-12));
  }
  for (int l = 1; l <= 6; ++l) {
    const auto v = eval::eval_logF_mp(s, Real(0), Real(y_ell(48, l)), 128);
    CHECK(abs(sin(v.phase)) < Real(1e-20));
  }
}

TEST_CASE("geodesic zeros and region counts") {
  for (int k : {48, 80}) {
    for (const auto& f : basis(k)) {
      const auto s = eval::FormSeries::from_eigenform(f);
      CAPTURE(k);
      const auto g0 = geodesic_zero_count(s, 1.2, Line::Re0);
      const auto gh = geodesic_zero_count(s, 1.2, Line::ReHalf);
      for (const auto* g : {&g0, &gh})
        for (const auto& z : g->zeros) {
          const auto a = geodesic_value(s, g->line, z.lo), b = geodesic_value(s, g->line, z.hi);
          CHECK(a.verified());
          CHECK(b.verified());
          CHECK(a.sign() * b.sign() < 0);
          CHECK(z.hi - z.lo < 1e-9);
        }
      long prev = LONG_MAX;
      for (double Y : {1.2, 1.5, 2.0, 3.0}) {
        const auto c = cusp_region_count(s, Y);
        CHECK(c.count <= prev);
        prev = c.count;
      }
      const auto c = cusp_region_count(s, 1.2);
      CHECK(c.count >= g0.count() + gh.count());
      CHECK(cusp_region_count(s, c.y_top + 1).count == 0);

      // Independent count from the full zero search.
      const auto all = zeros::zeros_in_F(s);
      long above = 0;
      for (const auto& z : all.zeros)
        if (z.location.y > 1.2) above += z.multiplicity;
      CHECK(c.count == above);
    }
  }
  const auto s = eval::FormSeries::from_eigenform(basis(24)[0]);
  CHECK_THROWS_AS(cusp_region_count(s, 1.0), Error);
  CHECK_THROWS_AS(geodesic_zero_count(s, 0.9, Line::Re0), Error);
}

TEST_CASE("each sign-change pair forces a geodesic zero") {
  int pairs = 0;
  for (int k : {80, 100}) {
    const auto [lo, hi] = lemma_window(k);
    for (const auto& f : eigen::eigenbasis(k, 240, 128)) {
      const auto s = eval::FormSeries::from_eigenform(f);
      const auto g0 = geodesic_zero_count(s, 1.01, Line::Re0);
      for (const auto& p : sign_changes(f, lo, hi, Parity::All, 0.1)) {
        const double ylo = y_ell(k, std::max(p.l1, p.l2)), yhi = y_ell(k, std::min(p.l1, p.l2));
        bool found = false;
        for (const auto& z : g0.zeros) found = found || (z.y > ylo && z.y < yhi);
        CAPTURE(k);
        CAPTURE(p.l1);
        CHECK(found);
        ++pairs;
      }
    }
  }
  CHECK(pairs > 0);
}

TEST_CASE("short interval statistics") {
  const auto& f = delta_long();
  const long X = 10000;
  double block = 0;
  for (long n = X + 1; n <= 2 * X; ++n) block += f.lam_d(static_cast<int>(n)) * f.lam_d(static_cast<int>(n));
  const auto st = short_interval_stats(f, X, 100, 1000, 1);
  const double c = 6 / (kPi * kPi) * st.l1sym2;
  CHECK(block / X == doctest::Approx(c).epsilon(0.02));
  CHECK(st.lambda.samples == 1000);
  CHECK(st.square.main_term > 0);
  CHECK(std::abs(st.square.mean) < 0.2 * st.square.main_term);
  CHECK(st.lambda.mean_square < 10.0 * X / 100 * std::pow(std::log(X), 2));
  const auto again = short_interval_stats(f, X, 100, 1000, 1);
  CHECK(again.lambda.mean == st.lambda.mean);

  // Brute-force oracle on the same sample points; L > X leaves most intervals empty.
  const auto tiny = short_interval_stats(f, 100, 1000, 200, 3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(100.0, 200.0);
  double m1 = 0, m2 = 0;
  int empty = 0;
  for (int i = 0; i < 200; ++i) {
    const double x = ux(rng);
    double s = 0;
    for (long n = static_cast<long>(std::floor(x)) + 1; n <= x + x / 1000; ++n) s += f.lam_d(static_cast<int>(n));
    empty += s == 0;
    m1 += s / 200;
    m2 += s * s / 200;
  }
  CHECK(empty > 100);
  CHECK(tiny.lambda.mean == doctest::Approx(m1).epsilon(1e-12));
  CHECK(tiny.lambda.mean_square == doctest::Approx(m2).epsilon(1e-12));
  try {
    short_interval_stats(basis(24)[0], 1000, 10, 10, 1);
    FAIL("expected InsufficientTruncation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientTruncation);
    CHECK(e.required().value() == 2200);
  }
}

TEST_CASE("the sign function g") {
  const auto& f = delta_long();
  const double delta = 0.1;
  const auto g = g_values(f, delta, 20100);
  for (long n = 2; n <= 20100; n *= 2) CHECK(g[n] == 0);
  for (long n = 1; n <= 20100; ++n)
    if (g[n] != 0) {
      CHECK(n % 2 == 1);
      CHECK(std::abs(f.lam_d(static_cast<int>(n))) >= std::pow(static_cast<double>(n), -delta) * (1 - 1e-12));
      CHECK(g[n] * f.lam_d(static_cast<int>(n)) > 0);
    }
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<long> u(1, 140);
  for (int i = 0; i < 500; ++i) {
    const long a = u(rng), b = u(rng);
    if (std::gcd(a, b) == 1) CHECK(g[a * b] == g[a] * g[b]);
  }
  const auto st = g_interval_stats(f, delta, 10000, 100, 1000, 1);
  CHECK(st.short_g.size() == 1000);
  CHECK(st.long_abs_g > 0);
  CHECK(st.long_abs_g <= 1);
  CHECK(st.max_gap_g >= 0);
  CHECK(st.violation_fraction >= 0);
  CHECK(st.violation_fraction <= 1);
  CHECK_THROWS_AS(g_interval_stats(basis(24)[0], delta, 10000, 100), Error);
}
