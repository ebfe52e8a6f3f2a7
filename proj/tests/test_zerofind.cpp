#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mflab/zerofind.hpp"

using namespace mflab;
using namespace mflab::zeros;
using eval::FormSeries;
using eval::HPoint;

namespace {

const double kRhoY = std::sqrt(3.0) / 2;

FormSeries eigen_series(int k, int index = 0) {
  return FormSeries::from_eigenform(eigen::eigenbasis(k, 240, 128).at(index));
}

// Oracle: integral of dx dy / y^2 over the Euclidean disk, done in x with tanh-sinh.
double disk_area_oracle(const Disk& d) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto g = [&](double x) {
    const double h = std::sqrt(std::max(0.0, d.radius * d.radius - (x - d.cx) * (x - d.cx)));
    return 1 / (d.cy - h) - 1 / (d.cy + h);
  };
  return ts.integrate(g, d.cx - d.radius, d.cx + d.radius, 1e-14);
}

}  // namespace

TEST_CASE("bump derivatives match finite differences") {
  for (double t : {-0.9, -0.5, 0.0, 0.3, 0.77}) {
    const double h = 1e-5;
    CHECK(dpsi(t) == doctest::Approx((psi(t + h) - psi(t - h)) / (2 * h)).epsilon(1e-7));
    CHECK(d2psi(t) == doctest::Approx((dpsi(t + h) - dpsi(t - h)) / (2 * h)).epsilon(1e-7));
  }
  CHECK(psi(1) == 0);
  CHECK(d2psi(-1.2) == 0);
  Bump b{HPoint(0.1, 1.6), 0.2, 0.3, 2};
  const double h = 1e-4, x = 0.15, y = 1.7;
  const double fd = (b.value(x + h, y) + b.value(x - h, y) + b.value(x, y + h) + b.value(x, y - h) - 4 * b.value(x, y)) / (h * h);
  CHECK(b.laplacian(x, y) == doctest::Approx(fd).epsilon(1e-5));
  CHECK(b.hyperbolic_laplacian(x, y) == doctest::Approx(-y * y * fd).epsilon(1e-5));
}

TEST_CASE("Delta has no zeros in the interior") {
  const auto d = eigen_series(12);
  const auto z = zeros_in_region(d, Box{-0.4, 0.4, 1.1, 2.5});
  CHECK(z.zeros.empty());
  const auto v = valence_check(d);
  CHECK(v.zeros.empty());
  CHECK(v.cusp_order == 1);
  CHECK(v.weighted_total == Rational(1));
  CHECK(v.valence_holds());
}

TEST_CASE("weight 16 vanishes simply at rho") {
  const auto f = eigen_series(16);
  const auto z = zeros_in_region(f, Box{-0.55, -0.45, 0.82, 0.91});
  REQUIRE(z.zeros.size() == 1);
  CHECK(z.zeros[0].location.x == -0.5);
  CHECK(z.zeros[0].location.y == kRhoY);
  CHECK(z.zeros[0].multiplicity == 1);
  CHECK(z.zeros[0].elliptic_weight == Rational(1, 3));
  CHECK(winding_number(f, Box{-0.5 - z.zeros[0].box_radius, -0.5 + z.zeros[0].box_radius,
                              kRhoY - z.zeros[0].box_radius, kRhoY + z.zeros[0].box_radius}) == 1);
}

TEST_CASE("boundary through a zero is perturbed") {
  const auto e4 = FormSeries::from_eisenstein(4, 200);
  const Box through{-0.5, -0.4, 0.8, 0.95};
  CHECK_THROWS_AS(winding_number(e4, through), Error);
  try {
    winding_number(e4, through);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ContourThroughZero);
  }
  const auto z = zeros_in_region(e4, through);
  REQUIRE(z.zeros.size() == 1);
  CHECK(z.zeros[0].elliptic_weight == Rational(1, 3));
}

TEST_CASE("valence of Eisenstein series") {
  for (int k = 4; k <= 30; k += 2) {
    const auto e = FormSeries::from_eisenstein(k, 200);
    const auto v = valence_check(e);
    CAPTURE(k);
    CHECK(v.cusp_order == 0);
    CHECK(v.weighted_total == Rational(k, 12));
  }
  const auto v4 = valence_check(FormSeries::from_eisenstein(4, 200));
  REQUIRE(v4.zeros.size() == 1);
  CHECK(v4.zeros[0].elliptic_weight == Rational(1, 3));
  const auto v8 = valence_check(FormSeries::from_eisenstein(8, 200));
  REQUIRE(v8.zeros.size() == 1);
  CHECK(v8.zeros[0].multiplicity == 2);
  const auto v6 = valence_check(FormSeries::from_eisenstein(6, 200));
  REQUIRE(v6.zeros.size() == 1);
  CHECK(v6.zeros[0].elliptic_weight == Rational(1, 2));
  CHECK(v6.zeros[0].location.x == 0);
  CHECK(v6.zeros[0].location.y == 1);
}

TEST_CASE("valence of eigenforms") {
  for (int index : {0, 1}) {
    const auto v = valence_check(eigen_series(24, index));
    CHECK(v.cusp_order == 1);
    CHECK(v.weighted_total - Rational(v.cusp_order) == Rational(1));
    CHECK(v.valence_holds());
  }
  for (int k : {36, 48, 60}) {
    const auto basis = eigen::eigenbasis(k, 240, 128);
    for (const auto& f : basis) {
      CAPTURE(k);
      const auto v = valence_check(FormSeries::from_eigenform(f));
      CHECK(v.valence_holds());
      for (const auto& z : v.zeros) {
        CHECK(eval::in_fundamental_domain(z.location, 1e-9));
        CHECK(z.residual < 1e-6 * std::exp(eval::eval_logF(FormSeries::from_eigenform(f), HPoint(0, 1.2)).log_mag) + 1e-300);
      }
    }
  }
}

TEST_CASE("zero sets are mirror symmetric") {
  const auto basis = eigen::eigenbasis(48, 240, 128);
  for (const auto& f : basis) {
    const auto v = valence_check(FormSeries::from_eigenform(f));
    for (const auto& z : v.zeros) {
      if (std::abs(z.location.x) < 1e-8 || std::abs(z.location.x + 0.5) < 1e-8) continue;
      if (std::abs(std::hypot(z.location.x, z.location.y) - 1) < 1e-8) continue;
      bool found = false;
      for (const auto& w : v.zeros)
        found = found || (std::abs(w.location.x + z.location.x) < 1e-8 && std::abs(w.location.y - z.location.y) < 1e-8);
      CHECK(found);
    }
  }
}

TEST_CASE("hyperbolic balls") {
  for (double r : {0.1, 0.5, 1.0}) {
    const auto d = hyperbolic_disk(HPoint(0, 3), r);
    CHECK(disk_area_oracle(d) == doctest::Approx(ball_area(r)).epsilon(1e-8));
  }
  CHECK(hyperbolic_distance(HPoint(0, 1), HPoint(0, std::exp(0.7))) == doctest::Approx(0.7).epsilon(1e-13));
  CHECK(ball_in_F(HPoint(0, 2), 0.2));
  CHECK(!ball_in_F(HPoint(0, 2), 0.5));
  CHECK(!ball_in_F(HPoint(0, 1.05), 0.2));
  CHECK(!ball_in_F(HPoint(0.45, 3), 0.1));

  const auto d = eigen_series(12);
  const auto s = ball_zero_statistic(d, HPoint(0, 2), 0.2);
  CHECK(s.count == 0);
  CHECK(s.ratio_error == doctest::Approx(-3 / kPi * ball_area(0.2)).epsilon(1e-14));
  CHECK_THROWS_AS(ball_zero_statistic(d, HPoint(0, 1.05), 0.2), Error);
}

TEST_CASE("Rudnick identity") {
  const auto d = eigen_series(12);
  const auto dz = valence_check(d);
  for (const Bump& b : {Bump{HPoint(0, 1.5), 0.3, 0.3, 1}, Bump{HPoint(0.1, 2.2), 0.25, 0.6, 1}}) {
    const auto r = rudnick_check(d, dz, b, 1e-9);
    CHECK(r.lhs == 0);
    CHECK(r.defect < 1e-4);
    CHECK(r.main_term > 0);
  }

  const auto f = eigen_series(24);
  const auto zs = valence_check(f);
  const ZeroRecord* inner = nullptr;
  for (const auto& z : zs.zeros)
    if (z.elliptic_weight == Rational(1) && Bump{z.location, 0.05, 0.05}.inside_F()) inner = &z;
  REQUIRE(inner != nullptr);
  const Bump b{HPoint(inner->location.x + 0.01, inner->location.y - 0.015), 0.05, 0.05, 1};
  REQUIRE(b.inside_F());
  const auto r = rudnick_check(f, zs, b, 1e-9);
  CHECK(r.lhs > 0);
  CHECK(r.lhs == doctest::Approx(b.value(inner->location.x, inner->location.y)));
  CHECK(r.defect < 1e-4 * 24);

  Bump b2 = b;
  b2.scale = 2;
  const auto r2 = rudnick_check(f, zs, b2, 1e-9);
  CHECK(r2.lhs == doctest::Approx(2 * r.lhs).epsilon(1e-12));
  CHECK(r2.rhs == doctest::Approx(2 * r.rhs).epsilon(1e-7));

  CHECK_THROWS_AS(rudnick_check(f, zs, Bump{HPoint(0, 1.0), 0.1, 0.1}, 1e-8), Error);
}

TEST_CASE("Eisenstein zeros lie on the arc") {
  const auto e4 = rsd_eisenstein_zeros(4);
  REQUIRE(e4.set.zeros.size() == 1);
  CHECK(e4.max_arc_deviation < 1e-8);
  const auto e12 = rsd_eisenstein_zeros(12);
  CHECK(e12.set.weighted_total == Rational(1));
  for (int k : {20, 34, 46, 60}) {
    const auto r = rsd_eisenstein_zeros(k);
    CAPTURE(k);
    CHECK(r.max_arc_deviation < 1e-8);
    CHECK(r.set.valence_holds());
    CHECK(std::is_sorted(r.arguments.begin(), r.arguments.end()));
    for (double a : r.arguments) {
      CHECK(a >= kPi / 2 - 1e-9);
      CHECK(a <= 2 * kPi / 3 + 1e-9);
    }
  }
  CHECK_THROWS_AS(rsd_eisenstein_zeros(5), Error);
}
