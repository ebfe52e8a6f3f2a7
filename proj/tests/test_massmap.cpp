#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mflab/massmap.hpp"
#include "mflab/zerofind.hpp"

using namespace mflab;
using namespace mflab::mass;

namespace {

const eigen::HeckeEigenform& delta() {
  static const auto f = eval::normalized(eigen::eigenbasis(12, 600, 128)[0]);
  return f;
}

const FormSeries& delta_series() {
  static const auto s = normalized_series(delta());
  return s;
}

struct MonteCarlo {
  double mean, sigma;
};

// mu_f of [-1/2, 1/2] x [Y, inf): y = Y/u has density Y/y^2 on [Y, inf), so
// the region mass is (1/Y) E[y^k |f|^2].
MonteCarlo mc_cusp(const FormSeries& f, double Y, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-0.5, 0.5), uu(0.0, 1.0);
  double s = 0, s2 = 0;
  for (int i = 0; i < samples; ++i) {
    const double u = 1 - uu(rng);
    const double v = std::exp(2 * eval::eval_logF(f, eval::HPoint(ux(rng), Y / u)).log_mag) / Y;
    s += v;
    s2 += v * v;
  }
  const double mean = s / samples;
  return {mean, std::sqrt((s2 / samples - mean * mean) / samples)};
}

}  // namespace

TEST_CASE("region grammar") {
  CHECK(std::holds_alternative<FundamentalDomain>(parse_region("fundamental")));
  const auto r = std::get<Rectangle>(parse_region("rect:-0.5,0.5,1,2"));
  CHECK(r.x0 == -0.5);
  CHECK(r.y1 == 2);
  const auto b = std::get<HyperbolicBall>(parse_region("ball:0,2,0.2"));
  CHECK(b.center.y == 2);
  CHECK(std::get<SiegelDomain>(parse_region("siegel:3")).Y == 3);
  for (const char* bad : {"rect:1,0,1,2", "rect:0,1,1", "ball:0,-1,1", "siegel:x", "disk:1", "fundamental:1", ""})
    CHECK_THROWS_AS(parse_region(bad), Error);
  CHECK(to_string(parse_region("siegel:3")) == "siegel:3");
}

TEST_CASE("hyperbolic areas") {
  CHECK(hyperbolic_area(FundamentalDomain{}) == doctest::Approx(kPi / 3).epsilon(1e-15));
  CHECK(hyperbolic_area(SiegelDomain{0.5}) == doctest::Approx(kPi / 3).epsilon(1e-15));
  CHECK(hyperbolic_area(SiegelDomain{2}) == 0.5);
  // Oracle: the same areas by quadrature of 1/y^2.
  quad::Options opt;
  opt.rel_tol = 1e-13;
  for (const Rectangle& r : {Rectangle{-0.5, 0.5, 1, 4}, Rectangle{-0.2, 0.3, 0.9, 1.3}, Rectangle{0.1, 0.4, 1.5, 3.5}}) {
    const auto q = quad::integrate([](double, double y) { return 1 / (y * y); }, {{r.x0, r.x1, r.y0, r.y1}}, opt);
    CHECK(std::abs(q.value - rectangle_area(r)) < 1e-10);
  }
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double Y : {0.9, 0.95}) {
    const double a = std::sqrt(1 - Y * Y);
    auto g = [](double x) { return 1 / eval::arc(x); };
    const double num = ts.integrate(g, -a, a) + (1 - 2 * a) / Y;
    CHECK(hyperbolic_area(SiegelDomain{Y}) == doctest::Approx(num).epsilon(1e-12));
  }
  CHECK(rectangle_in_F({-0.5, 0.5, 1, 2}));
  CHECK(!rectangle_in_F({-0.5, 0.5, 0.9, 2}));
  CHECK(rectangle_in_F({0.45, 0.5, 0.9, 2}));
}

TEST_CASE("mass of F and additivity") {
  const auto& f = delta_series();
  CHECK(mass_region(f, FundamentalDomain{}, 1e-9).value == doctest::Approx(1).epsilon(1e-6));
  const double a = mass_region(f, Rectangle{-0.5, 0.1, 1, 2}, 1e-10).value;
  const double b = mass_region(f, Rectangle{0.1, 0.5, 1, 2}, 1e-10).value;
  const double c = mass_region(f, Rectangle{-0.5, 0.5, 1, 2}, 1e-10).value;
  CHECK(std::abs(a + b - c) < 2e-10 + 1e-12);
  const double d = mass_region(f, Rectangle{-0.5, 0.5, 2, INFINITY}, 1e-10).value;
  CHECK(std::abs(c + d - cusp_mass(f, 1)) < 1e-9);
  CHECK(mass_region(f, SiegelDomain{2}, 1e-10).value == doctest::Approx(d).epsilon(1e-8));
  CHECK(mass_region(f, Rectangle{-0.3, 0.3, 1.1, 1.9}, 1e-10).value < c);
}

TEST_CASE("cusp mass against Monte Carlo") {
  const auto& f = delta_series();
  const auto mc1 = mc_cusp(f, 1, 1000000, 7);
  const double v1 = mass_region(f, Rectangle{-0.5, 0.5, 1, INFINITY}, 1e-10).value;
  CHECK(std::abs(v1 - mc1.mean) < 3 * mc1.sigma);
  const auto mc3 = mc_cusp(f, 3, 1000000, 11);
  CHECK(std::abs(cusp_mass(f, 3) - mc3.mean) < 3 * mc3.sigma);

  double prev = 2;
  for (double Y = 1; Y < 8; Y += 0.25) {
    const double m = cusp_mass(f, Y);
    CHECK(m <= 1);
    CHECK(m < prev);
    prev = m;
  }
  CHECK(cusp_mass(f, 20) < 1e-20);
  CHECK_THROWS_AS(cusp_mass(f, 0.9), Error);
}

TEST_CASE("ball mass") {
  const auto& f = delta_series();
  const HyperbolicBall b{eval::HPoint(0, 2), 0.2};
  const auto d = zeros::hyperbolic_disk(b.center, b.r);
  // Oracle: polar coordinates about the Euclidean centre.
  quad::Options opt;
  opt.abs_tol = 1e-13;
  const auto q = quad::integrate(
      [&](double rho, double th) {
        const double x = d.cx + rho * std::cos(th), y = d.cy + rho * std::sin(th);
        return std::exp(2 * eval::eval_logF(f, eval::HPoint(x, y)).log_mag) / (y * y) * rho;
      },
      {{0, d.radius, 0, 2 * kPi}}, opt);
  CHECK(mass_region(f, b, 1e-11).value == doctest::Approx(q.value).epsilon(1e-9));
}

TEST_CASE("rectangle discrepancy") {
  const auto rep = que_discrepancy(delta(), 8, 4);
  CHECK(rep.weight == 12);
  CHECK(!rep.table.empty());
  double mx = 0;
  for (const auto& e : rep.table) {
    CHECK(rectangle_in_F(e.rect));
    mx = std::max(mx, e.discrepancy);
  }
  CHECK(rep.sup_discrepancy == mx);
  CHECK(rep.sup_discrepancy >= 0);
  CHECK(rep.sup_discrepancy < 1);
  // One table entry against a direct quadrature.
  const auto& e = rep.table[rep.table.size() / 2];
  CHECK(std::abs(e.mass - mass_region(delta_series(), e.rect, 1e-11).value) < 1e-9);
  CHECK(rep.euler_products.P > 100);
  try {
    que_discrepancy(delta(), 200, 4, 10000);
    FAIL("expected BudgetError");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::BudgetError);
    CHECK(err.required().value() == 101);
  }
}

TEST_CASE("mass hypothesis") {
  const auto& f = delta_series();
  const auto low = mass_hypothesis(f, std::log(12.0) / 12);
  CHECK(!low.precondition_ok);
  CHECK(!low.holds);
  const auto r = mass_hypothesis(f, 0.5);
  CHECK(r.precondition_ok);
  CHECK(r.holds);
  CHECK(r.centers > 0);
  bool prev = false;
  for (double h : {0.25, 0.3, 0.4, 0.6}) {
    const auto s = mass_hypothesis(f, h, 0.125, 0.02);
    CHECK((!prev || s.holds));
    prev = s.holds;
  }
  const auto a = mass_hypothesis(f, 0.3, 0.125, 0.02), b = mass_hypothesis(f, 0.6, 0.125, 0.02);
  CHECK(b.log_min_local_max >= a.log_min_local_max);
}

TEST_CASE("sup norm") {
  const auto& f = delta_series();
  const auto coarse = sup_norm_report(f, 9), fine = sup_norm_report(f, 17);
  CHECK(coarse.grid_max > 0);
  CHECK(coarse.grid_max <= fine.grid_max);
  CHECK(fine.max >= fine.grid_max);
  CHECK(eval::in_fundamental_domain(fine.argmax, 1e-9));
  CHECK(fine.k_quarter == doctest::Approx(std::pow(12.0, 0.25)));
}

TEST_CASE("family ball discrepancy") {
  const auto none = family_ball_discrepancy(14);
  CHECK(none.forms == 0);
  CHECK(none.per_form_sup.empty());
  BallFamily fam;
  fam.centers = {eval::HPoint(0, 2), eval::HPoint(0.1, 1.5)};
  fam.radii = {0.2, 0.4};
  const auto one = family_ball_discrepancy(12, fam, 400, 1e-8);
  REQUIRE(one.forms == 1);
  CHECK(one.mean_square == doctest::Approx(one.per_form_sup[0] * one.per_form_sup[0]));
  CHECK(one.balls == 4);
  CHECK(one.balls_in_F == 2);
  CHECK(one.reference == doctest::Approx(std::pow(12.0, -1.0 / 21)));
}
