#include <doctest.h>

#include <cmath>

#include "mflab/exponents.hpp"

using namespace mflab::expo;

namespace {

// Analytic oracles.
double m_beta(double b) { return -b * (1 - b) / (2 - b); }
const double kS2 = std::sqrt(2.0), kS15 = std::sqrt(15.0);

}  // namespace

TEST_CASE("golden-section primitives") {
  const auto m = inner_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0, 1);
  CHECK(m.arg == doctest::Approx(0.3).epsilon(1e-9));
  // Maximum at an endpoint.
  CHECK(inner_max([](double x) { return x; }, 0, 2).arg == 2);
  CHECK(inner_max([](double x) { return -x; }, 0, 2).arg == 0);
  // Two local maxima: the larger one wins.
  const auto two = inner_max([](double x) { return std::cos(6 * x) + 0.1 * x; }, 0, 2);
  CHECK(two.arg == doctest::Approx(2 * M_PI / 6 + 0.1 / 36).epsilon(1e-3));
  CHECK(outer_min([](double x) { return (x - 0.7) * (x - 0.7); }, 0, 1).arg == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("beta minimax") {
  for (double b : {0.0, 0.2, 0.5, 0.9, 1.0})
    CHECK(inner_max([b](double l) { return beta_objective(b, l); }, 0, 2).value ==
          doctest::Approx(m_beta(b)).epsilon(1e-12));
  const auto r = minimax_beta();
  CHECK(std::abs(r.param - (2 - kS2)) < 1e-8);
  CHECK(std::abs(r.value + (3 - 2 * kS2)) < 1e-8);
  CHECK(r.value < -1.0 / 12);
  const auto h = minimax_beta(0.5e-12, 0.5e-10);
  CHECK(std::abs(h.param - r.param) < 1e-9);
}

TEST_CASE("alpha minimax and closed form") {
  const double half = inner_max([](double l) { return alpha_simplified(0.5, l); }, 0, 1).value;
  CHECK(half == doctest::Approx(0.275).epsilon(1e-12));
  CHECK(alpha_closed_form(0.5) == doctest::Approx(0.275).epsilon(1e-15));
  const auto cf = closed_form_check(100);
  CHECK(cf.points == 100);
  CHECK(cf.max_deviation < 1e-9);

  const auto r = minimax_alpha();
  CHECK(std::abs(r.param - (3 - 8 / kS15)) < 1e-6);
  CHECK(std::abs(r.value - (-31.0 / 2 + 4 * kS15)) < 1e-8);
  CHECK(std::abs(r.value + 0.008066615) < 1e-8);
  const auto h = minimax_alpha(1.0 / 3, 1, 0.5e-12, 0.5e-10);
  CHECK(std::abs(h.param - r.param) < 1e-9);
  const auto u = minimax_alpha(0, 1);
  CHECK(u.value == doctest::Approx(r.value).epsilon(1e-9));
  // Below 1/3 the objective is convex in lambda and the max sits at lambda = 0.
  CHECK(inner_max([](double l) { return alpha_simplified(0.2, l); }, 0, 1).value ==
        doctest::Approx(1 - 1.5 * 0.2).epsilon(1e-12));
}

TEST_CASE("exact objective before simplification") {
  for (double a : {0.4, 0.9}) {
    CHECK(alpha_exact(a, 1) == alpha_simplified(a, 1));
    CHECK(alpha_exact(a, 1) == doctest::Approx(-(1 - a) / 4));
  }
  // (l^2 - 1)^2 = (l - 1)^2 (l + 1)^2 >= (l - 1)^2 on [0, 1], so the exact
  // objective dominates the simplified one there.
  for (int i = 0; i <= 100; ++i) {
    const double l = i / 100.0;
    CHECK(alpha_exact(0.9, l) >= alpha_simplified(0.9, l) - 1e-15);
  }
  const auto rep = exact_alpha_objective_report();
  CHECK(rep.alpha == doctest::Approx(3 - 8 / kS15).epsilon(1e-6));
  CHECK(!rep.exact_le_simplified);
  CHECK(rep.max_exact_minus_simplified > 0);
  CHECK(!rep.high_branch_below_twelfth);
  CHECK(rep.exact_max_high == doctest::Approx(-(1 - rep.alpha) / 4).epsilon(1e-9));
  CHECK(rep.exact_high_argmax == 1);
  CHECK(rep.high_branch_dominated);
  CHECK(rep.gap > 0);
  CHECK(rep.exact_minimax.value < 0);
}

TEST_CASE("derived exponents") {
  const auto e = derived_exponents();
  CHECK(std::abs(e.kappa - (31.0 / 2 - 4 * kS15)) < 1e-8);
  CHECK(std::abs(e.kappa - 0.008066615) < 1e-8);
  CHECK(e.delta == e.kappa / 7);
  CHECK(e.eta1 == 2 * e.kappa / 7);
  CHECK(e.eta2 == e.eta1 / 2);
  CHECK(std::abs(e.eta2 - e.delta) < 1e-18);
  CHECK(std::floor(e.delta * 1e6) == 1152);
  CHECK(std::abs(e.beta - (2 - kS2)) < 1e-6);
  CHECK(std::abs(e.alpha - (3 - 8 / kS15)) < 1e-6);
}
