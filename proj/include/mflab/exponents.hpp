#pragma once

#include <functional>

namespace mflab::expo {

using Num = long double;

struct Extremum {
  Num arg = 0, value = 0;
};

/// Max of fn on [a, b]: grid scan, golden-section refinement of the best
/// bracket to width tol, endpoints compared explicitly.
Extremum inner_max(const std::function<Num(Num)>& fn, Num a, Num b, Num tol = 1e-12);
/// Golden-section minimum of a unimodal fn on [a, b] to width tol.
Extremum outer_min(const std::function<Num(Num)>& fn, Num a, Num b, Num tol = 1e-10);

// Objectives in (parameter, lambda), lambda = |lambda_f(p)|.
Num beta_objective(Num beta, Num lam);
Num alpha_simplified(Num alpha, Num lam);  // lambda in [0, 1]
Num alpha_exact(Num alpha, Num lam);       // lambda in [0, 2]

/// (1 - a)(13 - 15a) / (4(3 - a)), the inner max of alpha_simplified for a in [1/3, 1].
Num alpha_closed_form(Num alpha);

struct Minimax {
  double param = 0;     // optimal beta or alpha
  double value = 0;     // min over param of the inner max
  double lambda = 0;    // maximizing lambda at the optimum
};

Minimax minimax_beta(double inner_tol = 1e-12, double outer_tol = 1e-10);
/// Simplified objective over lambda in [0, 1], alpha in [lo, hi].
Minimax minimax_alpha(double lo = 1.0 / 3, double hi = 1, double inner_tol = 1e-12, double outer_tol = 1e-10);

struct ClosedFormCheck {
  int points = 0;
  double max_deviation = 0;  // |numeric - closed| / max(1, |closed|)
  double worst_alpha = 0;
};
/// Uniform grid of `points` alphas on [1/3, 1].
ClosedFormCheck closed_form_check(int points = 100, double inner_tol = 1e-12);

struct ExactObjectiveReport {
  double alpha = 0;               // alpha at which the branches are examined
  double simplified_max = 0;      // simplified objective, lambda in [0, 1]
  double exact_max_low = 0;       // exact objective, lambda in [0, 1]
  double exact_max_high = 0;      // exact objective, lambda in [1, 2]
  double exact_high_argmax = 0;
  // Pointwise comparison on [0, 1]: max over the grid of exact - simplified.
  double max_exact_minus_simplified = 0;
  bool exact_le_simplified = false;   // the quoted pointwise inequality
  bool high_branch_below_twelfth = false;  // exact_max_high <= -1/12
  bool high_branch_dominated = false;      // exact_max_high <= exact_max_low
  Minimax exact_minimax;          // exact objective over lambda in [0, 2], alpha in [1/3, 1]
  double gap = 0;                 // exact_minimax.value - simplified minimax value
};
ExactObjectiveReport exact_alpha_objective_report(int grid = 1001);

struct ExponentResult {
  double beta = 0, beta_minimax = 0;
  double alpha = 0, alpha_minimax = 0;
  double kappa = 0, delta = 0, eta1 = 0, eta2 = 0;
  double alpha_unrestricted = 0, alpha_unrestricted_minimax = 0;  // alpha over [0, 1]
};
ExponentResult derived_exponents();

}  // namespace mflab::expo
