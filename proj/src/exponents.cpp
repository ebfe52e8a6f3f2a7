#include "mflab/exponents.hpp"

#include <algorithm>
#include <cmath>

namespace mflab::expo {

namespace {

const Num kInvPhi = (std::sqrt(Num(5)) - 1) / 2;

// Golden-section search for the max of fn on [a, b].
Extremum golden_max(const std::function<Num(Num)>& fn, Num a, Num b, Num tol) {
  Num c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  Num fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  const Num x = (a + b) / 2;
  return {x, fn(x)};
}

Minimax to_minimax(const Extremum& o, Num lam) {
  return {static_cast<double>(o.arg), static_cast<double>(o.value), static_cast<double>(lam)};
}

}  // namespace

Extremum inner_max(const std::function<Num(Num)>& fn, Num a, Num b, Num tol) {
  constexpr int n = 256;
  int best = 0;
  Num fbest = fn(a);
  for (int i = 1; i <= n; ++i) {
    const Num v = fn(a + (b - a) * i / n);
    if (v > fbest) fbest = v, best = i;
  }
  const Num lo = a + (b - a) * std::max(best - 1, 0) / n, hi = a + (b - a) * std::min(best + 1, n) / n;
  Extremum r = golden_max(fn, lo, hi, tol);
  for (Num e : {a, b})
    if (fn(e) >= r.value) r = {e, fn(e)};
  return r;
}

Extremum outer_min(const std::function<Num(Num)>& fn, Num a, Num b, Num tol) {
  const auto r = golden_max([&](Num x) { return -fn(x); }, a, b, tol);
  return {r.arg, -r.value};
}

Num beta_objective(Num beta, Num lam) {
  return -beta / 2 * (lam - 1) * (lam - 1) - (1 - beta) * lam * lam;
}

Num alpha_simplified(Num alpha, Num lam) {
  const Num t = lam - 1;
  return -alpha / 2 * t * t - (1 - alpha) * (lam * lam - 1 - t * t / 4 + Num(0.25));
}

Num alpha_exact(Num alpha, Num lam) {
  const Num u = lam * lam - 1;
  return -alpha / 2 * (lam - 1) * (lam - 1) - (1 - alpha) * (u - u * u / 4 + Num(0.25));
}

Num alpha_closed_form(Num alpha) { return (1 - alpha) * (13 - 15 * alpha) / (4 * (3 - alpha)); }

Minimax minimax_beta(double inner_tol, double outer_tol) {
  auto inner = [&](Num b) { return inner_max([b](Num l) { return beta_objective(b, l); }, 0, 2, inner_tol); };
  const auto o = outer_min([&](Num b) { return inner(b).value; }, 0, 1, outer_tol);
  return to_minimax(o, inner(o.arg).arg);
}

Minimax minimax_alpha(double lo, double hi, double inner_tol, double outer_tol) {
  auto inner = [&](Num a) { return inner_max([a](Num l) { return alpha_simplified(a, l); }, 0, 1, inner_tol); };
  const auto o = outer_min([&](Num a) { return inner(a).value; }, lo, hi, outer_tol);
  return to_minimax(o, inner(o.arg).arg);
}

ClosedFormCheck closed_form_check(int points, double inner_tol) {
  ClosedFormCheck c;
  c.points = points;
  for (int i = 0; i < points; ++i) {
    const Num a = Num(1) / 3 + (Num(2) / 3) * i / (points - 1);
    const Num num = inner_max([a](Num l) { return alpha_simplified(a, l); }, 0, 1, inner_tol).value;
    const Num closed = alpha_closed_form(a);
    const double dev = static_cast<double>(std::abs(num - closed) / std::max(Num(1), std::abs(closed)));
    if (dev > c.max_deviation) c.max_deviation = dev, c.worst_alpha = static_cast<double>(a);
  }
  return c;
}

ExactObjectiveReport exact_alpha_objective_report(int grid) {
  ExactObjectiveReport r;
  const Minimax simp = minimax_alpha();
  const Num a = simp.param;
  r.alpha = a;
  r.simplified_max = simp.value;
  r.exact_max_low = static_cast<double>(inner_max([a](Num l) { return alpha_exact(a, l); }, 0, 1).value);
  const auto high = inner_max([a](Num l) { return alpha_exact(a, l); }, 1, 2);
  r.exact_max_high = static_cast<double>(high.value);
  r.exact_high_argmax = static_cast<double>(high.arg);
  r.max_exact_minus_simplified = -INFINITY;
  for (int i = 0; i < grid; ++i) {
    const Num l = Num(i) / (grid - 1);
    r.max_exact_minus_simplified =
        std::max(r.max_exact_minus_simplified, static_cast<double>(alpha_exact(a, l) - alpha_simplified(a, l)));
  }
  r.exact_le_simplified = r.max_exact_minus_simplified <= 0;
  r.high_branch_below_twelfth = r.exact_max_high <= -1.0 / 12;
  r.high_branch_dominated = r.exact_max_high <= r.exact_max_low;

  auto inner = [](Num al) { return inner_max([al](Num l) { return alpha_exact(al, l); }, 0, 2); };
  const auto o = outer_min([&](Num al) { return inner(al).value; }, Num(1) / 3, 1);
  r.exact_minimax = to_minimax(o, inner(o.arg).arg);
  r.gap = r.exact_minimax.value - simp.value;
  return r;
}

ExponentResult derived_exponents() {
  ExponentResult e;
  const auto b = minimax_beta();
  const auto a = minimax_alpha();
  const auto u = minimax_alpha(0, 1);
  e.beta = b.param;
  e.beta_minimax = b.value;
  e.alpha = a.param;
  e.alpha_minimax = a.value;
  e.alpha_unrestricted = u.param;
  e.alpha_unrestricted_minimax = u.value;
  e.kappa = -a.value;
  e.delta = e.kappa / 7;
  e.eta1 = 2 * e.kappa / 7;
  e.eta2 = e.eta1 / 2;
  return e;
}

}  // namespace mflab::expo
