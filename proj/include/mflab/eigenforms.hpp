#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "mflab/common.hpp"
#include "mflab/qseries.hpp"

namespace mflab::eigen {

using RationalMatrix = std::vector<std::vector<mpq_class>>;
/// Polynomial coefficients, constant term first.
using RationalPoly = std::vector<mpq_class>;

/// Matrix of T_p on the echelon basis: row i holds the first d coefficients
/// (n = 1..d) of T_p g_i.
RationalMatrix hecke_matrix(int k, int p, const std::vector<qseries::QExpansion>& basis);

/// det(x I - A), monic.
RationalPoly characteristic_polynomial(const RationalMatrix& a);
/// Real roots of a squarefree rational polynomial, ascending, to `bits` bits.
/// Repeated roots raise DegenerateSpectrum.
std::vector<Real> real_roots(const RationalPoly& p, int bits);

struct L1Sym2 {
  double value = 0;
  double error = 0;
  std::string method;
};

struct HeckeEigenform {
  int weight = 0;
  int precision_bits = 128;
  Real t2_eigenvalue;
  /// a_f(1..d) = coordinates in the echelon basis.
  std::vector<Real> coordinates;
  std::shared_ptr<const std::vector<Real>> a_coeffs;  // a_f(0..N), a_f(1) = 1
  std::shared_ptr<const std::vector<Real>> lambda;    // lambda_f(0..N)
  std::shared_ptr<const std::vector<double>> lambda_d;
  /// log |a_f(1)| for the multiple with <F, F> = 1, i.e. -log<f, f> / 2.
  std::optional<double> log_norm_const;
  std::optional<L1Sym2> l1sym2;

  int truncation() const { return static_cast<int>(a_coeffs->size()) - 1; }
  const Real& a(int n) const { return a_coeffs->at(n); }
  const Real& lam(int n) const { return lambda->at(n); }
  double lam_d(int n) const { return lambda_d->at(n); }
};

/// Hecke eigenbasis of S_k with a_f(1) = 1, ordered by ascending T_2 eigenvalue.
std::vector<HeckeEigenform> eigenbasis(int k, int N, int precision_bits = 128);
std::vector<HeckeEigenform> eigenbasis(int k, qseries::FormRing& ring, int precision_bits = 128);

struct HeckeResiduals {
  double multiplicativity = 0;  // max |lambda(mn) - lambda(m) lambda(n)|, gcd = 1
  double recursion = 0;         // max |lambda(p) lambda(p^v) - lambda(p^{v+1}) - lambda(p^{v-1})|
  double deligne_excess = 0;    // max (|lambda(p)| - 2), may be negative
  int deligne_worst_prime = 0;
};
/// Checks the Hecke relations for n <= nmax and Deligne's bound for p <= pmax.
HeckeResiduals hecke_residuals(const HeckeEigenform& f, int nmax, int pmax);

/// lambda(p^2), read from the coefficients when p^2 <= N, otherwise lambda(p)^2 - 1.
double lambda_p2(const HeckeEigenform& f, int p);

/// Truncated Euler product for L(1, sym^2 f) over p <= P.
L1Sym2 l1_sym2(const HeckeEigenform& f, int P);
/// Same product from prescribed lambda(p^2) values (aligned with primes_up_to(P)).
L1Sym2 l1_sym2_from(const std::vector<double>& lambda_p2_values, int P);
/// L(1, sym^2 f) from the Rankin-Selberg sum of lambda(n)^2 e^{-n/X},
/// Richardson-extrapolated in X. Uses all stored coefficients.
L1Sym2 l1_sym2_smoothed(const HeckeEigenform& f);
/// L(1, sym^2 f) from the approximate functional equation with cutoff weight
/// e^{a u^2}; needs lambda(p) up to a length of order k (InsufficientTruncation).
L1Sym2 l1_sym2_afe(const HeckeEigenform& f, double a = 0);

struct EulerProducts {
  struct Product {
    double value = 1;
    double min_factor = 1;
    double max_factor = 1;
    std::vector<int> nonpositive_factor_primes;
  };
  int P = 0;
  Product prod_n, prod_eis, prod_hol, prod_hol_half;
};

EulerProducts euler_products(const HeckeEigenform& f, int P);
/// Products from prescribed lambda(p), lambda(p^2) (aligned with primes_up_to(P)).
EulerProducts euler_products_from(const std::vector<double>& lambda_p, const std::vector<double>& lambda_p2, int P);

struct PrimeSumStats {
  int weight = 0, P = 0, Q = 0, v = 0;
  std::vector<double> per_form;  // |sum_{P<p<=Q} lambda_f(p^v)/p|^2
  double family_sum = 0;
};
PrimeSumStats family_prime_sum_stats(const std::vector<HeckeEigenform>& family, int P, int Q, int v);
PrimeSumStats family_prime_sum_stats(int k, int P, int Q, int v);

}  // namespace mflab::eigen
