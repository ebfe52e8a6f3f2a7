#include "mflab/common.hpp"

#include <cmath>
#include <mpfr.h>

namespace mflab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidWeight: return "InvalidWeight";
    case ErrorKind::InvalidTruncation: return "InvalidTruncation";
    case ErrorKind::InsufficientTruncation: return "InsufficientTruncation";
    case ErrorKind::NoCuspForms: return "NoCuspForms";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::ReductionError: return "ReductionError";
    case ErrorKind::QuadratureError: return "QuadratureError";
    case ErrorKind::ContourThroughZero: return "ContourThroughZero";
    case ErrorKind::SamplingError: return "SamplingError";
    case ErrorKind::UnresolvedCluster: return "UnresolvedCluster";
    case ErrorKind::RegionError: return "RegionError";
    case ErrorKind::SingularQuadError: return "SingularQuadError";
    case ErrorKind::WindowError: return "WindowError";
    case ErrorKind::BudgetError: return "BudgetError";
    case ErrorKind::CacheError: return "CacheError";
  }
  return "Unknown";
}

unsigned digits10_for_bits(int bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

PrecisionScope::PrecisionScope(int bits) : saved_digits10_(Real::default_precision()) {
  Real::default_precision(digits10_for_bits(bits));
}

PrecisionScope::~PrecisionScope() { Real::default_precision(saved_digits10_); }

Real make_real(double v, int bits) {
  Real r(0, digits10_for_bits(bits));
  mpfr_set_d(r.backend().data(), v, MPFR_RNDN);
  return r;
}

Real make_real(const std::string& decimal, int bits) {
  Real r(0, digits10_for_bits(bits));
  if (mpfr_set_str(r.backend().data(), decimal.c_str(), 10, MPFR_RNDN) != 0)
    throw Error(ErrorKind::InvalidArgument, "not a decimal number: " + decimal);
  return r;
}

std::string real_to_hex(const Real& v) {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%Ra", v.backend().data());
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

Real parse_real_hex(const std::string& s, int bits) {
  Real r(0, digits10_for_bits(bits));
  mpfr_set_prec(r.backend().data(), bits);
  if (mpfr_set_str(r.backend().data(), s.c_str(), 0, MPFR_RNDN) != 0)
    throw Error(ErrorKind::CacheError, "malformed hexadecimal float: " + s);
  return r;
}

std::string real_to_decimal(const Real& v, int digits) {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Rg", digits, v.backend().data());
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

std::vector<int> primes_up_to(int limit) {
  std::vector<int> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(limit + 1, false);
  for (int p = 2; p <= limit; ++p) {
    if (composite[p]) continue;
    primes.push_back(p);
    for (long m = static_cast<long>(p) * p; m <= limit; m += p) composite[m] = true;
  }
  return primes;
}

bool is_prime(long n) {
  if (n < 2) return false;
  for (long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

std::vector<int> divisor_counts(int limit) {
  std::vector<int> d(limit + 1, 0);
  for (int a = 1; a <= limit; ++a)
    for (int m = a; m <= limit; m += a) ++d[m];
  return d;
}

}  // namespace mflab
