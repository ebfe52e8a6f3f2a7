#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

namespace mflab {

/// Extended-precision real with runtime precision (MPFR backend).
using Real = boost::multiprecision::mpfr_float;

enum class ErrorKind {
  InvalidArgument,
  InvalidWeight,
  InvalidTruncation,
  InsufficientTruncation,
  NoCuspForms,
  DegenerateSpectrum,
  CutoffTooSmall,
  RangeError,
  ReductionError,
  QuadratureError,
  ContourThroughZero,
  SamplingError,
  UnresolvedCluster,
  RegionError,
  SingularQuadError,
  WindowError,
  BudgetError,
  CacheError,
};

const char* to_string(ErrorKind kind);

/// Every computational failure in the library is reported through this type.
/// `required` carries a suggested parameter (e.g. the truncation needed).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::optional<long> required = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), required_(required) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<long> required() const noexcept { return required_; }

 private:
  ErrorKind kind_;
  std::optional<long> required_;
};

/// Sets the thread default MPFR precision for the lifetime of the object.
class PrecisionScope {
 public:
  explicit PrecisionScope(int bits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_digits10_;
};

unsigned digits10_for_bits(int bits);
Real make_real(double v, int bits);
Real make_real(const std::string& decimal, int bits);

/// Bit-exact hexadecimal rendering of an MPFR value (round-trips through parse_real_hex).
std::string real_to_hex(const Real& v);
Real parse_real_hex(const std::string& s, int bits);
/// Decimal rendering with `digits` significant digits.
std::string real_to_decimal(const Real& v, int digits);

inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Primes up to `limit` (inclusive), ascending.
std::vector<int> primes_up_to(int limit);
bool is_prime(long n);
/// Number of divisors d(n) for 0 <= n <= limit (entry 0 unused).
std::vector<int> divisor_counts(int limit);

}  // namespace mflab
