#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mflab/eigenforms.hpp"
#include "mflab/qseries.hpp"

namespace mflab::cache {

inline constexpr int kVersion = 1;

/// Miller basis and Hecke eigenbasis of S_k at truncation N.
struct CacheFile {
  int version = kVersion;
  int weight = 0;
  int terms = 0;
  int precision_bits = 128;
  std::vector<qseries::QExpansion> basis;
  std::vector<eigen::HeckeEigenform> forms;
};

CacheFile build(int k, int N, int precision_bits);
CacheFile build(int k, qseries::FormRing& ring, int precision_bits);

/// JSON text. Integers are decimal strings, MPFR values hexadecimal (%Ra),
/// doubles C99 hex floats; each form and the file carry an FNV-1a checksum.
std::string to_json(const CacheFile& c);
/// Inverse of to_json; CacheError on version mismatch, bad checksum or malformed input.
CacheFile from_json(const std::string& text);

void store(const CacheFile& c, const std::string& path);
CacheFile load(const std::string& path);

std::string file_name(int k, int N, int precision_bits);

/// eigenbasis(k, N, bits), read from `dir` when present there, written otherwise.
std::vector<eigen::HeckeEigenform> eigenbasis(int k, int N, int precision_bits, const std::optional<std::string>& dir);
/// Same, computing from a shared ring (truncation N = ring.truncation()) on a miss.
std::vector<eigen::HeckeEigenform> eigenbasis(int k, qseries::FormRing& ring, int precision_bits,
                                              const std::optional<std::string>& dir);

std::uint64_t fnv1a(const std::string& s);

}  // namespace mflab::cache
