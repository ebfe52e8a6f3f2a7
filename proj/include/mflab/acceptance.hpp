#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mflab::accept {

struct Config {
  std::uint64_t seed = 1;
  int precision_bits = 128;
  std::optional<std::string> cache_dir;
  /// Criterion ids to run (empty: 1..9).
  std::vector<int> only;
};

struct Criterion {
  int id = 0;
  std::string title;
  bool informational = false;
  bool pass = false;
  double budget_seconds = 0;  // 0: no budget
  double seconds = 0;         // wall time, never written to the report
  std::string summary;
  nlohmann::ordered_json details;

  bool within_budget() const { return budget_seconds <= 0 || seconds <= budget_seconds; }
  bool ok() const { return informational || (pass && within_budget()); }
};

struct Suite {
  Config config;
  std::vector<Criterion> criteria;

  bool all_ok() const;
  /// Deterministic report: no timings, fixed key order.
  nlohmann::ordered_json report() const;
  std::string report_text() const;
};

using Progress = std::function<void(const Criterion&)>;

/// Runs the selected criteria in id order; `progress` is called after each one.
Suite run(const Config& config, const Progress& progress = {});

/// Criterion 10: two report texts must agree byte for byte.
Criterion determinism(const std::string& first, const std::string& second);

/// "C3  PASS  valence ...  (0.4 s / 300 s)"
std::string status_line(const Criterion& c);

/// Seeded bumps with support inside F.
struct BumpSpec {
  double x, y, wx, wy;
};
std::vector<BumpSpec> seeded_bumps(std::uint64_t seed, int count);

/// Number of steps i -> i+1 with v[i+1] <= v[i].
int nonincreasing_steps(const std::vector<double>& v);

}  // namespace mflab::accept
