#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mflab/cache.hpp"
#include "mflab/evaluate.hpp"
#include "mflab/zerofind.hpp"

using namespace mflab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("mflab_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void require_same(const eigen::HeckeEigenform& a, const eigen::HeckeEigenform& b) {
  REQUIRE(a.truncation() == b.truncation());
  CHECK(a.weight == b.weight);
  CHECK(a.precision_bits == b.precision_bits);
  CHECK(a.t2_eigenvalue == b.t2_eigenvalue);
  CHECK(a.t2_eigenvalue.precision() == b.t2_eigenvalue.precision());
  REQUIRE(a.coordinates.size() == b.coordinates.size());
  for (std::size_t i = 0; i < a.coordinates.size(); ++i) CHECK(a.coordinates[i] == b.coordinates[i]);
  for (int n = 0; n <= a.truncation(); ++n) {
    CHECK(a.a(n) == b.a(n));
    CHECK(a.lam(n) == b.lam(n));
    CHECK(a.lam_d(n) == b.lam_d(n));
  }
  CHECK(a.log_norm_const == b.log_norm_const);
}

}  // namespace

TEST_CASE("FNV-1a reference values") {
  CHECK(cache::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(cache::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(cache::fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("round trip is lossless") {
  const auto c = cache::build(36, 80, 160);
  REQUIRE(c.forms.size() == 3);
  REQUIRE(c.basis.size() == 3);
  const std::string text = cache::to_json(c);
  const auto back = cache::from_json(text);
  CHECK(back.version == cache::kVersion);
  CHECK(back.weight == 36);
  CHECK(back.terms == c.terms);
  CHECK(back.precision_bits == 160);
  for (std::size_t i = 0; i < c.basis.size(); ++i) CHECK(back.basis[i].numerators() == c.basis[i].numerators());
  for (std::size_t i = 0; i < c.forms.size(); ++i) require_same(c.forms[i], back.forms[i]);
  CHECK(cache::to_json(back) == text);

  // Optional fields survive too.
  auto n = c;
  n.forms[0] = eval::normalized(c.forms[0]);
  REQUIRE(n.forms[0].log_norm_const);
  const auto nb = cache::from_json(cache::to_json(n));
  require_same(n.forms[0], nb.forms[0]);
  REQUIRE(nb.forms[0].l1sym2);
  CHECK(nb.forms[0].l1sym2->value == n.forms[0].l1sym2->value);
  CHECK(nb.forms[0].l1sym2->method == n.forms[0].l1sym2->method);

  // Spaces of dimension zero store empty lists.
  const auto empty = cache::from_json(cache::to_json(cache::build(14, 20, 128)));
  CHECK(empty.forms.empty());
  CHECK(empty.basis.empty());
}

TEST_CASE("exact coefficients are decimal strings") {
  const auto j = nlohmann::json::parse(cache::to_json(cache::build(12, 50, 128)));
  CHECK(j["eigenforms"][0]["a"][2] == "-24");
  CHECK(j["eigenforms"][0]["a"][3] == "252");
  CHECK(j["basis"][0][2] == "-24");
}

TEST_CASE("corrupted or foreign caches are rejected") {
  const std::string text = cache::to_json(cache::build(24, 40, 128));
  auto j = nlohmann::ordered_json::parse(text);

  auto v = j;
  v["version"] = cache::kVersion + 1;
  try {
    cache::from_json(v.dump());
    FAIL("version mismatch accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CacheError);
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  auto t = j;
  t["eigenforms"][1]["a"][5] = "1";
  CHECK_THROWS_AS(cache::from_json(t.dump()), Error);

  // Consistent file checksum but a tampered form.
  auto u = j;
  u["eigenforms"][0]["lambda_double"][3] = "0x1p+0";
  u.erase("checksum");
  u["checksum"] = [&] {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(cache::fnv1a(u.dump())));
    return std::string(buf);
  }();
  try {
    cache::from_json(u.dump());
    FAIL("tampered form accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("eigenform checksum") != std::string::npos);
  }

  CHECK_THROWS_AS(cache::from_json("{"), Error);
  CHECK_THROWS_AS(cache::from_json("{\"format\": \"other\"}"), Error);
  CHECK_THROWS_AS(cache::load("/nonexistent/cache.json"), Error);
}

TEST_CASE("cache hit reproduces the cold computation") {
  const auto dir = fresh_dir("hit").string();
  const auto cold = eigen::eigenbasis(24, 240, 128);
  const auto first = cache::eigenbasis(24, 240, 128, dir);
  CHECK(fs::exists(fs::path(dir) / cache::file_name(24, 240, 128)));
  const auto hit = cache::eigenbasis(24, 240, 128, dir);
  REQUIRE(hit.size() == cold.size());
  for (std::size_t i = 0; i < cold.size(); ++i) {
    require_same(cold[i], first[i]);
    require_same(cold[i], hit[i]);
    const auto za = zeros::zeros_in_F(eval::FormSeries::from_eigenform(cold[i]));
    const auto zb = zeros::zeros_in_F(eval::FormSeries::from_eigenform(hit[i]));
    REQUIRE(za.zeros.size() == zb.zeros.size());
    for (std::size_t j = 0; j < za.zeros.size(); ++j) {
      CHECK(za.zeros[j].location.x == zb.zeros[j].location.x);
      CHECK(za.zeros[j].location.y == zb.zeros[j].location.y);
    }
  }
  // A file under the wrong name is refused.
  fs::copy_file(fs::path(dir) / cache::file_name(24, 240, 128), fs::path(dir) / cache::file_name(26, 240, 128));
  CHECK_THROWS_AS(cache::eigenbasis(26, 240, 128, dir), Error);
  CHECK_THROWS_AS(cache::eigenbasis(14, 240, 128, dir), Error);
  fs::remove_all(dir);
}
