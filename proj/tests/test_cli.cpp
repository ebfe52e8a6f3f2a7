#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/rational.hpp>
#include <json.hpp>

#include "mflab/acceptance.hpp"
#include "mflab/cli.hpp"
#include "mflab/zerofind.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = mflab::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> v;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      v.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  v.push_back(cur);
  return v;
}

boost::rational<long> parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return std::stol(s);
  return {std::stol(s.substr(0, slash)), std::stol(s.substr(slash + 1))};
}

// tau(n) from q prod (1 - q^n)^24.
long long tau(int n) {
  std::vector<long long> c(n, 0);
  c[0] = 1;
  for (int m = 1; m < n; ++m)
    for (int r = 0; r < 24; ++r)
      for (int i = n - 1; i >= m; --i) c[i] -= c[i - m];
  return c[n - 1];
}

}  // namespace

TEST_CASE("exponents report") {
  const auto r = cli_run({"exponents"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"delta\": 0.001152") != std::string::npos);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(std::abs(j["kappa"].get<double>() - (31.0 / 2 - 4 * std::sqrt(15.0))) < 1e-8);
  CHECK(j["exact_objective"]["high_branch_dominated"] == true);
  CHECK(r.err.find("mflab exponents") != std::string::npos);
}

TEST_CASE("eigen writes the cache format") {
  const auto r = cli_run({"eigen", "--weight", "12", "--terms", "50"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["format"] == "mflab-cache");
  CHECK(j["terms"] == 50);
  for (int n = 1; n <= 10; ++n) CHECK(j["eigenforms"][0]["a"][n] == std::to_string(tau(n)));
  CHECK(j["eigenforms"][0]["a"][2] == "-24");

  const auto csv = lines(cli_run({"eigen", "--weight", "12", "--terms", "10", "--format", "csv"}).out);
  CHECK(csv[1] == "form,n,a,lambda");
  CHECK(split(csv[3], ',')[2] == "-24");
}

TEST_CASE("zeros CSV satisfies the valence count") {
  const auto r = cli_run({"zeros", "--weight", "24", "--region", "fundamental"});
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() > 2);
  CHECK(ls[1] == "form,re,im,multiplicity,elliptic_weight,residual");
  std::map<int, boost::rational<long>> located;
  std::map<int, std::map<std::string, std::string>> summary;
  for (std::size_t i = 2; i < ls.size(); ++i) {
    if (ls[i][0] == '#') {
      std::istringstream is(ls[i].substr(2));
      std::map<std::string, std::string> kv;
      for (std::string tok; is >> tok;) {
        const auto eq = tok.find('=');
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
      }
      summary[std::stoi(kv["form"])] = kv;
      continue;
    }
    const auto f = split(ls[i], ',');
    REQUIRE(f.size() == 6);
    located[std::stoi(f[0])] += std::stoi(f[3]) * parse_rational(f[4]);
  }
  REQUIRE(summary.size() == 2);
  for (auto& [form, kv] : summary) {
    CHECK((located[form] + std::stol(kv["cusp_order"]) == boost::rational<long>(2)));
    CHECK((parse_rational(kv["weighted_total"]) == boost::rational<long>(2)));
    CHECK(kv["valence"] == "holds");
  }

  // E_k: weight 1/3 at rho for k = 8.
  const auto e = lines(cli_run({"zeros", "--weight", "8", "--eisenstein"}).out);
  REQUIRE(e.size() == 4);
  CHECK(split(e[2], ',')[4] == "1/3");
  CHECK(e[3].find("weighted_total=2/3") != std::string::npos);
}

TEST_CASE("regions other than F") {
  const auto r = cli_run({"zeros", "--weight", "48", "--region", "rect:-0.5,0.5,1.2,3", "--format", "json"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  const auto all = nlohmann::json::parse(cli_run({"zeros", "--weight", "48", "--format", "json"}).out);
  const auto siegel =
      nlohmann::json::parse(cli_run({"zeros", "--weight", "48", "--region", "siegel:1.2", "--format", "json"}).out);
  for (std::size_t f = 0; f < j["forms"].size(); ++f) {
    long above = 0, edge = 0;
    for (const auto& z : all["forms"][f]["zeros"]) {
      above += z["im"].get<double>() > 1.2;
      edge += z["im"].get<double>() > 1.2 && z["re"].get<double>() == -0.5;
    }
    // The closed rectangle holds both translates of a zero on Re z = -1/2.
    CHECK(static_cast<long>(j["forms"][f]["zeros"].size()) == above + edge);
    CHECK(static_cast<long>(siegel["forms"][f]["zeros"].size()) == above);
  }

  const auto m = cli_run({"mass", "--weight", "12", "--region", "siegel:2"});
  REQUIRE(m.code == 0);
  const auto mj = nlohmann::json::parse(m.out);
  CHECK(mj["expected"].get<double>() == doctest::Approx(3 / M_PI / 2));
  const auto grid = lines(cli_run({"mass", "--weight", "12", "--grid", "4x4", "--format", "csv"}).out);
  CHECK(grid[1] == "form,x0,x1,y0,y1,mass,expected,discrepancy");
  CHECK(grid.size() > 3);
}

TEST_CASE("cusp report") {
  const auto r = cli_run({"cusp", "--weight", "80", "--form", "0"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["window"][0] == 2);
  CHECK(j["window"][1] == 4);
  for (const auto& p : j["forms"][0]["Re0"]["pairs"]) CHECK(!p["bracket"].is_null());
}

TEST_CASE("usage and computational errors") {
  CHECK(cli_run({"zeros", "--bogus"}).code == 2);
  CHECK(cli_run({}).code == 2);
  CHECK(cli_run({"frobnicate"}).code == 2);
  CHECK(cli_run({"zeros", "--region", "disk:1"}).code == 2);
  CHECK(cli_run({"exponents", "--format", "xml"}).code == 2);
  CHECK(cli_run({"mass", "--weight", "12", "--grid", "4by4"}).code == 2);
  const auto help = cli_run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("siegel:Y") != std::string::npos);

  const auto bad = cli_run({"eigen", "--weight", "13"});
  CHECK(bad.code == 1);
  const auto j = nlohmann::json::parse(bad.err);
  CHECK(j["error"]["kind"] == "InvalidWeight");
  CHECK(j["error"]["command"] == "eigen");

  const auto none = cli_run({"zeros", "--weight", "14"});
  CHECK(none.code == 1);
  CHECK(nlohmann::json::parse(none.err)["error"]["kind"] == "NoCuspForms");
}

TEST_CASE("reruns and cache reuse are byte-identical") {
  const auto dir = fs::temp_directory_path() / "mflab_test_cli_cache";
  fs::remove_all(dir);
  const std::vector<std::string> base{"zeros", "--weight", "36", "--format", "json"};
  auto with_cache = base;
  with_cache.insert(with_cache.end(), {"--cache-dir", dir.string()});
  const auto plain = cli_run(base).out;
  CHECK(cli_run(base).out == plain);
  const auto cold = cli_run(with_cache).out;
  CHECK(fs::exists(dir / "S36_N240_p128.json"));
  const auto hit = cli_run(with_cache).out;
  CHECK(cold == plain);
  CHECK(hit == plain);

  const std::vector<std::string> eig{"eigen", "--weight", "36", "--terms", "240", "--cache-dir", dir.string()};
  CHECK(cli_run(eig).out == cli_run({"eigen", "--weight", "36", "--terms", "240"}).out);

  const auto out = dir / "exp.json";
  REQUIRE(cli_run({"exponents", "--out", out.string()}).code == 0);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == cli_run({"exponents"}).out);
  fs::remove_all(dir);
}

TEST_CASE("verify on a subset") {
  const auto r = cli_run({"verify", "--only", "1,6"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["criteria"].size() == 2);
  CHECK(j["criteria"][0]["status"] == "pass");
  CHECK(j["criteria"][1]["status"] == "pass");
  CHECK(r.out.find("seconds") == std::string::npos);
  CHECK(r.err.find("C6  PASS") != std::string::npos);
  CHECK(cli_run({"verify", "--only", "1,6"}).out == r.out);
}

TEST_CASE("acceptance helpers") {
  const auto a = mflab::accept::seeded_bumps(1, 4), b = mflab::accept::seeded_bumps(1, 4);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].wy == b[i].wy);
    CHECK(mflab::zeros::Bump{mflab::eval::HPoint(a[i].x, a[i].y), a[i].wx, a[i].wy, 1}.inside_F());
  }
  CHECK(mflab::accept::seeded_bumps(2, 4)[0].x != a[0].x);
  CHECK(mflab::accept::nonincreasing_steps({3, 2, 2, 5}) == 2);
  CHECK(mflab::accept::nonincreasing_steps({1}) == 0);
  const auto same = mflab::accept::determinism("abc", "abc");
  CHECK(same.pass);
  const auto diff = mflab::accept::determinism("abc", "abd");
  CHECK(!diff.pass);
  CHECK(diff.details["first_difference_at"] == 2);
}
