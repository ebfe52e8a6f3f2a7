#include "mflab/cache.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace mflab::cache {

using Json = nlohmann::ordered_json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw Error(ErrorKind::CacheError, "malformed double: " + s);
  return v;
}

std::string checksum_of(const Json& j) { return hex64(fnv1a(j.dump())); }

Json form_json(const eigen::HeckeEigenform& f) {
  Json j;
  j["t2_eigenvalue"] = real_to_hex(f.t2_eigenvalue);
  Json coords = Json::array();
  for (const auto& c : f.coordinates) coords.push_back(real_to_hex(c));
  j["coordinates"] = coords;
  const int digits = static_cast<int>(digits10_for_bits(f.precision_bits));
  Json a = Json::array(), ah = Json::array(), lh = Json::array(), ld = Json::array();
  for (int n = 0; n <= f.truncation(); ++n) {
    a.push_back(real_to_decimal(f.a(n), digits));
    ah.push_back(real_to_hex(f.a(n)));
    lh.push_back(real_to_hex(f.lam(n)));
    ld.push_back(hex_double(f.lam_d(n)));
  }
  j["a"] = a;
  j["a_hex"] = ah;
  j["lambda_hex"] = lh;
  j["lambda_double"] = ld;
  j["log_norm_const"] = f.log_norm_const ? Json(hex_double(*f.log_norm_const)) : Json(nullptr);
  if (f.l1sym2)
    j["l1sym2"] = {{"value", hex_double(f.l1sym2->value)},
                   {"error", hex_double(f.l1sym2->error)},
                   {"method", f.l1sym2->method}};
  else
    j["l1sym2"] = nullptr;
  return j;
}

eigen::HeckeEigenform form_from_json(const Json& j, int k, int bits) {
  eigen::HeckeEigenform f;
  f.weight = k;
  f.precision_bits = bits;
  f.t2_eigenvalue = parse_real_hex(j.at("t2_eigenvalue").get<std::string>(), bits);
  for (const auto& c : j.at("coordinates")) f.coordinates.push_back(parse_real_hex(c.get<std::string>(), bits));
  auto a = std::make_shared<std::vector<Real>>();
  auto lam = std::make_shared<std::vector<Real>>();
  auto lam_d = std::make_shared<std::vector<double>>();
  for (const auto& v : j.at("a_hex")) a->push_back(parse_real_hex(v.get<std::string>(), bits));
  for (const auto& v : j.at("lambda_hex")) lam->push_back(parse_real_hex(v.get<std::string>(), bits));
  for (const auto& v : j.at("lambda_double")) lam_d->push_back(parse_hex_double(v.get<std::string>()));
  if (a->size() != lam->size() || a->size() != lam_d->size() || j.at("a").size() != a->size())
    throw Error(ErrorKind::CacheError, "coefficient arrays differ in length");
  f.a_coeffs = std::move(a);
  f.lambda = std::move(lam);
  f.lambda_d = std::move(lam_d);
  if (!j.at("log_norm_const").is_null()) f.log_norm_const = parse_hex_double(j["log_norm_const"].get<std::string>());
  if (!j.at("l1sym2").is_null()) {
    const auto& l = j["l1sym2"];
    f.l1sym2 = eigen::L1Sym2{parse_hex_double(l.at("value").get<std::string>()),
                             parse_hex_double(l.at("error").get<std::string>()), l.at("method").get<std::string>()};
  }
  return f;
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

CacheFile build(int k, qseries::FormRing& ring, int precision_bits) {
  if (k < 0 || k % 2 != 0) throw Error(ErrorKind::InvalidWeight, "weight must be even and nonnegative");
  CacheFile c;
  c.weight = k;
  c.precision_bits = precision_bits;
  c.terms = ring.truncation();
  if (qseries::dim_cusp_forms(k) == 0) return c;
  c.basis = qseries::miller_basis(k, ring);
  c.forms = eigen::eigenbasis(k, ring, precision_bits);
  return c;
}

CacheFile build(int k, int N, int precision_bits) {
  if (k < 0 || k % 2 != 0) throw Error(ErrorKind::InvalidWeight, "weight must be even and nonnegative");
  if (N < 1) throw Error(ErrorKind::InvalidTruncation, "terms must be positive");
  qseries::FormRing ring(std::max(N, 3 * (qseries::dim_cusp_forms(k) + 1)));
  return build(k, ring, precision_bits);
}

std::string to_json(const CacheFile& c) {
  Json j;
  j["format"] = "mflab-cache";
  j["version"] = c.version;
  j["weight"] = c.weight;
  j["terms"] = c.terms;
  j["precision_bits"] = c.precision_bits;
  Json basis = Json::array();
  for (const auto& g : c.basis) {
    Json row = Json::array();
    for (const auto& v : g.numerators()) row.push_back(v.get_str());
    basis.push_back(row);
  }
  j["basis"] = basis;
  Json forms = Json::array();
  for (const auto& f : c.forms) {
    Json fj = form_json(f);
    fj["checksum"] = checksum_of(fj);
    forms.push_back(fj);
  }
  j["eigenforms"] = forms;
  j["checksum"] = checksum_of(j);
  return j.dump(1) + "\n";
}

CacheFile from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::CacheError, std::string("unreadable cache: ") + e.what());
  }
  try {
    if (j.value("format", "") != "mflab-cache") throw Error(ErrorKind::CacheError, "not an mflab cache file");
    const int version = j.at("version").get<int>();
    if (version != kVersion)
      throw Error(ErrorKind::CacheError,
                  "cache version " + std::to_string(version) + " (expected " + std::to_string(kVersion) + ")");
    const std::string sum = j.at("checksum").get<std::string>();
    j.erase("checksum");
    if (checksum_of(j) != sum) throw Error(ErrorKind::CacheError, "file checksum mismatch");

    CacheFile c;
    c.weight = j.at("weight").get<int>();
    c.terms = j.at("terms").get<int>();
    c.precision_bits = j.at("precision_bits").get<int>();
    for (const auto& row : j.at("basis")) {
      std::vector<mpz_class> num;
      for (const auto& v : row) num.emplace_back(v.get<std::string>());
      c.basis.emplace_back(c.weight, std::move(num));
    }
    for (auto fj : j.at("eigenforms")) {
      const std::string fs = fj.at("checksum").get<std::string>();
      fj.erase("checksum");
      if (checksum_of(fj) != fs) throw Error(ErrorKind::CacheError, "eigenform checksum mismatch");
      c.forms.push_back(form_from_json(fj, c.weight, c.precision_bits));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::CacheError, std::string("malformed cache: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorKind::CacheError, std::string("malformed integer: ") + e.what());
  }
}

void store(const CacheFile& c, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorKind::CacheError, "cannot write " + tmp);
    out << to_json(c);
    if (!out) throw Error(ErrorKind::CacheError, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

CacheFile load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::CacheError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string file_name(int k, int N, int precision_bits) {
  return "S" + std::to_string(k) + "_N" + std::to_string(N) + "_p" + std::to_string(precision_bits) + ".json";
}

namespace {

std::vector<eigen::HeckeEigenform> cached(int k, int N, int precision_bits, const std::string& dir,
                                          const std::function<CacheFile()>& make) {
  std::filesystem::create_directories(dir);
  const auto path = (std::filesystem::path(dir) / file_name(k, N, precision_bits)).string();
  CacheFile c;
  if (std::filesystem::exists(path)) {
    c = load(path);
    if (c.weight != k || c.precision_bits != precision_bits || c.terms < N)
      throw Error(ErrorKind::CacheError, "cache entry does not match its name: " + path);
  } else {
    c = make();
    store(c, path);
  }
  if (c.forms.empty()) throw Error(ErrorKind::NoCuspForms, "S_" + std::to_string(k) + " is zero");
  return c.forms;
}

}  // namespace

std::vector<eigen::HeckeEigenform> eigenbasis(int k, int N, int precision_bits,
                                              const std::optional<std::string>& dir) {
  if (!dir) return eigen::eigenbasis(k, N, precision_bits);
  return cached(k, N, precision_bits, *dir, [&] { return build(k, N, precision_bits); });
}

std::vector<eigen::HeckeEigenform> eigenbasis(int k, qseries::FormRing& ring, int precision_bits,
                                              const std::optional<std::string>& dir) {
  if (!dir) return eigen::eigenbasis(k, ring, precision_bits);
  return cached(k, ring.truncation(), precision_bits, *dir, [&] { return build(k, ring, precision_bits); });
}

}  // namespace mflab::cache
