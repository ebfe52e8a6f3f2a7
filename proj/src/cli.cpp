#include "mflab/cli.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mflab/acceptance.hpp"
#include "mflab/cache.hpp"
#include "mflab/cuspzone.hpp"
#include "mflab/evaluate.hpp"
#include "mflab/exponents.hpp"
#include "mflab/massmap.hpp"
#include "mflab/qseries.hpp"
#include "mflab/zerofind.hpp"

namespace mflab::cli {

using Json = nlohmann::ordered_json;

namespace {

const char* kRegionHelp =
    "Region: rect:x1,x2,y1,y2 | ball:x,y,r (hyperbolic radius) | siegel:Y (part of F above Y) | fundamental";

struct Flags {
  int weight = 12;
  std::optional<int> terms;
  int prec_bits = 128;
  std::string region = "fundamental";
  std::optional<std::string> grid;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> threads;
  std::optional<std::string> cache_dir;
  double threshold = 0.1;
  std::optional<double> height;
  std::optional<int> form;
  bool eisenstein = false;
  std::vector<int> only;
};

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string rational_str(const zeros::Rational& r) {
  return r.denominator() == 1 ? std::to_string(r.numerator())
                              : std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string format_of(const Flags& f, const char* fallback) { return f.format.value_or(fallback); }

std::vector<eigen::HeckeEigenform> forms_for(const Flags& f, int default_terms) {
  auto forms = cache::eigenbasis(f.weight, f.terms.value_or(default_terms), f.prec_bits, f.cache_dir);
  if (f.form) {
    if (*f.form < 0 || *f.form >= static_cast<int>(forms.size()))
      throw Error(ErrorKind::InvalidArgument, "--form out of range (dimension " + std::to_string(forms.size()) + ")");
    return {forms[*f.form]};
  }
  return forms;
}

int form_index(const Flags& f, int i) { return f.form.value_or(i); }

std::string cmd_basis(const Flags& f) {
  const int N = f.terms.value_or(50);
  const auto basis = qseries::miller_basis(f.weight, N);
  if (format_of(f, "json") == "csv") {
    std::ostringstream os;
    os << "n";
    for (std::size_t j = 0; j < basis.size(); ++j) os << ",g" << j + 1;
    os << "\n";
    for (int n = 0; n <= N; ++n) {
      os << n;
      for (const auto& g : basis) os << ',' << g.numerator(n).get_str();
      os << "\n";
    }
    return os.str();
  }
  Json rows = Json::array();
  for (const auto& g : basis) {
    Json r = Json::array();
    for (const auto& v : g.numerators()) r.push_back(v.get_str());
    rows.push_back(r);
  }
  Json j = {{"command", "basis"}, {"weight", f.weight}, {"terms", N}, {"dimension", basis.size()}, {"basis", rows}};
  return j.dump(1) + "\n";
}

std::string cmd_eigen(const Flags& f) {
  const int N = f.terms.value_or(100);
  cache::CacheFile c;
  if (f.cache_dir) {
    std::filesystem::create_directories(*f.cache_dir);
    const auto path = (std::filesystem::path(*f.cache_dir) / cache::file_name(f.weight, N, f.prec_bits)).string();
    if (std::filesystem::exists(path)) {
      c = cache::load(path);
    } else {
      c = cache::build(f.weight, N, f.prec_bits);
      cache::store(c, path);
    }
  } else {
    c = cache::build(f.weight, N, f.prec_bits);
  }
  if (format_of(f, "json") == "csv") {
    std::ostringstream os;
    os << "# mflab eigen weight=" << f.weight << " terms=" << c.terms << " prec_bits=" << f.prec_bits
       << " lambda=%.17g\n";
    os << "form,n,a,lambda\n";
    const int digits = static_cast<int>(digits10_for_bits(f.prec_bits));
    for (std::size_t i = 0; i < c.forms.size(); ++i)
      for (int n = 1; n <= c.forms[i].truncation(); ++n)
        os << i << ',' << n << ',' << real_to_decimal(c.forms[i].a(n), digits) << ',' << g17(c.forms[i].lam_d(n))
           << "\n";
    return os.str();
  }
  return cache::to_json(c);
}

zeros::ZeroSet zero_set(const eval::FormSeries& s, const mass::Region& region, const zeros::Options& opt) {
  return std::visit(
      [&](const auto& r) -> zeros::ZeroSet {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, mass::FundamentalDomain>) {
          return zeros::zeros_in_F(s, opt);
        } else if constexpr (std::is_same_v<T, mass::SiegelDomain>) {
          auto z = zeros::zeros_in_F(s, opt);
          std::erase_if(z.zeros, [&](const auto& x) { return x.location.y < r.Y; });
          return z;
        } else if constexpr (std::is_same_v<T, mass::Rectangle>) {
          const double top = std::isfinite(r.y1) ? r.y1 : std::max(r.y0, zeros::no_zero_height(s)) + 1;
          return zeros::zeros_in_region(s, {r.x0, r.x1, r.y0, top}, opt);
        } else {
          const auto d = zeros::hyperbolic_disk(r.center, r.r);
          auto z = zeros::zeros_in_region(
              s, {d.cx - d.radius, d.cx + d.radius, std::max(d.cy - d.radius, 1e-3), d.cy + d.radius}, opt);
          std::erase_if(z.zeros, [&](const auto& x) { return zeros::hyperbolic_distance(x.location, r.center) >= r.r; });
          return z;
        }
      },
      region);
}

std::string cmd_zeros(const Flags& f) {
  const auto region = mass::parse_region(f.region);
  const bool whole_F = std::holds_alternative<mass::FundamentalDomain>(region);
  zeros::Options opt;
  if (f.tol) opt.tol = *f.tol;
  const int N = f.terms.value_or(240);
  std::vector<std::pair<int, eval::FormSeries>> series;
  if (f.eisenstein) {
    series.emplace_back(0, eval::FormSeries::from_eisenstein(f.weight, N, f.prec_bits));
  } else {
    const auto forms = forms_for(f, N);
    for (std::size_t i = 0; i < forms.size(); ++i)
      series.emplace_back(form_index(f, static_cast<int>(i)), eval::FormSeries::from_eigenform(forms[i]));
  }
  const bool csv = format_of(f, "csv") == "csv";
  std::ostringstream os;
  Json forms_json = Json::array();
  if (csv) {
    os << "# mflab zeros weight=" << f.weight << " region=" << mass::to_string(region) << " terms=" << N
       << (f.eisenstein ? " form=eisenstein" : "") << " float=%.17g\n";
    os << "form,re,im,multiplicity,elliptic_weight,residual\n";
  }
  std::ostringstream summary;
  for (const auto& [idx, s] : series) {
    const auto z = zero_set(s, region, opt);
    zeros::Rational located{0};
    Json list = Json::array();
    for (const auto& r : z.zeros) {
      located += r.multiplicity * r.elliptic_weight;
      if (csv)
        os << idx << ',' << g17(r.location.x) << ',' << g17(r.location.y) << ',' << r.multiplicity << ','
           << rational_str(r.elliptic_weight) << ',' << g17(r.residual) << "\n";
      else
        list.push_back({{"re", r.location.x},
                        {"im", r.location.y},
                        {"multiplicity", r.multiplicity},
                        {"elliptic_weight", rational_str(r.elliptic_weight)},
                        {"residual", r.residual}});
    }
    Json fj = {{"form", f.eisenstein ? Json("eisenstein") : Json(idx)}, {"zeros", list},
               {"weighted_zeros", rational_str(located)}};
    summary << "# form=" << (f.eisenstein ? std::string("eisenstein") : std::to_string(idx))
            << " weighted_zeros=" << rational_str(located);
    if (whole_F) {
      fj["cusp_order"] = z.cusp_order;
      fj["weighted_total"] = rational_str(z.weighted_total);
      fj["expected"] = rational_str(z.expected);
      fj["valence_holds"] = z.valence_holds();
      summary << " cusp_order=" << z.cusp_order << " weighted_total=" << rational_str(z.weighted_total)
              << " expected=" << rational_str(z.expected) << " valence=" << (z.valence_holds() ? "holds" : "fails");
    }
    summary << "\n";
    forms_json.push_back(fj);
  }
  if (csv) return os.str() + summary.str();
  Json j = {{"command", "zeros"}, {"weight", f.weight}, {"region", mass::to_string(region)}, {"terms", N},
            {"forms", forms_json}};
  return j.dump(1) + "\n";
}

std::pair<int, int> parse_grid(const std::string& g) {
  int a = 0, b = 0;
  char x = 0, extra = 0;
  if (std::sscanf(g.c_str(), "%d%c%d%c", &a, &x, &b, &extra) != 3 || (x != 'x' && x != 'X'))
    throw CLI::ValidationError("--grid", "expected MxM, got '" + g + "'");
  return {a, b};
}

std::string cmd_mass(const Flags& f) {
  const auto forms = forms_for(f, 400);
  const bool csv = format_of(f, "json") == "csv";
  std::ostringstream os;
  Json out = Json::array();
  if (f.grid) {
    const auto [m, m2] = parse_grid(*f.grid);
    if (m != m2) throw Error(ErrorKind::InvalidArgument, "--grid must be square");
    const double y_cap = f.height.value_or(4);
    if (csv) os << "# mflab mass weight=" << f.weight << " grid=" << m << "x" << m << " y_cap=" << g17(y_cap)
                << " float=%.17g\nform,x0,x1,y0,y1,mass,expected,discrepancy\n";
    for (std::size_t i = 0; i < forms.size(); ++i) {
      const auto r = mass::que_discrepancy(forms[i], m, y_cap);
      const int idx = form_index(f, static_cast<int>(i));
      if (csv) {
        for (const auto& e : r.table)
          os << idx << ',' << g17(e.rect.x0) << ',' << g17(e.rect.x1) << ',' << g17(e.rect.y0) << ','
             << g17(e.rect.y1) << ',' << g17(e.mass) << ',' << g17(e.expected) << ',' << g17(e.discrepancy) << "\n";
        continue;
      }
      out.push_back({{"form", idx},
                     {"sup_discrepancy", r.sup_discrepancy},
                     {"argmax", {r.argmax.x0, r.argmax.x1, r.argmax.y0, r.argmax.y1}},
                     {"rectangles", r.table.size()}});
    }
    if (csv) return os.str();
    Json j = {{"command", "mass"}, {"weight", f.weight}, {"grid", m}, {"y_cap", y_cap}, {"forms", out}};
    return j.dump(1) + "\n";
  }
  const auto region = mass::parse_region(f.region);
  const double tol = f.tol.value_or(1e-8);
  const double expected = 3 / kPi * mass::hyperbolic_area(region);
  if (csv) os << "# mflab mass weight=" << f.weight << " region=" << mass::to_string(region)
              << " float=%.17g\nform,mass,error,expected,discrepancy\n";
  for (std::size_t i = 0; i < forms.size(); ++i) {
    const auto m = mass::mass_region(mass::normalized_series(forms[i]), region, tol);
    const int idx = form_index(f, static_cast<int>(i));
    if (csv)
      os << idx << ',' << g17(m.value) << ',' << g17(m.error) << ',' << g17(expected) << ','
         << g17(m.value - expected) << "\n";
    else
      out.push_back({{"form", idx}, {"mass", m.value}, {"error", m.error}, {"discrepancy", m.value - expected}});
  }
  if (csv) return os.str();
  Json j = {{"command", "mass"}, {"weight", f.weight}, {"region", mass::to_string(region)},
            {"tol", tol},        {"expected", expected}, {"forms", out}};
  return j.dump(1) + "\n";
}

std::string cmd_cusp(const Flags& f) {
  const auto forms = forms_for(f, 240);
  const auto [lo, hi] = cusp::lemma_window(f.weight);
  const double Y = f.height.value_or(1.01);
  const bool csv = format_of(f, "json") == "csv";
  std::ostringstream os;
  if (csv)
    os << "# mflab cusp weight=" << f.weight << " window=" << lo << ".." << hi << " threshold=" << g17(f.threshold)
       << " float=%.17g\nform,parity,line,l1,l2,lambda1,lambda2,y_low,y_high,bracket_lo,bracket_hi\n";
  Json out = Json::array();
  for (std::size_t i = 0; i < forms.size(); ++i) {
    const int idx = form_index(f, static_cast<int>(i));
    const auto s = eval::FormSeries::from_eigenform(forms[i]);
    Json fj = {{"form", idx}};
    Json approx = Json::array();
    for (int l = std::max(lo, 1); l <= hi; ++l) {
      const auto a = cusp::cusp_approx_error(forms[i], l, 0);
      approx.push_back({{"l", l}, {"y", a.y}, {"error", a.error}});
    }
    fj["one_term_error"] = approx;
    for (auto [parity, line] : {std::pair{cusp::Parity::All, cusp::Line::Re0},
                                std::pair{cusp::Parity::Odd, cusp::Line::ReHalf}}) {
      const auto g = cusp::geodesic_zero_count(s, Y, line);
      Json pairs = Json::array();
      for (const auto& p : cusp::sign_changes(forms[i], lo, hi, parity, f.threshold)) {
        const double ylo = cusp::y_ell(f.weight, std::max(p.l1, p.l2)), yhi = cusp::y_ell(f.weight, std::min(p.l1, p.l2));
        const cusp::GeodesicZero* hit = nullptr;
        for (const auto& z : g.zeros)
          if (z.lo > ylo && z.hi < yhi) {
            hit = &z;
            break;
          }
        if (csv) {
          os << idx << ',' << cusp::to_string(parity) << ',' << cusp::to_string(line) << ',' << p.l1 << ',' << p.l2
             << ',' << g17(p.lambda1) << ',' << g17(p.lambda2) << ',' << g17(ylo) << ',' << g17(yhi) << ','
             << (hit ? g17(hit->lo) : "") << ',' << (hit ? g17(hit->hi) : "") << "\n";
        }
        Json pj = {{"l1", p.l1}, {"l2", p.l2}, {"lambda1", p.lambda1}, {"lambda2", p.lambda2},
                   {"y_low", ylo}, {"y_high", yhi}};
        pj["bracket"] = hit ? Json{hit->lo, hit->hi} : Json(nullptr);
        pairs.push_back(pj);
      }
      Json zs = Json::array();
      for (const auto& z : g.zeros) zs.push_back({z.lo, z.hi});
      fj[cusp::to_string(line)] = {{"parity", cusp::to_string(parity)},
                                   {"pairs", pairs},
                                   {"zeros_above_Y", g.count()},
                                   {"brackets", zs},
                                   {"asymptotic_regime", g.asymptotic_regime}};
    }
    fj["region_count"] = cusp::cusp_region_count(s, Y).count;
    out.push_back(fj);
  }
  if (csv) return os.str();
  Json j = {{"command", "cusp"}, {"weight", f.weight}, {"window", {lo, hi}}, {"threshold", f.threshold},
            {"Y", Y},            {"forms", out}};
  return j.dump(1) + "\n";
}

std::string cmd_exponents(const Flags& f) {
  const auto e = expo::derived_exponents();
  const auto cf = expo::closed_form_check(100);
  const auto ex = expo::exact_alpha_objective_report();
  if (format_of(f, "json") == "csv") {
    std::ostringstream os;
    os << "# float=%.17g\nname,value\n";
    for (auto [k, v] : {std::pair{"beta", e.beta}, {"alpha", e.alpha}, {"kappa", e.kappa}, {"delta", e.delta},
                        {"eta1", e.eta1}, {"eta2", e.eta2}})
      os << k << ',' << g17(v) << "\n";
    return os.str();
  }
  Json j = {{"command", "exponents"},
            {"beta", e.beta},
            {"beta_minimax", e.beta_minimax},
            {"alpha", e.alpha},
            {"alpha_minimax", e.alpha_minimax},
            {"kappa", e.kappa},
            {"delta", e.delta},
            {"eta1", e.eta1},
            {"eta2", e.eta2},
            {"alpha_unrestricted", e.alpha_unrestricted},
            {"closed_form", {{"points", cf.points}, {"max_deviation", cf.max_deviation}, {"worst_alpha", cf.worst_alpha}}},
            {"exact_objective",
             {{"alpha", ex.alpha},
              {"simplified_max", ex.simplified_max},
              {"exact_max_low", ex.exact_max_low},
              {"exact_max_high", ex.exact_max_high},
              {"max_exact_minus_simplified", ex.max_exact_minus_simplified},
              {"exact_le_simplified", ex.exact_le_simplified},
              {"high_branch_below_twelfth", ex.high_branch_below_twelfth},
              {"high_branch_dominated", ex.high_branch_dominated},
              {"exact_minimax_alpha", ex.exact_minimax.param},
              {"exact_minimax_value", ex.exact_minimax.value},
              {"gap", ex.gap}}}};
  return j.dump(1) + "\n";
}

std::string cmd_verify(const Flags& f, std::ostream& err, bool& ok) {
  accept::Config cfg;
  cfg.seed = f.seed;
  cfg.precision_bits = f.prec_bits;
  cfg.cache_dir = f.cache_dir;
  cfg.only = f.only;
  const auto suite = accept::run(cfg, [&](const accept::Criterion& c) { err << accept::status_line(c) << std::endl; });
  ok = suite.all_ok();
  return suite.report_text();
}

void emit(const Flags& f, const std::string& text, std::ostream& out) {
  if (!f.out) {
    out << text;
    return;
  }
  std::ofstream file(*f.out, std::ios::binary);
  if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write " + *f.out);
  file << text;
}

void structured_error(std::ostream& err, const std::string& command, const char* kind, const std::string& message,
                      std::optional<long> required) {
  Json j = {{"error", {{"command", command}, {"kind", kind}, {"message", message}}}};
  if (required) j["error"]["required"] = *required;
  err << j.dump() << std::endl;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mflab: level-one modular forms, zeros and mass equidistribution"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(kRegionHelp);
  Flags f;
  app.add_option("--weight", f.weight, "Weight k (even)");
  app.add_option("--terms", f.terms, "q-expansion truncation N");
  app.add_option("--prec-bits", f.prec_bits, "MPFR precision in bits")->capture_default_str()->check(CLI::Range(32, 4096));
  app.add_option("--region", f.region, kRegionHelp)->capture_default_str()->check([](const std::string& s) {
    try {
      mass::parse_region(s);
      return std::string();
    } catch (const Error& e) {
      return std::string(e.what());
    }
  });
  app.add_option("--grid", f.grid, "Lattice size MxM for rectangle discrepancies (mass)");
  app.add_option("--tol", f.tol, "Zero localization or quadrature tolerance");
  app.add_option("--seed", f.seed, "Seed for sampled statistics")->capture_default_str();
  app.add_option("--out", f.out, "Output file (default stdout)");
  app.add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", f.threads, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
  app.add_option("--cache-dir", f.cache_dir, "Directory for eigenbasis caches");
  app.add_option("--threshold", f.threshold, "Sign-change threshold for lambda (cusp)")->capture_default_str();
  app.add_option("--height", f.height, "Height Y (cusp: geodesic cut, mass: lattice cap)");
  app.add_option("--form", f.form, "Index of a single eigenform (ascending T_2 eigenvalue)");
  app.add_flag("--eisenstein", f.eisenstein, "Use E_k instead of the eigenforms (zeros)");
  app.add_option("--only", f.only, "Criterion ids to run (verify)")->delimiter(',');

  auto* basis = app.add_subcommand("basis", "Miller basis of S_k as exact integers");
  auto* eigen = app.add_subcommand("eigen", "Hecke eigenbasis; JSON output is the cache format");
  auto* zeros = app.add_subcommand("zeros", "Zeros in a region with multiplicities and valence totals");
  auto* mass = app.add_subcommand("mass", "mu_f of a region, or lattice rectangle discrepancies with --grid");
  auto* cusp = app.add_subcommand("cusp", "Sign-change detectors and geodesic zeros high in the cusp");
  auto* expo = app.add_subcommand("exponents", "Minimax exponents");
  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");

  std::vector<const char*> argv;
  argv.push_back("mflab");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    app.exit(e, err, err);
    return 2;
  }

  if (f.threads) omp_set_num_threads(*f.threads);
  std::string name = app.get_subcommands().front()->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::string text;
    bool ok = true;
    if (basis->parsed()) text = cmd_basis(f);
    else if (eigen->parsed()) text = cmd_eigen(f);
    else if (zeros->parsed()) text = cmd_zeros(f);
    else if (mass->parsed()) text = cmd_mass(f);
    else if (cusp->parsed()) text = cmd_cusp(f);
    else if (expo->parsed()) text = cmd_exponents(f);
    else if (verify->parsed()) text = cmd_verify(f, err, ok);
    emit(f, text, out);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f s", s);
    err << "mflab " << name << ": " << buf << std::endl;
    return ok ? 0 : 1;
  } catch (const CLI::ValidationError& e) {
    err << e.what() << std::endl;
    return 2;
  } catch (const Error& e) {
    structured_error(err, name, to_string(e.kind()), e.what(), e.required());
    return 1;
  } catch (const std::exception& e) {
    structured_error(err, name, "Failure", e.what(), std::nullopt);
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace mflab::cli
