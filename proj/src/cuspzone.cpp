#include "mflab/cuspzone.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include "mflab/zerofind.hpp"

namespace mflab::cusp {

namespace {

constexpr double kTwoPi = 2 * kPi;

double line_x(Line l) { return l == Line::Re0 ? 0.0 : -0.5; }

double l1sym2_of(const eigen::HeckeEigenform& f) {
  if (f.l1sym2) return f.l1sym2->value;
  try {
    return eigen::l1_sym2_afe(f).value;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientTruncation) throw;
  }
  if (f.truncation() >= 400) return eigen::l1_sym2_smoothed(f).value;
  int P = 2;
  for (int p : primes_up_to(f.truncation())) P = p;
  return eigen::l1_sym2(f, P).value;
}

}  // namespace

std::pair<int, int> lemma_window(int k, const WindowConstants& w) {
  const int lo = static_cast<int>(std::floor(w.c2)) + 1;
  const int hi = static_cast<int>(std::floor(w.c3 * std::sqrt(k / std::log(static_cast<double>(k)))));
  return {lo, hi};
}

double y_ell(int k, int l) { return (k - 1) / (4 * kPi * l); }

CuspApprox cusp_approx_error(const eigen::HeckeEigenform& f, int l, double x, const WindowConstants& w) {
  if (l < 1 || l > f.truncation()) throw Error(ErrorKind::RangeError, "l must lie in [1, N]");
  const int k = f.weight;
  CuspApprox r;
  r.l = l;
  r.x = x;
  r.y = y_ell(k, l);
  const auto [lo, hi] = lemma_window(k, w);
  if (l < lo || l > hi)
    r.warning = std::string(mflab::to_string(ErrorKind::WindowError)) + ": l = " + std::to_string(l) +
                " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
  const auto s = eval::evaluate_scaled(FormSeries::from_eigenform(f), eval::HPoint(x, r.y));
  const double shift = s.log_scale + (k - 1) / 2.0 * (1 - std::log(static_cast<double>(l)));
  r.exact = s.f * std::exp(shift);
  const double lam = f.lam_d(l);
  const double t = std::remainder(x * l, 1.0);
  r.approx = std::polar(lam, kTwoPi * t);
  r.error = std::abs(r.exact - r.approx);
  return r;
}

const char* to_string(Parity p) { return p == Parity::All ? "all" : "odd"; }
const char* to_string(Line l) { return l == Line::Re0 ? "Re0" : "ReHalf"; }

std::vector<SignChangePair> sign_changes(const std::vector<double>& lambda, int lmin, int lmax, Parity parity,
                                         double thr) {
  std::vector<SignChangePair> out;
  lmin = std::max(lmin, 1);
  lmax = std::min(lmax, static_cast<int>(lambda.size()) - 1);
  int last = 0;
  for (int l = lmin; l <= lmax; ++l) {
    if (parity == Parity::Odd && l % 2 == 0) continue;
    if (std::abs(lambda[l]) <= thr) continue;
    if (last != 0 && (lambda[last] > 0) != (lambda[l] > 0)) {
      out.push_back({last, l, lambda[last], lambda[l]});
      last = 0;
    } else {
      last = l;
    }
  }
  return out;
}

std::vector<SignChangePair> sign_changes(const eigen::HeckeEigenform& f, int lmin, int lmax, Parity parity, double thr) {
  return sign_changes(*f.lambda_d, lmin, lmax, parity, thr);
}

GeodesicSample geodesic_value(const FormSeries& f, Line line, double y) {
  const auto s = eval::evaluate_scaled(f, eval::HPoint(line_x(line), y));
  GeodesicSample g;
  g.y = y;
  g.value = s.f.real();
  g.log_scale = s.log_scale;
  g.tail = std::exp(s.log_tail);
  return g;
}

GeodesicCount geodesic_zero_count(const FormSeries& f, double Y, Line line, const WindowConstants& w) {
  if (!(Y > 1)) throw Error(ErrorKind::RangeError, "geodesic scan needs Y > 1");
  const int k = f.weight();
  GeodesicCount out;
  out.line = line;
  out.Y = Y;
  out.y_top = zeros::no_zero_height(f);
  out.asymptotic_regime = std::sqrt(k * std::log(static_cast<double>(k))) < Y && Y < (k - 1) / (4 * kPi * w.c2);
  if (Y >= out.y_top) return out;

  std::vector<double> nodes{Y, out.y_top};
  for (int l = 1; y_ell(k, l) > Y; ++l)
    if (y_ell(k, l) < out.y_top) nodes.push_back(y_ell(k, l));
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> grid;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    for (int j = 0; j < 4; ++j) grid.push_back(nodes[i] + (nodes[i + 1] - nodes[i]) * j / 4);
  grid.push_back(nodes.back());

  std::vector<GeodesicSample> samples(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(grid.size()); ++i) {
    try {
      samples[i] = geodesic_value(f, line, grid[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const GeodesicSample* last = nullptr;
  for (const auto& s : samples) {
    if (!s.verified()) {
      out.skipped.push_back(s.y);
      continue;
    }
    if (last && last->sign() != s.sign()) {
      double lo = last->y, hi = s.y;
      const int slo = last->sign();
      for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto m = geodesic_value(f, line, mid);
        if (!m.verified()) break;
        (m.sign() == slo ? lo : hi) = mid;
      }
      out.zeros.push_back({0.5 * (lo + hi), lo, hi});
    }
    last = &s;
  }
  return out;
}

RegionCount cusp_region_count(const FormSeries& f, double Y, double tol) {
  if (!(Y > 1)) throw Error(ErrorKind::RangeError, "cusp region count needs Y > 1");
  RegionCount out;
  out.Y = Y;
  out.y_top = zeros::no_zero_height(f);
  if (Y >= out.y_top) return out;
  const double top = zeros::phase_change(f, eval::HPoint(0.5, out.y_top), eval::HPoint(-0.5, out.y_top));
  for (int attempt = 0;; ++attempt) {
    const double y = attempt == 0 ? Y : Y + tol / 7 * std::pow(16.0, attempt - 1);
    try {
      const double bottom = zeros::phase_change(f, eval::HPoint(-0.5, y), eval::HPoint(0.5, y));
      const double w = (bottom + top) / kTwoPi;
      if (std::abs(w - std::round(w)) > 0.25)
        throw Error(ErrorKind::SamplingError, "strip winding is not close to an integer");
      out.count = std::lround(w);
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ContourThroughZero || attempt >= 5) throw;
    }
  }
}

ShortIntervalStats short_interval_stats(const eigen::HeckeEigenform& f, long X, double L, long samples,
                                        std::uint64_t seed) {
  if (X < 1 || !(L > 0)) throw Error(ErrorKind::RangeError, "need X >= 1 and L > 0");
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "need at least one sample");
  const long need = static_cast<long>(std::floor(2.0 * X * (1 + 1 / L)));
  if (need > f.truncation())
    throw Error(ErrorKind::InsufficientTruncation, "short intervals reach beyond the stored coefficients", need);

  std::vector<double> s1(need + 1, 0.0), s2(need + 1, 0.0);
  for (long n = 1; n <= need; ++n) {
    const double l = f.lam_d(static_cast<int>(n));
    s1[n] = s1[n - 1] + l;
    s2[n] = s2[n - 1] + l * l;
  }
  ShortIntervalStats out;
  out.l1sym2 = l1sym2_of(f);
  const double c = 6 / (kPi * kPi) * out.l1sym2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(static_cast<double>(X), 2.0 * X);
  for (IntervalStat* st : {&out.lambda, &out.square}) {
    st->X = static_cast<double>(X);
    st->L = L;
    st->samples = samples;
  }
  for (long i = 0; i < samples; ++i) {
    const double x = ux(rng);
    const long a = static_cast<long>(std::floor(x));
    const long b = std::min(need, static_cast<long>(std::floor(x + x / L)));
    const double lin = s1[b] - s1[a];
    const double main = c * x / L;
    const double sq = s2[b] - s2[a] - main;
    out.lambda.mean += lin;
    out.lambda.mean_square += lin * lin;
    out.square.mean += sq;
    out.square.mean_square += sq * sq;
    out.square.main_term += main;
  }
  for (IntervalStat* st : {&out.lambda, &out.square}) {
    st->mean /= samples;
    st->mean_square /= samples;
    st->main_term /= samples;
  }
  return out;
}

std::vector<int> g_values(const eigen::HeckeEigenform& f, double delta, long n_max) {
  if (n_max > f.truncation())
    throw Error(ErrorKind::InsufficientTruncation, "g needs lambda up to n_max", n_max);
  std::vector<long> spf(n_max + 1, 0);
  for (long i = 2; i <= n_max; ++i)
    if (spf[i] == 0)
      for (long j = i; j <= n_max; j += i)
        if (spf[j] == 0) spf[j] = i;
  std::vector<int> g(n_max + 1, 0);
  if (n_max >= 1) g[1] = 1;
  for (long n = 2; n <= n_max; ++n) {
    const long p = spf[n];
    long q = 1;
    int v = 0;
    long m = n;
    while (m % p == 0) m /= p, q *= p, ++v;
    int gp = 0;
    if (p > 2) {
      const double lam = f.lam_d(static_cast<int>(q));
      if (std::abs(lam) >= std::pow(static_cast<double>(p), -delta * v)) gp = lam > 0 ? 1 : -1;
    }
    g[n] = gp * g[m];
  }
  return g;
}

GIntervalStats g_interval_stats(const eigen::HeckeEigenform& f, double delta, long X, long h, long samples,
                                std::uint64_t seed) {
  if (X < 1 || h < 1 || samples < 1) throw Error(ErrorKind::RangeError, "need X, h, samples >= 1");
  const auto g = g_values(f, delta, 2 * X + h);
  GIntervalStats out;
  out.X = X;
  out.h = h;
  out.delta = delta;
  out.samples = samples;
  for (long n = X; n <= 2 * X; ++n) {
    out.long_g += g[n];
    out.long_abs_g += std::abs(g[n]);
  }
  out.long_g /= static_cast<double>(X);
  out.long_abs_g /= static_cast<double>(X);
  out.gap_threshold = std::pow(std::log(static_cast<double>(h)), -1.0 / 200);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> ux(X, 2 * X);
  long violations = 0;
  for (long i = 0; i < samples; ++i) {
    const long x = ux(rng);
    double s = 0, sa = 0;
    for (long n = x; n <= x + h; ++n) {
      s += g[n];
      sa += std::abs(g[n]);
    }
    s /= static_cast<double>(h);
    sa /= static_cast<double>(h);
    out.short_g.push_back(s);
    out.short_abs_g.push_back(sa);
    const double gap = std::abs(s - out.long_g);
    out.max_gap_g = std::max(out.max_gap_g, gap);
    out.max_gap_abs_g = std::max(out.max_gap_abs_g, std::abs(sa - out.long_abs_g));
    if (gap >= out.gap_threshold) ++violations;
  }
  out.violation_fraction = static_cast<double>(violations) / samples;
  return out;
}

}  // namespace mflab::cusp
