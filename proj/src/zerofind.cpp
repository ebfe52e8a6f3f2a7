#include "mflab/zerofind.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>

namespace mflab::zeros {

using eval::FormSeries;
using eval::HPoint;

namespace {

constexpr double kTwoPi = 2 * kPi;
const double kSqrt3Half = std::sqrt(3.0) / 2;
// Strip box for the whole of F: offsets keep the cell lines off i and rho.
constexpr double kStripShift = 1.0 / 97;
constexpr double kStripBottom = 0.8 - 1.0 / 331;
constexpr double kMultiLeaf = 1e-4;

double wrap_signed(double d) {
  d = std::remainder(d, kTwoPi);
  return d;
}

struct PhaseSample {
  double phase;
  double reach;  // |f / f'| / 2, a lower estimate of the distance to the nearest zero; inf if unknown
};

PhaseSample sample_phase(const FormSeries& f, double x, double y) {
  if (y >= 0.5) {
    const auto s = eval::evaluate_scaled(f, HPoint(x, y));
    const double mag = std::abs(s.f);
    if (!(mag > std::exp(s.log_tail))) throw Error(ErrorKind::ContourThroughZero, "contour meets the indeterminate zone");
    double ph = std::arg(s.f);
    if (ph < 0) ph += kTwoPi;
    const double dmag = std::abs(s.df);
    return {ph, dmag > 0 ? 0.5 * mag / dmag : INFINITY};
  }
  const auto v = eval::eval_logF(f, HPoint(x, y));
  if (v.indeterminate()) throw Error(ErrorKind::ContourThroughZero, "contour meets the indeterminate zone");
  return {v.phase, INFINITY};
}

// Index of the largest term at height y; the phase turns at about 2 pi n per unit x.
int dominant_index(const FormSeries& f, double y) {
  const int M = f.required_terms(y, 60);
  int best = f.order();
  double top = -INFINITY;
  for (int n = f.order(); n <= M; ++n) {
    if (f.sign(n) == 0) continue;
    const double t = f.log_abs(n) - kTwoPi * n * y;
    if (t > top) top = t, best = n;
  }
  return best;
}

// Phase change of f along the segment a -> b.
double edge_phase(const FormSeries& f, double ax, double ay, double bx, double by) {
  const double len = std::hypot(bx - ax, by - ay);
  if (len == 0) return 0;
  const double ymin = std::max(std::min(ay, by), 1e-3);
  const int nd = ymin >= 0.5 ? dominant_index(f, ymin) : f.weight();
  const int pieces = 4 + static_cast<int>(std::ceil(len * (8.0 * nd + 8)));
  const double min_dt = 1e-15 * (1 + std::abs(ax) + std::abs(ay) + std::abs(bx) + std::abs(by)) / len;

  struct Seg {
    double t0, t1;
    PhaseSample p0, p1;
  };
  auto at = [&](double t) { return sample_phase(f, ax + t * (bx - ax), ay + t * (by - ay)); };

  double total = 0;
  double prev_t = 0;
  PhaseSample prev_p = at(0);
  for (int i = 1; i <= pieces; ++i) {
    const double t = static_cast<double>(i) / pieces;
    const PhaseSample p = at(t);
    std::vector<Seg> stack{{prev_t, t, prev_p, p}};
    while (!stack.empty()) {
      const Seg s = stack.back();
      stack.pop_back();
      const double d = wrap_signed(s.p1.phase - s.p0.phase);
      // A segment longer than the zero distance could hide a full turn behind the wrap.
      if (std::abs(d) <= kPi / 4 && (s.t1 - s.t0) * len <= std::min(s.p0.reach, s.p1.reach)) {
        total += d;
        continue;
      }
      if (s.t1 - s.t0 < min_dt) throw Error(ErrorKind::ContourThroughZero, "phase jumps across a vanishing point");
      const double tm = 0.5 * (s.t0 + s.t1);
      const PhaseSample pm = at(tm);
      // Right half first so the left half is processed next (in order along the edge).
      stack.push_back({tm, s.t1, pm, s.p1});
      stack.push_back({s.t0, tm, s.p0, pm});
    }
    prev_t = t;
    prev_p = p;
  }
  return total;
}

// Boundary shift for retry j: tol/7 first, growing 16-fold so that the
// wider indeterminate zones of multiple zeros are also left behind.
double perturbation(int j, double tol, double diam) {
  if (j == 0) return 0;
  const double s = tol / 7 * std::pow(16.0, j - 1);
  return std::min(s, diam / 64) * (j % 2 ? 1 : -1);
}

struct Leaf {
  HPoint z;
  int multiplicity;
  double radius;
};

// Newton on f with the multiplicity-scaled step; nullopt if it leaves the box or stalls.
std::optional<HPoint> newton(const FormSeries& f, const Box& b, int m, double tol) {
  std::complex<double> z(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1));
  const double margin = b.diameter();
  for (int it = 0; it < 50; ++it) {
    eval::Scaled s;
    try {
      s = eval::evaluate_scaled(f, HPoint(z.real(), z.imag()));
    } catch (const Error&) {
      return std::nullopt;
    }
    // At the noise floor the iterate is as good as the evaluation allows.
    if (std::abs(s.f) <= std::exp(s.log_tail)) return HPoint(z.real(), z.imag());
    if (s.df == 0.0) return std::nullopt;
    const std::complex<double> step = static_cast<double>(m) * s.f / s.df;
    z -= step;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
    if (z.real() < b.x0 - margin || z.real() > b.x1 + margin || z.imag() < b.y0 - margin || z.imag() > b.y1 + margin ||
        z.imag() <= 0)
      return std::nullopt;
    if (std::abs(step) < 0.1 * tol) return HPoint(z.real(), z.imag());
  }
  return std::nullopt;
}

Box square(const HPoint& z, double r) { return {z.x - r, z.x + r, z.y - r, z.y + r}; }

// Smallest radius 10 tol 4^j whose box around z has winding m.
std::optional<double> isolate(const FormSeries& f, const HPoint& z, int m, double tol, double rmax) {
  for (double r = 10 * tol; r <= rmax; r *= 4) {
    if (r >= z.y) break;
    try {
      const int w = winding_number(f, square(z, r));
      if (w == m) return r;
      if (w > m) return std::nullopt;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ContourThroughZero) throw;
    }
  }
  return std::nullopt;
}

struct Outcome {
  std::vector<Leaf> leaves;
  std::vector<std::pair<Box, int>> children;
};

Outcome process(const FormSeries& f, const Box& b, int w, const Options& opt) {
  Outcome out;
  const double diam = b.diameter();
  if ((w == 1 && diam < opt.leaf) || diam < kMultiLeaf) {
    if (auto z = newton(f, b, w, opt.tol)) {
      const bool inside = z->x >= b.x0 - opt.tol && z->x <= b.x1 + opt.tol && z->y >= b.y0 - opt.tol &&
                          z->y <= b.y1 + opt.tol;
      if (inside)
        if (auto r = isolate(f, *z, w, opt.tol, std::max(diam, 40 * opt.tol))) {
          out.leaves.push_back({*z, w, *r});
          return out;
        }
    }
  }
  if (diam < opt.tol) {
    out.leaves.push_back({HPoint(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1)), w, diam});
    return out;
  }
  for (int attempt = 0; attempt <= opt.max_perturb; ++attempt) {
    const double shift = perturbation(attempt, opt.tol, diam);
    const double mx = 0.5 * (b.x0 + b.x1) + shift, my = 0.5 * (b.y0 + b.y1) + shift;
    const std::array<Box, 4> ch{Box{b.x0, mx, b.y0, my}, Box{mx, b.x1, b.y0, my}, Box{b.x0, mx, my, b.y1},
                                Box{mx, b.x1, my, b.y1}};
    try {
      std::array<int, 4> cw{};
      int sum = 0;
      for (int j = 0; j < 4; ++j) sum += cw[j] = winding_number(f, ch[j]);
      if (sum != w) {
        if (attempt == opt.max_perturb) {
          char buf[200];
          std::snprintf(buf, sizeof buf, "child windings %d+%d+%d+%d != %d on [%.17g, %.17g] x [%.17g, %.17g]", cw[0],
                        cw[1], cw[2], cw[3], w, b.x0, b.x1, b.y0, b.y1);
          throw Error(ErrorKind::SamplingError, buf);
        }
        continue;
      }
      for (int j = 0; j < 4; ++j)
        if (cw[j] < 0) throw Error(ErrorKind::SamplingError, "negative winding for a holomorphic function");
        else if (cw[j] > 0) out.children.emplace_back(ch[j], cw[j]);
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ContourThroughZero) throw;
    }
  }
  // Every split line meets the indeterminate zone: the box itself isolates the cluster.
  out.leaves.push_back({HPoint(0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1)), w, 0.5 * diam});
  return out;
}

std::vector<Leaf> locate(const FormSeries& f, const Box& box, int w, const Options& opt) {
  std::vector<std::pair<Box, int>> frontier{{box, w}};
  std::vector<Leaf> leaves;
  while (!frontier.empty()) {
    const long n = static_cast<long>(frontier.size());
    std::vector<Outcome> results(n);
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
      try {
        results[i] = process(f, frontier[i].first, frontier[i].second, opt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    std::vector<std::pair<Box, int>> next;
    for (auto& r : results) {
      leaves.insert(leaves.end(), r.leaves.begin(), r.leaves.end());
      next.insert(next.end(), r.children.begin(), r.children.end());
    }
    frontier = std::move(next);
  }
  return leaves;
}

double residual_at(const FormSeries& f, const HPoint& z) { return std::exp(eval::eval_logF(f, z).log_mag); }

// Elliptic point (translate of i or rho) within `snap` of z, with its weight.
std::optional<std::pair<HPoint, Rational>> elliptic_near(const HPoint& z, double snap) {
  const double n0 = std::floor(z.x);
  for (double n = n0 - 1; n <= n0 + 2; ++n) {
    if (std::hypot(z.x - n, z.y - 1) <= snap) return std::make_pair(HPoint(n, 1), Rational(1, 2));
    if (std::hypot(z.x - (n - 0.5), z.y - kSqrt3Half) <= snap)
      return std::make_pair(HPoint(n - 0.5, kSqrt3Half), Rational(1, 3));
  }
  return std::nullopt;
}

ZeroRecord make_record(const FormSeries& f, const Leaf& l, const Options& opt) {
  ZeroRecord r;
  r.location = l.z;
  r.multiplicity = l.multiplicity;
  r.box_radius = l.radius;
  const double snap = std::max(10 * opt.tol, l.radius);
  if (auto e = elliptic_near(l.z, snap)) {
    r.location = e->first;
    r.elliptic_weight = e->second;
    // Multiplicity from a small box centred on the elliptic point itself.
    if (auto rad = isolate(f, r.location, l.multiplicity, opt.tol, 4 * snap)) r.box_radius = *rad;
  }
  r.residual = residual_at(f, r.location);
  return r;
}

void sort_zeros(std::vector<ZeroRecord>& z) {
  std::sort(z.begin(), z.end(), [](const ZeroRecord& a, const ZeroRecord& b) {
    return a.location.y != b.location.y ? a.location.y < b.location.y : a.location.x < b.location.x;
  });
}

Rational total_of(const std::vector<ZeroRecord>& zs) {
  Rational t(0);
  for (const auto& z : zs) t += Rational(z.multiplicity) * z.elliptic_weight;
  return t;
}

}  // namespace

double phase_change(const FormSeries& f, const HPoint& a, const HPoint& b) { return edge_phase(f, a.x, a.y, b.x, b.y); }

double Box::diameter() const { return std::hypot(x1 - x0, y1 - y0); }

int winding_number(const FormSeries& f, const Box& b) {
  if (!(b.x1 > b.x0 && b.y1 > b.y0 && b.y0 > 0)) throw Error(ErrorKind::InvalidArgument, "box must lie in the upper half-plane");
  double total = 0;
  total += edge_phase(f, b.x0, b.y0, b.x1, b.y0);
  total += edge_phase(f, b.x1, b.y0, b.x1, b.y1);
  total += edge_phase(f, b.x1, b.y1, b.x0, b.y1);
  total += edge_phase(f, b.x0, b.y1, b.x0, b.y0);
  const double w = total / kTwoPi;
  const double r = std::round(w);
  if (std::abs(w - r) > 0.25) throw Error(ErrorKind::SamplingError, "winding number is not close to an integer");
  return static_cast<int>(r);
}

ZeroSet zeros_in_region(const FormSeries& f, const Box& box, const Options& opt) {
  ZeroSet out;
  out.weight = f.weight();
  out.expected = Rational(f.weight(), 12);
  Box b = box;
  int w = 0;
  for (int attempt = 0;; ++attempt) {
    try {
      w = winding_number(f, b);
      break;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ContourThroughZero || attempt >= opt.max_perturb) throw;
      const double s = perturbation(attempt + 1, opt.tol, b.diameter());
      b = {box.x0 - s, box.x1 + s, box.y0 - s, box.y1 + s};
    }
  }
  if (w < 0) throw Error(ErrorKind::SamplingError, "negative winding for a holomorphic function");
  if (w > 0)
    for (const auto& l : locate(f, b, w, opt)) out.zeros.push_back(make_record(f, l, opt));
  sort_zeros(out.zeros);
  out.weighted_total = total_of(out.zeros);
  return out;
}

double no_zero_height(const FormSeries& f) {
  const int m = f.order();
  for (double y = 1.0;; y += 0.05) {
    const int M = f.required_terms(y, 60);
    const double lead = f.log_abs(m) - kTwoPi * m * y;
    double rest = 0;
    for (int n = m + 1; n <= M; ++n)
      if (f.sign(n) != 0) rest += std::exp(f.log_abs(n) - kTwoPi * n * y - lead);
    rest += std::exp(f.log_tail(M, y) - lead);
    if (rest < 0.5) return std::max(y, 1.5);
    if (y > 1e4) throw Error(ErrorKind::InvalidArgument, "leading term never dominates");
  }
}

ZeroSet zeros_in_F(const FormSeries& f, const Options& opt) {
  const double top = no_zero_height(f);
  const Box strip{-0.5 + kStripShift, 0.5 + kStripShift, kStripBottom, top};
  const ZeroSet raw = zeros_in_region(f, strip, opt);

  std::vector<ZeroRecord> reduced;
  for (auto z : raw.zeros) {
    const double snap = std::max(10 * opt.tol, z.box_radius);
    HPoint w = eval::reduce_to_F(z.location).first;
    if (std::abs(w.x - 0.5) < snap || std::abs(w.x + 0.5) < snap) w.x = -0.5;
    if (std::abs(std::hypot(w.x, w.y) - 1) < snap && w.x > 0) w.x = -w.x;
    if (z.elliptic_weight != Rational(1)) {
      if (auto e = elliptic_near(w, 0.01)) w = e->first;
    }
    z.location = w;
    reduced.push_back(z);
  }
  sort_zeros(reduced);

  ZeroSet out;
  out.weight = f.weight();
  out.expected = Rational(f.weight(), 12);
  out.cusp_order = f.order();
  for (const auto& z : reduced) {
    bool dup = false;
    for (const auto& kept : out.zeros) {
      const double sep = std::max({1e-7, 2 * kept.box_radius, 2 * z.box_radius});
      if (std::hypot(kept.location.x - z.location.x, kept.location.y - z.location.y) < sep) {
        if (kept.multiplicity != z.multiplicity || kept.elliptic_weight != z.elliptic_weight)
          throw Error(ErrorKind::UnresolvedCluster, "images of one zero disagree on multiplicity");
        dup = true;
        break;
      }
    }
    if (!dup) out.zeros.push_back(z);
  }
  out.weighted_total = total_of(out.zeros) + Rational(out.cusp_order);
  return out;
}

ZeroSet valence_check(const FormSeries& f, const Options& opt) { return zeros_in_F(f, opt); }

Disk hyperbolic_disk(const HPoint& z0, double r) {
  return {z0.x, z0.y * std::cosh(r), z0.y * std::sinh(r)};
}

double hyperbolic_distance(const HPoint& a, const HPoint& b) {
  const double d2 = (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
  return std::acosh(1 + d2 / (2 * a.y * b.y));
}

bool ball_in_F(const HPoint& z0, double r) {
  const Disk d = hyperbolic_disk(z0, r);
  return std::abs(d.cx) + d.radius <= 0.5 && std::hypot(d.cx, d.cy) - d.radius >= 1;
}

double ball_area(double r) { return kTwoPi * (std::cosh(r) - 1); }

BallStatistic ball_zero_statistic(const ZeroSet& zeros, const HPoint& z0, double r) {
  if (!(r > 0) || !ball_in_F(z0, r)) throw Error(ErrorKind::RegionError, "ball is not contained in F");
  BallStatistic s;
  for (const auto& z : zeros.zeros)
    if (hyperbolic_distance(z.location, z0) < r)
      s.count += z.multiplicity * boost::rational_cast<double>(z.elliptic_weight);
  const double kk = zeros.weight / 12.0;
  const double share = 3 / kPi * ball_area(r);
  s.expected = kk * share;
  s.ratio_error = s.count / kk - share;
  return s;
}

BallStatistic ball_zero_statistic(const FormSeries& f, const HPoint& z0, double r) {
  if (!(r > 0) || !ball_in_F(z0, r)) throw Error(ErrorKind::RegionError, "ball is not contained in F");
  return ball_zero_statistic(zeros_in_F(f), z0, r);
}

double psi(double t) { return std::abs(t) < 1 ? std::exp(-1 / (1 - t * t)) : 0.0; }

double dpsi(double t) {
  if (std::abs(t) >= 1) return 0;
  const double s = 1 - t * t;
  return psi(t) * (-2 * t / (s * s));
}

double d2psi(double t) {
  if (std::abs(t) >= 1) return 0;
  const double s = 1 - t * t;
  return psi(t) * (6 * t * t * t * t - 2) / (s * s * s * s);
}

double Bump::value(double x, double y) const {
  return scale * psi((x - center.x) / wx) * psi((y - center.y) / wy);
}

double Bump::laplacian(double x, double y) const {
  const double u = (x - center.x) / wx, v = (y - center.y) / wy;
  return scale * (d2psi(u) * psi(v) / (wx * wx) + psi(u) * d2psi(v) / (wy * wy));
}

Box Bump::support() const { return {center.x - wx, center.x + wx, center.y - wy, center.y + wy}; }

bool Bump::inside_F() const {
  const Box s = support();
  if (s.x0 <= -0.5 || s.x1 >= 0.5) return false;
  const double xc = std::clamp(0.0, s.x0, s.x1);
  return xc * xc + s.y0 * s.y0 > 1;
}

RudnickResult rudnick_check(const FormSeries& f, const ZeroSet& zeros, const Bump& bump, double quad_tol) {
  if (!bump.inside_F()) throw Error(ErrorKind::RegionError, "bump support must lie in the interior of F");
  const Box s = bump.support();
  RudnickResult res;
  std::vector<double> xs, ys;
  for (const auto& z : zeros.zeros) {
    res.lhs += z.multiplicity * bump.value(z.location.x, z.location.y);
    if (s.contains(z.location.x, z.location.y)) {
      xs.push_back(z.location.x);
      ys.push_back(z.location.y);
    }
  }
  const auto cells = quad::split_cells({{s.x0, s.x1, s.y0, s.y1}}, xs, ys);
  quad::Options opt;
  opt.abs_tol = quad_tol;
  opt.rel_tol = quad_tol;

  const auto area = quad::integrate([&](double x, double y) { return bump.value(x, y) / (y * y); }, cells, opt);
  // The Laplacian integrates to zero, so a constant offset in log|F| is free.
  // Each located zero in the support has m log|z - rho| removed; Green's
  // identity puts 2 pi m phi(rho) back, and the remainder is smooth.
  const double offset = eval::eval_logF(f, bump.center).log_mag;
  const double c0 = std::isfinite(offset) ? offset : 0.0;
  std::vector<const ZeroRecord*> inside;
  double green = 0;
  for (const auto& z : zeros.zeros)
    if (s.contains(z.location.x, z.location.y)) {
      inside.push_back(&z);
      green += z.multiplicity * bump.value(z.location.x, z.location.y);
    }
  const auto logint = quad::integrate(
      [&](double x, double y) {
        const double lap = bump.laplacian(x, y);
        if (lap == 0) return 0.0;
        double g = eval::eval_logF(f, HPoint(x, y)).log_mag - c0;
        for (const auto* z : inside) g -= z->multiplicity * std::log(std::hypot(x - z->location.x, y - z->location.y));
        return g * lap;
      },
      cells, opt);
  if (!area.converged || !logint.converged)
    throw Error(ErrorKind::SingularQuadError, "quadrature near the zeros did not converge");
  res.main_term = f.weight() / (4 * kPi) * area.value;
  res.log_term = logint.value / kTwoPi + green;
  res.rhs = res.main_term + res.log_term;
  res.defect = std::abs(res.lhs - res.rhs);
  res.quad_error = f.weight() / (4 * kPi) * area.error + logint.error / kTwoPi;
  return res;
}

RudnickResult rudnick_check(const FormSeries& f, const Bump& bump, double quad_tol) {
  if (!bump.inside_F()) throw Error(ErrorKind::RegionError, "bump support must lie in the interior of F");
  return rudnick_check(f, zeros_in_F(f), bump, quad_tol);
}

EisensteinZeros rsd_eisenstein_zeros(int k, const Options& opt) {
  if (k < 4 || k % 2) throw Error(ErrorKind::InvalidWeight, "Eisenstein series need even k >= 4");
  const auto e = FormSeries::from_eisenstein(k, std::max(200, 4 * k), 128);
  EisensteinZeros r;
  r.weight = k;
  r.set = zeros_in_F(e, opt);
  for (const auto& z : r.set.zeros) {
    r.max_arc_deviation = std::max(r.max_arc_deviation, std::abs(std::hypot(z.location.x, z.location.y) - 1));
    r.arguments.push_back(std::atan2(z.location.y, z.location.x));
  }
  std::sort(r.arguments.begin(), r.arguments.end());
  return r;
}

}  // namespace mflab::zeros
