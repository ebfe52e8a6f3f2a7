#include "mflab/massmap.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <set>
#include <sstream>

#include "mflab/zerofind.hpp"

namespace mflab::mass {

namespace {

const double kSqrt3Half = std::sqrt(3.0) / 2;

std::vector<double> parse_numbers(const std::string& body, std::size_t count, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad number in region '" + spec + "'");
    }
  }
  if (out.size() != count) throw Error(ErrorKind::InvalidArgument, "wrong number of fields in region '" + spec + "'");
  return out;
}

quad::Options options_for(double quad_tol) {
  quad::Options opt;
  opt.abs_tol = quad_tol;
  opt.rel_tol = 0;
  return opt;
}

void require(const quad::Result& r) {
  if (!r.converged) throw Error(ErrorKind::QuadratureError, "mass quadrature did not converge");
}

// Height above which the strip carries less than `budget` of mass.
double cut_height(const FormSeries& f, double from, double budget) {
  double Y = std::max(from, 1.0) + 0.5;
  while (eval::strip_mass(f, Y, 0) > budget) Y *= 1.5;
  return Y;
}

MassValue ball_mass(const FormSeries& f, const HyperbolicBall& b, double quad_tol) {
  if (!(b.r > 0)) throw Error(ErrorKind::InvalidArgument, "ball radius must be positive");
  const auto d = zeros::hyperbolic_disk(b.center, b.r);
  // x = cx + R sin(pi u / 2), y = cy + R cos(pi u / 2) v on [-1, 1]^2.
  quad::Integrand g = [&](double u, double v) {
    const double c = std::cos(kPi * u / 2);
    const double x = d.cx + d.radius * std::sin(kPi * u / 2);
    const double half = d.radius * c;
    const double y = d.cy + half * v;
    const auto lv = eval::eval_logF(f, HPoint(x, y));
    if (lv.log_mag == -INFINITY) return 0.0;
    return std::exp(2 * lv.log_mag - 2 * std::log(y)) * d.radius * kPi / 2 * c * half;
  };
  std::vector<quad::Cell> cells;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) cells.push_back({-1 + 0.5 * i, -0.5 + 0.5 * i, -1.0 + j, 0.0 + j});
  const auto r = quad::integrate(g, cells, options_for(quad_tol));
  require(r);
  return {r.value, r.error};
}

MassValue siegel_mass(const FormSeries& f, double Y, double quad_tol) {
  if (Y >= 1) return {eval::strip_mass(f, Y, 0), 1e-14};
  const auto r = eval::mass_between(
      f, -0.5, 0.5, [Y](double x) { return std::max(eval::arc(x), Y); }, [](double) { return 1.0; }, 0,
      options_for(quad_tol));
  require(r);
  return {eval::strip_mass(f, 1, 0) + r.value, r.error + 1e-14};
}

}  // namespace

Region parse_region(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "fundamental" && colon == std::string::npos) return FundamentalDomain{};
  if (kind == "rect") {
    const auto v = parse_numbers(body, 4, spec);
    if (!(v[1] > v[0] && v[3] > v[2] && v[2] > 0))
      throw Error(ErrorKind::InvalidArgument, "rectangle needs x1 < x2 and 0 < y1 < y2");
    return Rectangle{v[0], v[1], v[2], v[3]};
  }
  if (kind == "ball") {
    const auto v = parse_numbers(body, 3, spec);
    if (!(v[1] > 0 && v[2] > 0)) throw Error(ErrorKind::InvalidArgument, "ball needs y > 0 and r > 0");
    return HyperbolicBall{HPoint(v[0], v[1]), v[2]};
  }
  if (kind == "siegel") {
    const auto v = parse_numbers(body, 1, spec);
    if (!(v[0] > 0)) throw Error(ErrorKind::InvalidArgument, "Siegel domain needs Y > 0");
    return SiegelDomain{v[0]};
  }
  throw Error(ErrorKind::InvalidArgument, "unknown region '" + spec + "'");
}

std::string to_string(const Region& r) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Rectangle>)
          os << "rect:" << v.x0 << ',' << v.x1 << ',' << v.y0 << ',' << v.y1;
        else if constexpr (std::is_same_v<T, HyperbolicBall>)
          os << "ball:" << v.center.x << ',' << v.center.y << ',' << v.r;
        else if constexpr (std::is_same_v<T, SiegelDomain>)
          os << "siegel:" << v.Y;
        else
          os << "fundamental";
      },
      r);
  return os.str();
}

double rectangle_area(const Rectangle& r) { return (r.x1 - r.x0) * (1 / r.y0 - 1 / r.y1); }

bool rectangle_in_F(const Rectangle& r) {
  if (r.x0 < -0.5 || r.x1 > 0.5) return false;
  const double x = std::clamp(0.0, r.x0, r.x1);
  return x * x + r.y0 * r.y0 >= 1 - 1e-15;
}

double hyperbolic_area(const Region& region) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Rectangle>)
          return rectangle_area(v);
        else if constexpr (std::is_same_v<T, HyperbolicBall>)
          return zeros::ball_area(v.r);
        else if constexpr (std::is_same_v<T, SiegelDomain>) {
          if (v.Y >= 1) return 1 / v.Y;
          // The arc bounds F where it lies above Y.
          const double a = std::min(std::sqrt(1 - v.Y * v.Y), 0.5);
          return 2 * std::asin(a) + (1 - 2 * a) / v.Y;
        } else
          return kPi / 3;
      },
      region);
}

FormSeries normalized_series(const eigen::HeckeEigenform& f) {
  if (f.log_norm_const) return FormSeries::from_eigenform(f, eval::Normalization::Petersson);
  return FormSeries::from_eigenform(eval::normalized(f), eval::Normalization::Petersson);
}

MassValue mass_region(const FormSeries& f, const Region& region, double quad_tol) {
  return std::visit(
      [&](const auto& v) -> MassValue {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          if (!(v.x1 > v.x0 && v.y1 > v.y0 && v.y0 > 0)) throw Error(ErrorKind::InvalidArgument, "degenerate rectangle");
          double top = v.y1, tail = 0;
          if (!std::isfinite(top)) {
            // The strip bound covers every unit of width once.
            const double copies = std::ceil(v.x1 - v.x0);
            top = cut_height(f, v.y0, quad_tol * 1e-3 / copies);
            tail = copies * eval::strip_mass(f, top, 0);
          }
          const double y0 = v.y0;
          const auto r = eval::mass_between(
              f, v.x0, v.x1, [y0](double) { return y0; }, [top](double) { return top; }, 0, options_for(quad_tol));
          require(r);
          return {r.value, r.error + tail};
        } else if constexpr (std::is_same_v<T, HyperbolicBall>) {
          return ball_mass(f, v, quad_tol);
        } else if constexpr (std::is_same_v<T, SiegelDomain>) {
          return siegel_mass(f, v.Y, quad_tol);
        } else {
          return siegel_mass(f, 0, quad_tol);
        }
      },
      region);
}

DiscrepancyReport que_discrepancy(const eigen::HeckeEigenform& form, int m, double y_cap, long max_cells) {
  if (m < 2 || !(y_cap > 1)) throw Error(ErrorKind::InvalidArgument, "grid needs m >= 2 and y_cap > 1");
  const long cells = static_cast<long>(m - 1) * (m - 1);
  if (cells > max_cells)
    throw Error(ErrorKind::BudgetError, "rectangle lattice exceeds the cell budget",
                static_cast<long>(std::floor(std::sqrt(static_cast<double>(max_cells)))) + 1);
  const FormSeries f = normalized_series(form);

  DiscrepancyReport rep;
  rep.weight = form.weight;
  rep.m = m;
  rep.y_cap = y_cap;
  std::vector<double> xs(m), ys(m);
  for (int i = 0; i < m; ++i) {
    xs[i] = -0.5 + static_cast<double>(i) / (m - 1);
    ys[i] = kSqrt3Half + (y_cap - kSqrt3Half) * i / (m - 1);
  }

  std::vector<double> cell(static_cast<std::size_t>(cells));
  std::vector<std::exception_ptr> errors(cell.size());
  quad::Options opt = options_for(1e-11);
#pragma omp parallel for schedule(dynamic, 1)
  for (long c = 0; c < cells; ++c) {
    const int i = static_cast<int>(c / (m - 1)), j = static_cast<int>(c % (m - 1));
    try {
      const double lo = ys[j], hi = ys[j + 1];
      const auto r = eval::mass_between(
          f, xs[i], xs[i + 1], [lo](double) { return lo; }, [hi](double) { return hi; }, 0, opt, 1, false);
      require(r);
      cell[c] = r.value;
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // prefix[i][j] = mass of [x_0, x_i] x [y_0, y_j]
  std::vector<std::vector<double>> prefix(m, std::vector<double>(m, 0.0));
  for (int i = 1; i < m; ++i)
    for (int j = 1; j < m; ++j)
      prefix[i][j] = cell[(i - 1) * (m - 1) + (j - 1)] + prefix[i - 1][j] + prefix[i][j - 1] - prefix[i - 1][j - 1];

  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = i1 + 1; i2 < m; ++i2)
      for (int j1 = 0; j1 < m; ++j1)
        for (int j2 = j1 + 1; j2 < m; ++j2) {
          const Rectangle r{xs[i1], xs[i2], ys[j1], ys[j2]};
          if (!rectangle_in_F(r)) continue;
          RectangleEntry e;
          e.rect = r;
          e.mass = prefix[i2][j2] - prefix[i1][j2] - prefix[i2][j1] + prefix[i1][j1];
          e.expected = 3 / kPi * rectangle_area(r);
          e.discrepancy = std::abs(e.mass - e.expected);
          if (e.discrepancy > rep.sup_discrepancy) {
            rep.sup_discrepancy = e.discrepancy;
            rep.argmax = r;
          }
          rep.table.push_back(e);
        }

  int P = 2;
  for (int p : primes_up_to(std::min(form.truncation(), 10000))) P = p;
  rep.euler_products = eigen::euler_products(form, P);
  return rep;
}

MassHypothesis mass_hypothesis(const FormSeries& f, double h, std::optional<double> spacing, double sample_step) {
  const int k = f.weight();
  MassHypothesis out;
  out.h = h;
  out.log_threshold = -k * h;
  out.precondition_ok = h > std::log(static_cast<double>(k)) / k;
  if (!out.precondition_ok) return out;
  const double step = spacing.value_or(h / 2);
  if (!(step > 0) || !(sample_step > 0)) throw Error(ErrorKind::InvalidArgument, "grid spacings must be positive");

  std::vector<HPoint> centers;
  for (double x = -0.5; x < 0.5; x += step)
    for (double y = kSqrt3Half; y <= 2 + 1e-12; y += step)
      if (x * x + y * y >= 1 - 1e-12) centers.emplace_back(x, y);

  // Lattice points (a, b) * sample_step covered by some disk, in a fixed order.
  std::vector<std::vector<std::pair<long, long>>> members(centers.size());
  std::set<std::pair<long, long>> needed;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const auto d = zeros::hyperbolic_disk(centers[c], h);
    const long a0 = static_cast<long>(std::ceil((d.cx - d.radius) / sample_step));
    const long a1 = static_cast<long>(std::floor((d.cx + d.radius) / sample_step));
    const long b0 = std::max(1L, static_cast<long>(std::ceil((d.cy - d.radius) / sample_step)));
    const long b1 = static_cast<long>(std::floor((d.cy + d.radius) / sample_step));
    for (long a = a0; a <= a1; ++a)
      for (long b = b0; b <= b1; ++b)
        if (zeros::hyperbolic_distance(HPoint(a * sample_step, b * sample_step), centers[c]) <= h) {
          members[c].emplace_back(a, b);
          needed.emplace(a, b);
        }
  }
  const std::vector<std::pair<long, long>> pts(needed.begin(), needed.end());
  std::vector<double> logv(pts.size());
  std::vector<std::exception_ptr> errors(pts.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(pts.size()); ++i) {
    try {
      logv[i] = 2 * eval::eval_logF(f, HPoint(pts[i].first * sample_step, pts[i].second * sample_step)).log_mag;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::map<std::pair<long, long>, double> value;
  for (std::size_t i = 0; i < pts.size(); ++i) value[pts[i]] = logv[i];

  out.log_min_local_max = INFINITY;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    double best = -INFINITY;
    for (const auto& p : members[c]) best = std::max(best, value[p]);
    if (best < out.log_min_local_max) {
      out.log_min_local_max = best;
      out.argmin = centers[c];
    }
  }
  out.centers = static_cast<long>(centers.size());
  out.samples = static_cast<long>(pts.size());
  out.holds = out.log_min_local_max >= out.log_threshold;
  return out;
}

double cusp_mass(const FormSeries& f, double Y) {
  if (Y < 1) throw Error(ErrorKind::RangeError, "cusp mass needs Y >= 1");
  return eval::strip_mass(f, Y, 0);
}

SupNorm sup_norm_report(const FormSeries& f, int m) {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "grid needs m >= 2");
  const int k = f.weight();
  SupNorm out;
  out.y_top = std::max(k / (2 * kPi), 1.5);
  out.k_quarter = std::pow(k, 0.25);
  out.k_half = std::sqrt(static_cast<double>(k));
  auto logF = [&](double x, double y) { return eval::eval_logF(f, HPoint(x, y)).log_mag; };

  std::vector<double> vals(static_cast<std::size_t>(m) * m, -INFINITY);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < static_cast<long>(m) * m; ++c) {
    const double x = -0.5 + static_cast<double>(c / m) / (m - 1);
    const double y = kSqrt3Half + (out.y_top - kSqrt3Half) * static_cast<double>(c % m) / (m - 1);
    if (x * x + y * y >= 1 - 1e-15) vals[c] = logF(x, y);
  }
  long best = 0;
  for (long c = 1; c < static_cast<long>(vals.size()); ++c)
    if (vals[c] > vals[best]) best = c;
  double bx = -0.5 + static_cast<double>(best / m) / (m - 1);
  double by = kSqrt3Half + (out.y_top - kSqrt3Half) * static_cast<double>(best % m) / (m - 1);
  out.grid_max = std::exp(vals[best]);
  out.grid_argmax = HPoint(bx, by);

  // Compass search; F is invariant so steps may leave the domain.
  double cur = vals[best];
  for (double s = 1.0 / (m - 1); s > 1e-7;) {
    bool moved = false;
    for (auto [dx, dy] : {std::pair{s, 0.0}, {-s, 0.0}, {0.0, s}, {0.0, -s}}) {
      if (by + dy <= 0.1) continue;
      const double v = logF(bx + dx, by + dy);
      if (v > cur) {
        cur = v, bx += dx, by += dy;
        moved = true;
        break;
      }
    }
    if (!moved) s /= 2;
  }
  out.max = std::exp(cur);
  out.argmax = eval::reduce_to_F(HPoint(bx, by)).first;
  return out;
}

BallFamily BallFamily::standard() {
  BallFamily b;
  for (double y : {1.25, 1.75, 2.5})
    for (double x : {-0.25, 0.0, 0.25}) b.centers.emplace_back(x, y);
  b.radii = {0.2, 0.4, 0.8};
  return b;
}

FamilyBallReport family_ball_discrepancy(const std::vector<eigen::HeckeEigenform>& forms, int k,
                                         const BallFamily& family, double quad_tol) {
  FamilyBallReport rep;
  rep.weight = k;
  rep.forms = static_cast<int>(forms.size());
  rep.reference = std::pow(static_cast<double>(k), -1.0 / 21);
  for (const auto& c : family.centers)
    for (double r : family.radii) {
      ++rep.balls;
      if (zeros::ball_in_F(c, r)) ++rep.balls_in_F;
    }
  if (forms.empty()) return rep;
  for (const auto& form : forms) {
    const FormSeries f = normalized_series(form);
    double sup = 0;
    for (const auto& c : family.centers)
      for (double r : family.radii) {
        const HyperbolicBall b{c, r};
        const double mu = mass_region(f, b, quad_tol).value;
        sup = std::max(sup, std::abs(mu - 3 / kPi * zeros::ball_area(r)));
      }
    rep.per_form_sup.push_back(sup);
    rep.mean_square += sup * sup;
  }
  rep.mean_square /= static_cast<double>(forms.size());
  return rep;
}

FamilyBallReport family_ball_discrepancy(int k, const BallFamily& family, int N, double quad_tol) {
  std::vector<eigen::HeckeEigenform> forms;
  if (k >= 12 && k % 2 == 0 && qseries::dim_cusp_forms(k) > 0) forms = eigen::eigenbasis(k, N, 128);
  return family_ball_discrepancy(forms, k, family, quad_tol);
}

}  // namespace mflab::mass
