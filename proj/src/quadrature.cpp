#include "mflab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>

#include <boost/math/quadrature/gauss.hpp>

namespace mflab::quad {

namespace {

struct Rule {
  std::array<double, 16> x, w;
  Rule() {
    using G = boost::math::quadrature::gauss<double, 16>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    for (int i = 0; i < 8; ++i) {
      x[2 * i] = -a[i];
      x[2 * i + 1] = a[i];
      w[2 * i] = wt[i];
      w[2 * i + 1] = wt[i];
    }
  }
};

const Rule& rule() {
  static const Rule r;
  return r;
}

std::array<Cell, 4> children(const Cell& c) {
  const double um = 0.5 * (c.u0 + c.u1), vm = 0.5 * (c.v0 + c.v1);
  return {Cell{c.u0, um, c.v0, vm}, Cell{um, c.u1, c.v0, vm}, Cell{c.u0, um, vm, c.v1}, Cell{um, c.u1, vm, c.v1}};
}

// Evaluates out[i] = kernel(i) for i < n, optionally in parallel, and
// rethrows the exception of the lowest failing index.
template <class Kernel>
void for_each_index(long n, bool parallel, Kernel&& kernel) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 4) if (parallel) reduction(|| : failed)
  for (long i = 0; i < n; ++i) {
    try {
      kernel(i);
    } catch (...) {
      errors[i] = std::current_exception();
      failed = true;
    }
  }
  if (failed)
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
}

Result integrate_impl(const Integrand& f, const std::vector<Cell>& initial, const Options& opt, bool parallel) {
  Result res;
  double total_area = 0;
  for (const auto& c : initial) total_area += c.area();
  if (initial.empty() || total_area <= 0) {
    res.converged = true;
    return res;
  }

  std::vector<Cell> active = initial;
  std::vector<double> parent(active.size());
  for_each_index(static_cast<long>(active.size()), parallel, [&](long i) { parent[i] = gauss_cell(f, active[i]); });

  std::vector<double> accepted, accepted_err;
  for (int level = 0;; ++level) {
    const long n = static_cast<long>(active.size());
    std::vector<double> child(static_cast<std::size_t>(4 * n));
    for_each_index(n, parallel, [&](long i) {
      const auto ch = children(active[i]);
      for (int j = 0; j < 4; ++j) child[4 * i + j] = gauss_cell(f, ch[j]);
    });

    std::vector<double> refined(n);
    for (long i = 0; i < n; ++i) refined[i] = (child[4 * i] + child[4 * i + 1]) + (child[4 * i + 2] + child[4 * i + 3]);
    const double estimate = pairwise_sum(accepted) + pairwise_sum(refined);
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(estimate));

    std::vector<Cell> next;
    std::vector<double> next_parent;
    const bool last = level >= opt.max_level;
    bool forced = false;
    for (long i = 0; i < n; ++i) {
      const double err = std::abs(parent[i] - refined[i]);
      const bool ok = err <= tol * active[i].area() / total_area;
      if (ok || last) {
        forced = forced || !ok;
        accepted.push_back(refined[i]);
        accepted_err.push_back(err);
        continue;
      }
      const auto ch = children(active[i]);
      for (int j = 0; j < 4; ++j) {
        next.push_back(ch[j]);
        next_parent.push_back(child[4 * i + j]);
      }
    }
    res.levels = level + 1;
    if (next.empty()) {
      res.converged = !forced;
      break;
    }
    if (static_cast<long>(next.size()) > opt.max_cells) {
      for (std::size_t i = 0; i < next.size(); ++i) {
        accepted.push_back(next_parent[i]);
        accepted_err.push_back(std::abs(next_parent[i]));
      }
      res.converged = false;
      break;
    }
    active = std::move(next);
    parent = std::move(next_parent);
  }
  res.value = pairwise_sum(accepted);
  res.error = pairwise_sum(accepted_err);
  res.cells = static_cast<long>(accepted.size());
  return res;
}

}  // namespace

double gauss_cell(const Integrand& f, const Cell& c) {
  const auto& r = rule();
  const double hu = 0.5 * (c.u1 - c.u0), hv = 0.5 * (c.v1 - c.v0);
  const double mu = 0.5 * (c.u0 + c.u1), mv = 0.5 * (c.v0 + c.v1);
  double sum = 0;
  for (int i = 0; i < 16; ++i) {
    const double u = mu + hu * r.x[i];
    double row = 0;
    for (int j = 0; j < 16; ++j) row += r.w[j] * f(u, mv + hv * r.x[j]);
    sum += r.w[i] * row;
  }
  return sum * hu * hv;
}

double pairwise_sum(const std::vector<double>& v) {
  if (v.empty()) return 0;
  std::vector<double> level = v;
  while (level.size() > 1) {
    std::vector<double> up((level.size() + 1) / 2);
    for (std::size_t i = 0; i < up.size(); ++i)
      up[i] = 2 * i + 1 < level.size() ? level[2 * i] + level[2 * i + 1] : level[2 * i];
    level = std::move(up);
  }
  return level[0];
}

Result integrate(const Integrand& f, const std::vector<Cell>& initial, const Options& opt) {
  return integrate_impl(f, initial, opt, true);
}

Result integrate_serial(const Integrand& f, const std::vector<Cell>& initial, const Options& opt) {
  return integrate_impl(f, initial, opt, false);
}

std::vector<Cell> split_cells(const std::vector<Cell>& cells, const std::vector<double>& us, const std::vector<double>& vs) {
  std::vector<Cell> out;
  for (const auto& c : cells) {
    std::vector<double> ucut{c.u0}, vcut{c.v0};
    for (double u : us)
      if (u > c.u0 && u < c.u1) ucut.push_back(u);
    for (double v : vs)
      if (v > c.v0 && v < c.v1) vcut.push_back(v);
    ucut.push_back(c.u1);
    vcut.push_back(c.v1);
    std::sort(ucut.begin(), ucut.end());
    std::sort(vcut.begin(), vcut.end());
    ucut.erase(std::unique(ucut.begin(), ucut.end()), ucut.end());
    vcut.erase(std::unique(vcut.begin(), vcut.end()), vcut.end());
    for (std::size_t i = 0; i + 1 < ucut.size(); ++i)
      for (std::size_t j = 0; j + 1 < vcut.size(); ++j) out.push_back({ucut[i], ucut[i + 1], vcut[j], vcut[j + 1]});
  }
  return out;
}

}  // namespace mflab::quad
