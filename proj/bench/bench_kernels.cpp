// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <cmath>
#include <map>

#include "mflab/eigenforms.hpp"
#include "mflab/evaluate.hpp"
#include "mflab/quadrature.hpp"

using namespace mflab;

namespace {

// Peaked, oscillating test integrand on the unit square.
double peaked(double u, double v) {
  const double r2 = (u - 0.3) * (u - 0.3) + (v - 0.6) * (v - 0.6);
  return std::exp(-4000 * r2) * std::cos(120 * u * v) + 1;
}

void run_cubature(benchmark::State& state, bool parallel) {
  quad::Options opt;
  opt.rel_tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  opt.abs_tol = 0;
  const std::vector<quad::Cell> init{{0, 1, 0, 1}};
  long cells = 0;
  for (auto _ : state) {
    const auto r = parallel ? quad::integrate(peaked, init, opt) : quad::integrate_serial(peaked, init, opt);
    benchmark::DoNotOptimize(r.value);
    cells = r.cells;
  }
  state.counters["cells"] = static_cast<double>(cells);
}

void BM_CubatureParallel(benchmark::State& s) { run_cubature(s, true); }
void BM_CubatureSerial(benchmark::State& s) { run_cubature(s, false); }

const eval::FormSeries& form(int k) {
  static std::map<int, eval::FormSeries> cache;
  auto it = cache.find(k);
  if (it == cache.end())
    it = cache.emplace(k, eval::FormSeries::from_eigenform(eigen::eigenbasis(k, 400, 128).back())).first;
  return it->second;
}

// Mass of the part of F below y = 2, scaled by |F(i)|^2.
void run_mass(benchmark::State& state, bool parallel) {
  const auto& f = form(static_cast<int>(state.range(0)));
  quad::Options opt;
  opt.rel_tol = 1e-9;
  const double shift = 2 * eval::eval_logF(f, eval::HPoint(0, 1)).log_mag;
  for (auto _ : state) {
    const auto r = eval::mass_between(
        f, -0.5, 0.5, [](double x) { return eval::arc(x); }, [](double) { return 2.0; }, shift, opt, 4, parallel);
    benchmark::DoNotOptimize(r.value);
  }
}

void BM_MassParallel(benchmark::State& s) { run_mass(s, true); }
void BM_MassSerial(benchmark::State& s) { run_mass(s, false); }

}  // namespace

BENCHMARK(BM_CubatureParallel)->DenseRange(8, 12, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CubatureSerial)->DenseRange(8, 12, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MassParallel)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MassSerial)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
