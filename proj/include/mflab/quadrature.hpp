#pragma once

#include <functional>
#include <vector>

namespace mflab::quad {

/// Axis-aligned cell [u0, u1] x [v0, v1] in integration coordinates.
struct Cell {
  double u0, u1, v0, v1;
  double area() const { return (u1 - u0) * (v1 - v0); }
};

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_level = 18;
  /// Upper bound on cells evaluated in a single level before giving up.
  long max_cells = 4'000'000;
};

struct Result {
  double value = 0;
  double error = 0;
  long cells = 0;  // accepted leaves
  int levels = 0;
  bool converged = false;
};

/// Integrand must be safe to call concurrently.
using Integrand = std::function<double(double u, double v)>;

/// 16x16 tensor Gauss-Legendre value on one cell.
double gauss_cell(const Integrand& f, const Cell& c);

/// Dyadic adaptive cubature. Each cell is compared with the sum over its four
/// children; a cell is accepted when the difference falls below its share
/// (proportional to area) of max(abs_tol, rel_tol * |running estimate|).
/// The parallel and serial variants produce bit-identical results.
Result integrate(const Integrand& f, const std::vector<Cell>& initial, const Options& opt);
Result integrate_serial(const Integrand& f, const std::vector<Cell>& initial, const Options& opt);

/// Order-independent pairwise sum of a vector (fixed tree shape).
double pairwise_sum(const std::vector<double>& v);

/// Splits each cell at the given interior u and v coordinates.
std::vector<Cell> split_cells(const std::vector<Cell>& cells, const std::vector<double>& us, const std::vector<double>& vs);

}  // namespace mflab::quad
