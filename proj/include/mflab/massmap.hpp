#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mflab/eigenforms.hpp"
#include "mflab/evaluate.hpp"

namespace mflab::mass {

using eval::FormSeries;
using eval::HPoint;

struct Rectangle {
  double x0, x1, y0, y1;  // y1 may be +inf
};
struct HyperbolicBall {
  HPoint center;
  double r;
};
struct SiegelDomain {
  double Y;
};
struct FundamentalDomain {};

using Region = std::variant<Rectangle, HyperbolicBall, SiegelDomain, FundamentalDomain>;

/// Parses `rect:x1,x2,y1,y2`, `ball:x,y,r`, `siegel:Y` or `fundamental`.
Region parse_region(const std::string& spec);
std::string to_string(const Region& r);

/// int dx dy / y^2 over the region (Siegel and fundamental domains taken inside F).
double hyperbolic_area(const Region& r);
/// (x1 - x0)(1/y0 - 1/y1).
double rectangle_area(const Rectangle& r);
bool rectangle_in_F(const Rectangle& r);

/// Petersson-normalized evaluation model, normalizing f first if needed.
FormSeries normalized_series(const eigen::HeckeEigenform& f);

struct MassValue {
  double value = 0;
  double error = 0;
};

/// mu_f(R) for a Petersson-normalized series; QuadratureError if the
/// adaptive rule does not reach quad_tol.
MassValue mass_region(const FormSeries& f, const Region& r, double quad_tol = 1e-8);

struct RectangleEntry {
  Rectangle rect;
  double mass = 0;
  double expected = 0;  // (3/pi) * area
  double discrepancy = 0;
};

struct DiscrepancyReport {
  int weight = 0;
  int m = 0;
  double y_cap = 0;
  double sup_discrepancy = 0;
  Rectangle argmax{};
  std::vector<RectangleEntry> table;
  eigen::EulerProducts euler_products;
};

/// Sup of |mu_f(R) - (3/pi) area(R)| over rectangles with corners on the
/// m x m lattice over F cut at y_cap. BudgetError (required = largest
/// admissible m) when (m-1)^2 lattice cells exceed max_cells.
DiscrepancyReport que_discrepancy(const eigen::HeckeEigenform& f, int m = 16, double y_cap = 4, long max_cells = 10000);

struct MassHypothesis {
  bool precondition_ok = false;
  bool holds = false;
  double h = 0;
  double log_threshold = 0;      // -k h (implied constant 1)
  double log_min_local_max = 0;  // min over z0 of log max_{D_h(z0)} y^k |f|^2
  HPoint argmin;
  long centers = 0;
  long samples = 0;
};

/// For every z0 on a grid of F cut at y <= 2 (spacing `spacing`, default h/2),
/// the largest y^k|f|^2 on a fixed global sample lattice (step sample_step)
/// inside the hyperbolic disk D_h(z0), compared with e^{-k h}.
MassHypothesis mass_hypothesis(const FormSeries& f, double h, std::optional<double> spacing = std::nullopt,
                               double sample_step = 0.01);

/// mu_f(F_Y), Y >= 1, termwise closed form.
double cusp_mass(const FormSeries& f, double Y);

struct SupNorm {
  double grid_max = 0;  // max of y^{k/2}|f| on the raw grid
  HPoint grid_argmax;
  double max = 0;  // after local refinement
  HPoint argmax;
  double y_top = 0;
  double k_quarter = 0, k_half = 0;
};

/// Max of y^{k/2}|f| over an m x m grid of F cut at y <= max(k/(2 pi), 1.5), then refined.
SupNorm sup_norm_report(const FormSeries& f, int m = 64);

struct BallFamily {
  std::vector<HPoint> centers;
  std::vector<double> radii;
  static BallFamily standard();
};

struct FamilyBallReport {
  int weight = 0;
  int forms = 0;
  std::vector<double> per_form_sup;
  double mean_square = 0;
  double reference = 0;  // k^{-1/21}
  long balls = 0;
  long balls_in_F = 0;
};

/// Per-form sup over the ball family of |mu_f(B) - (3/pi) area(B)|, averaged in square over H_k.
FamilyBallReport family_ball_discrepancy(int k, const BallFamily& family = BallFamily::standard(), int N = 400,
                                         double quad_tol = 1e-7);
FamilyBallReport family_ball_discrepancy(const std::vector<eigen::HeckeEigenform>& forms, int k,
                                         const BallFamily& family, double quad_tol = 1e-7);

}  // namespace mflab::mass
