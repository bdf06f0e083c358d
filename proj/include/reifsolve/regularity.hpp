#pragma once

// Boundary growth exponents, the dyadic induction audit and pointwise d^sigma
// bounds: the measurement side of the boundary-regularity experiment.

#include <vector>

#include "reifsolve/geometry.hpp"
#include "reifsolve/solver.hpp"

namespace reif {

struct ExponentFit {
  Vec x0;
  std::vector<double> radii;       // strictly decreasing
  std::vector<double> sup_values;  // sup |u| over Omega cap B_r(x0), nonincreasing
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double C = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  int usable_points = 0;
  bool fitted = false;
  bool truncated = false;  // radii without grid nodes were dropped
};

// sup of |u| over grid nodes in Omega cap B_r(x0) per radius; radii with no
// nodes truncate the list (flagged).
ExponentFit boundary_growth(const SolutionField& u, const DomainOracle& domain, const Vec& x0,
                            std::vector<double> radii);

// OLS on (log r, log sup); sups below `sup_floor` (10x solver tolerance in
// the experiments) are excluded. Needs >= 4 usable points.
void fit_holder_exponent(ExponentFit& fit, double sup_floor = 0.0);

struct InductionAudit {
  double rho, sigma;
  std::vector<double> M;      // M_k = sup over Omega cap B_{rho^k}
  std::vector<double> ratio;  // M_k / rho^{k sigma}
  double max_ratio = 0.0;
  double slack = 0.0;  // C_grid h^sigma / rho^{k_max sigma}
  bool pass = false;
  int k_used = 0;
  bool reduced = false;  // k_max lowered so that rho^{k_max} >= 2h
};

// Requires ||u||_inf <= 1 (normalize first). Audits M_k <= rho^{k sigma} up
// to the documented grid slack.
InductionAudit induction_audit(const SolutionField& u, const DomainOracle& domain, const Vec& x0,
                               double rho, double sigma, int k_max, double C_grid = 2.0);

struct PointwiseBound {
  double max_ratio = 0.0;  // max |u| / d^sigma
  Vec argmax;
};

PointwiseBound pointwise_bound_check(const SolutionField& u, const DomainOracle& domain,
                                     double sigma, const Vec& center, double radius);

// Discrete Holder-sigma seminorm over node pairs in a ball at distance
// >= 4h from the boundary; pairs subsampled deterministically.
double interior_seminorm(const SolutionField& u, const DomainOracle& domain, const Vec& center,
                         double radius, double sigma, int max_pairs = 10000);

}  // namespace reif
