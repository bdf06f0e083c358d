#pragma once

// Pointwise principal-value evaluation of Lu(x), indicator integrals and the
// L^1_{2s} norm. The inner ball is dropped and charged to the error bound via
// the second-difference bound (no Taylor extrapolation), so the evaluator
// stays correct for merely C^{1,1} integrands. Shell errors are estimated by
// coarse/fine rule differences; tails are handled analytically for the
// isotropic family and bracketed through [lambda, Lambda] otherwise.

#include <functional>
#include <stdexcept>

#include "reifsolve/geometry.hpp"
#include "reifsolve/kernels.hpp"
#include "reifsolve/quadrature.hpp"

namespace reif {

struct GrowthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A function R^n -> R with the side information the evaluator needs: a local
// second-derivative bound near the evaluation point (inner-ball error), and
// either a global sup bound or a growth model |u(y)| <= c (1 + |y|^g) with
// g < 2s (tail error / divergence rejection).
struct PvFunction {
  std::function<double(const Vec&)> eval;
  double d2_bound = 0.0;
  double sup_bound = std::numeric_limits<double>::quiet_NaN();
  double growth_exponent = 0.0;
  double growth_constant = std::numeric_limits<double>::quiet_NaN();
  // u vanishes outside B(0, support_radius) when finite
  double support_radius = std::numeric_limits<double>::infinity();

  static PvFunction bounded(std::function<double(const Vec&)> f, double d2, double sup) {
    PvFunction p;
    p.eval = std::move(f);
    p.d2_bound = d2;
    p.sup_bound = sup;
    return p;
  }
  static PvFunction compact(std::function<double(const Vec&)> f, double d2, double sup,
                            double support) {
    PvFunction p = bounded(std::move(f), d2, sup);
    p.support_radius = support;
    return p;
  }
  static PvFunction growing(std::function<double(const Vec&)> f, double d2, double g_exp,
                            double g_const) {
    PvFunction p;
    p.eval = std::move(f);
    p.d2_bound = d2;
    p.growth_exponent = g_exp;
    p.growth_constant = g_const;
    return p;
  }
};

struct PvResult {
  double value;
  double error_bound;
};

// Lu(x) over shells from inner_radius_factor * h_local to the far cutoff.
// Throws GrowthError when the declared growth makes the tail divergent.
PvResult evaluate_pv(const KernelSpec& kernel, const PvFunction& u, const Vec& x,
                     const PVQuadrature& q, double h_local);

struct IndicatorResult {
  double value;
  double error_bound;
  double lo, hi;  // ellipticity bracket (equal to value for isotropic kernels)
};

// \int_{Omega^c} K(x - y) dy; shells start at d_Omega(x) where the integrand
// switches on. Requires d_Omega(x) > 0.
IndicatorResult evaluate_indicator(const KernelSpec& kernel, const DomainOracle& domain,
                                   const Vec& x, const PVQuadrature& q);

// \int |u(y)| / (1 + |y|^{n+2s}) dy. Throws GrowthError when the shell
// contributions stop decaying.
double l1_2s_norm(const std::function<double(const Vec&)>& u, int n, double s,
                  const PVQuadrature& q);

// Batch interface: one result per point, evaluated in parallel shards.
std::vector<PvResult> batch_evaluate_pv(const KernelSpec& kernel, const PvFunction& u,
                                        const std::vector<Vec>& points, const PVQuadrature& q,
                                        double h_local, int threads = 1);

// Crude |D^2 u| probe by central second differences along the axes and
// diagonals; a convenience for building PvFunction side data.
double fd_d2_bound(const std::function<double(const Vec&)>& u, const Vec& x, double step);

}  // namespace reif
