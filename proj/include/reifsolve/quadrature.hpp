#pragma once

// Radial-shell product quadrature shared by the pointwise evaluator and the
// grid assembly. Shells grow geometrically from an inner radius tied to the
// local resolution up to a far cutoff; the angular rule resolves the shell
// circumference and is capped. Everything here is deterministic.

#include <functional>
#include <vector>

#include "reifsolve/geo.hpp"

namespace reif {

struct PVQuadrature {
  double inner_radius_factor = 1.0;  // inner radius = factor * h_local
  double shell_growth = 1.5;
  int points_per_shell = 0;  // 0 = adaptive by circumference
  int max_points_per_shell = 512;
  double far_cutoff = 1e3;
  enum class TailRule { AnalyticIsotropic, BoundBracket };
  TailRule tail_rule = TailRule::AnalyticIsotropic;
  int radial_subdivisions = 2;  // per-shell midpoint subintervals (fine rule)
};

struct Shell {
  double a, b;     // radial interval
  int n_angular;   // angular nodes (even; n=3: split polar x azimuth)
};

// Shells tiling (inner, cutoff] exactly. h_local controls both the inner
// radius and the angular resolution.
std::vector<Shell> make_shells(const PVQuadrature& q, double h_local, double inner_override = -1.0,
                               double cutoff_override = -1.0);

// Visit product-rule nodes of one shell: fn(y, w) with w the dy-measure
// weight. Node sets are antipodally symmetric. Supports n in {2, 3}.
void for_each_shell_node(const Shell& shell, int dim, int radial_subdivisions,
                         const std::function<void(const Vec&, double)>& fn);

}  // namespace reif
