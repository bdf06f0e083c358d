#pragma once

// Domain oracles (signed distance + boundary sampling), regularized distance,
// Reifenberg flatness estimation, corkscrew witnesses and the GMT thin-shell
// measure ratio. Oracles are immutable and all queries are pure; Monte Carlo
// ops are deterministic given (seed, sample counts).

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reifsolve/geo.hpp"
#include "reifsolve/rng.hpp"

namespace reif {

struct DomainParams {
  int n = 2;
  Vec center;              // ball
  double radius = 1.0;     // ball
  double slope = 0.1;      // sawtooth
  double period = 1.0;     // sawtooth
  int depth = 3;           // koch_flat
  double angle = 0.05;     // koch_flat: per-generation midpoint displacement ratio
  double base_halfwidth = 1.0;  // koch_flat / graph kinds: curve support [-L, L]
  double eta = 0.05;       // ball_complement offset
  double shrink = 0.0;     // ball_complement: radius 1/8 - shrink
  double amplitude = 0.05; // perturbed_halfspace
  double frequency = 6.0;  // perturbed_halfspace
};

struct DomainOracle {
  std::string kind;
  int n = 2;
  Box bounding_box;  // contains the portion of the boundary of interest

  // sd < 0 inside Omega, > 0 outside, 1-Lipschitz; exact distance for the
  // analytic kinds, polyline-exact for the graph kinds.
  std::function<double(const Vec&)> sd;

  // Points on the boundary inside `region`; empty result when the region
  // misses the boundary.
  std::function<std::vector<Vec>(const Box& region, int count, Rng& rng)> sample_boundary;

  double sampler_tolerance = 1e-9;

  // diam(Omega^c); +inf when the complement is unbounded.
  double complement_diameter = std::numeric_limits<double>::infinity();
  // When the complement is bounded: Omega^c is contained in
  // B(complement_center, complement_circumradius). Lets quadratures truncate.
  double complement_circumradius = std::numeric_limits<double>::infinity();
  Vec complement_center;

  double feature_size = std::numeric_limits<double>::infinity();

  // d_Omega(x) = dist(x, Omega^c) = max(-sd, 0)
  double dist(const Vec& x) const { return std::max(-sd(x), 0.0); }
  bool inside(const Vec& x) const { return sd(x) < 0.0; }

  // Unit inward normal estimated by central differences of sd.
  Vec inward_normal(const Vec& x, double step = 1e-6) const;
};

DomainOracle make_domain(const std::string& kind, const DomainParams& params);

// ---------------------------------------------------------------------------
// Regularized distance: delta(x) = avg of d over B(x, theta d(x)) / (1-theta),
// so that d <= delta <= (1+theta)/(1-theta) d pointwise. The average uses a
// midpoint product rule restricted to the ball; the node set is symmetric
// about x, so linear distance fields average to their center value.
class RegularizedDistance {
 public:
  explicit RegularizedDistance(std::shared_ptr<const DomainOracle> domain,
                               double mollification_fraction = 0.25, int quadrature_order = 4);

  // Throws std::domain_error outside Omega.
  double operator()(const Vec& x) const;
  // 0 outside Omega; what barrier integrands want.
  double value_or_zero(const Vec& x) const;

  double sandwich_constant() const { return (1.0 + theta_) / (1.0 - theta_); }
  double theta() const { return theta_; }
  const DomainOracle& domain() const { return *domain_; }

 private:
  std::shared_ptr<const DomainOracle> domain_;
  double theta_;
  int order_;
  std::vector<Vec> stencil_;  // unit-ball nodes, scaled by theta*d at use
};

struct RegularizedDistanceReport {
  double max_ratio;       // max delta/d observed (must be <= sandwich constant)
  double min_ratio;       // min delta/d observed (must be >= 1)
  double max_grad;        // max |grad delta| by central differences
  double max_hess_scaled; // max |D^2 delta| * d
  int samples;
};
RegularizedDistanceReport regularized_distance_report(const RegularizedDistance& rd,
                                                      int n_samples, uint64_t seed);

// ---------------------------------------------------------------------------
// Reifenberg flatness estimation

struct ReifenbergEntry {
  Vec x;            // boundary point
  double r;         // scale
  Vec normal;       // unit normal of the fitted hyperplane (through x)
  double defect;    // d_H(boundary cap, plane cap) / r
  bool separation_ok;
  bool skipped;     // too few boundary samples in the ball
};

struct ReifenbergReport {
  std::vector<double> scales;
  std::vector<ReifenbergEntry> entries;
  double eta_hat = 0.0;  // max defect over tested (x, r)
  int skipped_count = 0;
  bool all_separation_ok = true;
};

// Per (boundary point, scale): total-least-squares hyperplane translated
// through the point, two-sided sampled Hausdorff defect, separation probe at
// offset 2*defect*r. Scales are log-spaced in (r0/100, r0].
ReifenbergReport reifenberg_estimate(const DomainOracle& domain, double r0, int n_points,
                                     int n_scales, uint64_t seed, int samples_per_ball = 1000);

// Fit a hyperplane through `points` by total least squares (smallest principal
// direction of the centered second-moment matrix). Returns (point, normal).
std::pair<Vec, Vec> fit_hyperplane(const std::vector<Vec>& points);

// ---------------------------------------------------------------------------
// Corkscrew property (P_{R,kappa})

struct CorkscrewParams {
  double R;
  double kappa;
};

struct CorkscrewWitness {
  Vec z;
  double r;
  Vec x;          // witness with B_{kappa r}(x) in Omega^c cap B_r(z)
  double margin;  // (sd(x) - kappa r)/r
  bool found;
};

struct CorkscrewReport {
  bool ok;
  double worst_margin;
  std::vector<CorkscrewWitness> witnesses;
};

// Witness search order: dyadic depths {0.5r, 0.25r, 0.125r} along the local
// outward normal, a ternary line search maximizing sd along the same ray, then
// 64 seeded random exterior trials. Failure only after all candidates fail.
CorkscrewReport corkscrew_check(const DomainOracle& domain, const CorkscrewParams& p,
                                int n_boundary, int n_scales, uint64_t seed);

// ---------------------------------------------------------------------------
// GMT thin-shell measure: |{0 < d < r rho} cap B_rho(z)| / |B_rho|

struct GmtEstimate {
  double ratio;
  double ci_halfwidth;  // 95% binomial
  int n_samples;
};

GmtEstimate gmt_measure_ratio(const DomainOracle& domain, const Vec& z, double rho, double r,
                              int n_samples, uint64_t seed);

}  // namespace reif
