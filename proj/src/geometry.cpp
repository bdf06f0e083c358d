#include "reifsolve/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace reif {

Vec DomainOracle::inward_normal(const Vec& x, double step) const {
  Vec g(n);
  for (int d = 0; d < n; ++d) {
    Vec e = unit_vec(n, d);
    g[d] = (sd(Vec(x + step * e)) - sd(Vec(x - step * e))) / (2.0 * step);
  }
  const double norm = g.norm();
  if (norm < 1e-8) return -unit_vec(n, n - 1);  // flat spot: fall back to the graph axis
  return Vec(-g / norm);  // sd grows outward
}

// ---------------------------------------------------------------------------
// Graph domains Omega = {x_n > f(x_1)} reduce to a planar polyline in the
// (x_1, x_n) plane: the free coordinates drop out of the distance. The curve
// is defined on [-L, L] and continues flat (f = 0) outside.

namespace {

struct Polyline {
  std::vector<double> tx, ty;  // vertices, tx strictly increasing
  double t_lo, t_hi;           // curve support; flat rays beyond

  double max_seg_dt = 0.0;

  void finalize() {
    t_lo = tx.front();
    t_hi = tx.back();
    for (size_t i = 0; i + 1 < tx.size(); ++i)
      max_seg_dt = std::max(max_seg_dt, tx[i + 1] - tx[i]);
  }

  // graph value at t (flat extension outside the support)
  double value(double t) const {
    if (t <= t_lo || t >= t_hi) return 0.0;
    auto it = std::upper_bound(tx.begin(), tx.end(), t);
    size_t i = static_cast<size_t>(it - tx.begin()) - 1;
    i = std::min(i, tx.size() - 2);
    const double w = (t - tx[i]) / (tx[i + 1] - tx[i]);
    return ty[i] + w * (ty[i + 1] - ty[i]);
  }

  static double seg_dist2(double px, double py, double ax, double ay, double bx, double by) {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double u = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const double ex = px - (ax + u * dx), ey = py - (ay + u * dy);
    return ex * ex + ey * ey;
  }

  // exact distance to (curve + flat rays)
  double dist(double t, double y) const {
    // rays {x <= t_lo, y = 0} and {x >= t_hi, y = 0}
    double best2;
    if (t <= t_lo) {
      best2 = y * y;
    } else {
      const double dx = t - t_lo;
      best2 = dx * dx + y * y;
    }
    if (t >= t_hi) {
      best2 = std::min(best2, y * y);
    } else {
      const double dx = t_hi - t;
      best2 = std::min(best2, dx * dx + y * y);
    }
    // expanding window around t over the segments
    auto it = std::upper_bound(tx.begin(), tx.end(), t);
    const long m = static_cast<long>(tx.size()) - 1;  // segment count
    long i0 = std::clamp(static_cast<long>(it - tx.begin()) - 1, 0l, m - 1);
    for (long off = 0; off < m; ++off) {
      bool advanced = false;
      for (long sgn : {1l, -1l}) {
        if (off == 0 && sgn < 0) continue;
        const long i = i0 + sgn * off;
        if (i < 0 || i >= m) continue;
        // segments further away in t than the current best cannot improve
        const double tgap = (t < tx[i]) ? tx[i] - t : (t > tx[i + 1] ? t - tx[i + 1] : 0.0);
        if (tgap * tgap > best2) continue;
        advanced = true;
        best2 = std::min(best2, seg_dist2(t, y, tx[i], ty[i], tx[i + 1], ty[i + 1]));
      }
      if (!advanced && off > 0) break;
    }
    return std::sqrt(best2);
  }
};

DomainOracle graph_domain(std::string kind, int n, std::shared_ptr<Polyline> pl, Box bbox,
                          double feature) {
  DomainOracle dom;
  dom.kind = std::move(kind);
  dom.n = n;
  dom.bounding_box = std::move(bbox);
  dom.feature_size = feature;
  dom.sampler_tolerance = 1e-9;
  auto curve = pl;
  dom.sd = [curve, n](const Vec& x) {
    const double t = x[0];
    const double y = x[n - 1];
    const double d = curve->dist(t, y);
    return y > curve->value(t) ? -d : d;  // Omega above the graph
  };
  dom.sample_boundary = [curve, n](const Box& region, int count, Rng& rng) {
    std::vector<Vec> out;
    if (count <= 0) return out;
    const double a = region.lo[0], b = region.hi[0];
    if (a >= b) return out;
    // clip curve + rays to the t-range, build an arclength table
    std::vector<std::array<double, 4>> segs;  // ax, ay, bx, by
    auto push = [&](double ax, double ay, double bx, double by) {
      if (bx > ax) segs.push_back({ax, ay, bx, by});
    };
    if (a < curve->t_lo) push(a, 0.0, std::min(b, curve->t_lo), 0.0);
    for (size_t i = 0; i + 1 < curve->tx.size(); ++i) {
      double ax = curve->tx[i], bx = curve->tx[i + 1];
      double lo = std::max(ax, a), hi = std::min(bx, b);
      if (lo >= hi) continue;
      const double w0 = (lo - ax) / (bx - ax), w1 = (hi - ax) / (bx - ax);
      const double ya = curve->ty[i] + w0 * (curve->ty[i + 1] - curve->ty[i]);
      const double yb = curve->ty[i] + w1 * (curve->ty[i + 1] - curve->ty[i]);
      push(lo, ya, hi, yb);
    }
    if (b > curve->t_hi) push(std::max(a, curve->t_hi), 0.0, b, 0.0);
    std::vector<double> cum{0.0};
    for (auto& s : segs)
      cum.push_back(cum.back() + std::hypot(s[2] - s[0], s[3] - s[1]));
    if (cum.back() <= 0.0) return out;
    int attempts = 0;
    while (static_cast<int>(out.size()) < count && attempts < 100 * count) {
      ++attempts;
      const double u = rng.uniform() * cum.back();
      const auto it = std::upper_bound(cum.begin(), cum.end(), u);
      size_t i = std::min(static_cast<size_t>(it - cum.begin()) - 1, segs.size() - 1);
      const double w = (u - cum[i]) / std::max(cum[i + 1] - cum[i], 1e-300);
      Vec p(n);
      p.setZero();
      p[0] = segs[i][0] + w * (segs[i][2] - segs[i][0]);
      p[n - 1] = segs[i][1] + w * (segs[i][3] - segs[i][1]);
      for (int d = 1; d < n - 1; ++d) p[d] = rng.uniform(region.lo[d], region.hi[d]);
      if (p[n - 1] >= region.lo[n - 1] && p[n - 1] <= region.hi[n - 1]) out.push_back(p);
    }
    return out;
  };
  return dom;
}

std::shared_ptr<Polyline> sawtooth_curve(double slope, double period, double L) {
  auto pl = std::make_shared<Polyline>();
  // breakpoints at multiples of period/2; f(k*period) = 0, peaks slope*period/2
  const long k_lo = static_cast<long>(std::floor(-L / (0.5 * period)));
  const long k_hi = static_cast<long>(std::ceil(L / (0.5 * period)));
  for (long k = k_lo; k <= k_hi; ++k) {
    const double t = 0.5 * period * static_cast<double>(k);
    const bool peak = (k % 2) != 0;
    pl->tx.push_back(t);
    pl->ty.push_back(peak ? slope * 0.5 * period : 0.0);
  }
  // force exact zeros at the ends so the flat extension matches
  pl->ty.front() = 0.0;
  pl->ty.back() = 0.0;
  pl->finalize();
  return pl;
}

std::shared_ptr<Polyline> koch_curve(int depth, double angle, double L) {
  auto pl = std::make_shared<Polyline>();
  // Split the baseline at 0 so the origin stays a fixed boundary point, then
  // displace every midpoint vertically by a fixed fraction of the segment
  // length, alternating sign. The per-scale fitted-plane defect is the same at
  // every generation (self-similar); the factor calibrates the displacement so
  // the measured flatness matches `angle` (the corner wedges, not the raw
  // displacement, dominate the Hausdorff defect).
  const double disp = 0.345 * angle;
  pl->tx = {-L, 0.0, L};
  pl->ty = {0.0, 0.0, 0.0};
  for (int g = 0; g < depth; ++g) {
    std::vector<double> nx, ny;
    nx.reserve(2 * pl->tx.size());
    ny.reserve(2 * pl->tx.size());
    for (size_t i = 0; i + 1 < pl->tx.size(); ++i) {
      const double ax = pl->tx[i], ay = pl->ty[i];
      const double bx = pl->tx[i + 1], by = pl->ty[i + 1];
      const double len = std::hypot(bx - ax, by - ay);
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      nx.push_back(ax);
      ny.push_back(ay);
      nx.push_back(0.5 * (ax + bx));
      ny.push_back(0.5 * (ay + by) + sign * disp * len);
    }
    nx.push_back(pl->tx.back());
    ny.push_back(pl->ty.back());
    pl->tx = std::move(nx);
    pl->ty = std::move(ny);
  }
  pl->finalize();
  return pl;
}

std::shared_ptr<Polyline> sine_curve(double amplitude, double frequency, double L) {
  auto pl = std::make_shared<Polyline>();
  // snap the window to whole periods so the curve meets the flat extension at 0
  const double period = 2.0 * std::numbers::pi / frequency;
  const long n_half = std::max(1l, static_cast<long>(std::round(L / (0.5 * period))));
  const double Leff = 0.5 * period * static_cast<double>(n_half);
  const long segs = std::max(256l, 64l * n_half);
  for (long i = 0; i <= segs; ++i) {
    const double t = -Leff + 2.0 * Leff * static_cast<double>(i) / static_cast<double>(segs);
    pl->tx.push_back(t);
    pl->ty.push_back(amplitude * std::sin(frequency * t));
  }
  pl->ty.front() = 0.0;
  pl->ty.back() = 0.0;
  pl->finalize();
  return pl;
}

}  // namespace

DomainOracle make_domain(const std::string& kind, const DomainParams& params) {
  const int n = params.n;
  if (n < 2 || n > 8) throw std::invalid_argument("make_domain: dimension out of range");

  if (kind == "ball") {
    if (!(params.radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
    Vec c = params.center.size() == n ? params.center : Vec(Vec::Zero(n));
    const double R = params.radius;
    DomainOracle dom;
    dom.kind = kind;
    dom.n = n;
    dom.bounding_box = Box::cube(n, 1.5 * R, c);
    dom.sd = [c, R](const Vec& x) { return (x - c).norm() - R; };
    dom.sample_boundary = [c, R, n](const Box& region, int count, Rng& rng) {
      std::vector<Vec> out;
      int attempts = 0;
      while (static_cast<int>(out.size()) < count && attempts < 400 * count) {
        ++attempts;
        Vec p = c + R * rng.on_sphere(n);
        if (region.contains(p)) out.push_back(p);
      }
      return out;
    };
    dom.sampler_tolerance = 1e-12;
    dom.feature_size = R;
    return dom;
  }

  if (kind == "half_space") {
    DomainOracle dom;
    dom.kind = kind;
    dom.n = n;
    dom.bounding_box = Box::cube(n, 1.0);
    dom.sd = [n](const Vec& x) { return -x[n - 1]; };
    dom.sample_boundary = [n](const Box& region, int count, Rng& rng) {
      std::vector<Vec> out;
      if (region.lo[n - 1] > 0.0 || region.hi[n - 1] < 0.0) return out;
      for (int i = 0; i < count; ++i) {
        Vec p(n);
        for (int d = 0; d < n - 1; ++d) p[d] = rng.uniform(region.lo[d], region.hi[d]);
        p[n - 1] = 0.0;
        out.push_back(p);
      }
      return out;
    };
    dom.sampler_tolerance = 1e-12;
    return dom;
  }

  if (kind == "ball_complement") {
    // B_0 = closed ball of center -(1/8+eta) e_n and radius 1/8 (minus shrink);
    // Omega is its complement.
    if (!(params.eta >= 0.0) || !(params.shrink >= 0.0) || params.shrink >= 0.125)
      throw std::invalid_argument("ball_complement: bad eta/shrink");
    const double R0 = 0.125 - params.shrink;
    Vec c = -(0.125 + params.eta) * unit_vec(n, n - 1);
    DomainOracle dom;
    dom.kind = kind;
    dom.n = n;
    dom.bounding_box = Box::cube(n, 3.0 * R0, c);
    dom.sd = [c, R0](const Vec& x) { return R0 - (x - c).norm(); };
    dom.sample_boundary = [c, R0, n](const Box& region, int count, Rng& rng) {
      std::vector<Vec> out;
      int attempts = 0;
      while (static_cast<int>(out.size()) < count && attempts < 400 * count) {
        ++attempts;
        Vec p = c + R0 * rng.on_sphere(n);
        if (region.contains(p)) out.push_back(p);
      }
      return out;
    };
    dom.sampler_tolerance = 1e-12;
    dom.complement_diameter = 2.0 * R0;
    dom.complement_circumradius = R0;
    dom.complement_center = c;
    dom.feature_size = R0;
    return dom;
  }

  if (kind == "sawtooth") {
    if (!(params.slope >= 0.0)) throw std::invalid_argument("sawtooth: slope must be >= 0");
    if (!(params.period > 0.0)) throw std::invalid_argument("sawtooth: period must be positive");
    const double L = std::max(params.base_halfwidth, 4.0 * params.period);
    auto pl = sawtooth_curve(params.slope, params.period, L);
    auto dom = graph_domain(kind, n, pl, Box::cube(n, std::max(1.0, params.period)),
                            0.5 * params.period);
    return dom;
  }

  if (kind == "koch_flat") {
    if (params.depth < 0 || params.depth > 8)
      throw std::invalid_argument("koch_flat: depth must lie in [0, 8]");
    if (!(params.angle >= 0.0 && params.angle < 0.45))
      throw std::invalid_argument("koch_flat: angle must lie in [0, 0.45)");
    const double L = params.base_halfwidth;
    auto pl = koch_curve(params.depth, params.angle, L);
    const double feature = L / std::pow(2.0, params.depth);
    return graph_domain(kind, n, pl, Box::cube(n, L), feature);
  }

  if (kind == "perturbed_halfspace") {
    if (!(params.amplitude >= 0.0) || !(params.frequency > 0.0))
      throw std::invalid_argument("perturbed_halfspace: bad amplitude/frequency");
    const double L = params.base_halfwidth;
    auto pl = sine_curve(params.amplitude, params.frequency, L);
    const double feature = 0.5 * std::numbers::pi / params.frequency;
    return graph_domain(kind, n, pl, Box::cube(n, L), feature);
  }

  throw std::invalid_argument("make_domain: unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

RegularizedDistance::RegularizedDistance(std::shared_ptr<const DomainOracle> domain,
                                         double mollification_fraction, int quadrature_order)
    : domain_(std::move(domain)), theta_(mollification_fraction), order_(quadrature_order) {
  if (!(theta_ > 0.0 && theta_ < 0.5))
    throw std::invalid_argument("RegularizedDistance: theta must lie in (0, 1/2)");
  if (order_ < 1) throw std::invalid_argument("RegularizedDistance: order >= 1");
  const int n = domain_->n;
  // midpoint product nodes on [-1,1]^n restricted to the unit ball; the set is
  // symmetric about the origin, so averaging a linear field is exact
  std::vector<double> axis(order_);
  for (int i = 0; i < order_; ++i) axis[i] = -1.0 + (i + 0.5) * 2.0 / order_;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec z(n);
    for (int d = 0; d < n; ++d) z[d] = axis[idx[d]];
    if (z.norm() <= 1.0) stencil_.push_back(z);
    int d = 0;
    while (d < n && ++idx[d] == order_) idx[d++] = 0;
    if (d == n) break;
  }
}

double RegularizedDistance::operator()(const Vec& x) const {
  const double d = domain_->dist(x);
  if (d <= 0.0) throw std::domain_error("regularized_distance: x outside Omega");
  const double rhat = theta_ * d;
  double sum = 0.0;
  for (const Vec& z : stencil_) sum += domain_->dist(Vec(x + rhat * z));
  return sum / (static_cast<double>(stencil_.size()) * (1.0 - theta_));
}

double RegularizedDistance::value_or_zero(const Vec& x) const {
  if (domain_->sd(x) >= 0.0) return 0.0;
  return (*this)(x);
}

RegularizedDistanceReport regularized_distance_report(const RegularizedDistance& rd,
                                                      int n_samples, uint64_t seed) {
  Rng rng(seed);
  const DomainOracle& dom = rd.domain();
  const int n = dom.n;
  RegularizedDistanceReport rep{0.0, std::numeric_limits<double>::infinity(), 0.0, 0.0, 0};
  int attempts = 0;
  while (rep.samples < n_samples && attempts < 400 * n_samples) {
    ++attempts;
    Vec x = rng.in_box(dom.bounding_box);
    const double d = dom.dist(x);
    if (d <= 1e-3) continue;
    const double delta = rd(x);
    rep.max_ratio = std::max(rep.max_ratio, delta / d);
    rep.min_ratio = std::min(rep.min_ratio, delta / d);
    const double h = 1e-4 * d;
    Vec grad(n);
    double hess_max = 0.0;
    for (int a = 0; a < n; ++a) {
      Vec e = unit_vec(n, a);
      const double fp = rd(Vec(x + h * e)), fm = rd(Vec(x - h * e));
      grad[a] = (fp - fm) / (2.0 * h);
      hess_max = std::max(hess_max, std::abs((fp - 2.0 * delta + fm) / (h * h)));
    }
    rep.max_grad = std::max(rep.max_grad, grad.norm());
    rep.max_hess_scaled = std::max(rep.max_hess_scaled, hess_max * d);
    ++rep.samples;
  }
  return rep;
}

// ---------------------------------------------------------------------------

std::pair<Vec, Vec> fit_hyperplane(const std::vector<Vec>& points) {
  if (points.empty()) throw std::invalid_argument("fit_hyperplane: no points");
  const int n = static_cast<int>(points[0].size());
  Vec centroid = Vec::Zero(n);
  for (const Vec& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Mat M = Mat::Zero(n, n);
  for (const Vec& p : points) {
    Vec q = p - centroid;
    M += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  Vec normal = es.eigenvectors().col(0);  // smallest principal direction
  return {centroid, normal};
}

namespace {

// Orthonormal basis of the hyperplane orthogonal to `normal` (Gram-Schmidt
// against the coordinate axes, skipping the most parallel one).
std::vector<Vec> tangent_basis(const Vec& normal) {
  const int n = static_cast<int>(normal.size());
  std::vector<Vec> tangents;
  for (int c = 0; c < n && static_cast<int>(tangents.size()) < n - 1; ++c) {
    Vec t = unit_vec(n, c);
    t -= t.dot(normal) * normal;
    for (const Vec& prev : tangents) t -= t.dot(prev) * prev;
    if (t.norm() > 1e-6) tangents.push_back(Vec(t / t.norm()));
  }
  if (static_cast<int>(tangents.size()) != n - 1)
    throw std::runtime_error("tangent_basis: degenerate frame");
  return tangents;
}

std::vector<Vec> plane_cap_points(const Vec& x, const Vec& normal, double r, int n) {
  // deterministic sample of H cap B_r(x) for the plane through x
  std::vector<Vec> out;
  auto tangents = tangent_basis(normal);
  if (n == 2) {
    const int m = 64;
    for (int j = 0; j < m; ++j) {
      const double t = -r + (j + 0.5) * 2.0 * r / m;
      out.push_back(Vec(x + t * tangents[0]));
    }
  } else {
    const int rings = 8, angles = 16;
    out.push_back(x);
    for (int k = 0; k < rings; ++k) {
      const double rad = (k + 0.5) * r / rings;
      for (int a = 0; a < angles; ++a) {
        const double th = (a + 0.5) * 2.0 * std::numbers::pi / angles;
        out.push_back(Vec(x + rad * std::cos(th) * tangents[0] + rad * std::sin(th) * tangents[1]));
      }
    }
  }
  return out;
}

}  // namespace

ReifenbergReport reifenberg_estimate(const DomainOracle& domain, double r0, int n_points,
                                     int n_scales, uint64_t seed, int samples_per_ball) {
  if (n_points < 1) throw std::invalid_argument("reifenberg_estimate: n_points >= 1");
  if (n_scales < 1) throw std::invalid_argument("reifenberg_estimate: n_scales >= 1");
  const int n = domain.n;
  ReifenbergReport rep;
  for (int i = 0; i < n_scales; ++i) {
    const double frac = n_scales == 1 ? 1.0
                                      : static_cast<double>(i) / static_cast<double>(n_scales - 1);
    rep.scales.push_back(r0 * std::pow(0.01, 1.0 - frac));
  }
  Rng rng(seed);
  auto anchors = domain.sample_boundary(domain.bounding_box, n_points, rng);
  uint64_t shard = 0;
  for (const Vec& x : anchors) {
    for (double r : rep.scales) {
      Rng ball_rng(Rng::shard_seed(seed, ++shard));
      ReifenbergEntry e;
      e.x = x;
      e.r = r;
      e.skipped = false;
      e.separation_ok = false;
      auto raw = domain.sample_boundary(ball_box(x, r), samples_per_ball, ball_rng);
      std::vector<Vec> pts;
      for (auto& p : raw)
        if ((p - x).norm() <= r) pts.push_back(p);
      if (static_cast<int>(pts.size()) < n + 1) {
        e.skipped = true;
        e.defect = std::numeric_limits<double>::quiet_NaN();
        e.normal = Vec::Zero(n);
        ++rep.skipped_count;
        rep.entries.push_back(e);
        continue;
      }
      auto [centroid, normal] = fit_hyperplane(pts);
      (void)centroid;  // Definition requires the plane through x; translate it there
      e.normal = normal;
      double side1 = 0.0;
      for (const Vec& p : pts) side1 = std::max(side1, std::abs((p - x).dot(normal)));
      double side2 = 0.0;
      for (const Vec& q : plane_cap_points(x, normal, r, n)) {
        // |sd(q)| is the exact distance to the full boundary; it equals the
        // in-ball distance whenever the boundary projection of q stays in the
        // ball, which removes the sample-spacing bias there
        double dq = std::numeric_limits<double>::infinity();
        const double sq = domain.sd(q);
        Vec proj = q + sq * domain.inward_normal(q);
        if (std::abs(domain.sd(proj)) <= 1e-6 * r && (proj - x).norm() <= r) dq = std::abs(sq);
        if (!std::isfinite(dq)) {
          for (const Vec& p : pts) dq = std::min(dq, (q - p).norm());
        }
        side2 = std::max(side2, dq);
      }
      e.defect = std::max(side1, side2) / r;
      // separation: probe both sides of the plane beyond 2*defect*r
      const double t0 = std::max(2.0 * e.defect * r, 0.05 * r);
      bool ok = t0 < r;
      int sign_pos = 0, sign_neg = 0;
      if (ok) {
        for (double t : {t0, std::max(t0, 0.5 * r), std::max(t0, 0.9 * r)}) {
          if (t >= r) continue;
          const double sp = domain.sd(Vec(x + t * normal));
          const double sn = domain.sd(Vec(x - t * normal));
          if (sign_pos == 0) sign_pos = sp > 0 ? 1 : -1;
          if (sign_neg == 0) sign_neg = sn > 0 ? 1 : -1;
          if ((sp > 0 ? 1 : -1) != sign_pos || (sn > 0 ? 1 : -1) != sign_neg) ok = false;
        }
        if (sign_pos == sign_neg) ok = false;
      }
      e.separation_ok = ok;
      if (!ok) rep.all_separation_ok = false;
      rep.eta_hat = std::max(rep.eta_hat, e.defect);
      rep.entries.push_back(e);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

CorkscrewReport corkscrew_check(const DomainOracle& domain, const CorkscrewParams& p,
                                int n_boundary, int n_scales, uint64_t seed) {
  if (!(p.kappa > 0.0 && p.kappa < p.R))
    throw std::invalid_argument("corkscrew_check: need 0 < kappa < R");
  Rng rng(seed);
  auto anchors = domain.sample_boundary(domain.bounding_box, n_boundary, rng);
  std::vector<double> radii;
  for (int i = 0; i < n_scales; ++i) {
    const double frac = n_scales == 1 ? 1.0
                                      : static_cast<double>(i) / static_cast<double>(n_scales - 1);
    radii.push_back(0.99 * p.R * std::pow(0.01, 1.0 - frac));
  }
  CorkscrewReport rep{true, std::numeric_limits<double>::infinity(), {}};
  uint64_t shard = 0;
  for (const Vec& z : anchors) {
    for (double r : radii) {
      Rng pair_rng(Rng::shard_seed(seed, ++shard));
      const double need = p.kappa * r;
      const double reach = (1.0 - p.kappa) * r;
      Vec nu_out = -domain.inward_normal(z);
      CorkscrewWitness w;
      w.z = z;
      w.r = r;
      w.found = false;
      double best_margin = -std::numeric_limits<double>::infinity();
      Vec best_x = z;
      auto consider = [&](const Vec& x) {
        if ((x - z).norm() > reach + 1e-12) return;
        const double m = (domain.sd(x) - need) / r;
        if (m > best_margin) {
          best_margin = m;
          best_x = x;
        }
        if (m >= -1e-12 && !w.found) {
          w.found = true;
          w.x = x;
          w.margin = m;
        }
      };
      for (double c : {0.5, 0.25, 0.125})
        if (c <= 1.0 - p.kappa) consider(Vec(z + c * r * nu_out));
      if (!w.found) {
        // ternary search for the deepest exterior point along the ray
        double lo = 0.0, hi = 1.0 - p.kappa;
        for (int it = 0; it < 60; ++it) {
          const double c1 = lo + (hi - lo) / 3.0, c2 = hi - (hi - lo) / 3.0;
          const double f1 = domain.sd(Vec(z + c1 * r * nu_out));
          const double f2 = domain.sd(Vec(z + c2 * r * nu_out));
          if (f1 < f2) lo = c1; else hi = c2;
        }
        consider(Vec(z + 0.5 * (lo + hi) * r * nu_out));
      }
      for (int t = 0; t < 64 && !w.found; ++t) consider(pair_rng.in_ball(z, reach));
      if (!w.found) {
        rep.ok = false;
        w.x = best_x;
        w.margin = best_margin;
      }
      rep.worst_margin = std::min(rep.worst_margin, w.margin);
      rep.witnesses.push_back(w);
    }
  }
  if (rep.witnesses.empty()) rep.worst_margin = 0.0;
  return rep;
}

// ---------------------------------------------------------------------------

GmtEstimate gmt_measure_ratio(const DomainOracle& domain, const Vec& z, double rho, double r,
                              int n_samples, uint64_t seed) {
  if (!(r > 0.0 && r < 0.5)) throw std::invalid_argument("gmt_measure_ratio: r in (0, 1/2)");
  if (!(rho > 0.0)) throw std::invalid_argument("gmt_measure_ratio: rho > 0");
  if (n_samples < 1000) throw std::invalid_argument("gmt_measure_ratio: n_samples >= 1000");
  Rng rng(seed);
  const double band = r * rho;
  long hits = 0;
  for (int i = 0; i < n_samples; ++i) {
    Vec p = rng.in_ball(z, rho);
    const double s = domain.sd(p);
    if (s < 0.0 && -s < band) ++hits;
  }
  const double phat = static_cast<double>(hits) / n_samples;
  const double ci = 1.96 * std::sqrt(std::max(phat * (1.0 - phat), 0.0) / n_samples);
  return {phat, ci, n_samples};
}

}  // namespace reif
