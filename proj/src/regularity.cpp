#include "reifsolve/regularity.hpp"

#include <algorithm>
#include <cmath>

namespace reif {

ExponentFit boundary_growth(const SolutionField& u, const DomainOracle& domain, const Vec& x0,
                            std::vector<double> radii) {
  if (std::abs(domain.sd(x0)) > 10.0 * domain.sampler_tolerance + 1e-9)
    throw std::invalid_argument("boundary_growth: x0 not on the boundary");
  std::sort(radii.begin(), radii.end(), std::greater<double>());
  ExponentFit fit;
  fit.x0 = x0;
  const Grid& g = *u.grid;
  // single pass; radii are descending so each node stops at the first miss
  std::vector<double> sup(radii.size(), 0.0);
  std::vector<long> count(radii.size(), 0);
  for (long i = 0; i < g.interior_count(); ++i) {
    const double dist = (g.position(i) - x0).norm();
    const double a = std::abs(u.values[i]);
    for (size_t k = 0; k < radii.size(); ++k) {
      if (dist >= radii[k]) break;
      sup[k] = std::max(sup[k], a);
      ++count[k];
    }
  }
  for (size_t k = 0; k < radii.size(); ++k) {
    if (count[k] == 0) {
      fit.truncated = true;
      break;
    }
    fit.radii.push_back(radii[k]);
    fit.sup_values.push_back(sup[k]);
  }
  return fit;
}

void fit_holder_exponent(ExponentFit& fit, double sup_floor) {
  std::vector<double> lx, ly;
  for (size_t k = 0; k < fit.radii.size(); ++k) {
    if (fit.sup_values[k] <= std::max(sup_floor, 0.0)) continue;
    lx.push_back(std::log(fit.radii[k]));
    ly.push_back(std::log(fit.sup_values[k]));
  }
  fit.usable_points = static_cast<int>(lx.size());
  if (fit.usable_points < 4) {
    fit.fitted = false;
    return;
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  if (vxx <= 0.0) {
    fit.fitted = false;
    return;
  }
  fit.alpha = vxy / vxx;
  fit.C = std::exp(sy / n - fit.alpha * sx / n);
  fit.r2 = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;  // all sups equal: perfect flat fit
  fit.fitted = true;
}

InductionAudit induction_audit(const SolutionField& u, const DomainOracle& domain, const Vec& x0,
                               double rho, double sigma, int k_max, double C_grid) {
  (void)domain;
  if (u.sup_norm() > 1.0 + 1e-9)
    throw std::invalid_argument("induction_audit: normalize u to sup norm <= 1 first");
  InductionAudit audit;
  audit.rho = rho;
  audit.sigma = sigma;
  const double h = u.grid->spacing();
  int k_use = k_max;
  while (k_use > 0 && std::pow(rho, k_use) < 2.0 * h) --k_use;
  audit.reduced = k_use != k_max;
  audit.k_used = k_use;
  const Grid& g = *u.grid;
  for (int k = 0; k <= k_use; ++k) {
    const double r = std::pow(rho, k);
    double M = 0.0;
    for (long i = 0; i < g.interior_count(); ++i)
      if ((g.position(i) - x0).norm() < r) M = std::max(M, std::abs(u.values[i]));
    audit.M.push_back(M);
    audit.ratio.push_back(M / std::pow(rho, k * sigma));
  }
  audit.max_ratio = *std::max_element(audit.ratio.begin(), audit.ratio.end());
  audit.slack = C_grid * std::pow(h, sigma) / std::pow(rho, k_use * sigma);
  audit.pass = audit.max_ratio <= 1.0 + audit.slack;
  return audit;
}

PointwiseBound pointwise_bound_check(const SolutionField& u, const DomainOracle& domain,
                                     double sigma, const Vec& center, double radius) {
  PointwiseBound pb;
  pb.argmax = center;
  const Grid& g = *u.grid;
  for (long i = 0; i < g.interior_count(); ++i) {
    const Vec x = g.position(i);
    if ((x - center).norm() >= radius) continue;
    const double d = domain.dist(x);
    if (d <= 0.0) continue;
    const double ratio = std::abs(u.values[i]) / std::pow(d, sigma);
    if (ratio > pb.max_ratio) {
      pb.max_ratio = ratio;
      pb.argmax = x;
    }
  }
  return pb;
}

double interior_seminorm(const SolutionField& u, const DomainOracle& domain, const Vec& center,
                         double radius, double sigma, int max_pairs) {
  const Grid& g = *u.grid;
  const double h = g.spacing();
  if (domain.dist(center) < radius + 4.0 * h)
    throw std::invalid_argument("interior_seminorm: ball too close to the boundary");
  std::vector<long> nodes;
  for (long i = 0; i < g.interior_count(); ++i)
    if ((g.position(i) - center).norm() < radius) nodes.push_back(i);
  const long m = static_cast<long>(nodes.size());
  if (m < 2) return 0.0;
  double best = 0.0;
  const long total = m * (m - 1) / 2;
  const long stride = std::max<long>(1, total / max_pairs);
  long counter = 0;
  for (long a = 0; a < m; ++a) {
    for (long b = a + 1; b < m; ++b) {
      if ((counter++ % stride) != 0) continue;
      const double du = std::abs(u.values[nodes[a]] - u.values[nodes[b]]);
      const double dx = (g.position(nodes[a]) - g.position(nodes[b])).norm();
      if (dx > 0.0) best = std::max(best, du / std::pow(dx, sigma));
    }
  }
  return best;
}

}  // namespace reif
