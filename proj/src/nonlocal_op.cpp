#include "reifsolve/nonlocal_op.hpp"

#include <cmath>
#include <thread>

namespace reif {

namespace {

// coarse companion of a shell: one radial node, half the angular nodes
Shell coarse_shell(const Shell& s) {
  return Shell{s.a, s.b, std::max(4, s.n_angular / 2)};
}

double far_field_average(const PvFunction& u, int n, double radius) {
  if (u.support_radius < radius) return 0.0;
  // fixed antipodal directions; enough to recognize constants and decay
  double sum = 0.0;
  int count = 0;
  const int m = n == 2 ? 8 : 16;
  for (int i = 0; i < m; ++i) {
    Vec dir(n);
    if (n == 2) {
      const double th = (i + 0.5) * 2.0 * std::numbers::pi / m;
      dir << std::cos(th), std::sin(th);
    } else {
      const double c = -1.0 + (i % 4 + 0.5) * 0.5;
      const double th = (i / 4 + 0.5) * std::numbers::pi / 2.0;
      const double sp = std::sqrt(std::max(0.0, 1.0 - c * c));
      dir.resize(3);
      dir << sp * std::cos(th), sp * std::sin(th), c;
    }
    sum += u.eval(Vec(radius * dir));
    ++count;
  }
  return sum / count;
}

}  // namespace

PvResult evaluate_pv(const KernelSpec& kernel, const PvFunction& u, const Vec& x,
                     const PVQuadrature& q, double h_local) {
  const int n = kernel.dim();
  const double s = kernel.order();
  if (u.growth_exponent >= 2.0 * s && !(u.support_radius < q.far_cutoff) &&
      !std::isfinite(u.sup_bound))
    throw GrowthError("evaluate_pv: u grows at least like |y|^{2s}, tail diverges");

  const double ux = u.eval(x);
  const double inner = q.inner_radius_factor * h_local;
  double value = 0.0, err = 0.0;

  // inner ball dropped; second differences bounded by |D^2 u| |y|^2
  err += 0.5 * u.d2_bound * kernel.upper() * sphere_area(n) *
         std::pow(inner, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);

  for (const Shell& shell : make_shells(q, h_local, inner)) {
    double fine = 0.0, coarse = 0.0;
    for_each_shell_node(shell, n, q.radial_subdivisions, [&](const Vec& y, double w) {
      fine += w * kernel.eval(y) * (ux - u.eval(Vec(x + y)));
    });
    for_each_shell_node(coarse_shell(shell), n, 1, [&](const Vec& y, double w) {
      coarse += w * kernel.eval(y) * (ux - u.eval(Vec(x + y)));
    });
    value += fine;
    err += std::abs(fine - coarse);
  }

  // tail: \int_{|y|>Rc} (u(x) - u(x+y)) K dy ~ (u(x) - far average) * mass
  const double Rc = q.far_cutoff;
  const auto mass = kernel.tail_mass(Rc);
  const double ufar = far_field_average(u, n, 2.0 * Rc);
  value += (ux - ufar) * mass.mid();
  err += std::abs(ux - ufar) * mass.halfwidth();
  if (u.support_radius < Rc - x.norm()) {
    // far field is exactly zero; nothing more to charge
  } else if (std::isfinite(u.sup_bound)) {
    err += (u.sup_bound + std::abs(ufar)) * kernel.upper() * kernel.iso_tail(Rc);
  } else if (std::isfinite(u.growth_constant)) {
    const double g = u.growth_exponent;
    if (g >= 2.0 * s) throw GrowthError("evaluate_pv: tail diverges");
    const double iso = sphere_area(n) / (2.0 * s) * std::pow(Rc, -2.0 * s);
    const double grown = sphere_area(n) * std::pow(1.0 + x.norm() / Rc, g) *
                         std::pow(Rc, g - 2.0 * s) / (2.0 * s - g);
    err += kernel.upper() * ((u.growth_constant + std::abs(ufar)) * iso + u.growth_constant * grown);
  } else {
    throw std::invalid_argument("evaluate_pv: need sup_bound or growth data for the tail");
  }
  return {value, err};
}

IndicatorResult evaluate_indicator(const KernelSpec& kernel, const DomainOracle& domain,
                                   const Vec& x, const PVQuadrature& q) {
  const int n = kernel.dim();
  const double d = domain.dist(x);
  if (!(d > 0.0)) throw std::domain_error("evaluate_indicator: d_Omega(x) must be positive");

  // beyond this radius the exterior cannot reach (bounded complement)
  double cutoff = q.far_cutoff;
  bool complement_bounded = std::isfinite(domain.complement_circumradius);
  if (complement_bounded)
    cutoff = std::min(cutoff, (x - domain.complement_center).norm() + domain.complement_circumradius);

  const bool modulated = kernel.family() == KernelFamily::Modulated;
  double geo = 0.0, err = 0.0, frac_last = 0.0;
  auto shells = make_shells(q, std::max(0.05 * d, 1e-9), d * (1.0 - 1e-12), cutoff);
  for (const Shell& shell : shells) {
    double fine = 0.0, coarse = 0.0, mass = 0.0, hit = 0.0;
    const double p = -(n + 2.0 * kernel.order());
    for_each_shell_node(shell, n, q.radial_subdivisions, [&](const Vec& y, double w) {
      mass += w;
      if (domain.sd(Vec(x + y)) >= 0.0) {
        fine += w * (modulated ? std::pow(y.norm(), p) : kernel.eval(y));
        hit += w;
      }
    });
    for_each_shell_node(coarse_shell(shell), n, 1, [&](const Vec& y, double w) {
      if (domain.sd(Vec(x + y)) >= 0.0)
        coarse += w * (modulated ? std::pow(y.norm(), p) : kernel.eval(y));
    });
    geo += fine;
    err += std::abs(fine - coarse);
    frac_last = mass > 0.0 ? hit / mass : 0.0;
  }

  if (!complement_bounded && cutoff >= q.far_cutoff) {
    const auto mass = kernel.tail_mass(q.far_cutoff);
    geo += frac_last * (modulated ? kernel.iso_tail(q.far_cutoff) : mass.mid());
    err += std::max(frac_last, 1.0 - frac_last) * std::max(mass.hi, kernel.upper() * kernel.iso_tail(q.far_cutoff));
  }

  IndicatorResult res;
  if (modulated) {
    res.lo = kernel.lower() * geo;
    res.hi = kernel.upper() * geo;
    res.value = 0.5 * (res.lo + res.hi);
    res.error_bound = kernel.upper() * err + 0.5 * (res.hi - res.lo);
  } else {
    res.value = geo;
    res.lo = res.hi = geo;
    res.error_bound = err;
  }
  return res;
}

double l1_2s_norm(const std::function<double(const Vec&)>& u, int n, double s,
                  const PVQuadrature& q) {
  const double p = n + 2.0 * s;
  const double r0 = 1e-3;
  // bounded integrand near the origin: inner ball charged at its center value
  double value = std::abs(u(Vec(Vec::Zero(n)))) * ball_volume(n) * std::pow(r0, n);

  std::vector<double> contrib;
  auto shells = make_shells(q, 1.0, r0);
  for (const Shell& shell : shells) {
    double acc = 0.0;
    for_each_shell_node(shell, n, q.radial_subdivisions, [&](const Vec& y, double w) {
      acc += w * std::abs(u(y)) / (1.0 + std::pow(y.norm(), p));
    });
    value += acc;
    contrib.push_back(acc);
  }
  // non-decaying outer shells mean the weighted integral diverges; the last
  // shell is truncated at the cutoff, so judge decay on the full shells
  const size_t m = contrib.size();
  if (m >= 8) {
    const double scale = *std::max_element(contrib.begin(), contrib.end());
    double ratio_max = 0.0;
    int counted = 0;
    for (size_t i = m - 7; i + 1 < m; ++i) {  // six trailing full-shell ratios
      if (contrib[i - 1] > 1e-14 * scale) {
        ratio_max = std::max(ratio_max, contrib[i] / contrib[i - 1]);
        ++counted;
      }
    }
    if (counted > 0 && ratio_max >= 0.999)
      throw GrowthError("l1_2s_norm: shell contributions do not decay");
  }
  return value;
}

std::vector<PvResult> batch_evaluate_pv(const KernelSpec& kernel, const PvFunction& u,
                                        const std::vector<Vec>& points, const PVQuadrature& q,
                                        double h_local, int threads) {
  std::vector<PvResult> out(points.size());
  threads = std::max(1, threads);
  if (threads == 1 || points.size() < 2) {
    for (size_t i = 0; i < points.size(); ++i) out[i] = evaluate_pv(kernel, u, points[i], q, h_local);
    return out;
  }
  std::vector<std::thread> pool;
  const size_t per = (points.size() + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const size_t lo = t * per, hi = std::min(points.size(), lo + per);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (size_t i = lo; i < hi; ++i) out[i] = evaluate_pv(kernel, u, points[i], q, h_local);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

double fd_d2_bound(const std::function<double(const Vec&)>& u, const Vec& x, double step) {
  const int n = static_cast<int>(x.size());
  const double u0 = u(x);
  double worst = 0.0;
  auto probe = [&](const Vec& dir) {
    const double up = u(Vec(x + step * dir));
    const double um = u(Vec(x - step * dir));
    worst = std::max(worst, std::abs(up - 2.0 * u0 + um) / (step * step));
  };
  for (int a = 0; a < n; ++a) probe(unit_vec(n, a));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Vec d = (unit_vec(n, a) + unit_vec(n, b)) / std::numbers::sqrt2;
      probe(d);
      Vec e = (unit_vec(n, a) - unit_vec(n, b)) / std::numbers::sqrt2;
      probe(e);
    }
  return worst;
}

}  // namespace reif
