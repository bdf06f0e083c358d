#include "reifsolve/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace reif {

namespace {

int even_clamp(int m, int lo, int hi) {
  m = std::max(lo, std::min(m, hi));
  return m % 2 == 0 ? m : m + 1;
}

}  // namespace

std::vector<Shell> make_shells(const PVQuadrature& q, double h_local, double inner_override,
                               double cutoff_override) {
  const double inner = inner_override > 0.0 ? inner_override : q.inner_radius_factor * h_local;
  const double cutoff = cutoff_override > 0.0 ? cutoff_override : q.far_cutoff;
  if (!(inner > 0.0)) throw std::invalid_argument("make_shells: inner radius must be positive");
  if (!(q.shell_growth > 1.0)) throw std::invalid_argument("make_shells: growth must exceed 1");
  std::vector<Shell> shells;
  if (cutoff <= inner) return shells;
  double a = inner;
  while (a < cutoff) {
    const double b = std::min(a * q.shell_growth, cutoff);
    int m;
    if (q.points_per_shell > 0) {
      m = even_clamp(q.points_per_shell, 4, 1 << 20);
    } else {
      const double mid = 0.5 * (a + b);
      const double want = 2.0 * std::numbers::pi * mid / h_local;
      const int pow2 = static_cast<int>(std::ceil(std::log2(std::max(want, 4.0))));
      m = even_clamp(1 << std::min(pow2, 20), 4, q.max_points_per_shell);
    }
    shells.push_back({a, b, m});
    a = b;
  }
  return shells;
}

void for_each_shell_node(const Shell& shell, int dim, int radial_subdivisions,
                         const std::function<void(const Vec&, double)>& fn) {
  const int mr = std::max(1, radial_subdivisions);
  const double dr = (shell.b - shell.a) / mr;
  if (dim == 2) {
    const int m = shell.n_angular;
    const double dth = 2.0 * std::numbers::pi / m;
    Vec y(2);
    for (int ir = 0; ir < mr; ++ir) {
      const double r = shell.a + (ir + 0.5) * dr;
      const double w = r * dr * dth;
      for (int ia = 0; ia < m; ++ia) {
        const double th = (ia + 0.5) * dth;
        y[0] = r * std::cos(th);
        y[1] = r * std::sin(th);
        fn(y, w);
      }
    }
    return;
  }
  if (dim == 3) {
    // split the angular budget: polar count ~ sqrt(m/2), azimuth the rest
    const int m = shell.n_angular;
    int mp = std::max(2, static_cast<int>(std::round(std::sqrt(m / 2.0))));
    int ma = even_clamp(std::max(4, m / mp), 4, 1 << 20);
    const double dc = 2.0 / mp;                       // d(cos phi)
    const double da = 2.0 * std::numbers::pi / ma;
    Vec y(3);
    for (int ir = 0; ir < mr; ++ir) {
      const double r = shell.a + (ir + 0.5) * dr;
      const double w = r * r * dr * dc * da;
      for (int ip = 0; ip < mp; ++ip) {
        const double c = -1.0 + (ip + 0.5) * dc;
        const double sphi = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (int ia = 0; ia < ma; ++ia) {
          const double th = (ia + 0.5) * da;
          y[0] = r * sphi * std::cos(th);
          y[1] = r * sphi * std::sin(th);
          y[2] = r * c;
          fn(y, w);
        }
      }
    }
    return;
  }
  throw std::invalid_argument("shell quadrature supports n in {2, 3}");
}

}  // namespace reif
