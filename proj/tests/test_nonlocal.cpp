#include <doctest.h>

#include "reifsolve/nonlocal_op.hpp"

using namespace reif;

namespace {

// 1D radial oracle: for radial u and the unnormalized isotropic kernel,
// Lu(0) = |S^{n-1}| \int_0^inf (u(0) - u(t)) t^{-1-2s} dt. Log-midpoint rule
// plus the analytic tail of the weight.
double radial_pv_oracle(double s, int n, const std::function<double(double)>& g, double g0) {
  const double t_lo = 1e-10, t_hi = 50.0;
  const int m = 40000;
  const double dl = std::log(t_hi / t_lo) / m;
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    const double t = t_lo * std::exp((i + 0.5) * dl);
    acc += (g0 - g(t)) * std::pow(t, -1.0 - 2.0 * s) * t * dl;
  }
  acc += g0 * std::pow(t_hi, -2.0 * s) / (2.0 * s);  // g ~ 0 beyond t_hi
  return sphere_area(n) * acc;
}

double gaussian_pv_oracle(double s, int n) {
  return radial_pv_oracle(s, n, [](double t) { return std::exp(-t * t); }, 1.0);
}

PvFunction gaussian_fn(int n) {
  PvFunction u;
  u.eval = [](const Vec& y) { return std::exp(-y.squaredNorm()); };
  u.d2_bound = 2.0;
  u.sup_bound = 1.0;
  return u;
}

PVQuadrature fine_quadrature() {
  PVQuadrature q;
  return q;
}

KernelSpec step_modulated(int n, double s) {
  return KernelSpec::modulated(n, s, 1.0, 2.0,
                               [](const Vec& y) { return y.norm() < 1.0 ? 1.0 : 2.0; });
}

}  // namespace

TEST_SUITE("nonlocal") {

TEST_CASE("constant functions evaluate to exactly zero") {
  auto k = KernelSpec::isotropic(2, 0.5);
  for (double c : {0.0, 1.0, -3.5}) {
    PvFunction u = PvFunction::bounded([c](const Vec&) { return c; }, 0.0, std::abs(c));
    auto res = evaluate_pv(k, u, vec2(0.3, -0.1), fine_quadrature(), 1e-3);
    CHECK(res.value == 0.0);
  }
}

TEST_CASE("gaussian matches the radial oracle within combined bounds") {
  // oracle consistency: \int_0^inf (1-e^{-t^2}) t^{-1-2s} dt = Gamma(1-s)/(2s)
  for (double s : {0.3, 0.5, 0.7}) {
    const double closed = sphere_area(2) * std::tgamma(1.0 - s) / (2.0 * s);
    CHECK(gaussian_pv_oracle(s, 2) == doctest::Approx(closed).epsilon(1e-5));
  }
  for (double s : {0.3, 0.5, 0.7}) {
    auto k = KernelSpec::isotropic(2, s);
    auto res = evaluate_pv(k, gaussian_fn(2), vec2(0, 0), fine_quadrature(), 1e-4);
    const double oracle = gaussian_pv_oracle(s, 2);
    CHECK(std::abs(res.value - oracle) <= res.error_bound + 1e-4 * oracle);
    CHECK(res.error_bound < 0.05 * oracle);  // bounds stay useful
  }
}

TEST_CASE("gaussian oracle in three dimensions") {
  auto k = KernelSpec::isotropic(3, 0.5);
  auto res = evaluate_pv(k, gaussian_fn(3), vec3(0, 0, 0), fine_quadrature(), 1e-4);
  const double oracle = gaussian_pv_oracle(0.5, 3);
  CHECK(std::abs(res.value - oracle) <= res.error_bound + 1e-4 * oracle);
}

TEST_CASE("kernel rescaling identity for the evaluator") {
  // (L_r u_r)(x) = r^{2s} (L u)(r x) with u_r(x) = u(rx)
  const double s = 0.5;
  auto k = step_modulated(2, s);
  PvFunction u;
  u.eval = [](const Vec& y) {
    const double q = 1.0 - y.squaredNorm();
    return q > 0.0 ? q * q * q : 0.0;
  };
  u.sup_bound = 1.0;
  u.support_radius = 1.0;
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const double r = rng.log_uniform(0.5, 2.0);
    Vec x = rng.in_ball(Vec(Vec::Zero(2)), 0.45 / r);
    auto kr = k.rescaled(r);
    PvFunction ur;
    ur.eval = [&u, r](const Vec& y) { return u.eval(Vec(r * y)); };
    ur.sup_bound = 1.0;
    ur.support_radius = 1.0 / r;
    ur.d2_bound = 2.0 * fd_d2_bound(ur.eval, x, 1e-4);
    u.d2_bound = 2.0 * fd_d2_bound(u.eval, Vec(r * x), 1e-4);
    auto lhs = evaluate_pv(kr, ur, x, fine_quadrature(), 1e-4);
    auto rhs = evaluate_pv(k, u, Vec(r * x), fine_quadrature(), 1e-4);
    const double rs = std::pow(r, 2.0 * s);
    CHECK(std::abs(lhs.value - rs * rhs.value) <=
          lhs.error_bound + rs * rhs.error_bound + 1e-10);
  }
}

TEST_CASE("property: linearity within error bounds") {
  auto k = KernelSpec::isotropic(2, 0.4);
  PvFunction u = gaussian_fn(2);
  PvFunction v;
  v.eval = [](const Vec& y) { return std::cos(y[0]) * std::exp(-y.squaredNorm()); };
  v.d2_bound = 8.0;
  v.sup_bound = 1.0;
  const double a = 2.0, b = -0.7;
  PvFunction w;
  w.eval = [&, a, b](const Vec& y) { return a * u.eval(y) + b * v.eval(y); };
  w.d2_bound = a * u.d2_bound + std::abs(b) * v.d2_bound;
  w.sup_bound = a * u.sup_bound + std::abs(b) * v.sup_bound;
  const Vec x = vec2(0.1, 0.2);
  auto q = fine_quadrature();
  auto ru = evaluate_pv(k, u, x, q, 1e-3);
  auto rv = evaluate_pv(k, v, x, q, 1e-3);
  auto rw = evaluate_pv(k, w, x, q, 1e-3);
  CHECK(std::abs(rw.value - (a * ru.value + b * rv.value)) <=
        rw.error_bound + a * ru.error_bound + std::abs(b) * rv.error_bound);
}

TEST_CASE("property: nonnegative at a global maximum") {
  auto k = KernelSpec::isotropic(2, 0.6);
  PvFunction u;
  u.eval = [](const Vec& y) {
    const double q = 1.0 - y.squaredNorm();
    return q > 0.0 ? q * q : 0.0;
  };
  u.d2_bound = 12.0;
  u.sup_bound = 1.0;
  u.support_radius = 1.0;
  auto res = evaluate_pv(k, u, vec2(0, 0), fine_quadrature(), 1e-3);
  CHECK(res.value >= -res.error_bound);
  CHECK(res.value > 0.0);
}

TEST_CASE("property: error-bound honesty under refinement") {
  // doubling the shell/point budget moves the value by less than the
  // previous error bound, over a panel of smooth test functions
  auto k = KernelSpec::isotropic(2, 0.5);
  PVQuadrature coarse;
  PVQuadrature fine;
  fine.shell_growth = std::sqrt(coarse.shell_growth);  // double the shells
  fine.radial_subdivisions = 2 * coarse.radial_subdivisions;
  fine.max_points_per_shell = 2 * coarse.max_points_per_shell;
  Rng rng(23);
  int checked = 0;
  for (int i = 0; i < 20; ++i) {
    const double a = rng.uniform(0.5, 2.0);
    const double cx = rng.uniform(-0.3, 0.3), cy = rng.uniform(-0.3, 0.3);
    const double fr = rng.uniform(0.5, 3.0);
    PvFunction u;
    u.eval = [=](const Vec& y) {
      const double g = std::exp(-a * (y - vec2(cx, cy)).squaredNorm());
      return g * std::cos(fr * y[0]) + 0.5 * g;
    };
    const Vec x = vec2(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
    u.d2_bound = 2.0 * fd_d2_bound(u.eval, x, 1e-4);
    u.sup_bound = 2.0;
    auto r1 = evaluate_pv(k, u, x, coarse, 1e-3);
    auto r2 = evaluate_pv(k, u, x, fine, 1e-3);
    CHECK(std::abs(r2.value - r1.value) <= r1.error_bound);
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("growth beyond |y|^{2s} is rejected") {
  auto k = KernelSpec::isotropic(2, 0.5);
  PvFunction u = PvFunction::growing([](const Vec& y) { return std::pow(y.norm(), 1.2); }, 1.0,
                                     1.2, 1.0);
  CHECK_THROWS_AS(evaluate_pv(k, u, vec2(0.1, 0.1), fine_quadrature(), 1e-3), GrowthError);
}

TEST_CASE("indicator integral: half space t^{-2s} law") {
  DomainParams p;
  auto dom = make_domain("half_space", p);
  auto k = KernelSpec::isotropic(2, 0.5);
  // A = \int_{y_n < -1} |y|^{-3} dy via the angular 1D reduction
  double A = 0.0;
  {
    const int m = 200000;
    const double t_lo = 1.0, t_hi = 1e7;
    const double dl = std::log(t_hi / t_lo) / m;
    for (int i = 0; i < m; ++i) {
      const double t = t_lo * std::exp((i + 0.5) * dl);
      A += 2.0 * std::acos(std::min(1.0, 1.0 / t)) * std::pow(t, -2.0) * t * dl;
    }
  }
  CHECK(A == doctest::Approx(2.0).epsilon(1e-3));  // closed form: 2 \int_0^1 acos = 2
  for (double t : {0.1, 0.2, 0.4}) {
    auto res = evaluate_indicator(k, dom, vec2(0.0, t), fine_quadrature());
    CHECK(std::abs(res.value - A / t) <= res.error_bound + 0.01 * A / t);
  }
}

TEST_CASE("indicator integral: empty complement gives zero") {
  DomainParams p;
  p.radius = 1e6;  // effectively all of R^2 within the quadrature cutoff
  auto dom = make_domain("ball", p);
  auto k = KernelSpec::isotropic(2, 0.5);
  auto res = evaluate_indicator(k, dom, vec2(0.2, 0.0), fine_quadrature());
  CHECK(res.value == 0.0);
}

TEST_CASE("indicator integral: ball complement stays elliptic near the hole") {
  DomainParams p;
  p.eta = 0.05;
  auto dom = make_domain("ball_complement", p);
  auto k = KernelSpec::isotropic(2, 0.5);
  const Vec x = dom.complement_center + (dom.complement_circumradius + 0.01) * unit_vec(2, 1);
  auto res = evaluate_indicator(k, dom, x, fine_quadrature());
  const double c0 = (res.value - res.error_bound) * std::pow(0.01, 1.0);
  CHECK(c0 > 0.0);  // the measured constant, reported not asserted to a value
}

TEST_CASE("indicator integral: ellipticity bracket for modulated kernels") {
  DomainParams p;
  auto dom = make_domain("half_space", p);
  auto km = step_modulated(2, 0.5);
  auto ki = KernelSpec::isotropic(2, 0.5);
  const Vec x = vec2(0.0, 0.2);
  auto rm = evaluate_indicator(km, dom, x, fine_quadrature());
  auto ri = evaluate_indicator(ki, dom, x, fine_quadrature());
  CHECK(rm.lo == doctest::Approx(km.lower() * ri.value).epsilon(1e-9));
  CHECK(rm.hi == doctest::Approx(km.upper() * ri.value).epsilon(1e-9));
  CHECK(rm.lo <= rm.value);
  CHECK(rm.value <= rm.hi);
}

TEST_CASE("indicator requires an interior point") {
  DomainParams p;
  auto dom = make_domain("half_space", p);
  auto k = KernelSpec::isotropic(2, 0.5);
  CHECK_THROWS_AS(evaluate_indicator(k, dom, vec2(0.0, -0.5), fine_quadrature()),
                  std::domain_error);
}

TEST_CASE("l1_2s norm: zero, constants, growth rejection") {
  auto q = fine_quadrature();
  CHECK(l1_2s_norm([](const Vec&) { return 0.0; }, 2, 0.5, q) == 0.0);

  // u = 1, n = 2, s = 1/2: \int dy/(1+|y|^3) = 2 pi \int_0^inf t/(1+t^3) dt
  double oracle = 0.0;
  {
    const int m = 200000;
    const double t_lo = 1e-8, t_hi = 1e6;
    const double dl = std::log(t_hi / t_lo) / m;
    for (int i = 0; i < m; ++i) {
      const double t = t_lo * std::exp((i + 0.5) * dl);
      oracle += t / (1.0 + t * t * t) * t * dl;
    }
    oracle *= 2.0 * std::numbers::pi;
  }
  CHECK(oracle == doctest::Approx(4.0 * std::numbers::pi * std::numbers::pi /
                                  (3.0 * std::sqrt(3.0)))
                      .epsilon(1e-4));  // 2 pi * 2 pi / (3 sqrt 3)
  const double val = l1_2s_norm([](const Vec&) { return 1.0; }, 2, 0.5, q);
  CHECK(val == doctest::Approx(oracle).epsilon(0.02));

  // |y|^{s-gamma} integrable, |y|^{2s} not
  CHECK(l1_2s_norm([](const Vec& y) { return std::pow(y.norm(), 0.3); }, 2, 0.5, q) <
        std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(l1_2s_norm([](const Vec& y) { return std::pow(y.norm(), 1.0); }, 2, 0.5, q),
                  GrowthError);
}


TEST_CASE("batch evaluation matches pointwise calls and is thread-stable") {
  auto k = KernelSpec::isotropic(2, 0.5);
  PvFunction u = gaussian_fn(2);
  std::vector<Vec> pts = {vec2(0, 0), vec2(0.2, -0.1), vec2(-0.3, 0.4), vec2(0.1, 0.1)};
  auto serial = batch_evaluate_pv(k, u, pts, fine_quadrature(), 1e-3, 1);
  auto parallel = batch_evaluate_pv(k, u, pts, fine_quadrature(), 1e-3, 3);
  REQUIRE(serial.size() == pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    auto one = evaluate_pv(k, u, pts[i], fine_quadrature(), 1e-3);
    CHECK(serial[i].value == one.value);
    CHECK(parallel[i].value == one.value);  // deterministic per point
    CHECK(parallel[i].error_bound == one.error_bound);
  }
}

}  // TEST_SUITE
