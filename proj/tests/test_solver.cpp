#include <doctest.h>

#include "reifsolve/nonlocal_op.hpp"
#include "reifsolve/solver.hpp"

using namespace reif;

namespace {

struct BallSetup {
  DomainOracle dom;
  std::shared_ptr<const Grid> grid;
  DiscreteOperator A;
};

BallSetup ball_setup(double h) {
  DomainParams p;
  p.radius = 1.0;
  BallSetup s{make_domain("ball", p), nullptr, {}};
  s.grid = Grid::make(s.dom, Box::cube(2, 1.0), h);
  s.A = assemble(KernelSpec::isotropic(2, 0.5), s.dom, s.grid, PVQuadrature{});
  return s;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("assembly: M-matrix sign pattern and row tails") {
  auto s = ball_setup(1.0 / 16);
  CHECK(s.A.diag > 0.0);
  for (const auto& e : s.A.stencil) CHECK(e.w >= 0.0);
  CHECK(s.A.far_tail > 0.0);

  // (A 1)_i = t_i > 0, increasing as nodes approach the Dirichlet boundary
  std::vector<double> ones(s.grid->interior_count(), 1.0), out;
  s.A.apply(ones, out);
  double center_tail = 0.0, rim_tail = 0.0;
  for (long i = 0; i < s.grid->interior_count(); ++i) {
    CHECK(out[i] > 0.0);
    CHECK(out[i] == doctest::Approx(s.A.row_tail(i)).epsilon(1e-10));
    const double r = s.grid->position(i).norm();
    if (r < 0.1) center_tail = out[i];
    if (r > 0.85) rim_tail = std::max(rim_tail, out[i]);
  }
  CHECK(rim_tail > center_tail);
}

TEST_CASE("assembly: constants annihilated before truncation") {
  auto s = ball_setup(1.0 / 16);
  std::vector<double> ones(s.grid->interior_count(), 1.0), out;
  std::function<double(const Vec&)> one = [](const Vec&) { return 1.0; };
  s.A.apply(ones, out, 1, &one);
  // with the constant extended through the whole stencil, only the far
  // truncation mass survives, and it does so exactly
  const double shared = s.A.shared_tail();
  for (long i = 0; i < s.grid->interior_count(); ++i)
    CHECK(out[i] == doctest::Approx(shared).epsilon(1e-10));
  CHECK(shared < 0.05 * s.A.diag);
}

TEST_CASE("assembly: odd symmetry kills linear functions on the axis") {
  auto s = ball_setup(1.0 / 16);
  std::vector<double> u(s.grid->interior_count());
  for (long i = 0; i < s.grid->interior_count(); ++i) u[i] = s.grid->position(i)[0];
  std::function<double(const Vec&)> lin = [](const Vec& x) { return x[0]; };
  std::vector<double> out;
  s.A.apply(u, out, 1, &lin);
  for (long i = 0; i < s.grid->interior_count(); ++i) {
    const Vec x = s.grid->position(i);
    if (std::abs(x[0]) > 1e-12) continue;  // nodes on the symmetry axis
    CHECK(std::abs(out[i]) <= 1e-10 * s.A.diag);
  }
}

TEST_CASE("assembly: grid must resolve domain features") {
  DomainParams p;
  p.depth = 5;
  p.angle = 0.05;
  auto dom = make_domain("koch_flat", p);  // feature size 2^{-5}
  auto grid = Grid::make(dom, Box::cube(2, 1.0), 1.0 / 32);
  CHECK_THROWS_AS(assemble(KernelSpec::isotropic(2, 0.5), dom, grid, PVQuadrature{}),
                  NumericalInvariantError);
}

TEST_CASE("solve: zero right-hand side gives the zero field") {
  auto s = ball_setup(1.0 / 16);
  std::vector<double> f(s.grid->interior_count(), 0.0);
  auto u = solve_dirichlet(s.A, f);
  for (double v : u.values) CHECK(v == 0.0);
}

TEST_CASE("solve: torsion profile against the pv-calibrated closed form") {
  // u*(x) = (1-|x|^2)^s_+ solves L u* = C* in B_1; C* measured at the origin
  auto s = ball_setup(1.0 / 32);
  auto k = KernelSpec::isotropic(2, 0.5);
  PvFunction ustar;
  ustar.eval = [](const Vec& y) {
    const double q = 1.0 - y.squaredNorm();
    return q > 0.0 ? std::sqrt(q) : 0.0;
  };
  ustar.d2_bound = 4.0;
  ustar.sup_bound = 1.0;
  ustar.support_radius = 1.0;
  PVQuadrature cal_q;
  cal_q.shell_growth = 1.1;
  auto cal = evaluate_pv(k, ustar, vec2(0, 0), cal_q, 1e-5);
  CHECK(cal.value == doctest::Approx(9.8696).epsilon(0.02));  // pi^2 for n=2, s=1/2

  std::vector<double> f(s.grid->interior_count(), 1.0);
  auto u = solve_dirichlet(s.A, f, 1e-9);
  const double h = s.grid->spacing();
  double err = 0.0, scale = 0.0;
  for (long i = 0; i < s.grid->interior_count(); ++i) {
    const Vec x = s.grid->position(i);
    if (s.dom.dist(x) < 4.0 * h) continue;  // boundary layer excluded from metrics
    const double ref = ustar.eval(x) / cal.value;
    err = std::max(err, std::abs(u.values[i] - ref));
    scale = std::max(scale, ref);
  }
  CHECK(err <= 0.10 * scale);
}

TEST_CASE("property: discrete maximum principle over random nonnegative data") {
  auto s = ball_setup(1.0 / 16);
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> f(s.grid->interior_count());
    for (double& v : f) v = rng.uniform();
    auto u = solve_dirichlet(s.A, f, 1e-9);
    for (double v : u.values) CHECK(v >= 0.0);
  }
}

TEST_CASE("property: lattice symmetry orbits carry equal values") {
  auto s = ball_setup(1.0 / 32);
  std::vector<double> f(s.grid->interior_count());
  for (long i = 0; i < s.grid->interior_count(); ++i)
    f[i] = 1.0 + s.grid->position(i).squaredNorm();  // radially symmetric
  auto u = solve_dirichlet(s.A, f, 1e-11);
  auto value_at = [&](long cx, long cy) {
    const int32_t j = s.grid->index_at({cx, cy, 0});
    REQUIRE(j >= 0);
    return u.values[j];
  };
  for (auto [a, b] : std::vector<std::pair<long, long>>{{3, 7}, {10, 2}, {5, 5}}) {
    const double v = value_at(a, b);
    for (auto [c, d] :
         std::vector<std::pair<long, long>>{{b, a}, {-a, b}, {a, -b}, {-b, -a}, {-a, -b}}) {
      CHECK(value_at(c, d) == doctest::Approx(v).epsilon(1e-8));
    }
  }
}

TEST_CASE("comparison: equal fields and constant shifts") {
  auto s = ball_setup(1.0 / 16);
  std::vector<double> f(s.grid->interior_count(), 1.0);
  auto u = solve_dirichlet(s.A, f);
  SUBCASE("v = u") {
    auto rep = discrete_comparison(s.A, u, u);
    CHECK(rep.hypotheses_hold);
    CHECK(rep.holds);
    CHECK(rep.worst_gap == doctest::Approx(0.0));
  }
  SUBCASE("v = u + c with matching exterior override") {
    const double c = 0.25;
    SolutionField v = u;
    for (double& val : v.values) val += c;
    v.exterior = [c](const Vec&) { return c; };
    auto rep = discrete_comparison(s.A, u, v);
    CHECK(rep.hypotheses_hold);  // A(c 1) = c t >= 0
    CHECK(rep.holds);
    CHECK(rep.worst_gap == doctest::Approx(c));
  }
}

TEST_CASE("comparison: randomized pairs built from nonnegative sources") {
  auto s = ball_setup(1.0 / 16);
  Rng rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> f1(s.grid->interior_count()), f2(s.grid->interior_count());
    for (long i = 0; i < s.grid->interior_count(); ++i) {
      f1[i] = rng.uniform();
      f2[i] = f1[i] + rng.uniform();  // f2 >= f1
    }
    auto u = solve_dirichlet(s.A, f1, 1e-10);
    auto v = solve_dirichlet(s.A, f2, 1e-10);
    auto rep = discrete_comparison(s.A, u, v);
    CHECK(rep.hypotheses_hold);
    CHECK(rep.holds);  // an M-matrix theorem; failure is an invariant bug
  }
}

TEST_CASE("comparison: grid mismatch is an error") {
  auto s1 = ball_setup(1.0 / 16);
  auto s2 = ball_setup(1.0 / 8);
  SolutionField u1(s1.grid), u2(s2.grid);
  CHECK_THROWS_AS(discrete_comparison(s1.A, u1, u2), std::invalid_argument);
}

TEST_CASE("residual: solve target, trivial case, single-node perturbation") {
  auto s = ball_setup(1.0 / 16);
  std::vector<double> f(s.grid->interior_count(), 1.0);
  const double tol = 1e-8;
  auto u = solve_dirichlet(s.A, f, tol);
  CHECK(residual_norm(s.A, u, f) <= tol * 1.0);

  SolutionField zero(s.grid);
  CHECK(residual_norm(s.A, zero, f) == doctest::Approx(1.0));

  const double zeta = 1e-3;
  SolutionField uptb = u;
  uptb.values[42] += zeta;
  const double res0 = residual_norm(s.A, u, f);
  const double res1 = residual_norm(s.A, uptb, f);
  CHECK(std::abs(res1 - res0) <= s.A.diag * zeta + 1e-12);
}

TEST_CASE("non-convergence raises with the last residual attached") {
  auto s = ball_setup(1.0 / 16);
  std::vector<double> f(s.grid->interior_count(), 1.0);
  CHECK_THROWS_AS(solve_dirichlet(s.A, f, 1e-14, 2), NonConvergenceError);
  try {
    solve_dirichlet(s.A, f, 1e-14, 2);
  } catch (const NonConvergenceError& e) {
    CHECK(e.last_residual > 0.0);
  }
}

}  // TEST_SUITE
