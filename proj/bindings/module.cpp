// Python bindings for the main operations: kernels, domain oracles, the
// geometry estimators, pointwise operator evaluation, the Dirichlet solve and
// the boundary-growth measurements.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reifsolve/barriers.hpp"
#include "reifsolve/regularity.hpp"

namespace py = pybind11;
using namespace reif;

namespace {

Vec to_vec(const std::vector<double>& x) {
  Vec v(static_cast<int>(x.size()));
  for (size_t i = 0; i < x.size(); ++i) v[i] = x[i];
  return v;
}

std::vector<double> from_vec(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::function<double(const Vec&)> wrap_callable(const py::function& f) {
  return [f](const Vec& y) { return f(from_vec(y)).cast<double>(); };
}

struct PyDomain {
  std::shared_ptr<DomainOracle> oracle;
  const DomainOracle& ref() const { return *oracle; }
};

PyDomain py_make_domain(const std::string& kind, py::kwargs kwargs) {
  DomainParams p;
  for (auto item : kwargs) {
    const std::string key = py::str(item.first);
    const double v = item.second.cast<double>();
    if (key == "n") p.n = static_cast<int>(v);
    else if (key == "radius") p.radius = v;
    else if (key == "slope") p.slope = v;
    else if (key == "period") p.period = v;
    else if (key == "depth") p.depth = static_cast<int>(v);
    else if (key == "angle") p.angle = v;
    else if (key == "base_halfwidth") p.base_halfwidth = v;
    else if (key == "eta") p.eta = v;
    else if (key == "shrink") p.shrink = v;
    else if (key == "amplitude") p.amplitude = v;
    else if (key == "frequency") p.frequency = v;
    else throw py::value_error("unknown domain parameter: " + key);
  }
  return {std::make_shared<DomainOracle>(make_domain(kind, p))};
}

struct PyField {
  PyDomain domain;
  std::shared_ptr<const Grid> grid;
  SolutionField field;
};

PyField py_solve(const KernelSpec& kernel, const PyDomain& dom, double box_halfwidth, double h,
                 double f_const, double tol, long max_iter, int threads) {
  PyField out{dom, nullptr, {}};
  out.grid = Grid::make(dom.ref(), Box::cube(dom.ref().n, box_halfwidth), h);
  auto A = assemble(kernel, dom.ref(), out.grid, PVQuadrature{});
  std::vector<double> f(out.grid->interior_count(), f_const);
  out.field = solve_dirichlet(A, f, tol, max_iter, threads);
  return out;
}

PvFunction make_pv_function(const py::function& f, double d2_bound, py::object sup_bound,
                            py::object growth, double support_radius) {
  PvFunction u;
  u.eval = wrap_callable(f);
  u.d2_bound = d2_bound;
  if (!sup_bound.is_none()) u.sup_bound = sup_bound.cast<double>();
  if (!growth.is_none()) {
    auto pair = growth.cast<std::pair<double, double>>();
    u.growth_exponent = pair.first;
    u.growth_constant = pair.second;
  }
  u.support_radius = support_radius;
  return u;
}

}  // namespace

PYBIND11_MODULE(_reifsolve, m) {
  m.doc() = "nonlocal elliptic boundary-regularity laboratory";

  py::class_<KernelSpec>(m, "Kernel")
      .def_static("isotropic", &KernelSpec::isotropic, py::arg("n"), py::arg("s"))
      .def_static(
          "anisotropic",
          [](int n, double s, double lam, double Lam, const py::function& angular) {
            return KernelSpec::anisotropic(n, s, lam, Lam, wrap_callable(angular));
          },
          py::arg("n"), py::arg("s"), py::arg("lam"), py::arg("Lam"), py::arg("angular"))
      .def_static(
          "modulated",
          [](int n, double s, double lam, double Lam, const py::function& modulation) {
            return KernelSpec::modulated(n, s, lam, Lam, wrap_callable(modulation));
          },
          py::arg("n"), py::arg("s"), py::arg("lam"), py::arg("Lam"), py::arg("modulation"))
      .def("eval", [](const KernelSpec& k, const std::vector<double>& y) { return k.eval(to_vec(y)); })
      .def("rescaled", &KernelSpec::rescaled, py::arg("r"))
      .def_property_readonly("n", &KernelSpec::dim)
      .def_property_readonly("s", &KernelSpec::order)
      .def_property_readonly("lam", &KernelSpec::lower)
      .def_property_readonly("Lam", &KernelSpec::upper)
      .def_property_readonly("family", &KernelSpec::family_name);

  m.def(
      "validate_ellipticity",
      [](const KernelSpec& k, int count, uint64_t seed) {
        auto rep = validate_ellipticity(k, count, seed);
        py::dict d;
        d["min_ratio"] = rep.min_ratio;
        d["max_ratio"] = rep.max_ratio;
        d["symmetric"] = rep.symmetric;
        d["ok"] = rep.ok();
        return d;
      },
      py::arg("kernel"), py::arg("sample_count") = 1000, py::arg("seed") = 1);

  py::class_<PyDomain>(m, "Domain")
      .def_property_readonly("kind", [](const PyDomain& d) { return d.ref().kind; })
      .def_property_readonly("n", [](const PyDomain& d) { return d.ref().n; })
      .def("signed_distance",
           [](const PyDomain& d, const std::vector<double>& x) { return d.ref().sd(to_vec(x)); })
      .def("dist",
           [](const PyDomain& d, const std::vector<double>& x) { return d.ref().dist(to_vec(x)); })
      .def(
          "boundary_samples",
          [](const PyDomain& d, int count, uint64_t seed) {
            Rng rng(seed);
            auto pts = d.ref().sample_boundary(d.ref().bounding_box, count, rng);
            std::vector<std::vector<double>> out;
            for (auto& p : pts) out.push_back(from_vec(p));
            return out;
          },
          py::arg("count"), py::arg("seed") = 1)
      .def(
          "regularized_distance",
          [](const PyDomain& d, const std::vector<double>& x, double theta) {
            RegularizedDistance rd(d.oracle, theta);
            return rd(to_vec(x));
          },
          py::arg("x"), py::arg("theta") = 0.25);

  m.def("make_domain", &py_make_domain, py::arg("kind"),
        "Domain oracle: ball, half_space, ball_complement, sawtooth, koch_flat, "
        "perturbed_halfspace");

  m.def(
      "reifenberg_estimate",
      [](const PyDomain& d, double r0, int n_points, int n_scales, uint64_t seed,
         int samples_per_ball) {
        auto rep = reifenberg_estimate(d.ref(), r0, n_points, n_scales, seed, samples_per_ball);
        py::list entries;
        for (auto& e : rep.entries) {
          if (e.skipped) continue;
          py::dict row;
          row["x"] = from_vec(e.x);
          row["r"] = e.r;
          row["defect"] = e.defect;
          row["separation_ok"] = e.separation_ok;
          entries.append(row);
        }
        py::dict out;
        out["eta_hat"] = rep.eta_hat;
        out["entries"] = entries;
        out["all_separation_ok"] = rep.all_separation_ok;
        out["skipped"] = rep.skipped_count;
        return out;
      },
      py::arg("domain"), py::arg("r0"), py::arg("n_points") = 12, py::arg("n_scales") = 5,
      py::arg("seed") = 1, py::arg("samples_per_ball") = 1000);

  m.def(
      "corkscrew_check",
      [](const PyDomain& d, double R, double kappa, int n_boundary, int n_scales, uint64_t seed) {
        auto rep = corkscrew_check(d.ref(), {R, kappa}, n_boundary, n_scales, seed);
        py::dict out;
        out["ok"] = rep.ok;
        out["worst_margin"] = rep.worst_margin;
        return out;
      },
      py::arg("domain"), py::arg("R"), py::arg("kappa"), py::arg("n_boundary") = 8,
      py::arg("n_scales") = 5, py::arg("seed") = 1);

  m.def(
      "gmt_measure_ratio",
      [](const PyDomain& d, const std::vector<double>& z, double rho, double r, int n_samples,
         uint64_t seed) {
        auto est = gmt_measure_ratio(d.ref(), to_vec(z), rho, r, n_samples, seed);
        return std::make_pair(est.ratio, est.ci_halfwidth);
      },
      py::arg("domain"), py::arg("z"), py::arg("rho"), py::arg("r"), py::arg("n_samples") = 10000,
      py::arg("seed") = 1);

  m.def(
      "evaluate_pv",
      [](const KernelSpec& k, const py::function& f, const std::vector<double>& x, double d2_bound,
         py::object sup_bound, py::object growth, double support_radius, double h_local) {
        auto u = make_pv_function(f, d2_bound, sup_bound, growth, support_radius);
        auto res = evaluate_pv(k, u, to_vec(x), PVQuadrature{}, h_local);
        return std::make_pair(res.value, res.error_bound);
      },
      py::arg("kernel"), py::arg("f"), py::arg("x"), py::arg("d2_bound"),
      py::arg("sup_bound") = py::none(), py::arg("growth") = py::none(),
      py::arg("support_radius") = std::numeric_limits<double>::infinity(),
      py::arg("h_local") = 1e-3);

  m.def(
      "evaluate_indicator",
      [](const KernelSpec& k, const PyDomain& d, const std::vector<double>& x) {
        auto res = evaluate_indicator(k, d.ref(), to_vec(x), PVQuadrature{});
        return std::make_pair(res.value, res.error_bound);
      },
      py::arg("kernel"), py::arg("domain"), py::arg("x"));

  m.def(
      "l1_2s_norm",
      [](const py::function& f, int n, double s) {
        return l1_2s_norm(wrap_callable(f), n, s, PVQuadrature{});
      },
      py::arg("f"), py::arg("n"), py::arg("s"));

  py::class_<PyField>(m, "Field")
      .def_property_readonly("residual", [](const PyField& f) { return f.field.residual; })
      .def_property_readonly("iterations", [](const PyField& f) { return f.field.iterations; })
      .def_property_readonly("sup", [](const PyField& f) { return f.field.sup_norm(); })
      .def_property_readonly("values", [](const PyField& f) { return f.field.values; })
      .def_property_readonly("positions",
                             [](const PyField& f) {
                               std::vector<std::vector<double>> out;
                               for (long i = 0; i < f.grid->interior_count(); ++i)
                                 out.push_back(from_vec(f.grid->position(i)));
                               return out;
                             })
      .def("boundary_growth",
           [](const PyField& f, const std::vector<double>& x0, std::vector<double> radii) {
             auto fit = boundary_growth(f.field, f.domain.ref(), to_vec(x0), std::move(radii));
             fit_holder_exponent(fit, 1e-7);
             py::dict out;
             out["radii"] = fit.radii;
             out["sup_values"] = fit.sup_values;
             out["alpha"] = fit.alpha;
             out["C"] = fit.C;
             out["r2"] = fit.r2;
             out["fitted"] = fit.fitted;
             return out;
           });

  m.def("solve_dirichlet", &py_solve, py::arg("kernel"), py::arg("domain"),
        py::arg("box_halfwidth"), py::arg("h"), py::arg("f_const") = 1.0, py::arg("tol") = 1e-8,
        py::arg("max_iter") = 100000, py::arg("threads") = 1);

  m.def(
      "verify_indicator_supersolution",
      [](const KernelSpec& k, const PyDomain& d, double R, double kappa, int n_points,
         uint64_t seed) {
        auto rep = verify_indicator_supersolution(k, d.ref(), {R, kappa}, n_points, seed,
                                                  PVQuadrature{});
        py::dict out;
        out["inf_ratio"] = rep.inf_ratio;
        out["d0"] = rep.d0;
        out["pass"] = rep.pass;
        return out;
      },
      py::arg("kernel"), py::arg("domain"), py::arg("R"), py::arg("kappa"),
      py::arg("n_points") = 100, py::arg("seed") = 1);

  m.def(
      "verify_delta_eps_supersolution",
      [](const KernelSpec& k, const PyDomain& d, double eps, double R, double kappa, int n_points,
         uint64_t seed) {
        auto rep = verify_delta_eps_supersolution(k, d.ref(), eps, n_points, seed, PVQuadrature{},
                                                  {R, kappa});
        py::dict out;
        out["inf_ratio"] = rep.inf_ratio;
        out["d0"] = rep.d0;
        out["pass"] = rep.pass;
        return out;
      },
      py::arg("kernel"), py::arg("domain"), py::arg("eps"), py::arg("R"), py::arg("kappa"),
      py::arg("n_points") = 60, py::arg("seed") = 1);

  py::register_exception<GrowthError>(m, "GrowthError");
  py::register_exception<NumericalInvariantError>(m, "NumericalInvariantError");
  py::register_exception<NonConvergenceError>(m, "NonConvergenceError");

  m.attr("__version__") = "0.1.0";
}
