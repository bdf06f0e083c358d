#include "reifsolve/solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

namespace reif {

namespace {

void parallel_rows(long n, int threads, const std::function<void(long, long)>& chunk) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 4096) {
    chunk(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const long per = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const long lo = t * per, hi = std::min(n, lo + per);
    if (lo >= hi) break;
    pool.emplace_back(chunk, lo, hi);
  }
  for (auto& th : pool) th.join();
}

double kahan_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0, c = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double y = a[i] * b[i] - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::shared_ptr<const Grid> Grid::make(const DomainOracle& domain, const Box& box, double h,
                                       double region_radius, const Vec* region_center) {
  if (!(h > 0.0)) throw std::invalid_argument("Grid: h must be positive");
  if (domain.n != box.dim()) throw std::invalid_argument("Grid: dimension mismatch");
  if (domain.n > 3) throw std::invalid_argument("Grid: solver supports n in {2, 3}");
  auto g = std::make_shared<Grid>();
  g->n_ = domain.n;
  g->h_ = h;
  g->box_ = box;
  long total = 1;
  for (int d = 0; d < 3; ++d) {
    if (d < g->n_) {
      g->ilo_[d] = static_cast<long>(std::ceil(box.lo[d] / h - 1e-12));
      g->ihi_[d] = static_cast<long>(std::floor(box.hi[d] / h + 1e-12));
    } else {
      g->ilo_[d] = g->ihi_[d] = 0;
    }
    g->stride_[d] = total;
    total *= (g->ihi_[d] - g->ilo_[d] + 1);
  }
  g->index_.assign(total, -1);
  Vec rc = region_center ? *region_center : Vec(Vec::Zero(g->n_));
  std::array<long, 3> c = g->ilo_;
  for (long flat = 0; flat < total; ++flat) {
    Vec x = g->lattice_position(c);
    const bool in_region = !std::isfinite(region_radius) || (x - rc).norm() < region_radius;
    if (in_region && domain.sd(x) < -0.5 * h) {
      g->index_[flat] = static_cast<int32_t>(g->cells_.size());
      g->cells_.push_back(flat);
      g->coords_.push_back(c);
    }
    for (int d = 0; d < 3; ++d) {
      if (++c[d] <= g->ihi_[d]) break;
      c[d] = g->ilo_[d];
    }
  }
  return g;
}

Vec Grid::lattice_position(const std::array<long, 3>& coords) const {
  Vec x(n_);
  for (int d = 0; d < n_; ++d) x[d] = coords[d] * h_;
  return x;
}

Vec Grid::position(long interior) const { return lattice_position(coords_[interior]); }

int32_t Grid::index_at(const std::array<long, 3>& coords) const {
  long flat = 0;
  for (int d = 0; d < 3; ++d) {
    if (coords[d] < ilo_[d] || coords[d] > ihi_[d]) return -1;
    flat += (coords[d] - ilo_[d]) * stride_[d];
  }
  return index_[flat];
}

double SolutionField::eval(const Vec& x) const {
  std::array<long, 3> c{0, 0, 0};
  for (int d = 0; d < grid->dim(); ++d) c[d] = std::llround(x[d] / grid->spacing());
  const int32_t j = grid->index_at(c);
  if (j >= 0) return values[j];
  return exterior_value(x);
}

double SolutionField::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------

DiscreteOperator assemble(const KernelSpec& kernel, const DomainOracle& domain,
                          std::shared_ptr<const Grid> grid, const PVQuadrature& q) {
  if (kernel.dim() != domain.n || kernel.dim() != grid->dim())
    throw std::invalid_argument("assemble: dimension mismatch");
  const double h = grid->spacing();
  if (std::isfinite(domain.feature_size) && h > 0.25 * domain.feature_size + 1e-15)
    throw NumericalInvariantError("assemble: grid does not resolve domain features (h > feature/4)");

  const int n = grid->dim();
  DiscreteOperator A;
  A.grid = grid;

  // offsets beyond the box diagonal can never reach an active node; their mass
  // acts on u_i alone and folds into the diagonal
  const double reach = grid->box().diameter() + h;
  const double inner = q.inner_radius_factor * h;

  std::map<std::array<int32_t, 3>, double> weights;
  double mass_total = 0.0;

  // Near field: exact cell integrals of K on the lattice Voronoi cells within
  // the ball of radius a_near, where nearest-node snapping would be noisy.
  // Shells take over beyond. The origin cell is part of the dropped inner
  // region (second differences cancel there to the same order).
  const long m_near = 7;
  const double a_near = (m_near + 0.5) * h;
  {
    const int sub = 6;
    const double wcell = std::pow(h / sub, n);
    std::array<long, 3> d{0, 0, 0};
    auto visit_cell = [&](const std::array<long, 3>& off) {
      if (off[0] == 0 && off[1] == 0 && off[2] == 0) return;
      double acc = 0.0;
      std::array<int, 3> si{0, 0, 0};
      const long subcells = static_cast<long>(std::pow(sub, n));
      for (long c2 = 0; c2 < subcells; ++c2) {
        Vec y(n);
        for (int dd = 0; dd < n; ++dd)
          y[dd] = off[dd] * h + (-0.5 + (si[dd] + 0.5) / sub) * h;
        const double r = y.norm();
        if (r >= inner && r <= a_near) acc += wcell * kernel.eval(y);
        for (int dd = 0; dd < n; ++dd) {
          if (++si[dd] < sub) break;
          si[dd] = 0;
        }
      }
      if (acc < 0.0) throw NumericalInvariantError("assemble: negative weight");
      if (acc > 0.0) {
        std::array<int32_t, 3> off32{static_cast<int32_t>(off[0]), static_cast<int32_t>(off[1]),
                                     static_cast<int32_t>(off[2])};
        weights[off32] += acc;
        mass_total += acc;
      }
    };
    for (d[0] = -m_near; d[0] <= m_near; ++d[0])
      for (d[1] = -m_near; d[1] <= m_near; ++d[1]) {
        if (n == 2) {
          visit_cell(d);
        } else {
          for (d[2] = -m_near; d[2] <= m_near; ++d[2]) visit_cell(d);
          d[2] = 0;
        }
      }
  }

  for (const Shell& shell : make_shells(q, h, a_near)) {
    if (shell.a > reach) {
      // analytic far-shell mass via the same angular rule
      double m = 0.0;
      for_each_shell_node(shell, n, q.radial_subdivisions,
                          [&](const Vec& y, double w) { m += w * kernel.eval(y); });
      mass_total += m;
      continue;
    }
    for_each_shell_node(shell, n, q.radial_subdivisions, [&](const Vec& y, double w) {
      const double wk = w * kernel.eval(y);
      if (wk < 0.0) throw NumericalInvariantError("assemble: negative weight");
      std::array<int32_t, 3> off{0, 0, 0};
      bool zero = true;
      for (int d = 0; d < n; ++d) {
        off[d] = static_cast<int32_t>(std::llround(y[d] / h));
        if (off[d] != 0) zero = false;
      }
      if (zero) return;  // second difference at zero offset vanishes
      mass_total += wk;
      weights[off] += wk;
    });
  }

  A.far_tail = kernel.tail_mass(q.far_cutoff).mid();
  A.diag = mass_total + A.far_tail;
  if (!(A.diag > 0.0)) throw NumericalInvariantError("assemble: nonpositive diagonal");
  A.stencil.reserve(weights.size());
  for (auto& [off, w] : weights) {
    if (w < 0.0) throw NumericalInvariantError("assemble: negative weight after snapping");
    A.stencil.push_back({off, w});
  }
  return A;
}

void DiscreteOperator::apply(const std::vector<double>& u, std::vector<double>& out, int threads,
                             const std::function<double(const Vec&)>* exterior,
                             double* min_exterior) const {
  const long n_rows = grid->interior_count();
  out.assign(n_rows, 0.0);
  const Grid& g = *grid;
  double min_ext = std::numeric_limits<double>::infinity();
  auto body = [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      const auto& c = g.coords(i);
      double acc = diag * u[i];
      for (const Entry& e : stencil) {
        std::array<long, 3> nc{c[0] + e.off[0], c[1] + e.off[1], c[2] + e.off[2]};
        const int32_t j = g.index_at(nc);
        if (j >= 0) {
          acc -= e.w * u[j];
        } else if (exterior) {
          const double v = (*exterior)(g.lattice_position(nc));
          acc -= e.w * v;
          min_ext = std::min(min_ext, v);
        }
      }
      out[i] = acc;
    }
  };
  // the exterior path stays serial: it is rare and tracks min_ext
  parallel_rows(n_rows, exterior ? 1 : threads, body);
  if (min_exterior) *min_exterior = min_ext;
}

double DiscreteOperator::stencil_mass() const {
  double m = 0.0;
  for (const Entry& e : stencil) m += e.w;
  return m;
}

double DiscreteOperator::row_tail(long i) const {
  const auto& c = grid->coords(i);
  double active = 0.0;
  for (const Entry& e : stencil) {
    std::array<long, 3> nc{c[0] + e.off[0], c[1] + e.off[1], c[2] + e.off[2]};
    if (grid->index_at(nc) >= 0) active += e.w;
  }
  return diag - active;
}

void DiscreteOperator::for_each_row_entry(long i,
                                          const std::function<void(long, double)>& fn) const {
  const auto& c = grid->coords(i);
  for (const Entry& e : stencil) {
    std::array<long, 3> nc{c[0] + e.off[0], c[1] + e.off[1], c[2] + e.off[2]};
    const int32_t j = grid->index_at(nc);
    if (j >= 0) fn(j, e.w);
  }
}

SolutionField solve_dirichlet(const DiscreteOperator& A, const std::vector<double>& f, double tol,
                              long max_iter, int threads) {
  const long n = A.grid->interior_count();
  if (static_cast<long>(f.size()) != n)
    throw std::invalid_argument("solve_dirichlet: rhs size mismatch");
  SolutionField u(A.grid);
  const double fnorm = max_abs(f);
  const double target = tol * fnorm;
  if (n == 0 || fnorm == 0.0) return u;

  std::vector<double> r = f, p = f, Ap(n);
  double rr = kahan_dot(r, r);
  for (long it = 1; it <= max_iter; ++it) {
    A.apply(p, Ap, threads);
    const double pAp = kahan_dot(p, Ap);
    if (!(pAp > 0.0))
      throw NumericalInvariantError("solve_dirichlet: operator lost positive definiteness");
    const double alpha = rr / pAp;
    for (long i = 0; i < n; ++i) u.values[i] += alpha * p[i];
    for (long i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
    const double rmax = max_abs(r);
    if (rmax <= target) {
      u.iterations = it;
      u.residual = rmax;
      return u;
    }
    const double rr_new = kahan_dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (long i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  throw NonConvergenceError("solve_dirichlet: no convergence within max_iter", max_abs(r));
}

ComparisonReport discrete_comparison(const DiscreteOperator& A, const SolutionField& u,
                                     const SolutionField& v, int threads) {
  if (u.grid != A.grid || v.grid != A.grid)
    throw std::invalid_argument("discrete_comparison: grid mismatch");
  const long n = A.grid->interior_count();
  std::vector<double> w(n);
  for (long i = 0; i < n; ++i) w[i] = v.values[i] - u.values[i];
  std::function<double(const Vec&)> ext = [&](const Vec& x) {
    return v.exterior_value(x) - u.exterior_value(x);
  };
  std::vector<double> g;
  double min_ext = 0.0;
  A.apply(w, g, threads, &ext, &min_ext);

  ComparisonReport rep{};
  const double wscale = std::max(1.0, max_abs(w));
  const double hyp_tol = 1e-12 * A.diag * wscale;
  rep.worst_hypothesis = n ? *std::min_element(g.begin(), g.end()) : 0.0;
  const bool interior_hyp = rep.worst_hypothesis >= -hyp_tol;
  const bool exterior_hyp = !(min_ext < -1e-12 * wscale);
  rep.hypotheses_hold = interior_hyp && exterior_hyp;
  rep.worst_gap = n ? *std::min_element(w.begin(), w.end()) : 0.0;
  rep.holds = rep.worst_gap >= -1e-10 * wscale;
  return rep;
}

double residual_norm(const DiscreteOperator& A, const SolutionField& u,
                     const std::vector<double>& f, int threads) {
  if (u.grid != A.grid) throw std::invalid_argument("residual: grid mismatch");
  std::vector<double> Au;
  A.apply(u.values, Au, threads);
  double m = 0.0;
  for (size_t i = 0; i < Au.size(); ++i) m = std::max(m, std::abs(f[i] - Au[i]));
  return m;
}

}  // namespace reif
