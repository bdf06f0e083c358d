#pragma once

// Monotone grid discretization of the Dirichlet problem Lu = f in
// Omega cap box, u = 0 outside. The quadrature stencil is shared by every row
// (the kernel is translation invariant), off-diagonal weights are nonnegative
// by construction and the diagonal equals stencil mass plus far tail, so the
// assembled operator is a symmetric M-matrix and the discrete comparison
// principle is a theorem, not a hope.

#include <functional>
#include <memory>
#include <vector>

#include "reifsolve/geometry.hpp"
#include "reifsolve/kernels.hpp"
#include "reifsolve/quadrature.hpp"

namespace reif {

struct NumericalInvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvergenceError : std::runtime_error {
  double last_residual;
  NonConvergenceError(const std::string& msg, double res)
      : std::runtime_error(msg), last_residual(res) {}
};

class Grid {
 public:
  // Interior nodes: lattice points i*h inside the box with sd < -h/2, and
  // within the optional solve ball (region_center, region_radius).
  static std::shared_ptr<const Grid> make(
      const DomainOracle& domain, const Box& box, double h,
      double region_radius = std::numeric_limits<double>::infinity(),
      const Vec* region_center = nullptr);

  int dim() const { return n_; }
  double spacing() const { return h_; }
  const Box& box() const { return box_; }
  long interior_count() const { return static_cast<long>(cells_.size()); }

  Vec position(long interior) const;
  long lattice_size() const { return static_cast<long>(index_.size()); }

  // interior index at lattice coords, -1 outside/exterior
  int32_t index_at(const std::array<long, 3>& coords) const;
  const std::array<long, 3>& coords(long interior) const { return coords_[interior]; }

  std::array<long, 3> ilo() const { return ilo_; }
  std::array<long, 3> ihi() const { return ihi_; }

  Vec lattice_position(const std::array<long, 3>& coords) const;

 private:
  friend class DiscreteOperator;
  int n_;
  double h_;
  Box box_;
  std::array<long, 3> ilo_{}, ihi_{}, stride_{};
  std::vector<int32_t> index_;               // lattice -> interior or -1
  std::vector<long> cells_;                  // interior -> flattened lattice
  std::vector<std::array<long, 3>> coords_;  // interior -> lattice coords
};

struct SolutionField {
  std::shared_ptr<const Grid> grid;
  std::vector<double> values;  // at interior nodes
  // values off the solve set (zero per the Dirichlet condition; barrier
  // comparisons override this)
  std::function<double(const Vec&)> exterior;

  long iterations = 0;     // solver metadata
  double residual = 0.0;

  SolutionField() = default;
  explicit SolutionField(std::shared_ptr<const Grid> g)
      : grid(std::move(g)), values(grid->interior_count(), 0.0) {}

  double exterior_value(const Vec& x) const { return exterior ? exterior(x) : 0.0; }
  // value at the nearest lattice node (interior) or the exterior rule
  double eval(const Vec& x) const;
  double sup_norm() const;
};

class DiscreteOperator {
 public:
  std::shared_ptr<const Grid> grid;
  double diag = 0.0;   // identical for every row: total stencil mass + far tail
  double far_tail = 0.0;

  struct Entry {
    std::array<int32_t, 3> off;
    double w;  // >= 0
  };
  std::vector<Entry> stencil;

  // (Au)_i with optional exterior data; min_exterior (when given) receives the
  // smallest exterior value the stencil touched.
  void apply(const std::vector<double>& u, std::vector<double>& out, int threads = 1,
             const std::function<double(const Vec&)>* exterior = nullptr,
             double* min_exterior = nullptr) const;

  // t_i = a_i - sum of active off-diagonal weights (>= far_tail > 0)
  double row_tail(long i) const;
  void for_each_row_entry(long i, const std::function<void(long j, double w)>& fn) const;

  double stencil_mass() const;
  // mass beyond the stencil reach plus the cutoff tail; acts on u_i alone
  double shared_tail() const { return diag - stencil_mass(); }
};

// Shared-stencil assembly; quadrature nodes snap to the nearest lattice point
// (mass conserving). Throws NumericalInvariantError on any negative weight and
// when the grid does not resolve the domain features (h > feature/4).
DiscreteOperator assemble(const KernelSpec& kernel, const DomainOracle& domain,
                          std::shared_ptr<const Grid> grid, const PVQuadrature& q);

// Conjugate gradients on the (symmetric) system, zero exterior. Stops at
// max-norm residual <= tol * ||f||_inf; throws NonConvergenceError otherwise.
SolutionField solve_dirichlet(const DiscreteOperator& A, const std::vector<double>& f,
                              double tol = 1e-8, long max_iter = 100000, int threads = 1);

struct ComparisonReport {
  bool hypotheses_hold;  // A(v-u) >= 0 at interior nodes and v >= u on touched exterior
  bool holds;            // v >= u at every interior node
  double worst_gap;      // min over interior of v - u
  double worst_hypothesis;  // min over interior of (A(v-u))_i
};

// Discrete comparison principle: an M-matrix theorem, so hypotheses_hold and
// !holds together indicate an invariant bug.
ComparisonReport discrete_comparison(const DiscreteOperator& A, const SolutionField& u,
                                     const SolutionField& v, int threads = 1);

double residual_norm(const DiscreteOperator& A, const SolutionField& u,
                     const std::vector<double>& f, int threads = 1);

}  // namespace reif
