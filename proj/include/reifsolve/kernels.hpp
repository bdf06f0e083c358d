#pragma once

// Kernel class L^n_s(lambda, Lambda): even kernels comparable to
// |y|^{-n-2s}. Three families are representable: isotropic, homogeneous
// anisotropic (even angular part) and modulated (even bounded multiplier).
// Specs are immutable; evaluation is pure and thread-safe.

#include <functional>
#include <memory>
#include <string>

#include "reifsolve/geo.hpp"

namespace reif {

enum class KernelFamily { Isotropic, Anisotropic, Modulated };

class KernelSpec {
 public:
  static KernelSpec isotropic(int n, double s);
  // angular: even function on S^{n-1} with values in [lambda, Lambda].
  // Enforced even by averaging a(u) and a(-u).
  static KernelSpec anisotropic(int n, double s, double lambda, double Lambda,
                                std::function<double(const Vec&)> angular);
  // modulation: measurable function on R^n \ {0} with values in [lambda, Lambda];
  // symmetrized the same way.
  static KernelSpec modulated(int n, double s, double lambda, double Lambda,
                              std::function<double(const Vec&)> modulation);

  // K(y); throws std::domain_error at y = 0 (kernel singular at the origin).
  double eval(const Vec& y) const;

  // Kernel K_r(y) = r^{n+2s} K(ry). Homogeneous families map to themselves;
  // the modulated family rescales its multiplier argument. Throws for r <= 0.
  KernelSpec rescaled(double r) const;

  int dim() const { return n_; }
  double order() const { return s_; }
  double lower() const { return lambda_; }
  double upper() const { return Lambda_; }
  KernelFamily family() const { return family_; }
  bool homogeneous() const { return family_ != KernelFamily::Modulated; }
  std::string family_name() const;

  // \int_{|y|>R} |y|^{-n-2s} dy = |S^{n-1}| R^{-2s} / (2s)
  double iso_tail(double R) const;

  struct TailMass {
    double lo, hi;
    double mid() const { return 0.5 * (lo + hi); }
    double halfwidth() const { return 0.5 * (hi - lo); }
  };
  // Bracket for \int_{|y|>R} K(y) dy. Exact (lo == hi) for the isotropic
  // family; for the others bracketed through [lambda, Lambda] unless the
  // angular mean is available.
  TailMass tail_mass(double R) const;

 private:
  KernelSpec(int n, double s, double lambda, double Lambda, KernelFamily family);

  int n_;
  double s_;
  double lambda_, Lambda_;
  KernelFamily family_;
  std::function<double(const Vec&)> factor_;  // angular or modulation, pre-symmetrized
  double mod_scale_ = 1.0;                    // accumulated rescaling of the modulation argument
};

struct EllipticityReport {
  double min_ratio;  // min over samples of K(y)|y|^{n+2s} / lambda
  double max_ratio;  // max over samples of K(y)|y|^{n+2s} / Lambda
  bool symmetric;    // |K(y)-K(-y)| <= 1e-12 K(y) at all samples
  bool ok() const { return min_ratio >= 1.0 - 1e-12 && max_ratio <= 1.0 + 1e-12 && symmetric; }
};

// Samples y log-uniform in |y| over six decades with uniform directions.
EllipticityReport validate_ellipticity(const KernelSpec& spec, int sample_count, uint64_t seed);

}  // namespace reif
