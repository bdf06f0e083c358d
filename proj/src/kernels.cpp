#include "reifsolve/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "reifsolve/rng.hpp"

namespace reif {

KernelSpec::KernelSpec(int n, double s, double lambda, double Lambda, KernelFamily family)
    : n_(n), s_(s), lambda_(lambda), Lambda_(Lambda), family_(family) {
  if (n < 2) throw std::invalid_argument("KernelSpec: dimension must be >= 2");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("KernelSpec: s must lie in (0,1)");
  if (!(lambda > 0.0 && lambda <= Lambda))
    throw std::invalid_argument("KernelSpec: need 0 < lambda <= Lambda");
}

KernelSpec KernelSpec::isotropic(int n, double s) {
  return KernelSpec(n, s, 1.0, 1.0, KernelFamily::Isotropic);
}

KernelSpec KernelSpec::anisotropic(int n, double s, double lambda, double Lambda,
                                   std::function<double(const Vec&)> angular) {
  KernelSpec k(n, s, lambda, Lambda, KernelFamily::Anisotropic);
  // Symmetry K(y) = K(-y) is a hard invariant; enforce it exactly.
  k.factor_ = [a = std::move(angular)](const Vec& u) { return 0.5 * (a(u) + a(Vec(-u))); };
  return k;
}

KernelSpec KernelSpec::modulated(int n, double s, double lambda, double Lambda,
                                 std::function<double(const Vec&)> modulation) {
  KernelSpec k(n, s, lambda, Lambda, KernelFamily::Modulated);
  k.factor_ = [m = std::move(modulation)](const Vec& y) { return 0.5 * (m(y) + m(Vec(-y))); };
  return k;
}

double KernelSpec::eval(const Vec& y) const {
  const double r = y.norm();
  if (r == 0.0) throw std::domain_error("kernel_eval: singular at y = 0");
  const double power = std::pow(r, -(n_ + 2.0 * s_));
  switch (family_) {
    case KernelFamily::Isotropic:
      return power;
    case KernelFamily::Anisotropic:
      return factor_(Vec(y / r)) * power;
    case KernelFamily::Modulated:
      return factor_(Vec(mod_scale_ * y)) * power;
  }
  return power;
}

KernelSpec KernelSpec::rescaled(double r) const {
  if (!(r > 0.0)) throw std::domain_error("rescale_kernel: r must be positive");
  KernelSpec k = *this;
  if (family_ == KernelFamily::Modulated) k.mod_scale_ = mod_scale_ * r;
  // Homogeneous kernels satisfy r^{n+2s} K(ry) = K(y) pointwise.
  return k;
}

std::string KernelSpec::family_name() const {
  switch (family_) {
    case KernelFamily::Isotropic: return "isotropic";
    case KernelFamily::Anisotropic: return "anisotropic";
    case KernelFamily::Modulated: return "modulated";
  }
  return "?";
}

double KernelSpec::iso_tail(double R) const {
  return sphere_area(n_) * std::pow(R, -2.0 * s_) / (2.0 * s_);
}

KernelSpec::TailMass KernelSpec::tail_mass(double R) const {
  const double iso = iso_tail(R);
  if (family_ == KernelFamily::Isotropic) return {iso, iso};
  return {lambda_ * iso, Lambda_ * iso};
}

EllipticityReport validate_ellipticity(const KernelSpec& spec, int sample_count, uint64_t seed) {
  if (sample_count < 1) throw std::invalid_argument("validate_ellipticity: sample_count >= 1");
  Rng rng(seed);
  const int n = spec.dim();
  const double p = n + 2.0 * spec.order();
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  bool symmetric = true;
  for (int i = 0; i < sample_count; ++i) {
    const double r = rng.log_uniform(1e-3, 1e3);  // six decades
    Vec y = r * rng.on_sphere(n);
    const double k = spec.eval(y);
    const double km = spec.eval(Vec(-y));
    if (std::abs(k - km) > 1e-12 * k) symmetric = false;
    const double scaled = k * std::pow(y.norm(), p);
    min_ratio = std::min(min_ratio, scaled / spec.lower());
    max_ratio = std::max(max_ratio, scaled / spec.upper());
  }
  return {min_ratio, max_ratio, symmetric};
}

}  // namespace reif
