#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace reif {

// Points live in R^n with n <= 8; fixed max size keeps them off the heap.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 8, 8>;

inline Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

inline Vec vec3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

inline Vec zero_vec(int n) { return Vec::Zero(n); }

inline Vec unit_vec(int n, int axis) {
  Vec v = Vec::Zero(n);
  v[axis] = 1.0;
  return v;
}

// |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

// |B_1| in R^n
inline double ball_volume(int n) { return sphere_area(n) / n; }

struct Box {
  Vec lo, hi;

  Box() = default;
  Box(Vec l, Vec h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size()) throw std::invalid_argument("Box: dim mismatch");
  }

  static Box cube(int n, double halfwidth, const Vec& center) {
    return Box(center - Vec::Constant(n, halfwidth), center + Vec::Constant(n, halfwidth));
  }
  static Box cube(int n, double halfwidth) { return cube(n, halfwidth, Vec::Zero(n)); }

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Vec& x) const {
    for (int d = 0; d < dim(); ++d)
      if (x[d] < lo[d] || x[d] > hi[d]) return false;
    return true;
  }

  Box intersect(const Box& other) const {
    Box b(lo.cwiseMax(other.lo), hi.cwiseMin(other.hi));
    return b;
  }

  bool empty() const {
    for (int d = 0; d < dim(); ++d)
      if (lo[d] > hi[d]) return true;
    return false;
  }

  double diameter() const { return (hi - lo).norm(); }
};

inline Box ball_box(const Vec& center, double r) {
  return Box(center - Vec::Constant(center.size(), r),
             center + Vec::Constant(center.size(), r));
}

}  // namespace reif
