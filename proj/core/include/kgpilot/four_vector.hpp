#pragma once

#include <cmath>
#include <complex>
#include <cstddef>

#include "kgpilot/errors.hpp"

namespace kgpilot {

/// A point or momentum in Minkowski spacetime, metric signature (+,-,-,-).
/// Components are contravariant unless a function documents otherwise.
/// Natural units hbar = c = 1 throughout the library.
struct FourVector {
  double t{0.0};
  double x{0.0};
  double y{0.0};
  double z{0.0};

  FourVector() = default;

  FourVector(double t_, double x_, double y_, double z_) : t(t_), x(x_), y(y_), z(z_) {
    if (!std::isfinite(t) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw InvalidParameterError("FourVector components must be finite");
  }

  double operator[](std::size_t mu) const {
    switch (mu) {
      case 0: return t;
      case 1: return x;
      case 2: return y;
      default: return z;
    }
  }

  void set(std::size_t mu, double value) {
    switch (mu) {
      case 0: t = value; break;
      case 1: x = value; break;
      case 2: y = value; break;
      default: z = value; break;
    }
  }

  FourVector operator+(const FourVector& o) const { return {t + o.t, x + o.x, y + o.y, z + o.z}; }
  FourVector operator-(const FourVector& o) const { return {t - o.t, x - o.x, y - o.y, z - o.z}; }
  FourVector operator-() const { return {-t, -x, -y, -z}; }
  FourVector operator*(double s) const { return {t * s, x * s, y * s, z * s}; }
};

inline FourVector operator*(double s, const FourVector& v) { return v * s; }

/// g_{mu nu} a^mu b^nu = a.t b.t - a.x b.x - a.y b.y - a.z b.z.
inline double minkowski_dot(const FourVector& a, const FourVector& b) {
  return a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z;
}

/// Flip the spatial components: maps covariant components to contravariant.
inline FourVector raise_index(const FourVector& covector) {
  return {covector.t, -covector.x, -covector.y, -covector.z};
}

/// Flip the spatial components: maps contravariant components to covariant.
/// Identical action to raise_index with this metric; the two names keep call
/// sites readable about which kind of components they hold.
inline FourVector lower_index(const FourVector& vector) {
  return {vector.t, -vector.x, -vector.y, -vector.z};
}

enum class Axis { X = 1, Y = 2, Z = 3 };

/// Hyperbolic rotation by `rapidity` in the (t, axis) plane. Preserves
/// minkowski_dot of any pair of vectors.
inline FourVector boost(const FourVector& v, double rapidity, Axis axis = Axis::X) {
  if (!std::isfinite(rapidity)) throw InvalidParameterError("boost: rapidity must be finite");
  const double ch = std::cosh(rapidity);
  const double sh = std::sinh(rapidity);
  FourVector out = v;
  const double s = v[static_cast<std::size_t>(axis)];
  out.t = ch * v.t + sh * s;
  out.set(static_cast<std::size_t>(axis), sh * v.t + ch * s);
  return out;
}

inline double max_abs_component(const FourVector& v) {
  return std::max(std::max(std::fabs(v.t), std::fabs(v.x)), std::max(std::fabs(v.y), std::fabs(v.z)));
}

/// Four complex components indexed like FourVector; used for gradients of a
/// complex scalar field. Component variance (upper/lower) is documented at
/// the producing function.
struct ComplexFourVector {
  std::complex<double> t{};
  std::complex<double> x{};
  std::complex<double> y{};
  std::complex<double> z{};

  std::complex<double> operator[](std::size_t mu) const {
    switch (mu) {
      case 0: return t;
      case 1: return x;
      case 2: return y;
      default: return z;
    }
  }

  void set(std::size_t mu, std::complex<double> value) {
    switch (mu) {
      case 0: t = value; break;
      case 1: x = value; break;
      case 2: y = value; break;
      default: z = value; break;
    }
  }
};

}  // namespace kgpilot
