#pragma once

// Frames, rotations and transport data on the frame manifold X = Fr(R^3).
//
// A frame is stored as the 3x3 matrix whose columns are (e1, e2, e3); e3 is
// the viewing direction. The left action of SO(3) multiplies from the left,
// the right action of the distinguished SO(2) multiplies from the right by
//
//   [ cos -sin 0 ]
//   [ sin  cos 0 ]
//   [  0    0  1 ]
//
// so that x <| g = (cos e1 + sin e2, -sin e1 + cos e2, e3).

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "cryo/errors.hpp"

namespace cryo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using ComplexVec3 = Eigen::Vector3cd;

/// Inner products at or below -1 + kAntipodalTolerance have no unique geodesic.
inline constexpr double kAntipodalTolerance = 1e-9;
/// Inner products at or above 1 - kCoincidentTolerance transport trivially.
inline constexpr double kCoincidentTolerance = 1e-12;

/// Element of SO(2), stored as (re, im) with re^2 + im^2 = 1.
class UnitComplex {
 public:
  constexpr UnitComplex() = default;

  /// Normalizes (re, im); throws DomainError for the zero vector.
  UnitComplex(double re, double im) {
    const double r = std::hypot(re, im);
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw DomainError("UnitComplex: cannot normalize a zero or non-finite value");
    }
    re_ = re / r;
    im_ = im / r;
  }

  static UnitComplex from_angle(double theta) {
    UnitComplex g;
    g.re_ = std::cos(theta);
    g.im_ = std::sin(theta);
    return g;
  }

  static UnitComplex from_complex(std::complex<double> z) { return {z.real(), z.imag()}; }

  double re() const { return re_; }
  double im() const { return im_; }
  /// Angle in (-pi, pi].
  double angle() const { return std::atan2(im_, re_); }
  std::complex<double> value() const { return {re_, im_}; }

  UnitComplex conj() const {
    UnitComplex g;
    g.re_ = re_;
    g.im_ = -im_;
    return g;
  }
  UnitComplex inverse() const { return conj(); }

  friend UnitComplex operator*(UnitComplex a, UnitComplex b) {
    UnitComplex g;
    g.re_ = a.re_ * b.re_ - a.im_ * b.im_;
    g.im_ = a.re_ * b.im_ + a.im_ * b.re_;
    return g;
  }

  friend bool operator==(const UnitComplex&, const UnitComplex&) = default;

  /// The planar rotation matrix embedded in SO(3), fixing the third axis.
  Mat3 matrix() const {
    Mat3 m;
    m << re_, -im_, 0.0,
         im_, re_, 0.0,
         0.0, 0.0, 1.0;
    return m;
  }

 private:
  double re_ = 1.0;
  double im_ = 0.0;
};

/// Element of SO(3) as an explicit 3x3 matrix.
class Rotation3 {
 public:
  Rotation3() : m_(Mat3::Identity()) {}

  /// Validates orthogonality and det = +1 to within `tol`.
  explicit Rotation3(const Mat3& m, double tol = 1e-9) : m_(m) {
    if (!((m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol) ||
        !(std::abs(m.determinant() - 1.0) <= tol)) {
      throw DomainError("Rotation3: matrix is not a proper rotation");
    }
  }

  static Rotation3 identity() { return Rotation3(); }

  static Rotation3 unchecked(const Mat3& m) {
    Rotation3 r;
    r.m_ = m;
    return r;
  }

  const Mat3& matrix() const { return m_; }
  Rotation3 inverse() const { return unchecked(m_.transpose()); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  friend Rotation3 operator*(const Rotation3& a, const Rotation3& b) {
    return unchecked(a.m_ * b.m_);
  }

 private:
  Mat3 m_;
};

/// Oriented orthonormal frame (e1, e2, e3); a point of X.
class Frame {
 public:
  Frame() : m_(Mat3::Identity()) {}

  /// Columns are (e1, e2, e3). Validates orthonormality and orientation.
  explicit Frame(const Mat3& columns, double tol = 1e-9) : m_(columns) {
    if (!((columns.transpose() * columns - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol) ||
        !(std::abs(columns.determinant() - 1.0) <= tol)) {
      throw DomainError("Frame: columns are not an oriented orthonormal basis");
    }
  }

  static Frame unchecked(const Mat3& columns) {
    Frame x;
    x.m_ = columns;
    return x;
  }

  const Mat3& matrix() const { return m_; }
  Vec3 e1() const { return m_.col(0); }
  Vec3 e2() const { return m_.col(1); }
  Vec3 e3() const { return m_.col(2); }
  /// pi(x) = e3.
  Vec3 viewing_direction() const { return m_.col(2); }

 private:
  Mat3 m_;
};

/// Rotation matrix of a unit quaternion (w, x, y, z).
inline Mat3 quaternion_to_matrix(double w, double x, double y, double z) {
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

/// Haar-distributed rotation: a normalized vector of four standard normals is
/// a uniform unit quaternion.
template <class URBG>
Rotation3 sample_haar_rotation(URBG& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  double q[4];
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& c : q) {
      c = normal(rng);
      norm += c * c;
    }
  } while (norm < 1e-20);
  norm = std::sqrt(norm);
  return Rotation3::unchecked(quaternion_to_matrix(q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm));
}

/// Frame distributed according to the normalized Haar measure on X.
template <class URBG>
Frame sample_haar_frame(URBG& rng) {
  return Frame::unchecked(sample_haar_rotation(rng).matrix());
}

/// Uniform element of SO(2).
template <class URBG>
UnitComplex sample_unit_complex(URBG& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  return UnitComplex::from_angle(angle(rng));
}

/// g |> x = (g e1, g e2, g e3).
inline Frame act_left(const Rotation3& g, const Frame& x) {
  return Frame::unchecked(g.matrix() * x.matrix());
}

/// x <| g: mixes e1, e2 by the planar rotation g and fixes e3.
inline Frame act_right(const Frame& x, const UnitComplex& g) {
  const Mat3& m = x.matrix();
  Mat3 out;
  out.col(0) = g.re() * m.col(0) + g.im() * m.col(1);
  out.col(1) = -g.im() * m.col(0) + g.re() * m.col(1);
  out.col(2) = m.col(2);
  return Frame::unchecked(out);
}

/// Parallel transport t_{v,w}: the rotation taking w to v along the shortest
/// great-circle arc. Its axis is w x v; vectors orthogonal to the geodesic
/// plane are fixed.
inline Rotation3 geodesic_transport(const Vec3& v, const Vec3& w) {
  const double c = v.dot(w);
  if (c <= -1.0 + kAntipodalTolerance) {
    throw AntipodalPoints("geodesic_transport: viewing directions are antipodal");
  }
  if (c >= 1.0 - kCoincidentTolerance) {
    return Rotation3::identity();
  }
  // Rodrigues with the unnormalized axis k = w x v, |k| = sin(angle):
  // R = I + [k]x + [k]x^2 / (1 + cos(angle)).
  const Vec3 k = w.cross(v);
  Mat3 kx;
  kx << 0.0, -k.z(), k.y(),
        k.z(), 0.0, -k.x(),
        -k.y(), k.x(), 0.0;
  return Rotation3::unchecked(Mat3::Identity() + kx + (kx * kx) / (1.0 + c));
}

/// T(x, y): the unique g in SO(2) with x <| g = t_{pi(x),pi(y)} |> y.
inline UnitComplex transport_rotation(const Frame& x, const Frame& y) {
  const Frame moved = act_left(geodesic_transport(x.viewing_direction(), y.viewing_direction()), y);
  // moved = x <| g, so g = x^T moved restricted to the upper-left 2x2 block.
  // Average the two redundant estimates of cos and sin.
  const Vec3 a1 = x.e1(), a2 = x.e2();
  const Vec3 b1 = moved.e1(), b2 = moved.e2();
  const double c = 0.5 * (a1.dot(b1) + a2.dot(b2));
  const double s = 0.5 * (a2.dot(b1) - a1.dot(b2));
  return {c, s};
}

/// delta_x = e1 - i e2.
inline ComplexVec3 delta(const Frame& x) {
  const std::complex<double> i(0.0, 1.0);
  return x.e1().cast<std::complex<double>>() - i * x.e2().cast<std::complex<double>>();
}

/// <w1, w2> = sum_k w1_k conj(w2_k): linear in the first argument,
/// conjugate-linear in the second.
inline std::complex<double> hermitian_product(const ComplexVec3& w1, const ComplexVec3& w2) {
  // Eigen's dot() conjugates its left operand.
  return w2.dot(w1);
}

}  // namespace cryo
