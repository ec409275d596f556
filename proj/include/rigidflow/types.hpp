#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>

namespace rigidflow {

// Planar problems are carried in the same 3-vector representation as
// spatial ones, with the third component pinned to zero.
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rank-3 tensor stored as three matrices: T[i](j, k).
using Tensor3 = std::array<Mat3, 3>;

constexpr double kPi = std::numbers::pi;

inline Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return s;
}

inline Tensor3 zero_tensor() {
  return {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
}

// Rotation by `angle` about the unit vector `axis` (Rodrigues).
inline Mat3 axis_rotation(const Vec3& axis, double angle) {
  const Mat3 k = skew(axis);
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

}  // namespace rigidflow
