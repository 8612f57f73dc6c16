// Copyright 2026 The Blindgait Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BLINDGAIT_SPATIAL_HPP_
#define BLINDGAIT_SPATIAL_HPP_

#include "blindgait/types.hpp"

namespace blindgait::spatial {

// 6-D spatial vectors, angular part first. Motion vectors are [omega; v],
// force vectors are [torque; f], both expressed at a frame origin.
using SpatialVec = Eigen::Matrix<double, 6, 1>;
using SpatialMat = Eigen::Matrix<double, 6, 6>;

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Plucker coordinate transform from frame A to frame B, where frame B's
/// origin sits at r (A coordinates) and E rotates A-vectors into B-vectors.
struct Transform {
  Mat3 E = Mat3::Identity();  // rotation A -> B
  Vec3 r = Vec3::Zero();      // origin of B in A coordinates

  /// Motion vector transform: vB = X * vA.
  SpatialVec apply_motion(const SpatialVec& v) const {
    SpatialVec out;
    const Vec3 w = v.head<3>();
    out.head<3>() = E * w;
    out.tail<3>() = E * (v.tail<3>() - r.cross(w));
    return out;
  }

  /// Force vector transform to B coordinates: fB = X^{-T} * fA.
  SpatialVec apply_force(const SpatialVec& f) const {
    SpatialVec out;
    const Vec3 n = f.head<3>();
    const Vec3 lin = f.tail<3>();
    out.head<3>() = E * (n - r.cross(lin));
    out.tail<3>() = E * lin;
    return out;
  }

  /// Inverse motion transform: vA = X^{-1} * vB.
  SpatialVec apply_motion_inverse(const SpatialVec& v) const {
    SpatialVec out;
    const Vec3 w = E.transpose() * v.head<3>();
    out.head<3>() = w;
    out.tail<3>() = E.transpose() * v.tail<3>() + r.cross(w);
    return out;
  }

  /// Inverse force transform: fA = X^{T} * fB.
  SpatialVec apply_force_inverse(const SpatialVec& f) const {
    SpatialVec out;
    const Vec3 n = E.transpose() * f.head<3>();
    const Vec3 lin = E.transpose() * f.tail<3>();
    out.head<3>() = n + r.cross(lin);
    out.tail<3>() = lin;
    return out;
  }

  /// Composition: (this * other) maps A -> C when other maps A -> B and
  /// this maps B -> C.
  Transform compose(const Transform& other) const {
    Transform out;
    out.E = E * other.E;
    out.r = other.r + other.E.transpose() * r;
    return out;
  }
};

/// Motion cross product v x m.
inline SpatialVec cross_motion(const SpatialVec& v, const SpatialVec& m) {
  SpatialVec out;
  const Vec3 w = v.head<3>(), vl = v.tail<3>();
  out.head<3>() = w.cross(m.head<3>());
  out.tail<3>() = vl.cross(m.head<3>()) + w.cross(m.tail<3>());
  return out;
}

/// Force cross product v x* f.
inline SpatialVec cross_force(const SpatialVec& v, const SpatialVec& f) {
  SpatialVec out;
  const Vec3 w = v.head<3>(), vl = v.tail<3>();
  out.head<3>() = w.cross(f.head<3>()) + vl.cross(f.tail<3>());
  out.tail<3>() = w.cross(f.tail<3>());
  return out;
}

/// Spatial rigid-body inertia about the body frame origin.
struct Inertia {
  double mass = 0.0;
  Vec3 com = Vec3::Zero();       // center of mass in body frame
  Mat3 inertia_com = Mat3::Zero();  // rotational inertia about the COM

  SpatialMat matrix() const {
    SpatialMat out;
    const Mat3 cx = skew(com);
    out.topLeftCorner<3, 3>() = inertia_com + mass * cx * cx.transpose();
    out.topRightCorner<3, 3>() = mass * cx;
    out.bottomLeftCorner<3, 3>() = mass * cx.transpose();
    out.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
    return out;
  }

  SpatialVec apply(const SpatialVec& v) const {
    SpatialVec out;
    const Vec3 w = v.head<3>(), vl = v.tail<3>();
    const Mat3 cx = skew(com);
    out.head<3>() =
        inertia_com * w + mass * cx * (cx.transpose() * w) + mass * com.cross(vl);
    out.tail<3>() = mass * (vl - com.cross(w));
    return out;
  }
};

/// Thin-rod inertia about its center for a rod of given mass and length
/// along `axis` (unit), with a small transverse radius to keep the tensor
/// non-singular.
Mat3 rod_inertia(double mass, double length, const Vec3& axis,
                 double radius = 0.02);

/// Solid-box inertia about its center from half extents.
Mat3 box_inertia(double mass, const Vec3& half_extents);

}  // namespace blindgait::spatial

#endif  // BLINDGAIT_SPATIAL_HPP_
