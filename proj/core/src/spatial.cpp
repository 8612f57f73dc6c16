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

#include "blindgait/spatial.hpp"

namespace blindgait::spatial {

Mat3 rod_inertia(double mass, double length, const Vec3& axis, double radius) {
  const Vec3 a = axis.normalized();
  const double transverse = mass * (length * length / 12.0 + radius * radius / 4.0);
  const double axial = 0.5 * mass * radius * radius;
  // I = axial * a a^T + transverse * (1 - a a^T)
  return axial * (a * a.transpose()) +
         transverse * (Mat3::Identity() - a * a.transpose());
}

Mat3 box_inertia(double mass, const Vec3& half_extents) {
  const double x = 2.0 * half_extents.x(), y = 2.0 * half_extents.y(),
               z = 2.0 * half_extents.z();
  return (mass / 12.0 *
          Vec3(y * y + z * z, x * x + z * z, x * x + y * y))
      .asDiagonal();
}

}  // namespace blindgait::spatial
