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

#ifndef BLINDGAIT_TERRAIN_HPP_
#define BLINDGAIT_TERRAIN_HPP_

#include <array>
#include <string>
#include <vector>

#include "blindgait/rng.hpp"
#include "blindgait/types.hpp"

namespace blindgait {

enum class TerrainType { Flat, Hills, SlipperyHills, Steps, Stairs };

const char* terrain_type_name(TerrainType type);
TerrainType terrain_type_from_name(const std::string& name);

/// Parameter bounds of one terrain family; the curriculum walks on a
/// uniformly discretized grid inside these bounds.
struct TerrainParamSpace {
  std::vector<std::string> names;
  std::vector<double> lower;
  std::vector<double> upper;
  int levels = 10;  // grid resolution per dimension

  int dims() const { return static_cast<int>(lower.size()); }
  double grid_value(int dim, int level) const;
};

/// Bounds per terrain family: Hills/SlipperyHills expose (roughness,
/// frequency, amplitude); Steps and Stairs expose (width, height).
const TerrainParamSpace& param_space(TerrainType type);

/// A concrete terrain draw: family, parameter vector, and generation seed.
struct TerrainParams {
  TerrainType type = TerrainType::Flat;
  VecX params;  // c_T, within param_space(type) bounds
  uint64_t seed = 0;

  /// Throws ValidationError if params lie outside the family's bounds.
  void validate() const;
};

/// Regular elevation grid centered on the origin.
class Heightmap {
 public:
  Heightmap() = default;
  Heightmap(TerrainType type, double spacing, int rows, int cols);

  TerrainType type() const { return type_; }
  double spacing() const { return spacing_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double extent_x() const { return (cols_ - 1) * spacing_; }
  double extent_y() const { return (rows_ - 1) * spacing_; }

  double& at(int row, int col) { return data_[row * cols_ + col]; }
  double at(int row, int col) const { return data_[row * cols_ + col]; }

  /// Elevation at a world (x, y): bilinear for hills-like terrain,
  /// nearest-cell for steps and stairs. Queries outside the extent clamp to
  /// the border and set *clamped when provided.
  double height_at(double x, double y, bool* clamped = nullptr) const;

  /// Surface normal from central differences, unit norm.
  Vec3 normal_at(double x, double y) const;

  /// Elevations at the foot location plus 8 points on a 10 cm circle at
  /// fixed world-frame angles starting along +x.
  std::array<double, 9> height_scan(double foot_x, double foot_y) const;

  /// CSV export: 3 header lines (type, spacing, extent) then the grid.
  void write_csv(const std::string& path) const;

  const std::vector<double>& data() const { return data_; }

 private:
  bool interpolate_bilinear() const {
    return type_ == TerrainType::Hills || type_ == TerrainType::SlipperyHills ||
           type_ == TerrainType::Flat;
  }

  TerrainType type_ = TerrainType::Flat;
  double spacing_ = 0.2;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline constexpr double kScanRadius = 0.10;    // m
inline constexpr int kScanPointsPerFoot = 9;

/// Per-foot friction coefficients with the generating distribution.
struct FrictionField {
  Vec4 foot_friction = Vec4::Constant(0.7);
  double mean = 0.7;
  double stddev = 0.2;

  double foot(LegIndex leg) const { return foot_friction[leg_id(leg)]; }
};

/// Friction distribution parameters of a terrain family (Table-style
/// clipped Gaussians; every draw is clipped to be at least 0.1).
void friction_distribution(TerrainType type, double* mean, double* stddev);

/// One clipped-Gaussian friction draw.
double sample_friction(double mean, double stddev, Rng& rng);

/// Procedurally generates a terrain. Deterministic for a fixed
/// (params, seed); throws ValidationError on out-of-range parameters.
struct GeneratedTerrain {
  Heightmap heightmap;
  FrictionField friction;
};

GeneratedTerrain generate(const TerrainParams& params, double extent = 12.0);

/// Single raised step across the path at `edge_x`, used by diagnostics.
Heightmap make_single_step(double step_height, double edge_x,
                           double extent = 12.0);

/// Uniform slope of the given grade along +x, used by diagnostics.
Heightmap make_slope(double slope_angle_rad, double extent = 12.0);

}  // namespace blindgait

#endif  // BLINDGAIT_TERRAIN_HPP_
