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

#include "blindgait/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace blindgait {

const char* terrain_type_name(TerrainType type) {
  switch (type) {
    case TerrainType::Flat: return "flat";
    case TerrainType::Hills: return "hills";
    case TerrainType::SlipperyHills: return "slippery_hills";
    case TerrainType::Steps: return "steps";
    case TerrainType::Stairs: return "stairs";
  }
  return "unknown";
}

TerrainType terrain_type_from_name(const std::string& name) {
  if (name == "flat") return TerrainType::Flat;
  if (name == "hills") return TerrainType::Hills;
  if (name == "slippery_hills") return TerrainType::SlipperyHills;
  if (name == "steps") return TerrainType::Steps;
  if (name == "stairs") return TerrainType::Stairs;
  throw ValidationError("unknown terrain type: " + name);
}

double TerrainParamSpace::grid_value(int dim, int level) const {
  return lower[dim] +
         (upper[dim] - lower[dim]) * static_cast<double>(level) / (levels - 1);
}

const TerrainParamSpace& param_space(TerrainType type) {
  static const TerrainParamSpace hills{
      {"roughness", "frequency", "amplitude"}, {0.0, 0.2, 0.2}, {0.05, 1.0, 3.0}, 10};
  static const TerrainParamSpace steps{
      {"width", "height"}, {0.1, 0.05}, {0.5, 0.3}, 10};
  static const TerrainParamSpace stairs{
      {"width", "height"}, {0.1, 0.02}, {0.5, 0.2}, 10};
  static const TerrainParamSpace flat{{}, {}, {}, 10};
  switch (type) {
    case TerrainType::Hills:
    case TerrainType::SlipperyHills: return hills;
    case TerrainType::Steps: return steps;
    case TerrainType::Stairs: return stairs;
    case TerrainType::Flat: return flat;
  }
  return flat;
}

void TerrainParams::validate() const {
  const TerrainParamSpace& space = param_space(type);
  if (params.size() != space.dims()) {
    throw ValidationError("terrain params: expected " +
                          std::to_string(space.dims()) + " parameters for " +
                          terrain_type_name(type));
  }
  for (int i = 0; i < space.dims(); ++i) {
    if (params[i] < space.lower[i] - 1e-12 || params[i] > space.upper[i] + 1e-12) {
      throw ValidationError("terrain params: " + space.names[i] +
                            " out of range for " + terrain_type_name(type));
    }
  }
}

Heightmap::Heightmap(TerrainType type, double spacing, int rows, int cols)
    : type_(type), spacing_(spacing), rows_(rows), cols_(cols),
      data_(static_cast<size_t>(rows) * cols, 0.0) {}

double Heightmap::height_at(double x, double y, bool* clamped) const {
  if (clamped) *clamped = false;
  if (rows_ == 0 || cols_ == 0) return 0.0;
  // Grid is centered on the origin.
  double gx = x / spacing_ + 0.5 * (cols_ - 1);
  double gy = y / spacing_ + 0.5 * (rows_ - 1);
  if (gx < 0.0 || gy < 0.0 || gx > cols_ - 1 || gy > rows_ - 1) {
    if (clamped) *clamped = true;
    gx = std::clamp(gx, 0.0, static_cast<double>(cols_ - 1));
    gy = std::clamp(gy, 0.0, static_cast<double>(rows_ - 1));
  }
  if (!interpolate_bilinear()) {
    const int c = static_cast<int>(std::lround(gx));
    const int r = static_cast<int>(std::lround(gy));
    return at(r, c);
  }
  const int c0 = std::min(static_cast<int>(gx), cols_ - 2);
  const int r0 = std::min(static_cast<int>(gy), rows_ - 2);
  const double fx = gx - c0;
  const double fy = gy - r0;
  const double h00 = at(r0, c0), h01 = at(r0, c0 + 1);
  const double h10 = at(r0 + 1, c0), h11 = at(r0 + 1, c0 + 1);
  return h00 * (1 - fx) * (1 - fy) + h01 * fx * (1 - fy) +
         h10 * (1 - fx) * fy + h11 * fx * fy;
}

Vec3 Heightmap::normal_at(double x, double y) const {
  const double d = spacing_;
  const double dzdx = (height_at(x + d, y) - height_at(x - d, y)) / (2.0 * d);
  const double dzdy = (height_at(x, y + d) - height_at(x, y - d)) / (2.0 * d);
  Vec3 n(-dzdx, -dzdy, 1.0);
  return n.normalized();
}

std::array<double, 9> Heightmap::height_scan(double foot_x, double foot_y) const {
  std::array<double, 9> scan;
  scan[0] = height_at(foot_x, foot_y);
  for (int i = 0; i < 8; ++i) {
    const double angle = kTwoPi * i / 8.0;
    scan[i + 1] = height_at(foot_x + kScanRadius * std::cos(angle),
                            foot_y + kScanRadius * std::sin(angle));
  }
  return scan;
}

void Heightmap::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "type," << terrain_type_name(type_) << "\n";
  out << "spacing," << spacing_ << "\n";
  out << "extent," << extent_x() << "," << extent_y() << "\n";
  out.precision(17);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      out << at(r, c);
      out << (c + 1 == cols_ ? '\n' : ',');
    }
  }
}

void friction_distribution(TerrainType type, double* mean, double* stddev) {
  if (type == TerrainType::SlipperyHills) {
    *mean = 0.3;
    *stddev = 0.1;
  } else {
    *mean = 0.7;
    *stddev = 0.2;
  }
}

double sample_friction(double mean, double stddev, Rng& rng) {
  return std::max(0.1, rng.normal(mean, stddev));
}

namespace {

// Gradient-lattice (Perlin) noise, single octave. The lattice pitch is
// 1/frequency meters and gradients are hashed from (seed, ix, iy), so the
// field is bit-reproducible. Output is normalized to [-1, 1].
class PerlinNoise {
 public:
  PerlinNoise(uint64_t seed, double frequency) : seed_(seed), freq_(frequency) {}

  double sample(double x, double y) const {
    const double gx = x * freq_;
    const double gy = y * freq_;
    const int ix = static_cast<int>(std::floor(gx));
    const int iy = static_cast<int>(std::floor(gy));
    const double fx = gx - ix;
    const double fy = gy - iy;
    const double u = fade(fx);
    const double v = fade(fy);
    const double n00 = dot_gradient(ix, iy, fx, fy);
    const double n10 = dot_gradient(ix + 1, iy, fx - 1.0, fy);
    const double n01 = dot_gradient(ix, iy + 1, fx, fy - 1.0);
    const double n11 = dot_gradient(ix + 1, iy + 1, fx - 1.0, fy - 1.0);
    const double nx0 = n00 + u * (n10 - n00);
    const double nx1 = n01 + u * (n11 - n01);
    // sqrt(2)/2 bounds the raw 2-D gradient noise; dividing keeps |.| <= 1.
    return (nx0 + v * (nx1 - nx0)) / 0.7071067811865476;
  }

 private:
  static double fade(double t) {
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
  }

  double dot_gradient(int ix, int iy, double dx, double dy) const {
    const uint64_t h = splitmix64(
        seed_ ^ (0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(ix + 0x40000000) +
                 0xC2B2AE3D27D4EB4FULL * static_cast<uint64_t>(iy + 0x40000000)));
    const double angle = kTwoPi * (h >> 11) * (1.0 / 9007199254740992.0);
    return dx * std::cos(angle) + dy * std::sin(angle);
  }

  uint64_t seed_;
  double freq_;
};

GeneratedTerrain generate_hills(const TerrainParams& params, double extent) {
  const double roughness = params.params[0];
  const double frequency = params.params[1];
  const double amplitude = params.params[2];
  const double spacing = 0.2;
  const int n = static_cast<int>(std::round(extent / spacing)) + 1;

  GeneratedTerrain out;
  out.heightmap = Heightmap(params.type, spacing, n, n);
  PerlinNoise noise(splitmix64(params.seed), frequency);
  Rng rng(params.seed ^ 0x5bf0363546e95a07ULL);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double x = (c - (n - 1) / 2.0) * spacing;
      const double y = (r - (n - 1) / 2.0) * spacing;
      double h = amplitude * noise.sample(x, y);
      h += rng.uniform(-roughness, roughness);
      out.heightmap.at(r, c) = h;
    }
  }
  return out;
}

GeneratedTerrain generate_steps(const TerrainParams& params, double extent) {
  const double width = params.params[0];
  const double max_height = params.params[1];
  const double spacing = 0.02;
  const int n = static_cast<int>(std::round(extent / spacing)) + 1;

  GeneratedTerrain out;
  out.heightmap = Heightmap(params.type, spacing, n, n);
  Rng rng(params.seed ^ 0x94d049bb133111ebULL);

  // Block heights are drawn per (bx, by) tile lazily but deterministically:
  // precompute the tile table covering the map.
  const int tiles = static_cast<int>(std::ceil(extent / width)) + 2;
  std::vector<double> tile_height(static_cast<size_t>(tiles) * tiles);
  for (auto& h : tile_height) h = rng.uniform(0.0, max_height);

  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double x = (c - (n - 1) / 2.0) * spacing;
      const double y = (r - (n - 1) / 2.0) * spacing;
      int bx = static_cast<int>(std::floor((x + extent / 2.0) / width));
      int by = static_cast<int>(std::floor((y + extent / 2.0) / width));
      bx = std::clamp(bx, 0, tiles - 1);
      by = std::clamp(by, 0, tiles - 1);
      out.heightmap.at(r, c) = tile_height[static_cast<size_t>(by) * tiles + bx];
    }
  }
  return out;
}

GeneratedTerrain generate_stairs(const TerrainParams& params, double extent) {
  const double run = params.params[0];
  const double rise = params.params[1];
  const double spacing = 0.02;
  const double flat_half = 0.5;  // 1 m flat landing in the middle
  const int n = static_cast<int>(std::round(extent / spacing)) + 1;

  GeneratedTerrain out;
  out.heightmap = Heightmap(params.type, spacing, n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double x = (c - (n - 1) / 2.0) * spacing;
      double h = 0.0;
      const double beyond = std::abs(x) - flat_half;
      if (beyond > 0.0) {
        h = rise * (1.0 + std::floor(beyond / run));
      }
      out.heightmap.at(r, c) = h;
    }
  }
  return out;
}

}  // namespace

GeneratedTerrain generate(const TerrainParams& params, double extent) {
  params.validate();
  GeneratedTerrain out;
  switch (params.type) {
    case TerrainType::Flat: {
      out.heightmap = Heightmap(TerrainType::Flat, 0.2,
                                static_cast<int>(extent / 0.2) + 1,
                                static_cast<int>(extent / 0.2) + 1);
      break;
    }
    case TerrainType::Hills:
    case TerrainType::SlipperyHills:
      out = generate_hills(params, extent);
      break;
    case TerrainType::Steps:
      out = generate_steps(params, extent);
      break;
    case TerrainType::Stairs:
      out = generate_stairs(params, extent);
      break;
  }
  double mean = 0.7, stddev = 0.2;
  friction_distribution(params.type, &mean, &stddev);
  out.friction.mean = mean;
  out.friction.stddev = stddev;
  Rng rng(splitmix64(params.seed ^ 0xd1342543de82ef95ULL));
  for (int i = 0; i < kNumLegs; ++i) {
    out.friction.foot_friction[i] = sample_friction(mean, stddev, rng);
  }
  return out;
}

Heightmap make_single_step(double step_height, double edge_x, double extent) {
  const double spacing = 0.02;
  const int n = static_cast<int>(std::round(extent / spacing)) + 1;
  Heightmap map(TerrainType::Steps, spacing, n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double x = (c - (n - 1) / 2.0) * spacing;
      map.at(r, c) = x >= edge_x ? step_height : 0.0;
    }
  }
  return map;
}

Heightmap make_slope(double slope_angle_rad, double extent) {
  const double spacing = 0.2;
  const int n = static_cast<int>(std::round(extent / spacing)) + 1;
  Heightmap map(TerrainType::Hills, spacing, n, n);
  const double grade = std::tan(slope_angle_rad);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double x = (c - (n - 1) / 2.0) * spacing;
      map.at(r, c) = grade * x;
    }
  }
  return map;
}

}  // namespace blindgait
