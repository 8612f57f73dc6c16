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

#ifndef BLINDGAIT_CURRICULUM_HPP_
#define BLINDGAIT_CURRICULUM_HPP_

#include <optional>
#include <string>
#include <vector>

#include "blindgait/rng.hpp"
#include "blindgait/terrain.hpp"

namespace blindgait {

/// Traversability band targeted by the curriculum: terrains are desirable
/// when the empirical traversability falls inside [low, high].
inline constexpr double kTraversabilityBandLow = 0.5;
inline constexpr double kTraversabilityBandHigh = 0.9;

/// Empirical traversability: mean of the per-transition success labels.
/// Throws on an empty trajectory.
double traversability(const std::vector<int>& labels);

/// Fraction of per-trajectory traversability values inside the band;
/// the empirical measurement probability of the filter.
double measurement_probability(const std::vector<double>& tr_values,
                               double band_low = kTraversabilityBandLow,
                               double band_high = kTraversabilityBandHigh);

/// One weighted sample on the discretized terrain-parameter grid.
struct Particle {
  std::vector<int> levels;  // grid index per parameter dimension
  double weight = 0.0;

  VecX values(const TerrainParamSpace& space) const;
};

struct ParticleFilterConfig {
  int num_particles = 10;
  double transition_probability = 0.8;
  double replay_probability = 0.05;
  int trajectories_per_particle = 6;  // per policy iteration, at full scale
  int evaluate_interval = 10;         // policy iterations between updates
  bool init_uniform = false;          // default: start at the easiest corner
};

/// Multinomial resampling proportional to particle weights; weights reset to
/// uniform. If all weights vanish the draw falls back to a uniform choice
/// over the current particles plus the replay memory.
std::vector<Particle> resample(const std::vector<Particle>& particles,
                               const std::vector<std::vector<int>>& replay_memory,
                               int count, Rng& rng);

/// Random walk on the grid: each parameter moves to an adjacent level with
/// the given probability (direction uniform, reflecting at the bounds).
void transition_particles(std::vector<Particle>* particles,
                          const TerrainParamSpace& space,
                          double transition_probability, Rng& rng);

/// Each particle is independently replaced by a uniform draw from the
/// replay memory with the given probability. No-op on empty memory.
void replay_mix(std::vector<Particle>* particles,
                const std::vector<std::vector<int>>& replay_memory,
                double replay_probability, Rng& rng);

/// Grid levels of the easiest terrain of a family (where a fresh policy is
/// most likely to survive).
std::vector<int> easiest_levels(TerrainType type, const TerrainParamSpace& space);

/// SIR particle filter over one terrain family's parameter grid.
class ParticleFilter {
 public:
  ParticleFilter(TerrainType type, const TerrainParamSpace& space,
                 const ParticleFilterConfig& config, uint64_t seed);

  TerrainType type() const { return type_; }
  const std::vector<Particle>& particles() const { return particles_; }
  const TerrainParamSpace& space() const { return space_; }
  const std::vector<std::vector<int>>& replay_memory() const { return memory_; }
  int updates_done() const { return updates_; }

  /// Terrain parameters of one particle, with an episode-specific seed.
  TerrainParams terrain_for(int particle_index, uint64_t episode_seed) const;

  /// Records one trajectory's empirical traversability for a particle.
  void record(int particle_index, double tr);

  /// Executes one filter update from the recorded traversabilities:
  /// measurement probabilities -> weights -> resample -> replay append ->
  /// replay mix -> transition. Clears the records.
  void update();

  /// Measurement probabilities of the most recent update.
  const std::vector<double>& last_measurement_probs() const {
    return last_probs_;
  }

 private:
  TerrainType type_;
  TerrainParamSpace space_;
  ParticleFilterConfig config_;
  Rng rng_;
  std::vector<Particle> particles_;
  std::vector<std::vector<double>> records_;
  std::vector<std::vector<int>> memory_;
  std::vector<double> last_probs_;
  int updates_ = 0;
};

/// Round-robin episode scheduler over (terrain family x particle) with one
/// filter per family; the barrier update runs every `evaluate_interval`
/// policy iterations.
class Curriculum {
 public:
  Curriculum(const std::vector<TerrainType>& types,
             const ParticleFilterConfig& config, uint64_t seed);

  struct Assignment {
    int filter = 0;
    int particle = 0;
    TerrainParams params;
  };
  Assignment next_assignment(uint64_t episode_seed);

  void record(const Assignment& assignment, double tr);

  /// Runs filter updates when `policy_iteration` completes a window.
  bool maybe_update(int policy_iteration);

  const std::vector<ParticleFilter>& filters() const { return filters_; }

  /// Appends per-particle rows (iteration, family, params, weight, mean Tr)
  /// to a CSV log; writes a header when the file is empty or new.
  void append_log(const std::string& path, int iteration) const;

 private:
  std::vector<ParticleFilter> filters_;
  ParticleFilterConfig config_;
  uint64_t cursor_ = 0;
};

}  // namespace blindgait

#endif  // BLINDGAIT_CURRICULUM_HPP_
