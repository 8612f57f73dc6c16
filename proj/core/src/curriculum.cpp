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

#include "blindgait/curriculum.hpp"

#include <filesystem>
#include <fstream>
#include <numeric>

namespace blindgait {

double traversability(const std::vector<int>& labels) {
  if (labels.empty()) {
    throw std::invalid_argument("traversability of an empty trajectory");
  }
  const double sum = std::accumulate(labels.begin(), labels.end(), 0.0);
  return sum / static_cast<double>(labels.size());
}

double measurement_probability(const std::vector<double>& tr_values,
                               double band_low, double band_high) {
  if (tr_values.empty()) return 0.0;
  int in_band = 0;
  for (double tr : tr_values) {
    if (tr >= band_low && tr <= band_high) ++in_band;
  }
  return static_cast<double>(in_band) / static_cast<double>(tr_values.size());
}

VecX Particle::values(const TerrainParamSpace& space) const {
  VecX v(space.dims());
  for (int d = 0; d < space.dims(); ++d) v[d] = space.grid_value(d, levels[d]);
  return v;
}

std::vector<Particle> resample(const std::vector<Particle>& particles,
                               const std::vector<std::vector<int>>& replay_memory,
                               int count, Rng& rng) {
  if (particles.empty()) throw std::invalid_argument("resample: no particles");
  double total = 0.0;
  for (const Particle& p : particles) total += p.weight;

  std::vector<Particle> out;
  out.reserve(count);
  if (total <= 0.0) {
    // Degenerate weights: uniform draw over particles and replay memory.
    const int pool = static_cast<int>(particles.size() + replay_memory.size());
    for (int i = 0; i < count; ++i) {
      const int pick = rng.uniform_int(0, pool - 1);
      Particle p;
      p.levels = pick < static_cast<int>(particles.size())
                     ? particles[pick].levels
                     : replay_memory[pick - particles.size()];
      p.weight = 1.0 / count;
      out.push_back(std::move(p));
    }
    return out;
  }

  for (int i = 0; i < count; ++i) {
    const double u = rng.uniform() * total;
    double acc = 0.0;
    size_t pick = particles.size() - 1;
    for (size_t k = 0; k < particles.size(); ++k) {
      acc += particles[k].weight;
      if (u < acc) {
        pick = k;
        break;
      }
    }
    Particle p = particles[pick];
    p.weight = 1.0 / count;
    out.push_back(std::move(p));
  }
  return out;
}

void transition_particles(std::vector<Particle>* particles,
                          const TerrainParamSpace& space,
                          double transition_probability, Rng& rng) {
  for (Particle& p : *particles) {
    for (int d = 0; d < space.dims(); ++d) {
      if (!rng.bernoulli(transition_probability)) continue;
      const int dir = rng.bernoulli(0.5) ? 1 : -1;
      int level = p.levels[d] + dir;
      if (level < 0) level = 1;                       // reflect at the bounds
      if (level > space.levels - 1) level = space.levels - 2;
      p.levels[d] = level;
    }
  }
}

void replay_mix(std::vector<Particle>* particles,
                const std::vector<std::vector<int>>& replay_memory,
                double replay_probability, Rng& rng) {
  if (replay_memory.empty()) return;
  for (Particle& p : *particles) {
    if (rng.bernoulli(replay_probability)) {
      p.levels = replay_memory[rng.uniform_int(
          0, static_cast<int>(replay_memory.size()) - 1)];
    }
  }
}

std::vector<int> easiest_levels(TerrainType type, const TerrainParamSpace& space) {
  std::vector<int> levels(space.dims(), 0);
  if (type == TerrainType::Steps || type == TerrainType::Stairs) {
    // Wide and shallow: width at the top of its range, height at the bottom.
    levels[0] = space.levels - 1;
    levels[1] = 0;
  }
  // Hills: zero roughness, lowest frequency, smallest amplitude.
  return levels;
}

ParticleFilter::ParticleFilter(TerrainType type, const TerrainParamSpace& space,
                               const ParticleFilterConfig& config, uint64_t seed)
    : type_(type), space_(space), config_(config), rng_(seed) {
  particles_.resize(config.num_particles);
  records_.resize(config.num_particles);
  for (Particle& p : particles_) {
    p.weight = 1.0 / config.num_particles;
    if (config.init_uniform) {
      p.levels.resize(space_.dims());
      for (int d = 0; d < space_.dims(); ++d) {
        p.levels[d] = rng_.uniform_int(0, space_.levels - 1);
      }
    } else {
      p.levels = easiest_levels(type, space_);
    }
  }
}

TerrainParams ParticleFilter::terrain_for(int particle_index,
                                          uint64_t episode_seed) const {
  TerrainParams params;
  params.type = type_;
  params.params = particles_[particle_index].values(space_);
  params.seed = episode_seed;
  return params;
}

void ParticleFilter::record(int particle_index, double tr) {
  records_[particle_index].push_back(tr);
}

void ParticleFilter::update() {
  last_probs_.resize(particles_.size());
  double total = 0.0;
  for (size_t k = 0; k < particles_.size(); ++k) {
    last_probs_[k] = measurement_probability(records_[k]);
    total += last_probs_[k];
  }
  for (size_t k = 0; k < particles_.size(); ++k) {
    particles_[k].weight = total > 0.0 ? last_probs_[k] / total : 0.0;
  }

  particles_ = resample(particles_, memory_, config_.num_particles, rng_);
  for (const Particle& p : particles_) memory_.push_back(p.levels);
  replay_mix(&particles_, memory_, config_.replay_probability, rng_);
  transition_particles(&particles_, space_, config_.transition_probability, rng_);

  for (auto& r : records_) r.clear();
  ++updates_;
}

Curriculum::Curriculum(const std::vector<TerrainType>& types,
                       const ParticleFilterConfig& config, uint64_t seed)
    : config_(config) {
  filters_.reserve(types.size());
  for (size_t i = 0; i < types.size(); ++i) {
    filters_.emplace_back(types[i], param_space(types[i]), config,
                          splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (i + 1))));
  }
}

Curriculum::Assignment Curriculum::next_assignment(uint64_t episode_seed) {
  // Cycle filters and particles so every particle collects trajectories at
  // an equal rate regardless of the batch size.
  const uint64_t n_filters = filters_.size();
  const uint64_t n_particles = config_.num_particles;
  Assignment a;
  a.filter = static_cast<int>(cursor_ % n_filters);
  a.particle = static_cast<int>((cursor_ / n_filters) % n_particles);
  a.params = filters_[a.filter].terrain_for(a.particle, episode_seed);
  ++cursor_;
  return a;
}

void Curriculum::record(const Assignment& assignment, double tr) {
  filters_[assignment.filter].record(assignment.particle, tr);
}

bool Curriculum::maybe_update(int policy_iteration) {
  if (policy_iteration <= 0 ||
      policy_iteration % config_.evaluate_interval != 0) {
    return false;
  }
  for (ParticleFilter& f : filters_) f.update();
  return true;
}

void Curriculum::append_log(const std::string& path, int iteration) const {
  const bool fresh =
      !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path);
  if (fresh) {
    out << "iteration,terrain,particle,weight";
    for (int d = 0; d < 3; ++d) out << ",param" << d;
    out << ",measurement_prob\n";
  }
  for (const ParticleFilter& f : filters_) {
    for (size_t k = 0; k < f.particles().size(); ++k) {
      const Particle& p = f.particles()[k];
      out << iteration << ',' << terrain_type_name(f.type()) << ',' << k << ','
          << p.weight;
      const VecX v = p.values(f.space());
      for (int d = 0; d < 3; ++d) out << ',' << (d < v.size() ? v[d] : 0.0);
      out << ','
          << (f.last_measurement_probs().empty() ? 0.0
                                                 : f.last_measurement_probs()[k])
          << '\n';
    }
  }
}

}  // namespace blindgait
