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

#ifndef BLINDGAIT_DISTILL_HPP_
#define BLINDGAIT_DISTILL_HPP_

#include <string>
#include <vector>

#include "blindgait/training.hpp"

namespace blindgait {

struct DistillConfig {
  double lr = 5.0e-4;          // 2e-4 for the GRU student
  double decay_base = 0.995;
  int decay_interval = 100;
  int batch_size = 2000;       // steps collected per DAgger round (20000 at scale)
  int minibatches = 5;
  int epochs = 4;
  int iterations = 50;         // DAgger rounds (4000 at scale)
  bool latent_loss = true;     // false reproduces the action-only ablation
  int bptt_length = 100;       // truncation window for the GRU student
};

/// Supervised dataset from student rollouts labeled by the teacher: for each
/// visited state the teacher's latent and action mean are stored as targets.
struct DaggerDataset {
  int history_length = 0;
  MatX obs;             // 121 x N
  MatX history;         // 48 x (N * history_length), sample-major blocks
  MatX teacher_latent;  // 64 x N
  MatX teacher_action;  // 16 x N
  std::vector<int> episode_starts;  // column index of each episode's start

  int size() const { return static_cast<int>(obs.cols()); }
  void append(const DaggerDataset& other);
  /// Keeps a uniformly random subset of `max_size` samples (episode
  /// structure is dropped; used for the TCN pathway only).
  void subsample(int max_size, Rng& rng);
};

/// Rolls out the student policy and labels every visited state with the
/// teacher. Episodes are reproducible from (seed, episode index).
DaggerDataset dagger_collect(const RobotModel& model, const EnvConfig& env_config,
                             const TeacherNet& teacher, Policy& student_policy,
                             int steps, int history_length, uint64_t seed,
                             uint64_t episode_base = 0,
                             const std::vector<TerrainParams>* terrains = nullptr);

struct DistillEpochStats {
  double loss = 0.0;        // optimized objective
  double action_mse = 0.0;  // mean squared action error
  double latent_mse = 0.0;  // mean squared latent error
};

/// One pass of minibatched Adam on the imitation loss
/// (action - teacher action)^2 [+ (latent - teacher latent)^2].
DistillEpochStats distill_epoch(TcnNet* student, const DaggerDataset& data,
                                Adam* adam, const DistillConfig& config,
                                Rng& rng);

/// Evaluation without updates (for held-out sets).
DistillEpochStats distill_evaluate(const TcnNet& student, const DaggerDataset& data);

/// One pass of truncated backpropagation through time for the GRU student:
/// gradients stop at window boundaries, the hidden state carries across
/// windows detached. Set window >= episode length for exact full BPTT.
DistillEpochStats truncated_bptt_epoch(GruNet* student, const DaggerDataset& data,
                                       Adam* adam, const DistillConfig& config);

DistillEpochStats gru_evaluate(const GruNet& student, const DaggerDataset& data);

struct StudentTrainConfig {
  RobotModel model;
  EnvConfig env;
  DistillConfig distill;
  int history_length = 100;
  uint64_t seed = 0;
  int threads = 0;
  std::vector<TerrainType> terrain_types;  // empty: flat
  std::string out_dir;
};

struct StudentTrainResult {
  TcnNet student;
  std::vector<DistillEpochStats> history;
  DaggerDataset holdout;  // final-round data never trained on
};

/// Full DAgger loop for a TCN student: alternate student rollouts labeled by
/// the teacher with supervised updates; the trunk starts as a copy of the
/// teacher's.
StudentTrainResult train_student(const TeacherNet& teacher,
                                 const StudentTrainConfig& config);

void save_student_checkpoint(const std::string& path, const TcnNet& student);
TcnNet load_student_checkpoint(const std::string& path);

}  // namespace blindgait

#endif  // BLINDGAIT_DISTILL_HPP_
