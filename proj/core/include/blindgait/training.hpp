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

#ifndef BLINDGAIT_TRAINING_HPP_
#define BLINDGAIT_TRAINING_HPP_

#include <optional>
#include <string>
#include <vector>

#include "blindgait/curriculum.hpp"
#include "blindgait/environment.hpp"
#include "blindgait/networks.hpp"

namespace blindgait {

/// Adam with the exponential schedule lr(u) = lr0 * base^(u / interval).
struct AdamConfig {
  double lr = 1.0e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1.0e-8;
  double decay_base = 1.0;   // 1.0 disables the schedule
  int decay_interval = 100;
  double weight_decay = 0.0;  // L2 coefficient
};

class Adam {
 public:
  Adam(ParamSet* params, const AdamConfig& config);

  /// Applies one update from the gradients currently stored on the
  /// parameters (missing gradients count as zero).
  void step();

  /// Learning rate that the next step() will use.
  double current_lr() const;
  int updates() const { return t_; }

 private:
  ParamSet* params_;
  AdamConfig config_;
  VecX m_, v_;
  int t_ = 0;
};

/// Flat storage for one batch of on-policy experience.
struct RolloutBatch {
  MatX obs;         // 121 x N
  MatX privileged;  // 71 x N
  MatX actions;     // 16 x N
  VecX rewards;
  VecX v_pr;

  struct Episode {
    int start = 0;
    int length = 0;
    bool terminated = false;  // false when cut by the step limit
    VecX final_obs;           // o_{T} for bootstrap
    VecX final_privileged;
    double traversability = 0.0;
  };
  std::vector<Episode> episodes;

  int size() const { return static_cast<int>(rewards.size()); }
  double mean_episode_length() const;
};

struct TrpoConfig {
  double discount = 0.995;
  double gae_lambda = 0.95;
  double kl_threshold = 0.01;
  double kl_slack = 1.5;  // accepted steps must satisfy kl <= slack*threshold
  int max_episode_length = 400;
  double cg_damping = 0.1;
  int cg_iterations = 50;
  int batch_size = 8000;  // desk-scale default; 80000 at full scale
  int fvp_subsample = 8;  // use every k-th state for Fisher-vector products
  int line_search_steps = 10;
  double fd_step = 3.0e-5;  // perturbation for finite-difference Fisher
  int value_epochs = 3;
  double value_lr = 1.0e-3;
  int value_minibatch = 512;
};

/// Generalized advantage estimation over the batch episodes, followed by
/// normalization to zero mean and unit variance. Also returns the
/// discounted-return targets for value regression.
struct AdvantageResult {
  VecX advantages;  // normalized
  VecX returns;     // value targets
};
AdvantageResult estimate_advantages(const RolloutBatch& batch,
                                    const ValueNet& value, double gamma,
                                    double lambda);

struct TrpoStats {
  double mean_reward = 0.0;          // per step
  double mean_episode_length = 0.0;
  double mean_v_pr = 0.0;
  double kl = 0.0;
  double surrogate_improvement = 0.0;
  bool accepted = false;
  double mean_traversability = 0.0;
  int episodes = 0;
  int steps = 0;
};

/// One natural-gradient update: conjugate-gradient solve of the damped
/// Fisher system, then a backtracking line search enforcing the KL bound and
/// non-negative surrogate improvement. A rejected step leaves the policy
/// parameters bit-identical.
TrpoStats trpo_update(TeacherNet* teacher, ValueNet* value,
                      const RolloutBatch& batch, const TrpoConfig& config);

/// Draws actions from the teacher's Gaussian policy.
class StochasticTeacherPolicy : public Policy {
 public:
  explicit StochasticTeacherPolicy(const TeacherNet* teacher)
      : teacher_(teacher) {}
  void reseed(uint64_t seed) { rng_ = Rng(seed); }
  Action act(const VecX& obs, const VecX& privileged,
             const Environment& env) override;

 private:
  const TeacherNet* teacher_;
  Rng rng_{0};
};

/// Deterministic (mean) teacher policy for evaluation.
class MeanTeacherPolicy : public Policy {
 public:
  explicit MeanTeacherPolicy(const TeacherNet* teacher) : teacher_(teacher) {}
  Action act(const VecX& obs, const VecX& privileged,
             const Environment& env) override;

 private:
  const TeacherNet* teacher_;
};

/// Student policies (deterministic) for evaluation and DAgger rollouts.
class TcnPolicy : public Policy {
 public:
  explicit TcnPolicy(const TcnNet* net) : net_(net) {}
  Action act(const VecX& obs, const VecX& privileged,
             const Environment& env) override;

 private:
  const TcnNet* net_;
};

class GruPolicy : public Policy {
 public:
  explicit GruPolicy(const GruNet* net) : net_(net), state_(net->initial_state()) {}
  void begin_episode() override { state_ = net_->initial_state(); }
  Action act(const VecX& obs, const VecX& privileged,
             const Environment& env) override;

 private:
  const GruNet* net_;
  GruNet::State state_;
};

/// Parallel on-policy collection: a fixed list of episodes is distributed
/// over worker environments; every episode is reproducible from
/// (seed, episode index) alone, so results do not depend on scheduling.
struct CollectionPlan {
  int episodes = 20;
  int max_episode_length = 400;
  uint64_t seed = 0;
  uint64_t episode_base = 0;  // global index of the first episode
  std::optional<std::vector<TerrainParams>> terrains;  // per episode
};

RolloutBatch collect_batch(const RobotModel& model, const EnvConfig& env_config,
                           const TeacherNet& teacher, const CollectionPlan& plan,
                           int threads = 0);

struct TeacherTrainConfig {
  RobotModel model;
  EnvConfig env;
  TrpoConfig trpo;
  int iterations = 300;
  uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency (BLINDGAIT_THREADS overrides)

  // Terrain selection: empty list trains on flat ground. With
  // `use_curriculum` the particle filters pick parameters; otherwise they
  // are drawn uniformly from each family's space.
  std::vector<TerrainType> terrain_types;
  bool use_curriculum = false;
  ParticleFilterConfig curriculum;

  std::string out_dir;  // when set: metrics.csv, curriculum.csv, checkpoint
  int checkpoint_interval = 0;  // 0: only final
};

struct TeacherTrainResult {
  TeacherNet teacher;
  ValueNet value;
  std::vector<TrpoStats> history;
};

TeacherTrainResult train_teacher(const TeacherTrainConfig& config);

/// Number of worker threads: explicit value, else BLINDGAIT_THREADS, else
/// hardware concurrency.
int resolve_threads(int requested);

/// Teacher checkpoint helpers (architecture metadata included).
void save_teacher_checkpoint(const std::string& path, const TeacherNet& teacher);
TeacherNet load_teacher_checkpoint(const std::string& path);

}  // namespace blindgait

#endif  // BLINDGAIT_TRAINING_HPP_
