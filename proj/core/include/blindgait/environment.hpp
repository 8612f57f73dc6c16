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

#ifndef BLINDGAIT_ENVIRONMENT_HPP_
#define BLINDGAIT_ENVIRONMENT_HPP_

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "blindgait/motion_generator.hpp"
#include "blindgait/simulator.hpp"
#include "blindgait/terrain.hpp"

namespace blindgait {

inline constexpr int kObservationDim = 121;
inline constexpr int kPrivilegedDim = 71;
inline constexpr int kProprioDim = 48;  // h_t: the o_t rows shared with students
inline constexpr int kActionDim = 16;

using Action = Eigen::Matrix<double, kActionDim, 1>;

// Offsets into the observation vector. The first kProprioDim entries form
// h_t; the remainder (f0, joint histories, foot target history) is only
// visible to the full observation.
struct ObsLayout {
  static constexpr int kCommand = 0;         // 3
  static constexpr int kGravity = 3;         // 3
  static constexpr int kAngVel = 6;          // 3
  static constexpr int kLinVel = 9;          // 3
  static constexpr int kJointPos = 12;       // 12
  static constexpr int kJointVel = 24;       // 12
  static constexpr int kPhases = 36;         // 8 (sin, cos per leg)
  static constexpr int kFrequencies = 44;    // 4 (phase rates, rad/s)
  static constexpr int kBaseFrequency = 48;  // 1 (Hz)
  static constexpr int kErrorHistory = 49;   // 24 (t-0.01, t-0.02)
  static constexpr int kVelocityHistory = 73;  // 24
  static constexpr int kTargetHistory = 97;  // 24 (t-1, t-2 control steps)
};

struct PrivLayout {
  static constexpr int kFootNormals = 0;    // 12
  static constexpr int kHeightScans = 12;   // 36, relative to foot height
  static constexpr int kContactForces = 48; // 4, normal force magnitude
  static constexpr int kFootContacts = 52;  // 4
  static constexpr int kThighContacts = 56; // 4
  static constexpr int kShankContacts = 60; // 4
  static constexpr int kFrictions = 64;     // 4
  static constexpr int kExternalForce = 68; // 3
};

/// Extracts h_t from a full observation.
inline VecX proprio_from_observation(const VecX& obs) {
  return obs.head(kProprioDim);
}

/// Reward term breakdown. `total()` applies the fixed term weights.
struct RewardTerms {
  double r_lv = 0.0;   // linear velocity
  double r_av = 0.0;   // angular velocity
  double r_b = 0.0;    // base motion
  double r_fc = 0.0;   // foot clearance
  double r_bc = 0.0;   // body collision
  double r_s = 0.0;    // target smoothness
  double r_tau = 0.0;  // torque

  static constexpr double kWLv = 0.05;
  static constexpr double kWAv = 0.05;
  static constexpr double kWB = 0.04;
  static constexpr double kWFc = 0.01;
  static constexpr double kWBc = 0.02;
  static constexpr double kWS = 0.025;
  static constexpr double kWTau = 2.0e-5;

  double total() const {
    return kWLv * r_lv + kWAv * r_av + kWB * r_b + kWFc * r_fc + kWBc * r_bc +
           kWS * r_s + kWTau * r_tau;
  }
};

/// Everything the reward function reads from one control step.
struct RewardInputs {
  Command command;
  Vec2 base_lin_vel_xy = Vec2::Zero();  // base frame
  double base_lin_vel_z = 0.0;
  Vec3 base_ang_vel = Vec3::Zero();  // base frame
  Vec4 phase = Vec4::Zero();         // swing iff phase in [pi, 2*pi)
  std::array<double, kNumLegs> foot_height{};      // world z
  std::array<double, kNumLegs> max_scan_height{};  // world z, max of 9 samples
  int body_contact_count = 0;
  Eigen::Matrix<double, 12, 1> targets_t = Eigen::Matrix<double, 12, 1>::Zero();
  Eigen::Matrix<double, 12, 1> targets_t1 = Eigen::Matrix<double, 12, 1>::Zero();
  Eigen::Matrix<double, 12, 1> targets_t2 = Eigen::Matrix<double, 12, 1>::Zero();
  Vec12 torque = Vec12::Zero();
};

/// Per-step reward of the locomotion MDP.
RewardTerms compute_reward(const RewardInputs& in);

/// Projected command-direction speed from base-frame velocity.
double projected_velocity(const Vec2& base_lin_vel_xy, const Command& cmd);

/// Per-transition success label: 1 iff the commanded-direction speed
/// reaches 0.2 m/s and the episode did not terminate.
int label_transition(double v_pr, bool terminated);

/// Clearance margin for the foot clearance reward, m.
inline constexpr double kClearanceMargin = 0.02;

/// One recorded control step.
struct Transition {
  VecX obs;         // o_t (121)
  VecX privileged;  // x_t (71)
  Action action = Action::Zero();  // raw policy output
  double reward = 0.0;
  RewardTerms terms;
  VecX next_obs;
  bool done = false;
  int label = 0;
  double v_pr = 0.0;
};

/// Observation noise scales (standard deviations, applied additively).
struct NoiseScales {
  double joint_pos = 0.01;     // rad
  double joint_vel = 0.2;      // rad/s
  double base_lin_vel = 0.05;  // m/s
  double base_ang_vel = 0.05;  // rad/s
  double gravity = 0.01;       // unit-vector components
};

struct EnvConfig {
  double control_dt = 0.02;
  int max_steps = 400;
  double terrain_extent = 12.0;

  FtgParams ftg;
  ResidualScales action_scales;
  ActuatorParams actuator;
  ContactModelParams contact;
  double physics_dt = 0.001;

  // Reset distributions.
  double yaw_range = kPi / 6.0;      // initial yaw ~ U(-range, range)
  double joint_init_noise = 0.2;     // rad about the nominal stance
  double spawn_clearance = 0.03;     // m above touchdown height
  bool fixed_trot_phases = false;    // deterministic phase offsets for tests

  // Command sampling (ignored when fixed_command is set).
  double stop_probability = 0.0;
  double turn_probability = 0.2;  // per direction
  std::optional<Command> fixed_command;

  // Randomization.
  bool observation_noise = true;
  NoiseScales noise;
  bool randomize_mass = false;     // +-10% link mass scaling per episode
  std::optional<Vec2> friction_range;  // diagnostic U(lo, hi) override

  DisturbanceSchedule disturbance;
};

/// The locomotion MDP: owns one simulator, the motion generation state and
/// the observation pipeline. One instance per rollout worker.
class Environment {
 public:
  Environment(const RobotModel& model, const EnvConfig& config, uint64_t seed);

  /// Episodes regenerate this terrain draw with a fresh per-episode seed.
  void set_terrain_params(const TerrainParams& params);
  /// Diagnostics use a fixed prebuilt heightmap instead.
  void set_fixed_terrain(Heightmap map, const FrictionField& friction);

  /// Reseeds the environment stream so that episode `episode_index` is
  /// reproducible no matter which worker runs it.
  void reseed(uint64_t stream_seed, uint64_t episode_index);

  /// Resets simulation, command, phases and buffers; returns o_0.
  const VecX& reset();

  struct StepResult {
    double reward = 0.0;
    RewardTerms terms;
    bool done = false;
    int label = 0;
    double v_pr = 0.0;
  };
  StepResult step(const Action& raw_action);

  const VecX& observation() const { return obs_; }
  const VecX& privileged() const { return priv_; }

  /// History matrix of the past N proprioceptive columns h (48 x N), oldest
  /// first, zero-padded before the episode start. Excludes the current h_t.
  MatX proprio_history(int length) const;

  int steps_taken() const { return steps_; }
  const Command& command() const { return command_; }
  const Simulator& simulator() const { return sim_; }
  const PhaseState& phase() const { return phase_; }
  const ControllerMode& mode() const { return mode_; }
  const EnvConfig& config() const { return config_; }
  const RobotModel& model() const { return model_; }

  /// Composed foot targets of the last step, horizontal frames, stacked 12.
  const Eigen::Matrix<double, 12, 1>& last_targets() const { return targets_t_; }

 private:
  void generate_episode_terrain();
  void assemble_observation();
  void assemble_privileged();
  bool check_termination() const;
  Vec12 solve_joint_targets(const std::array<Vec3, kNumLegs>& targets_h);

  RobotModel model_;
  EnvConfig config_;
  Rng rng_;
  uint64_t episode_counter_ = 0;

  std::optional<TerrainParams> terrain_params_;
  Heightmap map_;
  FrictionField friction_;

  Simulator sim_;
  PhaseState phase_;
  ControllerMode mode_;
  Command command_;

  VecX obs_ = VecX::Zero(kObservationDim);
  VecX priv_ = VecX::Zero(kPrivilegedDim);
  Eigen::Matrix<double, 12, 1> targets_t_, targets_t1_, targets_t2_;
  Vec12 joint_targets_ = Vec12::Zero();
  std::deque<VecX> h_log_;
  int steps_ = 0;
  bool done_ = false;
};

/// Policies map observations (and optionally privileged info or the
/// proprioceptive history) to raw 16-dim actions.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode() {}
  virtual Action act(const VecX& obs, const VecX& privileged,
                     const Environment& env) = 0;
};

/// Zero-action policy: pure FTG stepping.
class ZeroPolicy : public Policy {
 public:
  Action act(const VecX&, const VecX&, const Environment&) override {
    return Action::Zero();
  }
};

struct RolloutResult {
  std::vector<Transition> transitions;
  double traversability = 0.0;  // mean of labels
  double mean_v_pr = 0.0;
  double total_reward = 0.0;
  bool terminated = false;
};

/// Runs `policy` for at most `max_steps` control steps (capped at the
/// episode limit), recording labels for the curriculum.
RolloutResult rollout(Environment& env, Policy& policy, int max_steps,
                      bool record_transitions = true);

}  // namespace blindgait

#endif  // BLINDGAIT_ENVIRONMENT_HPP_
