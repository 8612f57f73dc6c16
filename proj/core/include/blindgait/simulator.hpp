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

#ifndef BLINDGAIT_SIMULATOR_HPP_
#define BLINDGAIT_SIMULATOR_HPP_

#include <array>
#include <vector>

#include "blindgait/robot_model.hpp"
#include "blindgait/spatial.hpp"
#include "blindgait/terrain.hpp"
#include "blindgait/types.hpp"

namespace blindgait {

using Vec12 = Eigen::Matrix<double, 12, 1>;

/// Full dynamic state of the floating-base quadruped.
struct SimState {
  Vec3 base_position = Vec3(0.0, 0.0, 0.5);
  Quat base_orientation = Quat::Identity();
  Vec3 base_lin_vel = Vec3::Zero();  // world frame
  Vec3 base_ang_vel = Vec3::Zero();  // world frame
  Vec12 joint_pos = Vec12::Zero();
  Vec12 joint_vel = Vec12::Zero();
  double time = 0.0;

  bool finite(double limit = 1e6) const;
  Mat3 rotation() const { return base_orientation.toRotationMatrix(); }
  /// Roll/pitch/yaw of the base (ZYX convention).
  Vec3 rpy() const;
};

/// Contact snapshot at the end of a step.
struct ContactReport {
  std::array<bool, kNumLegs> foot_contact{};
  std::array<Vec3, kNumLegs> foot_force{};   // world frame
  std::array<Vec3, kNumLegs> foot_normal{};  // world frame, unit if in contact
  std::array<bool, kNumLegs> thigh_contact{};
  std::array<bool, kNumLegs> shank_contact{};
  bool base_contact = false;

  /// Number of contact bodies that are not feet (thigh, shank, base).
  int body_contact_count() const {
    int n = base_contact ? 1 : 0;
    for (int i = 0; i < kNumLegs; ++i) {
      n += thigh_contact[i] ? 1 : 0;
      n += shank_contact[i] ? 1 : 0;
    }
    return n;
  }
};

/// Analytic joint-level PD actuator with a hard torque limit. Torques are
/// recomputed at `rate` Hz and held between updates; the interface (position
/// error and velocity at t, t-0.01s, t-0.02s) matches a series-elastic
/// actuator model so a learned model can be slotted in later.
struct ActuatorParams {
  double kp = 50.0;           // N*m/rad
  double kd = 0.4;            // N*m*s/rad
  double torque_limit = 40.0; // N*m
  double rate = 400.0;        // Hz
};

/// Penalty contact parameters: linear spring-damper along the terrain
/// normal, regularized Coulomb friction with a stiction velocity threshold.
struct ContactModelParams {
  double stiffness = 5.0e4;     // N/m
  double damping = 500.0;       // N*s/m
  double slip_velocity = 0.01;  // m/s
};

/// External push applied to the base inside [start_time, stop_time).
struct DisturbanceSchedule {
  Vec3 force = Vec3::Zero();  // world frame, N
  double start_time = 0.0;
  double stop_time = 0.0;

  Vec3 at(double t) const {
    return (t >= start_time && t < stop_time) ? force : Vec3::Zero();
  }
};

/// Joint position errors and velocities at t, t-0.01s and t-0.02s
/// (columns ordered newest first), sampled on a fixed 100 Hz clock.
struct JointMeasurement {
  Eigen::Matrix<double, 12, 3> position_error;
  Eigen::Matrix<double, 12, 3> velocity;
};

enum class StepStatus { Ok, Diverged };

/// Minimal rigid-body simulator: floating base plus 12 actuated joints,
/// semi-implicit Euler at a fixed physics rate, penalty contacts against a
/// heightmap. Each instance owns its full state; run one per worker.
class Simulator {
 public:
  explicit Simulator(const RobotModel& model, ActuatorParams actuator = {},
                     ContactModelParams contact = {}, double dt = 0.001);

  void set_terrain(const Heightmap* map, const FrictionField& friction);
  const Heightmap* terrain() const { return map_; }
  const FrictionField& friction() const { return friction_; }

  /// Resets state and internal buffers. The joint signal buffer is padded
  /// with the initial values.
  void reset(const SimState& state);

  const SimState& state() const { return state_; }
  double dt() const { return dt_; }
  const RobotModel& model() const { return model_; }

  /// Runs physics until `duration` has elapsed, holding the given joint
  /// position targets (PD torques refresh at the actuator rate).
  StepStatus advance(double duration, const Vec12& joint_targets,
                     const DisturbanceSchedule& disturbance = {});

  const ContactReport& contacts() const { return contacts_; }
  const Vec12& applied_torque() const { return torque_; }

  JointMeasurement measure_joints() const;

  Vec3 foot_position_world(LegIndex leg) const;
  Vec3 foot_velocity_world(LegIndex leg) const;
  /// Gravity direction expressed in the base frame (unit, points down).
  Vec3 gravity_direction_base() const;

  double kinetic_energy() const;
  double potential_energy() const;

  /// Integral of the positive actuator power sum_j [tau_j*qdot_j]^+ since
  /// the last reset, J.
  double positive_mechanical_work() const { return positive_work_; }

  /// Scales all leg link masses by `factor` (mass randomization hook).
  void scale_link_masses(double factor);

 private:
  struct Body {
    int parent = -1;
    spatial::Transform tree;  // parent frame -> joint frame at zero angle
    Vec3 axis = Vec3::UnitX();
    spatial::Inertia inertia;
  };

  struct CollisionPoint {
    int body = 0;      // 0 = base, 1.. = leg bodies
    Vec3 local = Vec3::Zero();
    double radius = 0.0;
    int kind = 0;  // 0 base, 1 thigh, 2 shank, 3 foot
    int leg = -1;
  };

  void build_bodies();
  void physics_step(const Vec12& joint_targets,
                    const DisturbanceSchedule& disturbance);
  void update_kinematics();
  void compute_contacts();
  void sample_joint_signals(const Vec12& joint_targets);

  RobotModel model_;
  ActuatorParams actuator_;
  ContactModelParams contact_params_;
  double dt_;

  const Heightmap* map_ = nullptr;
  FrictionField friction_;

  SimState state_;
  ContactReport contacts_;
  Vec12 torque_ = Vec12::Zero();
  double next_pd_time_ = 0.0;
  double next_sample_time_ = 0.0;
  double positive_work_ = 0.0;
  bool diverged_ = false;

  // 13 bodies: base + 3 per leg, leg i owns bodies 1+3i (hip link),
  // 2+3i (thigh), 3+3i (shank).
  std::vector<Body> bodies_;
  std::vector<CollisionPoint> collision_points_;

  // Scratch recomputed each step.
  std::vector<spatial::Transform> x_up_;        // parent -> body
  std::vector<spatial::Transform> x_world_;     // world -> body
  std::vector<spatial::SpatialVec> vel_;        // body coords
  std::vector<spatial::SpatialVec> ext_force_;  // body coords

  // 100 Hz joint signal ring buffer, newest at index 0.
  std::array<Vec12, 3> error_buffer_;
  std::array<Vec12, 3> velocity_buffer_;
};

}  // namespace blindgait

#endif  // BLINDGAIT_SIMULATOR_HPP_
