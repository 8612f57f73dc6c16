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

#include "blindgait/simulator.hpp"

#include <cmath>

namespace blindgait {

using spatial::SpatialMat;
using spatial::SpatialVec;
using spatial::Transform;

namespace {

constexpr int kNumBodies = 1 + kNumJoints;  // base + 3 links per leg

Mat3 axis_rotation(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

Vec3 point_to_world(const Transform& world_to_body, const Vec3& p_body) {
  return world_to_body.E.transpose() * p_body + world_to_body.r;
}

/// 6x6 motion matrix of a Plucker transform.
SpatialMat motion_matrix(const Transform& x) {
  SpatialMat m = SpatialMat::Zero();
  m.topLeftCorner<3, 3>() = x.E;
  m.bottomLeftCorner<3, 3>() = -x.E * spatial::skew(x.r);
  m.bottomRightCorner<3, 3>() = x.E;
  return m;
}

}  // namespace

bool SimState::finite(double limit) const {
  auto ok = [limit](double v) { return std::isfinite(v) && std::abs(v) < limit; };
  for (int i = 0; i < 3; ++i) {
    if (!ok(base_position[i]) || !ok(base_lin_vel[i]) || !ok(base_ang_vel[i]))
      return false;
  }
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(base_orientation.coeffs()[i])) return false;
  }
  for (int i = 0; i < kNumJoints; ++i) {
    if (!ok(joint_pos[i]) || !ok(joint_vel[i])) return false;
  }
  return true;
}

Vec3 SimState::rpy() const {
  const Mat3 r = rotation();
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return Vec3(roll, pitch, yaw);
}

Simulator::Simulator(const RobotModel& model, ActuatorParams actuator,
                     ContactModelParams contact, double dt)
    : model_(model), actuator_(actuator), contact_params_(contact), dt_(dt) {
  model_.validate();
  build_bodies();
  x_up_.resize(kNumBodies);
  x_world_.resize(kNumBodies);
  vel_.resize(kNumBodies);
  ext_force_.resize(kNumBodies);
  reset(SimState{});
}

void Simulator::build_bodies() {
  bodies_.assign(kNumBodies, Body{});
  collision_points_.clear();

  Body& base = bodies_[0];
  base.parent = -1;
  base.inertia.mass = model_.base_mass;
  base.inertia.com = Vec3::Zero();
  base.inertia.inertia_com = model_.base_inertia;

  for (int leg = 0; leg < kNumLegs; ++leg) {
    const double d = model_.signed_abduction_offset(static_cast<LegIndex>(leg));
    const int hip = 1 + 3 * leg, thigh = 2 + 3 * leg, shank = 3 + 3 * leg;

    bodies_[hip].parent = 0;
    bodies_[hip].tree.r = model_.hip_offsets[leg];
    bodies_[hip].axis = Vec3::UnitX();
    bodies_[hip].inertia.mass = model_.hip_link_mass;
    bodies_[hip].inertia.com = Vec3(0.0, d / 2.0, 0.0);
    bodies_[hip].inertia.inertia_com = spatial::rod_inertia(
        model_.hip_link_mass, model_.abduction_offset, Vec3::UnitY());

    bodies_[thigh].parent = hip;
    bodies_[thigh].tree.r = Vec3(0.0, d, 0.0);
    bodies_[thigh].axis = Vec3::UnitY();
    bodies_[thigh].inertia.mass = model_.thigh_link_mass;
    bodies_[thigh].inertia.com = Vec3(0.0, 0.0, -model_.thigh_length / 2.0);
    bodies_[thigh].inertia.inertia_com = spatial::rod_inertia(
        model_.thigh_link_mass, model_.thigh_length, Vec3::UnitZ());

    bodies_[shank].parent = thigh;
    bodies_[shank].tree.r = Vec3(0.0, 0.0, -model_.thigh_length);
    bodies_[shank].axis = Vec3::UnitY();
    bodies_[shank].inertia.mass = model_.shank_link_mass;
    bodies_[shank].inertia.com = Vec3(0.0, 0.0, -model_.shank_length / 2.0);
    bodies_[shank].inertia.inertia_com = spatial::rod_inertia(
        model_.shank_link_mass, model_.shank_length, Vec3::UnitZ());

    for (double f : {0.25, 0.55, 0.85}) {
      collision_points_.push_back({thigh,
                                   Vec3(0.0, 0.0, -f * model_.thigh_length),
                                   model_.link_radius, 1, leg});
    }
    for (double f : {0.2, 0.5, 0.8}) {
      collision_points_.push_back({shank,
                                   Vec3(0.0, 0.0, -f * model_.shank_length),
                                   model_.link_radius, 2, leg});
    }
    collision_points_.push_back({shank, Vec3(0.0, 0.0, -model_.shank_length),
                                 model_.foot_radius, 3, leg});
  }

  const Vec3 h = model_.base_half_extents;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      for (double sz : {-1.0, 1.0}) {
        collision_points_.push_back(
            {0, Vec3(sx * h.x(), sy * h.y(), sz * h.z()), 0.01, 0, -1});
      }
    }
  }
}

void Simulator::set_terrain(const Heightmap* map, const FrictionField& friction) {
  map_ = map;
  friction_ = friction;
}

void Simulator::reset(const SimState& state) {
  state_ = state;
  state_.base_orientation.normalize();
  torque_.setZero();
  next_pd_time_ = state_.time;
  next_sample_time_ = state_.time + 0.01;
  positive_work_ = 0.0;
  diverged_ = false;
  contacts_ = ContactReport{};
  for (int i = 0; i < 3; ++i) {
    error_buffer_[i].setZero();
    velocity_buffer_[i] = state_.joint_vel;
  }
  update_kinematics();
  compute_contacts();
}

void Simulator::update_kinematics() {
  const Mat3 r_wb = state_.rotation();
  x_world_[0].E = r_wb.transpose();
  x_world_[0].r = state_.base_position;
  vel_[0].head<3>() = r_wb.transpose() * state_.base_ang_vel;
  vel_[0].tail<3>() = r_wb.transpose() * state_.base_lin_vel;

  for (int i = 1; i < kNumBodies; ++i) {
    const Body& body = bodies_[i];
    const double q = state_.joint_pos[i - 1];
    x_up_[i].E = axis_rotation(body.axis, q).transpose() * body.tree.E;
    x_up_[i].r = body.tree.r;
    x_world_[i] = x_up_[i].compose(x_world_[body.parent]);
    SpatialVec s = SpatialVec::Zero();
    s.head<3>() = body.axis;
    vel_[i] = x_up_[i].apply_motion(vel_[body.parent]) +
              s * state_.joint_vel[i - 1];
  }
}

void Simulator::compute_contacts() {
  for (auto& f : ext_force_) f.setZero();
  contacts_ = ContactReport{};
  if (map_ == nullptr) return;

  for (const CollisionPoint& cp : collision_points_) {
    const Transform& xw = x_world_[cp.body];
    const Vec3 p_w = point_to_world(xw, cp.local);
    const double ground = map_->height_at(p_w.x(), p_w.y());
    const double gap = p_w.z() - cp.radius - ground;
    if (gap >= 0.0) continue;

    const Vec3 n = map_->normal_at(p_w.x(), p_w.y());
    const double depth = -gap * n.z();  // vertical penetration along normal

    // Velocity of the body-fixed point, world frame.
    const Vec3 w_b = vel_[cp.body].head<3>();
    const Vec3 v_b = vel_[cp.body].tail<3>();
    const Vec3 v_pt = xw.E.transpose() * (v_b + w_b.cross(cp.local));

    const double v_n = n.dot(v_pt);
    const double fn = std::max(
        0.0, contact_params_.stiffness * depth - contact_params_.damping * v_n);
    if (fn == 0.0) continue;

    double mu = 0.7;
    if (cp.kind == 3) {
      mu = friction_.foot_friction[cp.leg];
    } else {
      mu = friction_.mean;
    }
    const Vec3 v_t = v_pt - v_n * n;
    const double v_t_norm = v_t.norm();
    Vec3 ft = Vec3::Zero();
    if (v_t_norm > 1e-12) {
      ft = -mu * fn * v_t / std::max(v_t_norm, contact_params_.slip_velocity);
    }
    const Vec3 f_w = fn * n + ft;

    // Accumulate as a spatial force at the body frame origin.
    const Vec3 f_body = xw.E * f_w;
    ext_force_[cp.body].head<3>() += cp.local.cross(f_body);
    ext_force_[cp.body].tail<3>() += f_body;

    switch (cp.kind) {
      case 0: contacts_.base_contact = true; break;
      case 1: contacts_.thigh_contact[cp.leg] = true; break;
      case 2: contacts_.shank_contact[cp.leg] = true; break;
      case 3:
        contacts_.foot_contact[cp.leg] = true;
        contacts_.foot_force[cp.leg] += f_w;
        contacts_.foot_normal[cp.leg] = n;
        break;
    }
  }
}

void Simulator::physics_step(const Vec12& joint_targets,
                             const DisturbanceSchedule& disturbance) {
  // PD torque refresh on the actuator clock (held between updates).
  if (state_.time >= next_pd_time_ - 1e-12) {
    for (int j = 0; j < kNumJoints; ++j) {
      const JointLimits& lim = j % 3 == 0   ? model_.abduction_limits
                               : j % 3 == 1 ? model_.hip_limits
                                            : model_.knee_limits;
      const double target = std::clamp(joint_targets[j], lim.lower, lim.upper);
      const double tau = actuator_.kp * (target - state_.joint_pos[j]) -
                         actuator_.kd * state_.joint_vel[j];
      torque_[j] = std::clamp(tau, -actuator_.torque_limit, actuator_.torque_limit);
    }
    next_pd_time_ += 1.0 / actuator_.rate;
  }

  update_kinematics();
  compute_contacts();

  const Vec3 push = disturbance.at(state_.time);
  if (!push.isZero()) {
    ext_force_[0].tail<3>() += x_world_[0].E * push;
  }

  // Bias forces via RNEA with the gravity offset trick: propagating a
  // fictitious upward base acceleration is equivalent to per-body gravity.
  std::array<SpatialVec, kNumBodies> acc, force;
  acc[0].setZero();
  acc[0].tail<3>() = x_world_[0].E * Vec3(0.0, 0.0, kGravity);
  for (int i = 1; i < kNumBodies; ++i) {
    SpatialVec s = SpatialVec::Zero();
    s.head<3>() = bodies_[i].axis;
    acc[i] = x_up_[i].apply_motion(acc[bodies_[i].parent]) +
             spatial::cross_motion(vel_[i], s * state_.joint_vel[i - 1]);
  }
  for (int i = 0; i < kNumBodies; ++i) {
    force[i] = bodies_[i].inertia.apply(acc[i]) +
               spatial::cross_force(vel_[i], bodies_[i].inertia.apply(vel_[i])) -
               ext_force_[i];
  }
  Eigen::Matrix<double, 18, 1> bias;
  for (int i = kNumBodies - 1; i >= 1; --i) {
    bias[6 + i - 1] = bodies_[i].axis.dot(force[i].head<3>());
    force[bodies_[i].parent] += x_up_[i].apply_force_inverse(force[i]);
  }
  bias.head<6>() = force[0];

  // Mass matrix via the composite rigid body algorithm.
  std::array<SpatialMat, kNumBodies> composite;
  for (int i = 0; i < kNumBodies; ++i) composite[i] = bodies_[i].inertia.matrix();
  for (int i = kNumBodies - 1; i >= 1; --i) {
    const SpatialMat xm = motion_matrix(x_up_[i]);
    composite[bodies_[i].parent] += xm.transpose() * composite[i] * xm;
  }
  Eigen::Matrix<double, 18, 18> mass_matrix = Eigen::Matrix<double, 18, 18>::Zero();
  mass_matrix.topLeftCorner<6, 6>() = composite[0];
  for (int j = 0; j < kNumJoints; ++j) {
    int body = j + 1;
    SpatialVec s = SpatialVec::Zero();
    s.head<3>() = bodies_[body].axis;
    SpatialVec f = composite[body] * s;
    mass_matrix(6 + j, 6 + j) = s.head<3>().dot(f.head<3>());
    int walker = body;
    while (bodies_[walker].parent >= 1) {
      f = x_up_[walker].apply_force_inverse(f);
      walker = bodies_[walker].parent;
      const double coupling = bodies_[walker].axis.dot(f.head<3>());
      mass_matrix(6 + j, 6 + walker - 1) = coupling;
      mass_matrix(6 + walker - 1, 6 + j) = coupling;
    }
    f = x_up_[walker].apply_force_inverse(f);
    mass_matrix.block<6, 1>(0, 6 + j) = f;
    mass_matrix.block<1, 6>(6 + j, 0) = f.transpose();
  }

  Eigen::Matrix<double, 18, 1> rhs = -bias;
  rhs.tail<12>() += torque_;
  const Eigen::Matrix<double, 18, 1> accel = mass_matrix.ldlt().solve(rhs);

  // Positive actuator power before the velocity update.
  double power = 0.0;
  for (int j = 0; j < kNumJoints; ++j) {
    power += std::max(torque_[j] * state_.joint_vel[j], 0.0);
  }
  positive_work_ += power * dt_;

  // Semi-implicit Euler in body coordinates.
  const Mat3 r_wb = state_.rotation();
  Vec3 w_b = r_wb.transpose() * state_.base_ang_vel + accel.head<3>() * dt_;
  Vec3 v_b = r_wb.transpose() * state_.base_lin_vel + accel.segment<3>(3) * dt_;
  state_.joint_vel += accel.tail<12>() * dt_;

  state_.base_position += r_wb * v_b * dt_;
  const double angle = w_b.norm() * dt_;
  if (angle > 1e-12) {
    state_.base_orientation =
        state_.base_orientation * Quat(Eigen::AngleAxisd(angle, w_b.normalized()));
    state_.base_orientation.normalize();
  }
  state_.base_lin_vel = r_wb * v_b;
  state_.base_ang_vel = r_wb * w_b;
  state_.joint_pos += state_.joint_vel * dt_;
  state_.time += dt_;
}

StepStatus Simulator::advance(double duration, const Vec12& joint_targets,
                              const DisturbanceSchedule& disturbance) {
  if (diverged_) return StepStatus::Diverged;
  const int steps = static_cast<int>(std::round(duration / dt_));
  for (int s = 0; s < steps; ++s) {
    physics_step(joint_targets, disturbance);
    if (!state_.finite()) {
      diverged_ = true;
      return StepStatus::Diverged;
    }
    if (state_.time >= next_sample_time_ - 1e-12) {
      sample_joint_signals(joint_targets);
      next_sample_time_ += 0.01;
    }
  }
  update_kinematics();
  compute_contacts();
  return StepStatus::Ok;
}

void Simulator::sample_joint_signals(const Vec12& joint_targets) {
  error_buffer_[2] = error_buffer_[1];
  error_buffer_[1] = error_buffer_[0];
  error_buffer_[0] = joint_targets - state_.joint_pos;
  velocity_buffer_[2] = velocity_buffer_[1];
  velocity_buffer_[1] = velocity_buffer_[0];
  velocity_buffer_[0] = state_.joint_vel;
}

JointMeasurement Simulator::measure_joints() const {
  JointMeasurement m;
  for (int i = 0; i < 3; ++i) {
    m.position_error.col(i) = error_buffer_[i];
    m.velocity.col(i) = velocity_buffer_[i];
  }
  return m;
}

Vec3 Simulator::foot_position_world(LegIndex leg) const {
  const int shank = 3 + 3 * leg_id(leg);
  return point_to_world(x_world_[shank], Vec3(0.0, 0.0, -model_.shank_length));
}

Vec3 Simulator::foot_velocity_world(LegIndex leg) const {
  const int shank = 3 + 3 * leg_id(leg);
  const Vec3 local(0.0, 0.0, -model_.shank_length);
  const Vec3 w_b = vel_[shank].head<3>();
  const Vec3 v_b = vel_[shank].tail<3>();
  return x_world_[shank].E.transpose() * (v_b + w_b.cross(local));
}

Vec3 Simulator::gravity_direction_base() const {
  return state_.rotation().transpose() * Vec3(0.0, 0.0, -1.0);
}

double Simulator::kinetic_energy() const {
  double ke = 0.0;
  for (int i = 0; i < kNumBodies; ++i) {
    ke += 0.5 * vel_[i].dot(bodies_[i].inertia.apply(vel_[i]));
  }
  return ke;
}

double Simulator::potential_energy() const {
  double pe = 0.0;
  for (int i = 0; i < kNumBodies; ++i) {
    const Vec3 com_w = point_to_world(x_world_[i], bodies_[i].inertia.com);
    pe += bodies_[i].inertia.mass * kGravity * com_w.z();
  }
  return pe;
}

void Simulator::scale_link_masses(double factor) {
  model_.hip_link_mass *= factor;
  model_.thigh_link_mass *= factor;
  model_.shank_link_mass *= factor;
  build_bodies();
}

}  // namespace blindgait
