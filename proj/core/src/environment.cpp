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

#include "blindgait/environment.hpp"

#include <cmath>

namespace blindgait {

double projected_velocity(const Vec2& base_lin_vel_xy, const Command& cmd) {
  if (cmd.is_stop()) return 0.0;
  return base_lin_vel_xy.dot(cmd.heading);
}

int label_transition(double v_pr, bool terminated) {
  if (terminated) return 0;
  return v_pr >= 0.2 ? 1 : 0;
}

RewardTerms compute_reward(const RewardInputs& in) {
  RewardTerms t;
  const double v_pr = projected_velocity(in.base_lin_vel_xy, in.command);

  // Linear velocity: saturating bell around the 0.6 m/s target speed.
  if (in.command.is_stop()) {
    t.r_lv = 0.0;
  } else if (v_pr >= 0.6) {
    t.r_lv = 1.0;
  } else {
    t.r_lv = std::exp(-2.0 * (v_pr - 0.6) * (v_pr - 0.6));
  }

  // Angular velocity, same shape with the turn direction projection.
  const double w_pr = in.base_ang_vel.z() * static_cast<double>(in.command.turn);
  t.r_av = w_pr >= 0.6 ? 1.0 : std::exp(-1.5 * (w_pr - 0.6) * (w_pr - 0.6));

  // Base motion: penalize off-direction translation and roll/pitch rates.
  double v_o;
  if (in.command.is_stop()) {
    v_o = std::sqrt(in.base_lin_vel_xy.squaredNorm() +
                    in.base_lin_vel_z * in.base_lin_vel_z);
  } else {
    v_o = (in.base_lin_vel_xy - v_pr * in.command.heading).norm();
  }
  const double w_xy_sq = in.base_ang_vel.head<2>().squaredNorm();
  t.r_b = std::exp(-1.5 * v_o * v_o) + std::exp(-1.5 * w_xy_sq);

  // Foot clearance: fraction of swing feet lifted above their surroundings.
  int swing = 0, clear = 0;
  for (int i = 0; i < kNumLegs; ++i) {
    const bool in_swing = in.phase[i] >= kPi;
    if (!in_swing) continue;
    ++swing;
    if (in.foot_height[i] > in.max_scan_height[i] + kClearanceMargin) ++clear;
  }
  t.r_fc = swing == 0 ? 1.0 : static_cast<double>(clear) / swing;

  t.r_bc = -static_cast<double>(in.body_contact_count);

  t.r_s = -(in.targets_t - 2.0 * in.targets_t1 + in.targets_t2).norm();

  t.r_tau = -in.torque.cwiseAbs().sum();
  return t;
}

Environment::Environment(const RobotModel& model, const EnvConfig& config,
                         uint64_t seed)
    : model_(model),
      config_(config),
      rng_(seed),
      sim_(model, config.actuator, config.contact, config.physics_dt) {
  targets_t_.setZero();
  targets_t1_.setZero();
  targets_t2_.setZero();
  // Default terrain: flat.
  TerrainParams flat;
  flat.type = TerrainType::Flat;
  flat.params = VecX();
  flat.seed = seed;
  map_ = generate(flat, config_.terrain_extent).heightmap;
  friction_ = FrictionField{};
  sim_.set_terrain(&map_, friction_);
}

void Environment::set_terrain_params(const TerrainParams& params) {
  params.validate();
  terrain_params_ = params;
}

void Environment::reseed(uint64_t stream_seed, uint64_t episode_index) {
  rng_ = Rng(splitmix64(stream_seed ^
                        (0xda3e39cb94b95bdbULL * (episode_index + 1))));
  episode_counter_ = episode_index;
}

void Environment::set_fixed_terrain(Heightmap map, const FrictionField& friction) {
  terrain_params_.reset();
  map_ = std::move(map);
  friction_ = friction;
  sim_.set_terrain(&map_, friction_);
}

void Environment::generate_episode_terrain() {
  if (!terrain_params_) return;
  TerrainParams params = *terrain_params_;
  params.seed = splitmix64(params.seed ^ (episode_counter_ * 0x9e3779b97f4a7c15ULL + 1));
  GeneratedTerrain gen = generate(params, config_.terrain_extent);
  map_ = std::move(gen.heightmap);
  friction_ = gen.friction;
  sim_.set_terrain(&map_, friction_);
}

Vec12 Environment::solve_joint_targets(const std::array<Vec3, kNumLegs>& targets_h) {
  Vec12 q = joint_targets_;
  const RigidTransform base{sim_.state().rotation(), sim_.state().base_position};
  for (int i = 0; i < kNumLegs; ++i) {
    const LegIndex leg = static_cast<LegIndex>(i);
    HorizontalFrame frame;
    try {
      frame = horizontal_frame(base, leg, model_);
    } catch (const GimbalSingularError&) {
      continue;  // keep previous targets; termination check will fire
    }
    const Vec3 world = frame.to_world(targets_h[i]);
    const Vec3 hip_world = base.apply(model_.hip_offsets[i]);
    const Vec3 hip_frame = base.rotation.transpose() * (world - hip_world);
    auto sol = inverse_kinematics(hip_frame, leg, model_);
    if (!sol) {
      // Residuals can sit right on the workspace shell; shrink once more.
      const Vec3 tightened = clamp_to_workspace(targets_h[i], model_, 0.95);
      const Vec3 world2 = frame.to_world(tightened);
      sol = inverse_kinematics(
          base.rotation.transpose() * (world2 - hip_world), leg, model_);
    }
    if (sol) q.segment<3>(3 * i) = *sol;
  }
  return q;
}

const VecX& Environment::reset() {
  generate_episode_terrain();
  ++episode_counter_;

  if (config_.friction_range) {
    for (int i = 0; i < kNumLegs; ++i) {
      friction_.foot_friction[i] =
          rng_.uniform((*config_.friction_range)[0], (*config_.friction_range)[1]);
    }
    sim_.set_terrain(&map_, friction_);
  }

  // Command.
  if (config_.fixed_command) {
    command_ = *config_.fixed_command;
  } else if (rng_.bernoulli(config_.stop_probability)) {
    command_ = Command::stop();
    const double u = rng_.uniform();
    command_.turn = u < config_.turn_probability       ? 1
                    : u < 2.0 * config_.turn_probability ? -1
                                                          : 0;
  } else {
    const double u = rng_.uniform();
    const int turn = u < config_.turn_probability       ? 1
                     : u < 2.0 * config_.turn_probability ? -1
                                                           : 0;
    command_ = Command::from_yaw(rng_.uniform(-kPi, kPi), turn);
  }

  // Phases.
  const double f0 = config_.ftg.base_frequency;
  phase_ = config_.fixed_trot_phases ? trot_initial_phases(f0)
                                     : random_initial_phases(f0, rng_);
  mode_ = ControllerMode{};

  // Nominal stance joint angles: feet directly below the hips.
  Vec12 nominal;
  for (int i = 0; i < kNumLegs; ++i) {
    auto sol = inverse_kinematics(Vec3(0.0, 0.0, -model_.nominal_reach),
                                  static_cast<LegIndex>(i), model_);
    nominal.segment<3>(3 * i) = sol.value();
  }

  if (config_.randomize_mass) {
    sim_.scale_link_masses(rng_.uniform(0.9, 1.1));
  }

  // Spawn with collision resampling.
  SimState init;
  bool placed = false;
  for (int attempt = 0; attempt < 10 && !placed; ++attempt) {
    init = SimState{};
    const double yaw = rng_.uniform(-config_.yaw_range, config_.yaw_range);
    init.base_orientation = Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
    for (int j = 0; j < kNumJoints; ++j) {
      init.joint_pos[j] =
          nominal[j] + rng_.uniform(-config_.joint_init_noise,
                                    config_.joint_init_noise);
    }
    // Drop height: highest terrain under the nominal feet plus reach.
    double ground = map_.height_at(0.0, 0.0);
    const Mat3 r = init.base_orientation.toRotationMatrix();
    for (int i = 0; i < kNumLegs; ++i) {
      const Vec3 hip = r * model_.hip_offsets[i];
      ground = std::max(ground, map_.height_at(hip.x(), hip.y()));
    }
    init.base_position =
        Vec3(0.0, 0.0, ground + model_.nominal_reach + config_.spawn_clearance);
    init.time = 0.0;
    sim_.reset(init);
    // Reject spawns with any collision point already below ground.
    placed = !sim_.contacts().base_contact;
    for (int i = 0; i < kNumLegs && placed; ++i) {
      placed = !sim_.contacts().thigh_contact[i] &&
               !sim_.contacts().shank_contact[i];
    }
  }
  if (!placed) {
    throw std::runtime_error("environment: could not find collision-free spawn");
  }

  joint_targets_ = init.joint_pos;
  const auto targets0 =
      compose_targets(phase_, Eigen::Matrix<double, 12, 1>::Zero(), config_.ftg,
                      model_);
  for (int i = 0; i < kNumLegs; ++i) targets_t_.segment<3>(3 * i) = targets0[i];
  targets_t1_ = targets_t_;
  targets_t2_ = targets_t_;

  h_log_.clear();
  steps_ = 0;
  done_ = false;
  assemble_observation();
  assemble_privileged();
  return obs_;
}

void Environment::assemble_observation() {
  const SimState& s = sim_.state();
  const Mat3 r = s.rotation();
  auto noisy = [this](double v, double sigma) {
    return config_.observation_noise ? v + rng_.normal() * sigma : v;
  };

  obs_[ObsLayout::kCommand + 0] = command_.heading.x();
  obs_[ObsLayout::kCommand + 1] = command_.heading.y();
  obs_[ObsLayout::kCommand + 2] = static_cast<double>(command_.turn);

  const Vec3 e_g = r.transpose() * Vec3(0.0, 0.0, -1.0);
  const Vec3 w_b = r.transpose() * s.base_ang_vel;
  const Vec3 v_b = r.transpose() * s.base_lin_vel;
  for (int i = 0; i < 3; ++i) {
    obs_[ObsLayout::kGravity + i] = noisy(e_g[i], config_.noise.gravity);
    obs_[ObsLayout::kAngVel + i] = noisy(w_b[i], config_.noise.base_ang_vel);
    obs_[ObsLayout::kLinVel + i] = noisy(v_b[i], config_.noise.base_lin_vel);
  }
  for (int j = 0; j < kNumJoints; ++j) {
    obs_[ObsLayout::kJointPos + j] = noisy(s.joint_pos[j], config_.noise.joint_pos);
    obs_[ObsLayout::kJointVel + j] = noisy(s.joint_vel[j], config_.noise.joint_vel);
  }
  for (int i = 0; i < kNumLegs; ++i) {
    obs_[ObsLayout::kPhases + 2 * i] = std::sin(phase_.phase[i]);
    obs_[ObsLayout::kPhases + 2 * i + 1] = std::cos(phase_.phase[i]);
    obs_[ObsLayout::kFrequencies + i] = phase_.phase_rate(static_cast<LegIndex>(i));
  }
  obs_[ObsLayout::kBaseFrequency] = phase_.base_frequency;

  const JointMeasurement jm = sim_.measure_joints();
  for (int j = 0; j < kNumJoints; ++j) {
    obs_[ObsLayout::kErrorHistory + j] =
        noisy(jm.position_error(j, 1), config_.noise.joint_pos);
    obs_[ObsLayout::kErrorHistory + 12 + j] =
        noisy(jm.position_error(j, 2), config_.noise.joint_pos);
    obs_[ObsLayout::kVelocityHistory + j] =
        noisy(jm.velocity(j, 1), config_.noise.joint_vel);
    obs_[ObsLayout::kVelocityHistory + 12 + j] =
        noisy(jm.velocity(j, 2), config_.noise.joint_vel);
  }
  obs_.segment<12>(ObsLayout::kTargetHistory) = targets_t1_;
  obs_.segment<12>(ObsLayout::kTargetHistory + 12) = targets_t2_;
}

void Environment::assemble_privileged() {
  const ContactReport& c = sim_.contacts();
  for (int i = 0; i < kNumLegs; ++i) {
    const Vec3 foot = sim_.foot_position_world(static_cast<LegIndex>(i));
    const Vec3 n = map_.normal_at(foot.x(), foot.y());
    priv_.segment<3>(PrivLayout::kFootNormals + 3 * i) = n;
    const auto scan = map_.height_scan(foot.x(), foot.y());
    for (int k = 0; k < kScanPointsPerFoot; ++k) {
      priv_[PrivLayout::kHeightScans + 9 * i + k] = scan[k] - foot.z();
    }
    priv_[PrivLayout::kContactForces + i] = c.foot_force[i].norm();
    priv_[PrivLayout::kFootContacts + i] = c.foot_contact[i] ? 1.0 : 0.0;
    priv_[PrivLayout::kThighContacts + i] = c.thigh_contact[i] ? 1.0 : 0.0;
    priv_[PrivLayout::kShankContacts + i] = c.shank_contact[i] ? 1.0 : 0.0;
    priv_[PrivLayout::kFrictions + i] = friction_.foot_friction[i];
  }
  priv_.segment<3>(PrivLayout::kExternalForce) =
      config_.disturbance.at(sim_.state().time);
}

bool Environment::check_termination() const {
  const ContactReport& c = sim_.contacts();
  if (c.base_contact) return true;
  const Vec3 rpy = sim_.state().rpy();
  const double limit = 75.0 * kPi / 180.0;
  if (std::abs(rpy.x()) > limit || std::abs(rpy.y()) > limit) return true;
  const Vec3 p = sim_.state().base_position;
  if (p.z() < map_.height_at(p.x(), p.y())) return true;
  return false;
}

Environment::StepResult Environment::step(const Action& raw_action) {
  StepResult result;
  if (done_) {
    result.done = true;
    return result;
  }

  // Record h_t before advancing (histories exclude the current step).
  h_log_.push_back(proprio_from_observation(obs_));

  const ScaledAction scaled = scale_action(raw_action, config_.action_scales);

  mode_ = update_mode(mode_, command_, sim_.state().base_lin_vel.norm(),
                      config_.control_dt);
  phase_.base_frequency = mode_.base_frequency(config_.ftg);
  phase_.frequency_offsets = scaled.frequency_offsets;
  phase_ = advance_phase(phase_, config_.control_dt);

  const auto targets_h =
      compose_targets(phase_, scaled.residuals, config_.ftg, model_);
  targets_t2_ = targets_t1_;
  targets_t1_ = targets_t_;
  for (int i = 0; i < kNumLegs; ++i) targets_t_.segment<3>(3 * i) = targets_h[i];

  joint_targets_ = solve_joint_targets(targets_h);
  const StepStatus status =
      sim_.advance(config_.control_dt, joint_targets_, config_.disturbance);

  ++steps_;
  const bool diverged = status == StepStatus::Diverged;
  const bool terminated = diverged || check_termination();
  done_ = terminated || steps_ >= config_.max_steps;

  // Reward and label from the resulting state.
  const SimState& s = sim_.state();
  const Mat3 r = s.rotation();
  const Vec3 v_b = r.transpose() * s.base_lin_vel;
  const Vec3 w_b = r.transpose() * s.base_ang_vel;

  RewardInputs in;
  in.command = command_;
  in.base_lin_vel_xy = v_b.head<2>();
  in.base_lin_vel_z = v_b.z();
  in.base_ang_vel = w_b;
  in.phase = phase_.phase;
  for (int i = 0; i < kNumLegs; ++i) {
    const Vec3 foot = sim_.foot_position_world(static_cast<LegIndex>(i));
    in.foot_height[i] = foot.z();
    const auto scan = map_.height_scan(foot.x(), foot.y());
    double top = scan[0];
    for (double v : scan) top = std::max(top, v);
    in.max_scan_height[i] = top;
  }
  in.body_contact_count = sim_.contacts().body_contact_count();
  in.targets_t = targets_t_;
  in.targets_t1 = targets_t1_;
  in.targets_t2 = targets_t2_;
  in.torque = sim_.applied_torque();

  result.terms = compute_reward(in);
  result.reward = result.terms.total();
  result.v_pr = projected_velocity(v_b.head<2>(), command_);
  result.label = label_transition(result.v_pr, terminated);
  result.done = done_;

  assemble_observation();
  assemble_privileged();
  return result;
}

MatX Environment::proprio_history(int length) const {
  MatX h = MatX::Zero(kProprioDim, length);
  const int available = static_cast<int>(h_log_.size());
  for (int i = 0; i < length; ++i) {
    // Column `length-1` is h_{t-1}, column 0 is h_{t-length}.
    const int back = length - i;
    const int idx = available - back;
    if (idx >= 0) h.col(i) = h_log_[idx];
  }
  return h;
}

RolloutResult rollout(Environment& env, Policy& policy, int max_steps,
                      bool record_transitions) {
  RolloutResult out;
  policy.begin_episode();
  env.reset();
  int labels = 0;
  double v_sum = 0.0;
  int n = 0;
  const int limit = std::min(max_steps, env.config().max_steps);
  for (int t = 0; t < limit; ++t) {
    Transition tr;
    tr.obs = env.observation();
    tr.privileged = env.privileged();
    tr.action = policy.act(tr.obs, tr.privileged, env);
    const auto res = env.step(tr.action);
    tr.reward = res.reward;
    tr.terms = res.terms;
    tr.next_obs = env.observation();
    tr.done = res.done;
    tr.label = res.label;
    tr.v_pr = res.v_pr;

    labels += res.label;
    v_sum += res.v_pr;
    out.total_reward += res.reward;
    ++n;
    if (record_transitions) out.transitions.push_back(std::move(tr));
    if (res.done) {
      out.terminated = env.steps_taken() < env.config().max_steps;
      break;
    }
  }
  if (n > 0) {
    out.traversability = static_cast<double>(labels) / n;
    out.mean_v_pr = v_sum / n;
  }
  return out;
}

}  // namespace blindgait
