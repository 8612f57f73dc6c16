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

#include "blindgait/training.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include "blindgait/checkpoint.hpp"

namespace blindgait {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("BLINDGAIT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

Adam::Adam(ParamSet* params, const AdamConfig& config)
    : params_(params), config_(config) {
  m_ = VecX::Zero(params->total_size());
  v_ = VecX::Zero(params->total_size());
}

double Adam::current_lr() const {
  return config_.lr *
         std::pow(config_.decay_base,
                  static_cast<double>(t_) / config_.decay_interval);
}

void Adam::step() {
  VecX g = params_->flatten_grad();
  VecX theta = params_->flatten();
  if (config_.weight_decay > 0.0) g += config_.weight_decay * theta;
  const double lr = current_lr();
  ++t_;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * g;
  v_ = config_.beta2 * v_.array().matrix() +
       (1.0 - config_.beta2) * g.cwiseProduct(g);
  const double bc1 = 1.0 - std::pow(config_.beta1, t_);
  const double bc2 = 1.0 - std::pow(config_.beta2, t_);
  const VecX mhat = m_ / bc1;
  const VecX vhat = v_ / bc2;
  theta -= lr * mhat.cwiseQuotient(vhat.cwiseSqrt().array().matrix() +
                                   VecX::Constant(theta.size(), config_.eps));
  params_->unflatten(theta);
}

double RolloutBatch::mean_episode_length() const {
  if (episodes.empty()) return 0.0;
  double total = 0.0;
  for (const Episode& e : episodes) total += e.length;
  return total / episodes.size();
}

AdvantageResult estimate_advantages(const RolloutBatch& batch,
                                    const ValueNet& value, double gamma,
                                    double lambda) {
  AdvantageResult out;
  const int n = batch.size();
  out.advantages = VecX::Zero(n);
  out.returns = VecX::Zero(n);
  const VecX values = value.infer(batch.obs, batch.privileged);

  for (const RolloutBatch::Episode& ep : batch.episodes) {
    double bootstrap = 0.0;
    if (!ep.terminated) {
      bootstrap = value.infer(ep.final_obs, ep.final_privileged)(0);
    }
    double gae = 0.0;
    double next_value = bootstrap;
    for (int t = ep.length - 1; t >= 0; --t) {
      const int i = ep.start + t;
      const double delta = batch.rewards[i] + gamma * next_value - values[i];
      gae = delta + gamma * lambda * gae;
      out.advantages[i] = gae;
      next_value = values[i];
    }
    double ret = bootstrap;
    for (int t = ep.length - 1; t >= 0; --t) {
      const int i = ep.start + t;
      ret = batch.rewards[i] + gamma * ret;
      out.returns[i] = ret;
    }
  }

  const double mean_adv = out.advantages.mean();
  const double std_adv = std::sqrt(
      (out.advantages.array() - mean_adv).square().sum() / std::max(1, n - 1));
  out.advantages = (out.advantages.array() - mean_adv) / std::max(1e-8, std_adv);
  return out;
}

namespace {

/// Per-state log densities under the current parameter values (no tape).
VecX batch_logprob(const MatX& actions, const MatX& means, const VecX& log_std) {
  const Eigen::ArrayXd inv_std = (-log_std.array()).exp();
  const int n = static_cast<int>(actions.cols());
  VecX out(n);
  const double norm =
      -log_std.sum() - 0.5 * actions.rows() * std::log(kTwoPi);
  for (int i = 0; i < n; ++i) {
    const Eigen::ArrayXd z = (actions.col(i) - means.col(i)).array() * inv_std;
    out[i] = -0.5 * z.square().sum() + norm;
  }
  return out;
}

double batch_mean_kl(const MatX& mean_old, const VecX& log_std_old,
                     const MatX& mean_new, const VecX& log_std_new) {
  const int n = static_cast<int>(mean_old.cols());
  const Eigen::ArrayXd var_old = (2.0 * log_std_old.array()).exp();
  const Eigen::ArrayXd inv_var_new = (-2.0 * log_std_new.array()).exp();
  const double fixed =
      (log_std_new.array() - log_std_old.array() - 0.5).sum() +
      0.5 * (var_old * inv_var_new).sum();
  double quad = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::ArrayXd d = (mean_old.col(i) - mean_new.col(i)).array();
    quad += 0.5 * (d.square() * inv_var_new).sum();
  }
  return fixed + quad / n;
}

double surrogate_value(const TeacherNet& teacher, const MatX& obs,
                       const MatX& priv, const MatX& actions,
                       const VecX& logp_old, const VecX& advantages) {
  MatX means;
  teacher.infer(obs, priv, nullptr, &means);
  const VecX logp = batch_logprob(actions, means, teacher.log_std_value());
  return ((logp - logp_old).array().exp() * advantages.array()).mean();
}

/// Gradient of the mean KL(old || new) at the current parameter values,
/// evaluated on the given states.
VecX kl_gradient(TeacherNet* teacher, const MatX& obs, const MatX& priv,
                 const MatX& mean_old, const VecX& log_std_old) {
  teacher->params().zero_grad();
  ad::Var obs_v = ad::constant(obs);
  ad::Var priv_v = ad::constant(priv);
  const auto taped = teacher->forward(obs_v, priv_v);
  ad::Var kl = ad::gaussian_kl(mean_old, log_std_old, taped.mean,
                               teacher->log_std());
  ad::backward(kl);
  return teacher->params().flatten_grad();
}

}  // namespace

TrpoStats trpo_update(TeacherNet* teacher, ValueNet* value,
                      const RolloutBatch& batch, const TrpoConfig& config) {
  TrpoStats stats;
  stats.steps = batch.size();
  stats.episodes = static_cast<int>(batch.episodes.size());
  if (batch.size() == 0) return stats;
  stats.mean_reward = batch.rewards.mean();
  stats.mean_v_pr = batch.v_pr.mean();
  stats.mean_episode_length = batch.mean_episode_length();
  {
    double tr = 0.0;
    for (const auto& ep : batch.episodes) tr += ep.traversability;
    stats.mean_traversability = tr / std::max<size_t>(1, batch.episodes.size());
  }

  const AdvantageResult adv =
      estimate_advantages(batch, *value, config.discount, config.gae_lambda);

  ParamSet& params = teacher->params();
  const VecX theta0 = params.flatten();

  // Old-policy statistics.
  MatX mean_old;
  teacher->infer(batch.obs, batch.privileged, nullptr, &mean_old);
  const VecX log_std_old = teacher->log_std_value();
  const VecX logp_old = batch_logprob(batch.actions, mean_old, log_std_old);
  const double surr_old = adv.advantages.mean();

  // Surrogate gradient over the full batch.
  params.zero_grad();
  {
    ad::Var obs_v = ad::constant(batch.obs);
    ad::Var priv_v = ad::constant(batch.privileged);
    const auto taped = teacher->forward(obs_v, priv_v);
    ad::Var logp =
        ad::gaussian_logprob(batch.actions, taped.mean, teacher->log_std());
    ad::Var ratio = ad::exp_op(ad::sub(logp, ad::constant(logp_old.transpose())));
    ad::Var weighted =
        ad::mul(ratio, ad::constant(adv.advantages.transpose()));
    ad::Var surr = ad::mean(weighted);
    ad::backward(surr);
  }
  const VecX g = params.flatten_grad();

  // Value regression runs regardless of whether the policy step is accepted.
  auto value_update = [&]() {
    Adam adam(&value->params(), AdamConfig{config.value_lr});
    MatX input(kObservationDim + kPrivilegedDim, batch.size());
    input.topRows(kObservationDim) = batch.obs;
    input.bottomRows(kPrivilegedDim) = batch.privileged;
    Rng shuffle_rng(0x8f1bbcdcbfa53e0bULL ^ batch.size());
    std::vector<int> idx(batch.size());
    for (int i = 0; i < batch.size(); ++i) idx[i] = i;
    for (int epoch = 0; epoch < config.value_epochs; ++epoch) {
      for (int i = batch.size() - 1; i > 0; --i) {
        std::swap(idx[i], idx[shuffle_rng.uniform_int(0, i)]);
      }
      for (int at = 0; at < batch.size(); at += config.value_minibatch) {
        const int nb = std::min(config.value_minibatch, batch.size() - at);
        MatX mb(input.rows(), nb);
        MatX targets(1, nb);
        for (int k = 0; k < nb; ++k) {
          mb.col(k) = input.col(idx[at + k]);
          targets(0, k) = adv.returns[idx[at + k]];
        }
        value->params().zero_grad();
        ad::Var pred = value->forward(ad::constant(mb));
        ad::Var err = ad::sub(pred, ad::constant(targets));
        ad::Var loss = ad::mean(ad::square(err));
        ad::backward(loss);
        adam.step();
      }
    }
  };

  const double gnorm = g.norm();
  if (!std::isfinite(gnorm) || gnorm < 1e-12) {
    // Nothing to do (e.g. all-zero advantages); parameters stay untouched.
    value_update();
    return stats;
  }

  // Fisher-vector products: central finite differences of the KL gradient
  // on a subsampled state set, plus damping.
  const int stride = std::max(1, config.fvp_subsample);
  const int n_sub = (batch.size() + stride - 1) / stride;
  MatX obs_sub(kObservationDim, n_sub), priv_sub(kPrivilegedDim, n_sub),
      mean_old_sub(kActionDim, n_sub);
  for (int i = 0, k = 0; i < batch.size(); i += stride, ++k) {
    obs_sub.col(k) = batch.obs.col(i);
    priv_sub.col(k) = batch.privileged.col(i);
    mean_old_sub.col(k) = mean_old.col(i);
  }

  auto fvp = [&](const VecX& v) -> VecX {
    const double vnorm = v.norm();
    if (vnorm < 1e-300) return config.cg_damping * v;
    const VecX vn = v / vnorm;
    const double eps = config.fd_step;
    params.unflatten(theta0 + eps * vn);
    const VecX gp = kl_gradient(teacher, obs_sub, priv_sub, mean_old_sub,
                                log_std_old);
    params.unflatten(theta0 - eps * vn);
    const VecX gm = kl_gradient(teacher, obs_sub, priv_sub, mean_old_sub,
                                log_std_old);
    params.unflatten(theta0);
    return (vnorm / (2.0 * eps)) * (gp - gm) + config.cg_damping * v;
  };

  // Conjugate gradient on (F + damping I) x = g.
  VecX x = VecX::Zero(g.size());
  VecX r = g;
  VecX p = g;
  double rs = r.squaredNorm();
  const double rs0 = rs;
  bool cg_ok = rs > 0.0;
  for (int it = 0; it < config.cg_iterations && rs > 1e-10 * rs0; ++it) {
    const VecX z = fvp(p);
    const double pz = p.dot(z);
    if (!std::isfinite(pz) || pz <= 0.0) {
      cg_ok = x.norm() > 0.0;
      break;
    }
    const double alpha = rs / pz;
    x += alpha * p;
    r -= alpha * z;
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }

  if (!cg_ok || !x.allFinite()) {
    params.unflatten(theta0);
    stats.accepted = false;
    value_update();
    return stats;
  }

  const double shs = x.dot(fvp(x));
  if (shs <= 0.0 || !std::isfinite(shs)) {
    params.unflatten(theta0);
    stats.accepted = false;
  } else {
    const VecX full_step = std::sqrt(2.0 * config.kl_threshold / shs) * x;
    double alpha = 1.0;
    for (int ls = 0; ls < config.line_search_steps; ++ls, alpha *= 0.5) {
      params.unflatten(theta0 + alpha * full_step);
      MatX mean_new;
      teacher->infer(batch.obs, batch.privileged, nullptr, &mean_new);
      const double kl = batch_mean_kl(mean_old, log_std_old, mean_new,
                                      teacher->log_std_value());
      const double surr = ((batch_logprob(batch.actions, mean_new,
                                          teacher->log_std_value()) -
                            logp_old)
                               .array()
                               .exp() *
                           adv.advantages.array())
                              .mean();
      if (std::isfinite(kl) && std::isfinite(surr) &&
          kl <= config.kl_slack * config.kl_threshold && surr >= surr_old) {
        stats.accepted = true;
        stats.kl = kl;
        stats.surrogate_improvement = surr - surr_old;
        break;
      }
    }
    if (!stats.accepted) {
      params.unflatten(theta0);  // bit-identical restore
    }
  }
  value_update();
  return stats;
}

Action StochasticTeacherPolicy::act(const VecX& obs, const VecX& privileged,
                                    const Environment&) {
  MatX mean;
  teacher_->infer(obs, privileged, nullptr, &mean);
  const VecX log_std = teacher_->log_std_value();
  Action a;
  for (int i = 0; i < kActionDim; ++i) {
    a[i] = mean(i, 0) + std::exp(log_std[i]) * rng_.normal();
  }
  return a;
}

Action MeanTeacherPolicy::act(const VecX& obs, const VecX& privileged,
                              const Environment&) {
  MatX mean;
  teacher_->infer(obs, privileged, nullptr, &mean);
  return mean.col(0);
}

Action TcnPolicy::act(const VecX& obs, const VecX&, const Environment& env) {
  const MatX history = env.proprio_history(net_->spec().history_length);
  MatX action;
  net_->infer(obs, history, 1, nullptr, &action);
  return action.col(0);
}

Action GruPolicy::act(const VecX& obs, const VecX&, const Environment& env) {
  const MatX history = env.proprio_history(1);
  VecX action;
  net_->infer(obs, history.col(0), &state_, nullptr, &action);
  return action;
}

RolloutBatch collect_batch(const RobotModel& model, const EnvConfig& env_config,
                           const TeacherNet& teacher, const CollectionPlan& plan,
                           int threads) {
  const int n_threads = std::min(resolve_threads(threads), plan.episodes);

  struct EpisodeBuffer {
    std::vector<VecX> obs, priv;
    std::vector<Action> actions;
    std::vector<double> rewards, v_pr;
    bool terminated = false;
    VecX final_obs, final_priv;
    double traversability = 0.0;
  };
  std::vector<EpisodeBuffer> buffers(plan.episodes);

  std::atomic<int> next{0};
  auto worker = [&]() {
    Environment env(model, env_config, plan.seed);
    StochasticTeacherPolicy policy(&teacher);
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= plan.episodes) break;
      const uint64_t episode_id = plan.episode_base + i;
      env.reseed(plan.seed, episode_id);
      if (plan.terrains) env.set_terrain_params((*plan.terrains)[i]);
      policy.reseed(splitmix64(plan.seed ^ (episode_id * 0xd6e8feb86659fd93ULL)));

      EpisodeBuffer& buf = buffers[i];
      env.reset();
      int labels = 0;
      for (int t = 0; t < plan.max_episode_length; ++t) {
        buf.obs.push_back(env.observation());
        buf.priv.push_back(env.privileged());
        const Action a = policy.act(buf.obs.back(), buf.priv.back(), env);
        buf.actions.push_back(a);
        const auto res = env.step(a);
        buf.rewards.push_back(res.reward);
        buf.v_pr.push_back(res.v_pr);
        labels += res.label;
        if (res.done) {
          buf.terminated = env.steps_taken() < env.config().max_steps;
          break;
        }
      }
      buf.final_obs = env.observation();
      buf.final_priv = env.privileged();
      buf.traversability =
          buf.rewards.empty()
              ? 0.0
              : static_cast<double>(labels) / static_cast<double>(buf.rewards.size());
    }
  };

  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  int total = 0;
  for (const EpisodeBuffer& b : buffers) total += static_cast<int>(b.obs.size());

  RolloutBatch batch;
  batch.obs.resize(kObservationDim, total);
  batch.privileged.resize(kPrivilegedDim, total);
  batch.actions.resize(kActionDim, total);
  batch.rewards.resize(total);
  batch.v_pr.resize(total);
  int at = 0;
  for (const EpisodeBuffer& b : buffers) {
    RolloutBatch::Episode ep;
    ep.start = at;
    ep.length = static_cast<int>(b.obs.size());
    ep.terminated = b.terminated;
    ep.final_obs = b.final_obs;
    ep.final_privileged = b.final_priv;
    ep.traversability = b.traversability;
    for (size_t t = 0; t < b.obs.size(); ++t, ++at) {
      batch.obs.col(at) = b.obs[t];
      batch.privileged.col(at) = b.priv[t];
      batch.actions.col(at) = b.actions[t];
      batch.rewards[at] = b.rewards[t];
      batch.v_pr[at] = b.v_pr[t];
    }
    batch.episodes.push_back(std::move(ep));
  }
  return batch;
}

namespace {

VecX uniform_terrain_params(const TerrainParamSpace& space, Rng& rng) {
  VecX v(space.dims());
  for (int d = 0; d < space.dims(); ++d) {
    v[d] = rng.uniform(space.lower[d], space.upper[d]);
  }
  return v;
}

}  // namespace

TeacherTrainResult train_teacher(const TeacherTrainConfig& config) {
  Rng rng(config.seed);
  TeacherTrainResult result{TeacherNet::create(rng), ValueNet::create(rng), {}};

  std::optional<Curriculum> curriculum;
  if (config.use_curriculum && !config.terrain_types.empty()) {
    curriculum.emplace(config.terrain_types, config.curriculum,
                       splitmix64(config.seed ^ 0xc13fa9a902a6328fULL));
  }

  std::ofstream metrics;
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    metrics.open(config.out_dir + "/metrics.csv");
    metrics << "iteration,mean_reward,mean_episode_length,mean_v_pr,kl,"
               "surrogate_improvement,accepted,traversability,episodes,steps\n";
  }

  const int episodes_per_iter = std::max(
      1, (config.trpo.batch_size + config.trpo.max_episode_length - 1) /
             config.trpo.max_episode_length);

  EnvConfig env_config = config.env;
  env_config.max_steps = config.trpo.max_episode_length;

  uint64_t episode_base = 0;
  Rng terrain_rng(splitmix64(config.seed ^ 0x2545f4914f6cdd1dULL));

  for (int iter = 0; iter < config.iterations; ++iter) {
    CollectionPlan plan;
    plan.episodes = episodes_per_iter;
    plan.max_episode_length = config.trpo.max_episode_length;
    plan.seed = config.seed;
    plan.episode_base = episode_base;

    std::vector<Curriculum::Assignment> assignments;
    if (!config.terrain_types.empty()) {
      std::vector<TerrainParams> terrains(plan.episodes);
      for (int i = 0; i < plan.episodes; ++i) {
        const uint64_t episode_seed =
            splitmix64(config.seed ^ ((episode_base + i) * 0xbf58476d1ce4e5b9ULL));
        if (curriculum) {
          auto a = curriculum->next_assignment(episode_seed);
          terrains[i] = a.params;
          assignments.push_back(a);
        } else {
          TerrainParams p;
          p.type = config.terrain_types[terrain_rng.uniform_int(
              0, static_cast<int>(config.terrain_types.size()) - 1)];
          p.params = uniform_terrain_params(param_space(p.type), terrain_rng);
          p.seed = episode_seed;
          terrains[i] = p;
        }
      }
      plan.terrains = std::move(terrains);
    }

    RolloutBatch batch = collect_batch(config.model, env_config, result.teacher,
                                       plan, config.threads);

    if (curriculum) {
      for (int i = 0; i < plan.episodes; ++i) {
        curriculum->record(assignments[i], batch.episodes[i].traversability);
      }
    }

    TrpoStats stats = trpo_update(&result.teacher, &result.value, batch,
                                  config.trpo);
    result.history.push_back(stats);

    if (metrics.is_open()) {
      metrics << iter << ',' << stats.mean_reward << ','
              << stats.mean_episode_length << ',' << stats.mean_v_pr << ','
              << stats.kl << ',' << stats.surrogate_improvement << ','
              << (stats.accepted ? 1 : 0) << ',' << stats.mean_traversability
              << ',' << stats.episodes << ',' << stats.steps << '\n';
      metrics.flush();
    }

    if (curriculum && curriculum->maybe_update(iter + 1) &&
        !config.out_dir.empty()) {
      curriculum->append_log(config.out_dir + "/curriculum.csv", iter + 1);
    }

    if (config.checkpoint_interval > 0 && !config.out_dir.empty() &&
        (iter + 1) % config.checkpoint_interval == 0) {
      save_teacher_checkpoint(
          config.out_dir + "/teacher_" + std::to_string(iter + 1) + ".ckpt",
          result.teacher);
    }

    episode_base += plan.episodes;
  }

  if (!config.out_dir.empty()) {
    save_teacher_checkpoint(config.out_dir + "/teacher.ckpt", result.teacher);
  }
  return result;
}

void save_teacher_checkpoint(const std::string& path, const TeacherNet& teacher) {
  const std::string metadata =
      "{\"arch\":\"teacher\",\"obs_dim\":121,\"priv_dim\":71,"
      "\"latent_dim\":64,\"action_dim\":16}";
  checkpoint::save(path, teacher.params(), metadata);
}

TeacherNet load_teacher_checkpoint(const std::string& path) {
  Rng rng(0);
  TeacherNet teacher = TeacherNet::create(rng);
  checkpoint::load(path, &teacher.params());
  return teacher;
}

}  // namespace blindgait
