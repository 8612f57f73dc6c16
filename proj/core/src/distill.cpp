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

#include "blindgait/distill.hpp"

#include <filesystem>
#include <fstream>

#include "blindgait/checkpoint.hpp"

namespace blindgait {

void DaggerDataset::append(const DaggerDataset& other) {
  if (size() == 0) {
    *this = other;
    return;
  }
  const int n0 = size();
  const int n1 = other.size();
  MatX obs2(kObservationDim, n0 + n1);
  obs2 << obs, other.obs;
  obs = std::move(obs2);
  MatX hist2(kProprioDim, (n0 + n1) * static_cast<Eigen::Index>(history_length));
  hist2 << history, other.history;
  history = std::move(hist2);
  MatX lat2(kLatentDim, n0 + n1);
  lat2 << teacher_latent, other.teacher_latent;
  teacher_latent = std::move(lat2);
  MatX act2(kActionDim, n0 + n1);
  act2 << teacher_action, other.teacher_action;
  teacher_action = std::move(act2);
  for (int s : other.episode_starts) episode_starts.push_back(s + n0);
}

void DaggerDataset::subsample(int max_size, Rng& rng) {
  const int n = size();
  if (n <= max_size) return;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.uniform_int(0, i)]);
  idx.resize(max_size);

  DaggerDataset out;
  out.history_length = history_length;
  out.obs.resize(kObservationDim, max_size);
  out.history.resize(kProprioDim,
                     static_cast<Eigen::Index>(max_size) * history_length);
  out.teacher_latent.resize(kLatentDim, max_size);
  out.teacher_action.resize(kActionDim, max_size);
  for (int k = 0; k < max_size; ++k) {
    out.obs.col(k) = obs.col(idx[k]);
    out.history.middleCols(static_cast<Eigen::Index>(k) * history_length,
                           history_length) =
        history.middleCols(static_cast<Eigen::Index>(idx[k]) * history_length,
                           history_length);
    out.teacher_latent.col(k) = teacher_latent.col(idx[k]);
    out.teacher_action.col(k) = teacher_action.col(idx[k]);
  }
  out.episode_starts.clear();
  *this = std::move(out);
}

DaggerDataset dagger_collect(const RobotModel& model, const EnvConfig& env_config,
                             const TeacherNet& teacher, Policy& student_policy,
                             int steps, int history_length, uint64_t seed,
                             uint64_t episode_base,
                             const std::vector<TerrainParams>* terrains) {
  Environment env(model, env_config, seed);
  std::vector<VecX> obs_rows, latent_rows, action_rows;
  std::vector<MatX> hist_rows;
  std::vector<int> starts;

  uint64_t episode = episode_base;
  while (static_cast<int>(obs_rows.size()) < steps) {
    env.reseed(seed, episode);
    if (terrains && !terrains->empty()) {
      env.set_terrain_params(
          (*terrains)[episode % terrains->size()]);
    }
    starts.push_back(static_cast<int>(obs_rows.size()));
    student_policy.begin_episode();
    env.reset();
    for (int t = 0; t < env.config().max_steps; ++t) {
      const VecX obs = env.observation();
      const VecX priv = env.privileged();
      // Teacher labels for the visited state.
      MatX latent, mean;
      teacher.infer(obs, priv, &latent, &mean);
      obs_rows.push_back(obs);
      hist_rows.push_back(env.proprio_history(history_length));
      latent_rows.push_back(latent.col(0));
      action_rows.push_back(mean.col(0));

      const Action a = student_policy.act(obs, priv, env);
      const auto res = env.step(a);
      if (res.done || static_cast<int>(obs_rows.size()) >= steps) break;
    }
    ++episode;
  }

  DaggerDataset data;
  const int n = static_cast<int>(obs_rows.size());
  data.history_length = history_length;
  data.obs.resize(kObservationDim, n);
  data.history.resize(kProprioDim, static_cast<Eigen::Index>(n) * history_length);
  data.teacher_latent.resize(kLatentDim, n);
  data.teacher_action.resize(kActionDim, n);
  for (int i = 0; i < n; ++i) {
    data.obs.col(i) = obs_rows[i];
    data.history.middleCols(static_cast<Eigen::Index>(i) * history_length,
                            history_length) = hist_rows[i];
    data.teacher_latent.col(i) = latent_rows[i];
    data.teacher_action.col(i) = action_rows[i];
  }
  data.episode_starts = std::move(starts);
  return data;
}

namespace {

DistillEpochStats tcn_batch_stats(const TcnNet& student, const DaggerDataset& data,
                                  const std::vector<int>& idx, int from, int count,
                                  bool latent_loss) {
  const int hl = data.history_length;
  MatX obs(kObservationDim, count);
  MatX hist(kProprioDim, static_cast<Eigen::Index>(count) * hl);
  MatX target_a(kActionDim, count), target_l(kLatentDim, count);
  for (int k = 0; k < count; ++k) {
    const int i = idx[from + k];
    obs.col(k) = data.obs.col(i);
    hist.middleCols(static_cast<Eigen::Index>(k) * hl, hl) =
        data.history.middleCols(static_cast<Eigen::Index>(i) * hl, hl);
    target_a.col(k) = data.teacher_action.col(i);
    target_l.col(k) = data.teacher_latent.col(i);
  }
  MatX latent, action;
  student.infer(obs, hist, count, &latent, &action);
  DistillEpochStats s;
  s.action_mse = (action - target_a).squaredNorm() / count;
  s.latent_mse = (latent - target_l).squaredNorm() / count;
  s.loss = s.action_mse + (latent_loss ? s.latent_mse : 0.0);
  return s;
}

}  // namespace

DistillEpochStats distill_epoch(TcnNet* student, const DaggerDataset& data,
                                Adam* adam, const DistillConfig& config,
                                Rng& rng) {
  const int n = data.size();
  const int hl = data.history_length;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(idx[i], idx[rng.uniform_int(0, i)]);

  const int mb = std::max(1, n / std::max(1, config.minibatches));
  DistillEpochStats total;
  int batches = 0;
  for (int at = 0; at < n; at += mb) {
    const int count = std::min(mb, n - at);
    MatX obs(kObservationDim, count);
    MatX hist(kProprioDim, static_cast<Eigen::Index>(count) * hl);
    MatX target_a(kActionDim, count), target_l(kLatentDim, count);
    for (int k = 0; k < count; ++k) {
      const int i = idx[at + k];
      obs.col(k) = data.obs.col(i);
      hist.middleCols(static_cast<Eigen::Index>(k) * hl, hl) =
          data.history.middleCols(static_cast<Eigen::Index>(i) * hl, hl);
      target_a.col(k) = data.teacher_action.col(i);
      target_l.col(k) = data.teacher_latent.col(i);
    }
    student->params().zero_grad();
    const auto taped =
        student->forward(ad::constant(obs), ad::constant(hist), count);
    ad::Var err_a = ad::sub(taped.action, ad::constant(target_a));
    ad::Var loss = ad::scale(ad::sum(ad::square(err_a)), 1.0 / count);
    if (config.latent_loss) {
      ad::Var err_l = ad::sub(taped.latent, ad::constant(target_l));
      loss = ad::add(loss, ad::scale(ad::sum(ad::square(err_l)), 1.0 / count));
    }
    ad::backward(loss);
    adam->step();

    total.loss += loss.value()(0, 0);
    total.action_mse += (taped.action.value() - target_a).squaredNorm() / count;
    total.latent_mse += (taped.latent.value() - target_l).squaredNorm() / count;
    ++batches;
  }
  total.loss /= batches;
  total.action_mse /= batches;
  total.latent_mse /= batches;
  return total;
}

DistillEpochStats distill_evaluate(const TcnNet& student,
                                   const DaggerDataset& data) {
  std::vector<int> idx(data.size());
  for (int i = 0; i < data.size(); ++i) idx[i] = i;
  return tcn_batch_stats(student, data, idx, 0, data.size(), true);
}

DistillEpochStats truncated_bptt_epoch(GruNet* student, const DaggerDataset& data,
                                       Adam* adam, const DistillConfig& config) {
  DistillEpochStats total;
  int windows = 0;
  const int n = data.size();
  const ad::GruWeights weights = student->taped_weights();

  for (size_t e = 0; e < data.episode_starts.size(); ++e) {
    const int start = data.episode_starts[e];
    const int end = e + 1 < data.episode_starts.size()
                        ? data.episode_starts[e + 1]
                        : n;
    VecX hidden_carry = VecX::Zero(student->hidden_dim());
    int at = start;
    while (at < end) {
      const int len = std::min(config.bptt_length, end - at);
      // Gradients are truncated here: the carried state enters as a leaf.
      ad::Var hidden = ad::constant(hidden_carry);
      ad::Var loss;
      for (int t = 0; t < len; ++t) {
        const int i = at + t;
        // The GRU consumes the h stream: the newest history column.
        const VecX h_col = data.history.col(
            static_cast<Eigen::Index>(i + 1) * data.history_length - 1);
        hidden = ad::gru_step(weights, ad::constant(h_col), hidden);
        ad::Var latent = student->taped_latent(hidden);
        ad::Var action =
            student->taped_action(ad::constant(data.obs.col(i)), latent);
        ad::Var err_a = ad::sub(action, ad::constant(data.teacher_action.col(i)));
        ad::Var step_loss = ad::sum(ad::square(err_a));
        total.action_mse += err_a.value().squaredNorm();
        if (config.latent_loss) {
          ad::Var err_l =
              ad::sub(latent, ad::constant(data.teacher_latent.col(i)));
          step_loss = ad::add(step_loss, ad::sum(ad::square(err_l)));
          total.latent_mse += err_l.value().squaredNorm();
        }
        loss = loss.defined() ? ad::add(loss, step_loss) : step_loss;
      }
      loss = ad::scale(loss, 1.0 / len);
      student->params().zero_grad();
      ad::backward(loss);
      adam->step();
      total.loss += loss.value()(0, 0);
      ++windows;
      hidden_carry = hidden.value().col(0);
      at += len;
    }
  }
  if (windows > 0) total.loss /= windows;
  if (n > 0) {
    total.action_mse /= n;
    total.latent_mse /= n;
  }
  return total;
}

DistillEpochStats gru_evaluate(const GruNet& student, const DaggerDataset& data) {
  DistillEpochStats s;
  const int n = data.size();
  for (size_t e = 0; e < data.episode_starts.size(); ++e) {
    const int start = data.episode_starts[e];
    const int end = e + 1 < data.episode_starts.size()
                        ? data.episode_starts[e + 1]
                        : n;
    GruNet::State state = student.initial_state();
    for (int i = start; i < end; ++i) {
      const VecX h_col = data.history.col(
          static_cast<Eigen::Index>(i + 1) * data.history_length - 1);
      VecX latent, action;
      student.infer(data.obs.col(i), h_col, &state, &latent, &action);
      s.action_mse += (action - data.teacher_action.col(i)).squaredNorm();
      s.latent_mse += (latent - data.teacher_latent.col(i)).squaredNorm();
    }
  }
  if (n > 0) {
    s.action_mse /= n;
    s.latent_mse /= n;
    s.loss = s.action_mse + s.latent_mse;
  }
  return s;
}

StudentTrainResult train_student(const TeacherNet& teacher,
                                 const StudentTrainConfig& config) {
  Rng rng(splitmix64(config.seed ^ 0x94d049bb133111ebULL));
  TcnSpec spec = TcnSpec::variant(config.history_length);
  StudentTrainResult result{TcnNet::create(spec, rng), {}, {}};
  copy_shared_layers(teacher.params(), &result.student.params());

  AdamConfig adam_config;
  adam_config.lr = config.distill.lr;
  adam_config.decay_base = config.distill.decay_base;
  adam_config.decay_interval = config.distill.decay_interval;
  Adam adam(&result.student.params(), adam_config);

  std::ofstream log;
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    log.open(config.out_dir + "/student_metrics.csv");
    log << "round,loss,action_mse,latent_mse\n";
  }

  std::vector<TerrainParams> terrains;
  Rng terrain_rng(splitmix64(config.seed ^ 0x9e3779b97f4a7c15ULL));
  for (TerrainType type : config.terrain_types) {
    const TerrainParamSpace& space = param_space(type);
    for (int k = 0; k < 8; ++k) {
      TerrainParams p;
      p.type = type;
      p.params = VecX(space.dims());
      for (int d = 0; d < space.dims(); ++d) {
        p.params[d] = terrain_rng.uniform(space.lower[d], space.upper[d]);
      }
      p.seed = terrain_rng.next_u64();
      terrains.push_back(p);
    }
  }

  DaggerDataset aggregate;
  uint64_t episode_base = 0;
  for (int round = 0; round < config.distill.iterations; ++round) {
    TcnPolicy policy(&result.student);
    DaggerDataset fresh = dagger_collect(
        config.model, config.env, teacher, policy, config.distill.batch_size,
        config.history_length, config.seed, episode_base,
        terrains.empty() ? nullptr : &terrains);
    episode_base += 1000;

    if (round + 1 == config.distill.iterations) {
      result.holdout = fresh;  // final round held out from training
      break;
    }
    aggregate.append(fresh);
    // Cap the aggregated set so late rounds stay affordable.
    aggregate.subsample(config.distill.batch_size * 10, rng);

    DistillEpochStats last;
    for (int epoch = 0; epoch < config.distill.epochs; ++epoch) {
      last = distill_epoch(&result.student, aggregate, &adam, config.distill, rng);
    }
    result.history.push_back(last);
    if (log.is_open()) {
      log << round << ',' << last.loss << ',' << last.action_mse << ','
          << last.latent_mse << '\n';
      log.flush();
    }
  }

  if (!config.out_dir.empty()) {
    save_student_checkpoint(config.out_dir + "/student.ckpt", result.student);
  }
  return result;
}

void save_student_checkpoint(const std::string& path, const TcnNet& student) {
  const TcnSpec& spec = student.spec();
  std::string metadata = "{\"arch\":\"tcn\",\"history_length\":" +
                         std::to_string(spec.history_length) +
                         ",\"channels\":" + std::to_string(spec.channels) +
                         ",\"input_dim\":" + std::to_string(spec.input_dim) + "}";
  checkpoint::save(path, student.params(), metadata);
}

TcnNet load_student_checkpoint(const std::string& path) {
  const std::string metadata = checkpoint::read_metadata(path);
  // Minimal parse of the two fields we wrote.
  auto field = [&metadata](const std::string& key) -> int {
    const auto at = metadata.find("\"" + key + "\":");
    if (at == std::string::npos) {
      throw std::runtime_error("checkpoint metadata missing " + key);
    }
    return std::atoi(metadata.c_str() + at + key.size() + 3);
  };
  TcnSpec spec = TcnSpec::variant(field("history_length"));
  spec.channels = field("channels");
  spec.input_dim = field("input_dim");
  Rng rng(0);
  TcnNet net = TcnNet::create(spec, rng);
  checkpoint::load(path, &net.params());
  return net;
}

}  // namespace blindgait
