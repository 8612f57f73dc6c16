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

#ifndef BLINDGAIT_ANALYSIS_HPP_
#define BLINDGAIT_ANALYSIS_HPP_

#include <string>
#include <vector>

#include "blindgait/distill.hpp"

namespace blindgait {

struct DecoderTrainConfig {
  double lr = 1.0e-4;
  double decay_base = 0.99;
  int decay_interval = 100;
  int batch_size = 2000;   // 20000 at full scale
  int minibatches = 2;
  int epochs = 10;
  int iterations = 100;    // 1000 at full scale
  double weight_decay = 1.0e-4;
};

/// States visited by the (frozen) student, with its latents and the ground-
/// truth privileged vectors.
struct DecoderDataset {
  MatX obs;         // 121 x N
  MatX latent;      // 64 x N
  MatX privileged;  // 71 x N

  int size() const { return static_cast<int>(obs.cols()); }
};

DecoderDataset decoder_collect(const RobotModel& model, const EnvConfig& env_config,
                               const TcnNet& student, int steps, uint64_t seed,
                               const std::vector<TerrainParams>* terrains = nullptr);

/// Negative Gaussian log-likelihood for the regression dimensions plus
/// cross-entropy for the contact bits, with L2 weight decay handled by the
/// optimizer. Returns the final epoch's mean loss. The student is never
/// touched (the dataset is precomputed).
double train_decoder(DecoderNet* decoder, const DecoderDataset& data,
                     const DecoderTrainConfig& config, Rng& rng);

struct DecoderEval {
  double regression_nll = 0.0;
  double contact_accuracy = 0.0;
};
DecoderEval decoder_evaluate(const DecoderNet& decoder, const DecoderDataset& data);

/// Saliency of one foot-height output with respect to the proprioceptive
/// history: per time column, the summed absolute gradient over channels.
/// `foot` selects which leg's vertical residual output is probed.
VecX saliency(const TcnNet& student, const VecX& obs, const MatX& history,
              LegIndex foot);

/// Mechanical cost of transport: time-averaged positive actuator power over
/// weight times speed. torque and joint_vel are 12 x T; throws when speed
/// is not positive.
double mechanical_cot(const MatX& torque, const MatX& joint_vel, double weight,
                      double speed);

}  // namespace blindgait

#endif  // BLINDGAIT_ANALYSIS_HPP_
