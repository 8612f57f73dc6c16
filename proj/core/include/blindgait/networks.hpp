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

#ifndef BLINDGAIT_NETWORKS_HPP_
#define BLINDGAIT_NETWORKS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "blindgait/autodiff.hpp"
#include "blindgait/environment.hpp"
#include "blindgait/rng.hpp"

namespace blindgait {

/// Named, ordered collection of trainable parameter matrices.
class ParamSet {
 public:
  ad::Var add(const std::string& name, MatX init);
  const ad::Var& get(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<std::pair<std::string, ad::Var>>& items() const {
    return items_;
  }

  int total_size() const;
  VecX flatten() const;
  void unflatten(const VecX& values);
  /// Gradient in flatten() order; zero for parameters without gradient.
  VecX flatten_grad() const;
  void zero_grad();

  /// Copies values from `other` for every name present in both; shapes must
  /// agree. Returns the number of matrices copied.
  int copy_matching(const ParamSet& other);

  /// FNV-1a hash of all parameter bytes; used to assert immutability.
  uint64_t value_hash() const;

 private:
  std::vector<std::pair<std::string, ad::Var>> items_;
};

MatX orthogonal_init(int rows, int cols, double gain, Rng& rng);
MatX uniform_init(int rows, int cols, double scale, Rng& rng);

inline constexpr int kLatentDim = 64;

/// Privileged teacher: an encoder embeds x_t into the 64-dim latent, the
/// trunk maps (o_t, latent) to the 16 action means; exploration noise is a
/// state-independent learnable log-std per action dimension.
class TeacherNet {
 public:
  static TeacherNet create(Rng& rng);

  struct Taped {
    ad::Var latent;  // 64 x B
    ad::Var mean;    // 16 x B
  };
  Taped forward(const ad::Var& obs, const ad::Var& privileged) const;

  /// Batched inference without a tape; rows: obs 121, privileged 71.
  void infer(const MatX& obs, const MatX& privileged, MatX* latent,
             MatX* mean) const;

  const ad::Var& log_std() const { return params_.get("log_std"); }
  VecX log_std_value() const { return params_.get("log_std").value().col(0); }

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  ParamSet params_;
};

/// Value baseline over (o_t, x_t) for advantage estimation.
class ValueNet {
 public:
  static ValueNet create(Rng& rng);
  ad::Var forward(const ad::Var& obs_priv) const;  // input 192 x B -> 1 x B
  VecX infer(const MatX& obs, const MatX& privileged) const;
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  ParamSet params_;
};

struct TcnConvLayer {
  int dilation = 1;
  int stride = 1;
};

/// TCN student architecture description. The default stack interleaves
/// dilated and strided causal convolutions (dilations 1, 2, 4; stride-2
/// reductions), kernel 5, relu activations, then a tanh(64) head over the
/// flattened sequence.
struct TcnSpec {
  int history_length = 100;  // N
  int channels = 34;
  int input_dim = kProprioDim;
  int kernel = 5;
  std::vector<TcnConvLayer> conv_layers = {{1, 1}, {1, 2}, {2, 1},
                                           {1, 2}, {4, 1}, {1, 2}};
  int latent_dim = kLatentDim;

  /// Named variants: channel widths 60 / 44 / 34 for N = 1 / 20 / 100.
  static TcnSpec variant(int history_length);

  /// Receptive field in input steps.
  int receptive_field() const;
  /// Sequence length after the stride chain.
  int output_time() const;
};

class TcnNet {
 public:
  static TcnNet create(const TcnSpec& spec, Rng& rng);

  struct Taped {
    ad::Var latent;  // 64 x B
    ad::Var action;  // 16 x B
  };
  /// history: (input_dim, batch * N), sample-major column blocks,
  /// oldest column first within each block.
  Taped forward(const ad::Var& obs, const ad::Var& history, int batch) const;

  void infer(const MatX& obs, const MatX& history, int batch, MatX* latent,
             MatX* action) const;

  const TcnSpec& spec() const { return spec_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  TcnSpec spec_;
  ParamSet params_;
};

/// GRU student: recurrent encoder over the h stream, same trunk as the
/// teacher, with a tanh head mapping the hidden state to the 64-dim latent.
class GruNet {
 public:
  static GruNet create(Rng& rng, int hidden = 68);

  ad::GruWeights taped_weights() const;
  ad::Var taped_latent(const ad::Var& hidden_state) const;
  ad::Var taped_action(const ad::Var& obs, const ad::Var& latent) const;

  struct State {
    VecX hidden;
  };
  State initial_state() const;
  /// One step of inference; updates `state` in place.
  void infer(const VecX& obs, const VecX& h_col, State* state, VecX* latent,
             VecX* action) const;

  int hidden_dim() const { return hidden_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  int hidden_ = 68;
  ParamSet params_;
};

/// Decoder reconstructing privileged information from (o_t, l_t): Gaussian
/// mean and log-sigma for the 59 non-contact dimensions, logits for the 12
/// contact bits.
class DecoderNet {
 public:
  static constexpr int kRegressionDims = 59;
  static constexpr int kContactDims = 12;

  static DecoderNet create(Rng& rng);

  struct Taped {
    ad::Var mean;       // 59 x B
    ad::Var log_sigma;  // 59 x B
    ad::Var logits;     // 12 x B
  };
  Taped forward(const ad::Var& obs, const ad::Var& latent) const;
  void infer(const MatX& obs, const MatX& latent, MatX* mean, MatX* log_sigma,
             MatX* logits) const;

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  ParamSet params_;
};

/// Splits a privileged vector into its regression (non-contact) and contact
/// parts, matching the decoder output layout.
VecX privileged_regression_part(const VecX& x);
VecX privileged_contact_part(const VecX& x);
MatX privileged_regression_part(const MatX& x);
MatX privileged_contact_part(const MatX& x);

/// Copies the shared trunk (the layers reused by students) from the teacher
/// into a student parameter set. Encoder layers are never copied. Throws on
/// shape mismatch; returns the number of matrices copied.
int copy_shared_layers(const ParamSet& teacher, ParamSet* student);

}  // namespace blindgait

#endif  // BLINDGAIT_NETWORKS_HPP_
