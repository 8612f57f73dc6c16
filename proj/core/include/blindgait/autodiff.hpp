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

#ifndef BLINDGAIT_AUTODIFF_HPP_
#define BLINDGAIT_AUTODIFF_HPP_

#include <functional>
#include <memory>
#include <vector>

#include "blindgait/types.hpp"

namespace blindgait::ad {

// Dynamically-built reverse-mode tape over dense double matrices. Values are
// (rows x cols) where cols is usually the batch dimension; scalars are 1x1.

struct Node {
  MatX value;
  MatX grad;
  bool requires_grad = false;
  bool grad_ready = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(const MatX&)> backprop;  // pushes dL/dthis into parents

  void accumulate(const MatX& g) {
    if (!grad_ready) {
      grad = g;
      grad_ready = true;
    } else {
      grad += g;
    }
  }
};

/// Handle to a tape node; cheap to copy.
class Var {
 public:
  Var() = default;
  explicit Var(MatX value, bool requires_grad = false);

  const MatX& value() const { return node_->value; }
  MatX& mutable_value() { return node_->value; }
  const MatX& grad() const { return node_->grad; }
  bool has_grad() const { return node_ && node_->grad_ready; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void zero_grad() {
    if (node_) {
      node_->grad_ready = false;
      node_->grad.setZero(node_->value.rows(), node_->value.cols());
    }
  }
  int rows() const { return static_cast<int>(node_->value.rows()); }
  int cols() const { return static_cast<int>(node_->value.cols()); }
  bool defined() const { return node_ != nullptr; }

  std::shared_ptr<Node> node() const { return node_; }
  static Var wrap(std::shared_ptr<Node> n) {
    Var v;
    v.node_ = std::move(n);
    return v;
  }

 private:
  std::shared_ptr<Node> node_;
};

/// Runs reverse accumulation from a scalar (1x1) loss.
void backward(const Var& loss);

// --- primitive ops ---

Var constant(const MatX& value);

/// W (m x k) * x (k x B).
Var matmul(const Var& w, const Var& x);

/// Adds a column vector b (m x 1) to every column of x (m x B).
Var add_bias(const Var& x, const Var& b);

/// Multiplies every column of x (m x B) elementwise by s (m x 1).
Var row_scale(const Var& x, const Var& s);

/// Adds a 1x1 scalar node to every entry of x.
Var add_scalar(const Var& x, const Var& s);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& x, double k);

Var tanh_op(const Var& x);
Var relu(const Var& x);
Var sigmoid(const Var& x);
Var exp_op(const Var& x);
Var log_op(const Var& x);
Var softplus(const Var& x);
Var square(const Var& x);

/// Sum of all entries -> 1x1.
Var sum(const Var& x);
/// Mean of all entries -> 1x1.
Var mean(const Var& x);
/// Column sums -> 1 x B.
Var colsum(const Var& x);

Var concat_rows(const Var& a, const Var& b);
Var slice_rows(const Var& x, int start, int len);
Var slice_cols(const Var& x, int start, int len);

/// Stops gradient flow; value is shared.
Var detach(const Var& x);

/// Batched causal 1-D convolution. x is (in_channels, B*T) with sample-major
/// column blocks of length T; w is (out_channels, in_channels*K) with taps
/// ordered oldest first; b is (out_channels, 1). Left zero padding of
/// (K-1)*dilation keeps outputs causal; output length per sample is
/// ceil(T/stride).
Var conv1d(const Var& x, const Var& w, const Var& b, int batch, int t_in,
           int kernel, int dilation, int stride);

inline int conv1d_out_len(int t_in, int stride) {
  return (t_in - 1) / stride + 1;
}

/// One GRU step composed from primitives (gradients follow automatically):
///   z = sigmoid(Wz x + Uz h + bz)
///   r = sigmoid(Wr x + Ur h + br)
///   n = tanh(Wn x + r .* (Un h + bn))
///   h' = (1 - z) .* n + z .* h
struct GruWeights {
  Var wz, uz, bz;
  Var wr, ur, br;
  Var wn, un, bn;
};

Var gru_step(const GruWeights& w, const Var& x, const Var& h);

// --- Gaussian policy helpers (built from primitives) ---

/// Log density of `actions` (D x B, constant) under diagonal Gaussians with
/// means (D x B) and log-stds (D x 1). Returns 1 x B.
Var gaussian_logprob(const MatX& actions, const Var& mean, const Var& log_std);

/// Mean KL(old || new) over the batch for diagonal Gaussians; old side is
/// constant. Returns 1x1.
Var gaussian_kl(const MatX& mean_old, const VecX& log_std_old, const Var& mean_new,
                const Var& log_std_new);

/// Scalar (non-tape) versions used by tests and line searches.
double gaussian_logprob_value(const VecX& action, const VecX& mean,
                              const VecX& log_std);
double gaussian_kl_value(const VecX& mean_old, const VecX& log_std_old,
                         const VecX& mean_new, const VecX& log_std_new);

}  // namespace blindgait::ad

#endif  // BLINDGAIT_AUTODIFF_HPP_
