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

#include "blindgait/autodiff.hpp"

#include <cmath>
#include <unordered_set>

namespace blindgait::ad {

Var::Var(MatX value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

namespace {

bool needs_grad(const std::initializer_list<Var>& parents) {
  for (const Var& p : parents) {
    if (p.requires_grad()) return true;
  }
  return false;
}

Var make_node(MatX value, std::initializer_list<Var> parents,
              std::function<void(const MatX&)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = needs_grad(parents);
  if (n->requires_grad) {
    for (const Var& p : parents) n->parents.push_back(p.node());
    n->backprop = std::move(backprop);
  }
  return Var::wrap(std::move(n));
}

}  // namespace

void backward(const Var& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw std::invalid_argument("backward: loss must be scalar");
  }
  // Iterative topological order (children before parents).
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* parent = node->parents[idx++].get();
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  // order is parents-first; traverse in reverse for reverse accumulation.
  for (Node* n : order) n->grad_ready = false;
  loss.node()->accumulate(MatX::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->grad_ready) n->backprop(n->grad);
  }
}

Var constant(const MatX& value) { return Var(value, false); }

Var matmul(const Var& w, const Var& x) {
  MatX y = w.value() * x.value();
  auto wn = w.node();
  auto xn = x.node();
  return make_node(std::move(y), {w, x}, [wn, xn](const MatX& dy) {
    if (wn->requires_grad) wn->accumulate(dy * xn->value.transpose());
    if (xn->requires_grad) xn->accumulate(wn->value.transpose() * dy);
  });
}

Var add_bias(const Var& x, const Var& b) {
  MatX y = x.value().colwise() + Eigen::VectorXd(b.value().col(0));
  auto xn = x.node();
  auto bn = b.node();
  return make_node(std::move(y), {x, b}, [xn, bn](const MatX& dy) {
    if (xn->requires_grad) xn->accumulate(dy);
    if (bn->requires_grad) bn->accumulate(dy.rowwise().sum());
  });
}

Var row_scale(const Var& x, const Var& s) {
  MatX y = x.value().array().colwise() * Eigen::ArrayXd(s.value().col(0));
  auto xn = x.node();
  auto sn = s.node();
  return make_node(std::move(y), {x, s}, [xn, sn](const MatX& dy) {
    if (xn->requires_grad) {
      xn->accumulate(dy.array().colwise() * Eigen::ArrayXd(sn->value.col(0)));
    }
    if (sn->requires_grad) {
      sn->accumulate((dy.array() * xn->value.array()).rowwise().sum());
    }
  });
}

Var add_scalar(const Var& x, const Var& s) {
  MatX y = x.value().array() + s.value()(0, 0);
  auto xn = x.node();
  auto sn = s.node();
  return make_node(std::move(y), {x, s}, [xn, sn](const MatX& dy) {
    if (xn->requires_grad) xn->accumulate(dy);
    if (sn->requires_grad) {
      MatX g(1, 1);
      g(0, 0) = dy.sum();
      sn->accumulate(g);
    }
  });
}

Var add(const Var& a, const Var& b) {
  MatX y = a.value() + b.value();
  auto an = a.node();
  auto bn = b.node();
  return make_node(std::move(y), {a, b}, [an, bn](const MatX& dy) {
    if (an->requires_grad) an->accumulate(dy);
    if (bn->requires_grad) bn->accumulate(dy);
  });
}

Var sub(const Var& a, const Var& b) {
  MatX y = a.value() - b.value();
  auto an = a.node();
  auto bn = b.node();
  return make_node(std::move(y), {a, b}, [an, bn](const MatX& dy) {
    if (an->requires_grad) an->accumulate(dy);
    if (bn->requires_grad) bn->accumulate(-dy);
  });
}

Var mul(const Var& a, const Var& b) {
  MatX y = a.value().cwiseProduct(b.value());
  auto an = a.node();
  auto bn = b.node();
  return make_node(std::move(y), {a, b}, [an, bn](const MatX& dy) {
    if (an->requires_grad) an->accumulate(dy.cwiseProduct(bn->value));
    if (bn->requires_grad) bn->accumulate(dy.cwiseProduct(an->value));
  });
}

Var scale(const Var& x, double k) {
  MatX y = k * x.value();
  auto xn = x.node();
  return make_node(std::move(y), {x}, [xn, k](const MatX& dy) {
    if (xn->requires_grad) xn->accumulate(k * dy);
  });
}

Var tanh_op(const Var& x) {
  MatX y = x.value().array().tanh();
  auto xn = x.node();
  auto out = make_node(y, {x}, nullptr);
  if (out.requires_grad()) {
    MatX saved = out.value();
    out.node()->backprop = [xn, saved](const MatX& dy) {
      xn->accumulate(dy.cwiseProduct((1.0 - saved.array().square()).matrix()));
    };
  }
  return out;
}

Var relu(const Var& x) {
  MatX y = x.value().cwiseMax(0.0);
  auto xn = x.node();
  return make_node(std::move(y), {x}, [xn](const MatX& dy) {
    xn->accumulate(
        dy.cwiseProduct((xn->value.array() > 0.0).cast<double>().matrix()));
  });
}

Var sigmoid(const Var& x) {
  MatX y = (1.0 / (1.0 + (-x.value().array()).exp())).matrix();
  auto xn = x.node();
  auto out = make_node(y, {x}, nullptr);
  if (out.requires_grad()) {
    MatX saved = out.value();
    out.node()->backprop = [xn, saved](const MatX& dy) {
      xn->accumulate(
          dy.cwiseProduct((saved.array() * (1.0 - saved.array())).matrix()));
    };
  }
  return out;
}

Var exp_op(const Var& x) {
  MatX y = x.value().array().exp();
  auto xn = x.node();
  auto out = make_node(y, {x}, nullptr);
  if (out.requires_grad()) {
    MatX saved = out.value();
    out.node()->backprop = [xn, saved](const MatX& dy) {
      xn->accumulate(dy.cwiseProduct(saved));
    };
  }
  return out;
}

Var log_op(const Var& x) {
  MatX y = x.value().array().log();
  auto xn = x.node();
  return make_node(std::move(y), {x}, [xn](const MatX& dy) {
    xn->accumulate(dy.cwiseQuotient(xn->value));
  });
}

Var softplus(const Var& x) {
  // log(1 + exp(x)) computed stably.
  MatX y = (x.value().array().max(0.0) +
            (1.0 + (-x.value().array().abs()).exp()).log())
               .matrix();
  auto xn = x.node();
  return make_node(std::move(y), {x}, [xn](const MatX& dy) {
    MatX sig = (1.0 / (1.0 + (-xn->value.array()).exp())).matrix();
    xn->accumulate(dy.cwiseProduct(sig));
  });
}

Var square(const Var& x) {
  MatX y = x.value().array().square();
  auto xn = x.node();
  return make_node(std::move(y), {x}, [xn](const MatX& dy) {
    xn->accumulate(2.0 * dy.cwiseProduct(xn->value));
  });
}

Var sum(const Var& x) {
  MatX y(1, 1);
  y(0, 0) = x.value().sum();
  auto xn = x.node();
  return make_node(std::move(y), {x}, [xn](const MatX& dy) {
    xn->accumulate(MatX::Constant(xn->value.rows(), xn->value.cols(), dy(0, 0)));
  });
}

Var mean(const Var& x) {
  const double inv = 1.0 / (x.value().rows() * x.value().cols());
  return scale(sum(x), inv);
}

Var colsum(const Var& x) {
  MatX y = x.value().colwise().sum();
  auto xn = x.node();
  return make_node(std::move(y), {x}, [xn](const MatX& dy) {
    xn->accumulate(MatX::Ones(xn->value.rows(), 1) * dy);
  });
}

Var concat_rows(const Var& a, const Var& b) {
  MatX y(a.rows() + b.rows(), a.cols());
  y.topRows(a.rows()) = a.value();
  y.bottomRows(b.rows()) = b.value();
  auto an = a.node();
  auto bn = b.node();
  const int ra = a.rows(), rb = b.rows();
  return make_node(std::move(y), {a, b}, [an, bn, ra, rb](const MatX& dy) {
    if (an->requires_grad) an->accumulate(dy.topRows(ra));
    if (bn->requires_grad) bn->accumulate(dy.bottomRows(rb));
  });
}

Var slice_rows(const Var& x, int start, int len) {
  MatX y = x.value().middleRows(start, len);
  auto xn = x.node();
  return make_node(std::move(y), {x}, [xn, start, len](const MatX& dy) {
    MatX g = MatX::Zero(xn->value.rows(), xn->value.cols());
    g.middleRows(start, len) = dy;
    xn->accumulate(g);
  });
}

Var slice_cols(const Var& x, int start, int len) {
  MatX y = x.value().middleCols(start, len);
  auto xn = x.node();
  return make_node(std::move(y), {x}, [xn, start, len](const MatX& dy) {
    MatX g = MatX::Zero(xn->value.rows(), xn->value.cols());
    g.middleCols(start, len) = dy;
    xn->accumulate(g);
  });
}

Var detach(const Var& x) { return Var(x.value(), false); }

Var conv1d(const Var& x, const Var& w, const Var& b, int batch, int t_in,
           int kernel, int dilation, int stride) {
  const int in_channels = x.rows();
  const int out_channels = w.rows();
  const int t_out = conv1d_out_len(t_in, stride);
  const int pad = (kernel - 1) * dilation;

  // Source column of tap m for output column j: j*stride + m*dilation - pad
  // (negative -> zero padding). Newest tap (m = kernel-1) aligns with j*stride.
  std::vector<int> src(static_cast<size_t>(batch) * t_out * kernel);
  {
    size_t p = 0;
    for (int bi = 0; bi < batch; ++bi) {
      for (int j = 0; j < t_out; ++j) {
        for (int m = 0; m < kernel; ++m) {
          const int ti = j * stride + m * dilation - pad;
          src[p++] = ti >= 0 ? bi * t_in + ti : -1;
        }
      }
    }
  }

  MatX cols = MatX::Zero(static_cast<Eigen::Index>(in_channels) * kernel,
                         static_cast<Eigen::Index>(batch) * t_out);
  {
    size_t p = 0;
    for (int c = 0; c < batch * t_out; ++c) {
      for (int m = 0; m < kernel; ++m) {
        const int s = src[p++];
        if (s >= 0) cols.block(m * in_channels, c, in_channels, 1) = x.value().col(s);
      }
    }
  }

  MatX y = (w.value() * cols).colwise() + Eigen::VectorXd(b.value().col(0));
  auto xn = x.node();
  auto wn = w.node();
  auto bn = b.node();
  auto src_shared = std::make_shared<std::vector<int>>(std::move(src));
  auto cols_shared = std::make_shared<MatX>(std::move(cols));
  return make_node(
      std::move(y), {x, w, b},
      [xn, wn, bn, src_shared, cols_shared, in_channels, kernel, batch, t_out,
       out_channels](const MatX& dy) {
        (void)out_channels;
        if (wn->requires_grad) wn->accumulate(dy * cols_shared->transpose());
        if (bn->requires_grad) bn->accumulate(dy.rowwise().sum());
        if (xn->requires_grad) {
          MatX dcols = wn->value.transpose() * dy;
          MatX dx = MatX::Zero(xn->value.rows(), xn->value.cols());
          size_t p = 0;
          for (int c = 0; c < batch * t_out; ++c) {
            for (int m = 0; m < kernel; ++m) {
              const int s = (*src_shared)[p++];
              if (s >= 0) dx.col(s) += dcols.block(m * in_channels, c, in_channels, 1);
            }
          }
          xn->accumulate(dx);
        }
      });
}

Var gru_step(const GruWeights& w, const Var& x, const Var& h) {
  Var z = sigmoid(add_bias(add(matmul(w.wz, x), matmul(w.uz, h)), w.bz));
  Var r = sigmoid(add_bias(add(matmul(w.wr, x), matmul(w.ur, h)), w.br));
  Var n = tanh_op(add(matmul(w.wn, x), mul(r, add_bias(matmul(w.un, h), w.bn))));
  Var one_minus_z = scale(sub(z, constant(MatX::Ones(z.rows(), z.cols()))), -1.0);
  return add(mul(one_minus_z, n), mul(z, h));
}

Var gaussian_logprob(const MatX& actions, const Var& mean, const Var& log_std) {
  const int dim = static_cast<int>(actions.rows());
  Var diff = sub(constant(actions), mean);
  Var inv_std = exp_op(scale(log_std, -1.0));
  Var z = row_scale(diff, inv_std);
  Var quad = scale(colsum(square(z)), -0.5);
  Var log_norm = scale(sum(log_std), -1.0);  // -sum(log sigma)
  Var shifted = add_scalar(quad, log_norm);
  const double c = -0.5 * dim * std::log(kTwoPi);
  return add(shifted, constant(MatX::Constant(1, shifted.cols(), c)));
}

Var gaussian_kl(const MatX& mean_old, const VecX& log_std_old, const Var& mean_new,
                const Var& log_std_new) {
  const int batch = static_cast<int>(mean_old.cols());
  Var delta = sub(constant(mean_old), mean_new);
  Var dsq = square(delta);
  const VecX var_old = (2.0 * log_std_old.array()).exp();
  Var numer = add_bias(dsq, constant(var_old));
  Var inv_var_new = exp_op(scale(log_std_new, -2.0));
  Var quad = scale(row_scale(numer, inv_var_new), 0.5);
  // Row offsets: log sigma_new - log sigma_old - 1/2.
  Var offs = sub(log_std_new, constant(log_std_old + VecX::Constant(log_std_old.size(), 0.5)));
  Var per_state = colsum(add_bias(quad, offs));
  return scale(sum(per_state), 1.0 / batch);
}

double gaussian_logprob_value(const VecX& action, const VecX& mean,
                              const VecX& log_std) {
  const Eigen::ArrayXd inv_std = (-log_std.array()).exp();
  const Eigen::ArrayXd z = (action - mean).array() * inv_std;
  return -0.5 * z.square().sum() - log_std.sum() -
         0.5 * action.size() * std::log(kTwoPi);
}

double gaussian_kl_value(const VecX& mean_old, const VecX& log_std_old,
                         const VecX& mean_new, const VecX& log_std_new) {
  const Eigen::ArrayXd var_old = (2.0 * log_std_old.array()).exp();
  const Eigen::ArrayXd var_new = (2.0 * log_std_new.array()).exp();
  const Eigen::ArrayXd dsq = (mean_old - mean_new).array().square();
  return (log_std_new.array() - log_std_old.array() +
          (var_old + dsq) / (2.0 * var_new) - 0.5)
      .sum();
}

}  // namespace blindgait::ad
