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

#include "blindgait/networks.hpp"

#include <Eigen/QR>

#include <cmath>
#include <cstring>

namespace blindgait {

ad::Var ParamSet::add(const std::string& name, MatX init) {
  if (has(name)) throw std::invalid_argument("duplicate parameter: " + name);
  items_.emplace_back(name, ad::Var(std::move(init), true));
  return items_.back().second;
}

const ad::Var& ParamSet::get(const std::string& name) const {
  for (const auto& [n, v] : items_) {
    if (n == name) return v;
  }
  throw std::out_of_range("no parameter named " + name);
}

bool ParamSet::has(const std::string& name) const {
  for (const auto& [n, v] : items_) {
    if (n == name) return true;
  }
  return false;
}

int ParamSet::total_size() const {
  int n = 0;
  for (const auto& [name, v] : items_) n += v.rows() * v.cols();
  return n;
}

VecX ParamSet::flatten() const {
  VecX out(total_size());
  int at = 0;
  for (const auto& [name, v] : items_) {
    const int n = v.rows() * v.cols();
    out.segment(at, n) = Eigen::Map<const VecX>(v.value().data(), n);
    at += n;
  }
  return out;
}

void ParamSet::unflatten(const VecX& values) {
  if (values.size() != total_size()) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  int at = 0;
  for (auto& [name, v] : items_) {
    const int n = v.rows() * v.cols();
    Eigen::Map<VecX>(v.mutable_value().data(), n) = values.segment(at, n);
    at += n;
  }
}

VecX ParamSet::flatten_grad() const {
  VecX out = VecX::Zero(total_size());
  int at = 0;
  for (const auto& [name, v] : items_) {
    const int n = v.rows() * v.cols();
    if (v.has_grad()) {
      out.segment(at, n) = Eigen::Map<const VecX>(v.grad().data(), n);
    }
    at += n;
  }
  return out;
}

void ParamSet::zero_grad() {
  for (auto& [name, v] : items_) v.zero_grad();
}

int ParamSet::copy_matching(const ParamSet& other) {
  int copied = 0;
  for (auto& [name, v] : items_) {
    if (!other.has(name)) continue;
    const ad::Var& src = other.get(name);
    if (src.rows() != v.rows() || src.cols() != v.cols()) {
      throw std::invalid_argument("copy_matching: shape mismatch for " + name);
    }
    v.mutable_value() = src.value();
    ++copied;
  }
  return copied;
}

uint64_t ParamSet::value_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [name, v] : items_) {
    mix(name.data(), name.size());
    mix(v.value().data(), sizeof(double) * v.rows() * v.cols());
  }
  return h;
}

MatX orthogonal_init(int rows, int cols, double gain, Rng& rng) {
  const int dim = std::max(rows, cols);
  MatX a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<MatX> qr(a);
  MatX q = qr.householderQ();
  const MatX r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return gain * q.topLeftCorner(rows, cols);
}

MatX uniform_init(int rows, int cols, double scale, Rng& rng) {
  MatX m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-scale, scale);
  }
  return m;
}

namespace {

void add_trunk(ParamSet* params, int input_dim, Rng& rng) {
  params->add("trunk1_w", orthogonal_init(256, input_dim, 1.0, rng));
  params->add("trunk1_b", MatX::Zero(256, 1));
  params->add("trunk2_w", orthogonal_init(128, 256, 1.0, rng));
  params->add("trunk2_b", MatX::Zero(128, 1));
  params->add("trunk3_w", orthogonal_init(64, 128, 1.0, rng));
  params->add("trunk3_b", MatX::Zero(64, 1));
  params->add("out_w", orthogonal_init(kActionDim, 64, 0.01, rng));
  params->add("out_b", MatX::Zero(kActionDim, 1));
}

ad::Var taped_trunk(const ParamSet& params, const ad::Var& features) {
  ad::Var h1 = ad::tanh_op(
      ad::add_bias(ad::matmul(params.get("trunk1_w"), features), params.get("trunk1_b")));
  ad::Var h2 = ad::tanh_op(
      ad::add_bias(ad::matmul(params.get("trunk2_w"), h1), params.get("trunk2_b")));
  ad::Var h3 = ad::tanh_op(
      ad::add_bias(ad::matmul(params.get("trunk3_w"), h2), params.get("trunk3_b")));
  return ad::add_bias(ad::matmul(params.get("out_w"), h3), params.get("out_b"));
}

MatX infer_trunk(const ParamSet& params, const MatX& features) {
  MatX h = ((params.get("trunk1_w").value() * features).colwise() +
            Eigen::VectorXd(params.get("trunk1_b").value().col(0)))
               .array()
               .tanh();
  h = ((params.get("trunk2_w").value() * h).colwise() +
       Eigen::VectorXd(params.get("trunk2_b").value().col(0)))
          .array()
          .tanh();
  h = ((params.get("trunk3_w").value() * h).colwise() +
       Eigen::VectorXd(params.get("trunk3_b").value().col(0)))
          .array()
          .tanh();
  return (params.get("out_w").value() * h).colwise() +
         Eigen::VectorXd(params.get("out_b").value().col(0));
}

MatX concat_mat(const MatX& a, const MatX& b) {
  MatX out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

}  // namespace

TeacherNet TeacherNet::create(Rng& rng) {
  TeacherNet net;
  net.params_.add("enc1_w", orthogonal_init(72, kPrivilegedDim, 1.0, rng));
  net.params_.add("enc1_b", MatX::Zero(72, 1));
  net.params_.add("enc2_w", orthogonal_init(kLatentDim, 72, 1.0, rng));
  net.params_.add("enc2_b", MatX::Zero(kLatentDim, 1));
  add_trunk(&net.params_, kObservationDim + kLatentDim, rng);

  // Exploration noise: wider laterally than vertically (in scaled units the
  // lateral residual std is twice the vertical one).
  MatX log_std(kActionDim, 1);
  for (int i = 0; i < 4; ++i) log_std(i, 0) = std::log(0.5);
  for (int leg = 0; leg < 4; ++leg) {
    log_std(4 + 3 * leg + 0, 0) = std::log(0.10 / 0.15 * 1.0);
    log_std(4 + 3 * leg + 1, 0) = std::log(0.10 / 0.15 * 1.0);
    log_std(4 + 3 * leg + 2, 0) = std::log(0.5);
  }
  net.params_.add("log_std", log_std);
  return net;
}

TeacherNet::Taped TeacherNet::forward(const ad::Var& obs,
                                      const ad::Var& privileged) const {
  ad::Var e1 = ad::tanh_op(ad::add_bias(
      ad::matmul(params_.get("enc1_w"), privileged), params_.get("enc1_b")));
  ad::Var latent = ad::tanh_op(
      ad::add_bias(ad::matmul(params_.get("enc2_w"), e1), params_.get("enc2_b")));
  ad::Var features = ad::concat_rows(obs, latent);
  return Taped{latent, taped_trunk(params_, features)};
}

void TeacherNet::infer(const MatX& obs, const MatX& privileged, MatX* latent,
                       MatX* mean) const {
  MatX e1 = ((params_.get("enc1_w").value() * privileged).colwise() +
             Eigen::VectorXd(params_.get("enc1_b").value().col(0)))
                .array()
                .tanh();
  MatX l = ((params_.get("enc2_w").value() * e1).colwise() +
            Eigen::VectorXd(params_.get("enc2_b").value().col(0)))
               .array()
               .tanh();
  MatX m = infer_trunk(params_, concat_mat(obs, l));
  if (latent) *latent = std::move(l);
  if (mean) *mean = std::move(m);
}

ValueNet ValueNet::create(Rng& rng) {
  ValueNet net;
  const int input = kObservationDim + kPrivilegedDim;
  net.params_.add("v1_w", orthogonal_init(256, input, 1.0, rng));
  net.params_.add("v1_b", MatX::Zero(256, 1));
  net.params_.add("v2_w", orthogonal_init(128, 256, 1.0, rng));
  net.params_.add("v2_b", MatX::Zero(128, 1));
  net.params_.add("v3_w", orthogonal_init(64, 128, 1.0, rng));
  net.params_.add("v3_b", MatX::Zero(64, 1));
  net.params_.add("vout_w", orthogonal_init(1, 64, 1.0, rng));
  net.params_.add("vout_b", MatX::Zero(1, 1));
  return net;
}

ad::Var ValueNet::forward(const ad::Var& obs_priv) const {
  ad::Var h1 = ad::tanh_op(
      ad::add_bias(ad::matmul(params_.get("v1_w"), obs_priv), params_.get("v1_b")));
  ad::Var h2 = ad::tanh_op(
      ad::add_bias(ad::matmul(params_.get("v2_w"), h1), params_.get("v2_b")));
  ad::Var h3 = ad::tanh_op(
      ad::add_bias(ad::matmul(params_.get("v3_w"), h2), params_.get("v3_b")));
  return ad::add_bias(ad::matmul(params_.get("vout_w"), h3), params_.get("vout_b"));
}

VecX ValueNet::infer(const MatX& obs, const MatX& privileged) const {
  MatX x = concat_mat(obs, privileged);
  MatX h = ((params_.get("v1_w").value() * x).colwise() +
            Eigen::VectorXd(params_.get("v1_b").value().col(0)))
               .array()
               .tanh();
  h = ((params_.get("v2_w").value() * h).colwise() +
       Eigen::VectorXd(params_.get("v2_b").value().col(0)))
          .array()
          .tanh();
  h = ((params_.get("v3_w").value() * h).colwise() +
       Eigen::VectorXd(params_.get("v3_b").value().col(0)))
          .array()
          .tanh();
  return ((params_.get("vout_w").value() * h).colwise() +
          Eigen::VectorXd(params_.get("vout_b").value().col(0)))
      .row(0);
}

TcnSpec TcnSpec::variant(int history_length) {
  TcnSpec spec;
  spec.history_length = history_length;
  if (history_length <= 1) {
    spec.channels = 60;
  } else if (history_length <= 20) {
    spec.channels = 44;
  } else {
    spec.channels = 34;
  }
  return spec;
}

int TcnSpec::receptive_field() const {
  int rf = 1;
  int jump = 1;
  for (const TcnConvLayer& layer : conv_layers) {
    rf += (kernel - 1) * layer.dilation * jump;
    jump *= layer.stride;
  }
  return rf;
}

int TcnSpec::output_time() const {
  int t = history_length;
  for (const TcnConvLayer& layer : conv_layers) {
    t = ad::conv1d_out_len(t, layer.stride);
  }
  return t;
}

TcnNet TcnNet::create(const TcnSpec& spec, Rng& rng) {
  TcnNet net;
  net.spec_ = spec;
  int in_ch = spec.input_dim;
  for (size_t i = 0; i < spec.conv_layers.size(); ++i) {
    const double bound = std::sqrt(1.0 / (in_ch * spec.kernel));
    net.params_.add("conv" + std::to_string(i) + "_w",
                    uniform_init(spec.channels, in_ch * spec.kernel, bound, rng));
    net.params_.add("conv" + std::to_string(i) + "_b",
                    MatX::Zero(spec.channels, 1));
    in_ch = spec.channels;
  }
  const int flat = spec.channels * spec.output_time();
  net.params_.add("head_w", orthogonal_init(spec.latent_dim, flat, 1.0, rng));
  net.params_.add("head_b", MatX::Zero(spec.latent_dim, 1));
  add_trunk(&net.params_, kObservationDim + spec.latent_dim, rng);
  return net;
}

TcnNet::Taped TcnNet::forward(const ad::Var& obs, const ad::Var& history,
                              int batch) const {
  ad::Var h = history;
  int t = spec_.history_length;
  for (size_t i = 0; i < spec_.conv_layers.size(); ++i) {
    const TcnConvLayer& layer = spec_.conv_layers[i];
    h = ad::relu(ad::conv1d(h, params_.get("conv" + std::to_string(i) + "_w"),
                            params_.get("conv" + std::to_string(i) + "_b"), batch,
                            t, spec_.kernel, layer.dilation, layer.stride));
    t = ad::conv1d_out_len(t, layer.stride);
  }
  // Flatten each sample's (channels x t) block into one column.
  const int flat = spec_.channels * t;
  MatX reshaped(flat, batch);
  // Values only; gradient flows through a dedicated reshape node.
  auto hn = h.node();
  for (int b = 0; b < batch; ++b) {
    for (int j = 0; j < t; ++j) {
      reshaped.block(j * spec_.channels, b, spec_.channels, 1) =
          h.value().col(b * t + j);
    }
  }
  auto flat_node = std::make_shared<ad::Node>();
  flat_node->value = std::move(reshaped);
  flat_node->requires_grad = hn->requires_grad;
  if (flat_node->requires_grad) {
    flat_node->parents.push_back(hn);
    const int channels = spec_.channels;
    flat_node->backprop = [hn, channels, t, batch](const MatX& dy) {
      MatX dx(channels, static_cast<Eigen::Index>(batch) * t);
      for (int b = 0; b < batch; ++b) {
        for (int j = 0; j < t; ++j) {
          dx.col(b * t + j) = dy.block(j * channels, b, channels, 1);
        }
      }
      hn->accumulate(dx);
    };
  }
  ad::Var flat_var = ad::Var::wrap(flat_node);
  ad::Var latent = ad::tanh_op(
      ad::add_bias(ad::matmul(params_.get("head_w"), flat_var), params_.get("head_b")));
  ad::Var features = ad::concat_rows(obs, latent);
  return Taped{latent, taped_trunk(params_, features)};
}

void TcnNet::infer(const MatX& obs, const MatX& history, int batch, MatX* latent,
                   MatX* action) const {
  MatX h = history;
  int t = spec_.history_length;
  for (size_t i = 0; i < spec_.conv_layers.size(); ++i) {
    const TcnConvLayer& layer = spec_.conv_layers[i];
    const MatX& w = params_.get("conv" + std::to_string(i) + "_w").value();
    const VecX b = params_.get("conv" + std::to_string(i) + "_b").value().col(0);
    const int in_ch = static_cast<int>(h.rows());
    const int t_out = ad::conv1d_out_len(t, layer.stride);
    const int pad = (spec_.kernel - 1) * layer.dilation;
    MatX cols = MatX::Zero(static_cast<Eigen::Index>(in_ch) * spec_.kernel,
                           static_cast<Eigen::Index>(batch) * t_out);
    for (int bi = 0; bi < batch; ++bi) {
      for (int j = 0; j < t_out; ++j) {
        for (int m = 0; m < spec_.kernel; ++m) {
          const int ti = j * layer.stride + m * layer.dilation - pad;
          if (ti >= 0) {
            cols.block(m * in_ch, bi * t_out + j, in_ch, 1) = h.col(bi * t + ti);
          }
        }
      }
    }
    h = ((w * cols).colwise() + b).cwiseMax(0.0);
    t = t_out;
  }
  const int flat = spec_.channels * t;
  MatX reshaped(flat, batch);
  for (int b = 0; b < batch; ++b) {
    for (int j = 0; j < t; ++j) {
      reshaped.block(j * spec_.channels, b, spec_.channels, 1) = h.col(b * t + j);
    }
  }
  MatX l = ((params_.get("head_w").value() * reshaped).colwise() +
            Eigen::VectorXd(params_.get("head_b").value().col(0)))
               .array()
               .tanh();
  MatX a = infer_trunk(params_, concat_mat(obs, l));
  if (latent) *latent = std::move(l);
  if (action) *action = std::move(a);
}

GruNet GruNet::create(Rng& rng, int hidden) {
  GruNet net;
  net.hidden_ = hidden;
  const int in = kProprioDim;
  const double bound = std::sqrt(1.0 / in);
  const double hbound = std::sqrt(1.0 / hidden);
  for (const char* gate : {"z", "r", "n"}) {
    net.params_.add(std::string("gru_w") + gate,
                    uniform_init(hidden, in, bound, rng));
    net.params_.add(std::string("gru_u") + gate,
                    uniform_init(hidden, hidden, hbound, rng));
    net.params_.add(std::string("gru_b") + gate, MatX::Zero(hidden, 1));
  }
  net.params_.add("head_w", orthogonal_init(kLatentDim, hidden, 1.0, rng));
  net.params_.add("head_b", MatX::Zero(kLatentDim, 1));
  add_trunk(&net.params_, kObservationDim + kLatentDim, rng);
  return net;
}

ad::GruWeights GruNet::taped_weights() const {
  ad::GruWeights w;
  w.wz = params_.get("gru_wz");
  w.uz = params_.get("gru_uz");
  w.bz = params_.get("gru_bz");
  w.wr = params_.get("gru_wr");
  w.ur = params_.get("gru_ur");
  w.br = params_.get("gru_br");
  w.wn = params_.get("gru_wn");
  w.un = params_.get("gru_un");
  w.bn = params_.get("gru_bn");
  return w;
}

ad::Var GruNet::taped_latent(const ad::Var& hidden_state) const {
  return ad::tanh_op(ad::add_bias(ad::matmul(params_.get("head_w"), hidden_state),
                                  params_.get("head_b")));
}

ad::Var GruNet::taped_action(const ad::Var& obs, const ad::Var& latent) const {
  return taped_trunk(params_, ad::concat_rows(obs, latent));
}

GruNet::State GruNet::initial_state() const {
  return State{VecX::Zero(hidden_)};
}

void GruNet::infer(const VecX& obs, const VecX& h_col, State* state, VecX* latent,
                   VecX* action) const {
  auto mat = [this](const char* n) -> const MatX& { return params_.get(n).value(); };
  auto sig = [](const VecX& v) -> VecX {
    return (1.0 / (1.0 + (-v.array()).exp())).matrix();
  };
  const VecX& h = state->hidden;
  const VecX z = sig(mat("gru_wz") * h_col + mat("gru_uz") * h + mat("gru_bz").col(0));
  const VecX r = sig(mat("gru_wr") * h_col + mat("gru_ur") * h + mat("gru_br").col(0));
  const VecX n = (mat("gru_wn") * h_col +
                  r.cwiseProduct(mat("gru_un") * h + mat("gru_bn").col(0)))
                     .array()
                     .tanh();
  state->hidden = (1.0 - z.array()).matrix().cwiseProduct(n) + z.cwiseProduct(h);
  const VecX l =
      ((mat("head_w") * state->hidden).col(0) + mat("head_b").col(0)).array().tanh();
  if (latent) *latent = l;
  if (action) {
    MatX features(kObservationDim + kLatentDim, 1);
    features.topRows(kObservationDim) = obs;
    features.bottomRows(kLatentDim) = l;
    *action = infer_trunk(params_, features).col(0);
  }
}

DecoderNet DecoderNet::create(Rng& rng) {
  DecoderNet net;
  const int input = kObservationDim + kLatentDim;
  const int output = 2 * kRegressionDims + kContactDims;
  net.params_.add("d1_w",
                  uniform_init(196, input, std::sqrt(1.0 / input), rng));
  net.params_.add("d1_b", MatX::Zero(196, 1));
  net.params_.add("dout_w", uniform_init(output, 196, std::sqrt(1.0 / 196), rng));
  net.params_.add("dout_b", MatX::Zero(output, 1));
  return net;
}

DecoderNet::Taped DecoderNet::forward(const ad::Var& obs, const ad::Var& latent) const {
  ad::Var x = ad::concat_rows(obs, latent);
  ad::Var h = ad::relu(
      ad::add_bias(ad::matmul(params_.get("d1_w"), x), params_.get("d1_b")));
  ad::Var out =
      ad::add_bias(ad::matmul(params_.get("dout_w"), h), params_.get("dout_b"));
  Taped taped;
  taped.mean = ad::slice_rows(out, 0, kRegressionDims);
  taped.log_sigma = ad::slice_rows(out, kRegressionDims, kRegressionDims);
  taped.logits = ad::slice_rows(out, 2 * kRegressionDims, kContactDims);
  return taped;
}

void DecoderNet::infer(const MatX& obs, const MatX& latent, MatX* mean,
                       MatX* log_sigma, MatX* logits) const {
  MatX x = concat_mat(obs, latent);
  MatX h = ((params_.get("d1_w").value() * x).colwise() +
            Eigen::VectorXd(params_.get("d1_b").value().col(0)))
               .cwiseMax(0.0);
  MatX out = (params_.get("dout_w").value() * h).colwise() +
             Eigen::VectorXd(params_.get("dout_b").value().col(0));
  if (mean) *mean = out.topRows(kRegressionDims);
  if (log_sigma) *log_sigma = out.middleRows(kRegressionDims, kRegressionDims);
  if (logits) *logits = out.bottomRows(kContactDims);
}

VecX privileged_regression_part(const VecX& x) {
  VecX out(DecoderNet::kRegressionDims);
  out.head(PrivLayout::kFootContacts) = x.head(PrivLayout::kFootContacts);
  out.tail(kPrivilegedDim - PrivLayout::kFrictions) =
      x.tail(kPrivilegedDim - PrivLayout::kFrictions);
  return out;
}

VecX privileged_contact_part(const VecX& x) {
  return x.segment(PrivLayout::kFootContacts, DecoderNet::kContactDims);
}

MatX privileged_regression_part(const MatX& x) {
  MatX out(DecoderNet::kRegressionDims, x.cols());
  out.topRows(PrivLayout::kFootContacts) = x.topRows(PrivLayout::kFootContacts);
  out.bottomRows(kPrivilegedDim - PrivLayout::kFrictions) =
      x.bottomRows(kPrivilegedDim - PrivLayout::kFrictions);
  return out;
}

MatX privileged_contact_part(const MatX& x) {
  return x.middleRows(PrivLayout::kFootContacts, DecoderNet::kContactDims);
}

int copy_shared_layers(const ParamSet& teacher, ParamSet* student) {
  int copied = 0;
  for (const char* name : {"trunk1_w", "trunk1_b", "trunk2_w", "trunk2_b",
                           "trunk3_w", "trunk3_b", "out_w", "out_b"}) {
    if (!student->has(name)) {
      throw std::invalid_argument(std::string("student missing layer ") + name);
    }
    const ad::Var& src = teacher.get(name);
    ad::Var dst = ad::Var::wrap(student->get(name).node());
    if (src.rows() != dst.rows() || src.cols() != dst.cols()) {
      throw std::invalid_argument(std::string("shape mismatch copying ") + name);
    }
    dst.mutable_value() = src.value();
    ++copied;
  }
  return copied;
}

}  // namespace blindgait
