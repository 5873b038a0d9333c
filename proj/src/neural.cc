// Copyright 2026 The AZAlign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "azalign/neural.h"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>

#include "binary_io.h"

namespace azalign {
namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
using ParamVector = std::vector<T, internal::CacheAlignedAllocator<T>>;

template <typename T>
auto Weight(const ParamVector<T>& p, const typename Network<T>::Layer& l) {
  return Eigen::Map<const Mat<T>>(p.data() + l.weight, l.out, l.in);
}
template <typename T>
auto Bias(const ParamVector<T>& p, const typename Network<T>::Layer& l) {
  return Eigen::Map<const Vec<T>>(p.data() + l.bias, l.out);
}
template <typename T>
auto WeightGrad(std::span<T> g, const typename Network<T>::Layer& l) {
  return Eigen::Map<Mat<T>>(g.data() + l.weight, l.out, l.in);
}
template <typename T>
auto BiasGrad(std::span<T> g, const typename Network<T>::Layer& l) {
  return Eigen::Map<Vec<T>>(g.data() + l.bias, l.out);
}

template <typename Derived>
auto Relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

template <typename Derived>
auto ReluMask(const Eigen::MatrixBase<Derived>& pre) {
  using S = typename Derived::Scalar;
  return (pre.array() > S(0)).template cast<S>().matrix();
}

// Log-probabilities of a masked softmax; illegal entries are -inf.
std::vector<double> MaskedLogSoftmax(const double* logits,
                                     const ActionMask& mask) {
  const int n = mask.size();
  double max_logit = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    if (mask[a]) max_logit = std::max(max_logit, logits[a]);
  }
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    if (mask[a]) sum += std::exp(logits[a] - max_logit);
  }
  const double log_z = max_logit + std::log(sum);
  std::vector<double> out(n, -std::numeric_limits<double>::infinity());
  for (int a = 0; a < n; ++a) {
    if (mask[a]) out[a] = logits[a] - log_z;
  }
  return out;
}

constexpr char kCheckpointMagic[8] = {'A', 'Z', 'N', 'E', 'T', '\0', '\0',
                                      '\0'};
constexpr uint32_t kCheckpointVersion = 1;

}  // namespace

NetConfig NetConfig::ForGame(const GameSpec& spec) {
  NetConfig c;
  c.input_dim = spec.feature_size();
  c.action_count = spec.action_count;
  c.width = 128;
  c.depth = spec.id == GameId::kTicTacToe3 ? 2 : 4;
  c.learning_rate = spec.id == GameId::kTicTacToe3 ? 1e-3 : 1e-4;
  c.l2_lambda = 1e-4;
  return c;
}

void NetConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "invalid net config: " + what);
  };
  if (input_dim < 1) fail("input_dim must be >= 1");
  if (width < 1) fail("width must be >= 1");
  if (depth < 1) fail("depth must be >= 1");
  if (action_count < 1 || action_count > 64) {
    fail("action_count must be in [1, 64]");
  }
  if (!(l2_lambda >= 0.0)) fail("l2_lambda must be >= 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0, 1)");
}

template <typename T>
Network<T>::Network(const NetConfig& config) : Network(config, true) {}

template <typename T>
Network<T> Network<T>::Zeros(const NetConfig& config) {
  return Network(config, false);
}

template <typename T>
Network<T>::Network(const NetConfig& config, bool randomize)
    : config_(config) {
  config_.Validate();
  size_t offset = 0;
  auto pad = [](size_t n) {
    constexpr size_t kStride = 64 / sizeof(T);
    return (n + kStride - 1) / kStride * kStride;
  };
  auto layer = [&offset, &pad](int out, int in) {
    Layer l{offset, pad(offset + static_cast<size_t>(out) * in), out, in};
    offset = pad(l.bias + out);
    return l;
  };
  const int w = config_.width;
  stem_ = layer(w, config_.input_dim);
  for (int d = 0; d < config_.depth; ++d) {
    blocks_.push_back(layer(w, w));
    blocks_.push_back(layer(w, w));
  }
  policy_hidden_ = layer(w, w);
  policy_out_ = layer(config_.action_count, w);
  value_hidden_ = layer(w, w);
  value_out_ = layer(1, w);
  params_.assign(offset, T(0));
  if (!randomize) return;

  Rng rng(config_.seed);
  auto init = [&](const Layer& l) {
    const double bound = std::sqrt(6.0 / l.in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    const size_t end = l.weight + static_cast<size_t>(l.out) * l.in;
    for (size_t i = l.weight; i < end; ++i) params_[i] = T(dist(rng));
  };
  init(stem_);
  for (const Layer& l : blocks_) init(l);
  init(policy_hidden_);
  init(policy_out_);
  init(value_hidden_);
  init(value_out_);
}

template <typename T>
size_t Network<T>::num_trainable() const {
  size_t n = 0;
  auto add = [&n](const Layer& l) {
    n += static_cast<size_t>(l.out) * l.in + l.out;
  };
  add(stem_);
  for (const Layer& l : blocks_) add(l);
  add(policy_hidden_);
  add(policy_out_);
  add(value_hidden_);
  add(value_out_);
  return n;
}

template <typename T>
std::string Network<T>::ParamName(size_t index) const {
  auto in = [index](const Layer& l) {
    return index >= l.weight && index < l.bias + l.out;
  };
  auto kind = [index](const Layer& l) {
    return std::string(index < l.bias ? ".weight" : ".bias");
  };
  if (in(stem_)) return "stem" + kind(stem_);
  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (in(blocks_[i])) {
      return "block" + std::to_string(i / 2) + ".fc" +
             std::to_string(i % 2 + 1) + kind(blocks_[i]);
    }
  }
  if (in(policy_hidden_)) return "policy_hidden" + kind(policy_hidden_);
  if (in(policy_out_)) return "policy_out" + kind(policy_out_);
  if (in(value_hidden_)) return "value_hidden" + kind(value_hidden_);
  if (in(value_out_)) return "value_out" + kind(value_out_);
  return "padding";
}

template <typename T>
void Network<T>::CheckInput(std::span<const float> features) const {
  if (static_cast<int>(features.size()) != config_.input_dim) {
    throw Error(ErrorCode::kInvalidArgument,
                "feature size " + std::to_string(features.size()) +
                    " does not match input_dim " +
                    std::to_string(config_.input_dim));
  }
}

template <typename T>
NetOutput Network<T>::Forward(std::span<const float> features,
                              const ActionMask& mask) const {
  CheckInput(features);
  if (mask.size() != config_.action_count || mask.none()) {
    throw Error(ErrorCode::kInvalidArgument,
                "action mask must have action_count entries with one legal");
  }
  const Vec<T> x = Eigen::Map<const Eigen::VectorXf>(features.data(),
                                                     features.size())
                       .template cast<T>();
  Vec<T> h = Relu(Weight(params_, stem_) * x + Bias(params_, stem_));
  for (size_t i = 0; i < blocks_.size(); i += 2) {
    const Vec<T> a = Relu(Weight(params_, blocks_[i]) * h +
                          Bias(params_, blocks_[i]));
    h = Relu(h + Weight(params_, blocks_[i + 1]) * a +
             Bias(params_, blocks_[i + 1]));
  }
  const Vec<T> ph = Relu(Weight(params_, policy_hidden_) * h +
                         Bias(params_, policy_hidden_));
  const Eigen::VectorXd logits =
      (Weight(params_, policy_out_) * ph + Bias(params_, policy_out_))
          .template cast<double>();
  const Vec<T> vh = Relu(Weight(params_, value_hidden_) * h +
                         Bias(params_, value_hidden_));
  const double v_pre = static_cast<double>(
      (Weight(params_, value_out_) * vh + Bias(params_, value_out_))(0));

  NetOutput out;
  out.policy = MaskedLogSoftmax(logits.data(), mask);
  for (double& p : out.policy) p = std::exp(p);  // exp(-inf) == 0 exactly
  out.value = std::tanh(v_pre);
  return out;
}

template <typename T>
double Network<T>::ForwardValue(std::span<const float> features) const {
  CheckInput(features);
  const Vec<T> x = Eigen::Map<const Eigen::VectorXf>(features.data(),
                                                     features.size())
                       .template cast<T>();
  Vec<T> h = Relu(Weight(params_, stem_) * x + Bias(params_, stem_));
  for (size_t i = 0; i < blocks_.size(); i += 2) {
    const Vec<T> a = Relu(Weight(params_, blocks_[i]) * h +
                          Bias(params_, blocks_[i]));
    h = Relu(h + Weight(params_, blocks_[i + 1]) * a +
             Bias(params_, blocks_[i + 1]));
  }
  const Vec<T> vh = Relu(Weight(params_, value_hidden_) * h +
                         Bias(params_, value_hidden_));
  return std::tanh(static_cast<double>(
      (Weight(params_, value_out_) * vh + Bias(params_, value_out_))(0)));
}

template <typename T>
LossTerms Network<T>::Loss(const std::vector<ReplayEntry>& batch,
                           std::vector<T>* grads) const {
  std::vector<const ReplayEntry*> ptrs;
  ptrs.reserve(batch.size());
  for (const ReplayEntry& e : batch) ptrs.push_back(&e);
  if (grads != nullptr) grads->assign(params_.size(), T(0));
  return Loss(ptrs, grads ? std::span<T>(*grads) : std::span<T>());
}

template <typename T>
LossTerms Network<T>::Loss(std::span<const ReplayEntry* const> batch,
                           std::span<T> grads) const {
  if (batch.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "loss over an empty batch");
  }
  const bool want_grads = !grads.empty();
  if (want_grads && grads.size() != params_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "gradient buffer size mismatch");
  }
  const int n = static_cast<int>(batch.size());
  const int actions = config_.action_count;

  Mat<T> x(config_.input_dim, n);
  for (int j = 0; j < n; ++j) {
    CheckInput(batch[j]->features);
    for (int i = 0; i < config_.input_dim; ++i) {
      x(i, j) = T(batch[j]->features[i]);
    }
  }

  // Forward pass, keeping pre-activations for the backward pass.
  const Mat<T> stem_pre =
      (Weight(params_, stem_) * x).colwise() + Bias(params_, stem_);
  std::vector<Mat<T>> h_in;     // block inputs
  std::vector<Mat<T>> a_pre;    // first linear pre-activation
  std::vector<Mat<T>> a_post;
  std::vector<Mat<T>> s_pre;    // residual sum before ReLU
  Mat<T> h = Relu(stem_pre);
  for (size_t i = 0; i < blocks_.size(); i += 2) {
    h_in.push_back(h);
    a_pre.push_back((Weight(params_, blocks_[i]) * h).colwise() +
                    Bias(params_, blocks_[i]));
    a_post.push_back(Relu(a_pre.back()));
    s_pre.push_back(h + ((Weight(params_, blocks_[i + 1]) * a_post.back())
                             .colwise() +
                         Bias(params_, blocks_[i + 1])));
    h = Relu(s_pre.back());
  }
  const Mat<T> ph_pre = (Weight(params_, policy_hidden_) * h).colwise() +
                        Bias(params_, policy_hidden_);
  const Mat<T> ph = Relu(ph_pre);
  const Eigen::MatrixXd logits =
      ((Weight(params_, policy_out_) * ph).colwise() +
       Bias(params_, policy_out_))
          .template cast<double>();
  const Mat<T> vh_pre = (Weight(params_, value_hidden_) * h).colwise() +
                        Bias(params_, value_hidden_);
  const Mat<T> vh = Relu(vh_pre);
  const Eigen::MatrixXd v_pre =
      ((Weight(params_, value_out_) * vh).colwise() +
       Bias(params_, value_out_))
          .template cast<double>();

  LossTerms terms;
  Mat<T> d_logits = Mat<T>::Zero(actions, n);
  Mat<T> d_vpre(1, n);
  for (int j = 0; j < n; ++j) {
    const ReplayEntry& e = *batch[j];
    if (static_cast<int>(e.target_policy.size()) != actions ||
        e.legal_mask.size() != actions) {
      throw Error(ErrorCode::kInvalidArgument,
                  "replay entry policy/mask size mismatch");
    }
    const std::vector<double> logp =
        MaskedLogSoftmax(logits.col(j).data(), e.legal_mask);
    for (int a = 0; a < actions; ++a) {
      if (!e.legal_mask[a]) continue;
      if (e.target_policy[a] > 0.0) {
        terms.policy -= e.target_policy[a] * logp[a];
      }
      d_logits(a, j) = T((std::exp(logp[a]) - e.target_policy[a]) / n);
    }
    const double v = std::tanh(v_pre(0, j));
    terms.value += (e.target_z - v) * (e.target_z - v);
    d_vpre(0, j) = T(2.0 * (v - e.target_z) * (1.0 - v * v) / n);
  }
  terms.value /= n;
  terms.policy /= n;
  double sq = 0.0;
  for (T p : params_) sq += static_cast<double>(p) * p;
  terms.l2 = config_.l2_lambda * sq;

  if (!want_grads) return terms;

  // Accumulate into aligned scratch; the caller's buffer may sit anywhere.
  ParamVector<T> scratch(params_.size(), T(0));
  std::span<T> g(scratch);
  auto accumulate = [&](const Layer& l, const Mat<T>& d_out,
                        const Mat<T>& input) {
    WeightGrad(g, l).noalias() += d_out * input.transpose();
    BiasGrad(g, l) += d_out.rowwise().sum();
  };

  // Value head.
  accumulate(value_out_, d_vpre, vh);
  const Mat<T> d_vh = (Weight(params_, value_out_).transpose() * d_vpre)
                          .cwiseProduct(ReluMask(vh_pre));
  accumulate(value_hidden_, d_vh, h);
  Mat<T> d_h = Weight(params_, value_hidden_).transpose() * d_vh;

  // Policy head.
  accumulate(policy_out_, d_logits, ph);
  const Mat<T> d_ph = (Weight(params_, policy_out_).transpose() * d_logits)
                          .cwiseProduct(ReluMask(ph_pre));
  accumulate(policy_hidden_, d_ph, h);
  d_h.noalias() += Weight(params_, policy_hidden_).transpose() * d_ph;

  // Residual blocks, last to first.
  for (int b = static_cast<int>(h_in.size()) - 1; b >= 0; --b) {
    const Layer& fc1 = blocks_[2 * b];
    const Layer& fc2 = blocks_[2 * b + 1];
    const Mat<T> d_s = d_h.cwiseProduct(ReluMask(s_pre[b]));
    accumulate(fc2, d_s, a_post[b]);
    const Mat<T> d_a = (Weight(params_, fc2).transpose() * d_s)
                           .cwiseProduct(ReluMask(a_pre[b]));
    accumulate(fc1, d_a, h_in[b]);
    d_h = d_s + Weight(params_, fc1).transpose() * d_a;
  }

  const Mat<T> d_stem = d_h.cwiseProduct(ReluMask(stem_pre));
  accumulate(stem_, d_stem, x);

  const T l2_scale = T(2.0 * config_.l2_lambda);
  for (size_t i = 0; i < params_.size(); ++i) {
    grads[i] = scratch[i] + l2_scale * params_[i];
  }
  return terms;
}

template class Network<float>;
template class Network<double>;

template <typename T>
void SgdMomentum<T>::Step(Network<T>& net, std::span<const T> grads) {
  std::span<T> params = net.params();
  if (grads.size() != params.size() || velocity_.size() != params.size()) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer size mismatch");
  }
  for (size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(static_cast<double>(grads[i]))) {
      std::ostringstream msg;
      msg << "training diverged: non-finite gradient " << grads[i]
          << " at parameter " << i << " (" << net.ParamName(i)
          << "), value " << params[i] << ", velocity " << velocity_[i];
      throw Error(ErrorCode::kDivergence, msg.str());
    }
  }
  const T mu = T(momentum_);
  const T lr = T(learning_rate_);
  for (size_t i = 0; i < grads.size(); ++i) {
    velocity_[i] = mu * velocity_[i] + grads[i];
    params[i] -= lr * velocity_[i];
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(static_cast<double>(params[i]))) {
      std::ostringstream msg;
      msg << "training diverged: parameter " << i << " (" << net.ParamName(i)
          << ") became " << params[i] << " after a step";
      throw Error(ErrorCode::kDivergence, msg.str());
    }
  }
}

template class SgdMomentum<float>;
template class SgdMomentum<double>;

void SaveCheckpoint(const Net& net, const std::string& game,
                    const std::string& path) {
  const NetConfig& c = net.config();
  internal::BinaryWriter w(path);
  w.PutBytes(std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic)));
  w.Put<uint32_t>(kCheckpointVersion);
  w.PutFixedString(game, 16);
  w.Put<uint32_t>(c.input_dim);
  w.Put<uint32_t>(c.width);
  w.Put<uint32_t>(c.depth);
  w.Put<uint32_t>(c.action_count);
  w.Put<double>(c.l2_lambda);
  w.Put<double>(c.learning_rate);
  w.Put<double>(c.momentum);
  w.Put<uint64_t>(c.seed);
  w.Put<uint64_t>(net.num_params());
  for (float p : net.params()) w.Put<float>(p);
  w.Close();
}

Checkpoint LoadCheckpoint(const std::string& path) {
  internal::BinaryReader r(path);
  if (r.GetBytes(sizeof(kCheckpointMagic)) !=
      std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw Error(ErrorCode::kFormat, "'" + path + "' is not a checkpoint");
  }
  const uint32_t version = r.Get<uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kFormat,
                "'" + path + "' has checkpoint version " +
                    std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  }
  std::string game = r.GetFixedString(16);
  NetConfig c;
  c.input_dim = static_cast<int>(r.Get<uint32_t>());
  c.width = static_cast<int>(r.Get<uint32_t>());
  c.depth = static_cast<int>(r.Get<uint32_t>());
  c.action_count = static_cast<int>(r.Get<uint32_t>());
  c.l2_lambda = r.Get<double>();
  c.learning_rate = r.Get<double>();
  c.momentum = r.Get<double>();
  c.seed = r.Get<uint64_t>();
  try {
    c.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormat, "'" + path + "': " + e.what());
  }
  const uint64_t count = r.Get<uint64_t>();
  Net net = Net::Zeros(c);
  if (count != net.num_params()) {
    throw Error(ErrorCode::kFormat,
                "'" + path + "' stores " + std::to_string(count) +
                    " parameters but its config needs " +
                    std::to_string(net.num_params()));
  }
  for (float& p : net.params()) p = r.Get<float>();
  if (!r.AtEnd()) {
    throw Error(ErrorCode::kFormat, "'" + path + "' has trailing bytes");
  }
  return Checkpoint{std::move(game), std::move(net)};
}

Checkpoint LoadCheckpoint(const std::string& path, const NetConfig& expected) {
  Checkpoint ckpt = LoadCheckpoint(path);
  const NetConfig& c = ckpt.net.config();
  std::string diff;
  auto check = [&diff](const char* name, auto got, auto want) {
    if (got != want) {
      std::ostringstream s;
      s << (diff.empty() ? "" : ", ") << name << " is " << got
        << " (expected " << want << ")";
      diff += s.str();
    }
  };
  check("input_dim", c.input_dim, expected.input_dim);
  check("width", c.width, expected.width);
  check("depth", c.depth, expected.depth);
  check("action_count", c.action_count, expected.action_count);
  if (!diff.empty()) {
    throw Error(ErrorCode::kFormat,
                "checkpoint '" + path + "' does not match config: " + diff);
  }
  return ckpt;
}

Evaluation NetworkEvaluator::Evaluate(const GameState& state) const {
  return net_->Forward(Encode(state), LegalActions(state));
}

double NetworkEvaluator::Value(const GameState& state) const {
  return net_->ForwardValue(Encode(state));
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw Error(ErrorCode::kInvalidArgument, "replay capacity must be > 0");
  }
  entries_.reserve(std::min<size_t>(capacity, 1 << 16));
}

void ReplayBuffer::Add(ReplayEntry entry) {
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(entry));
  } else {
    entries_[next_] = std::move(entry);
  }
  next_ = (next_ + 1) % capacity_;
  ++total_added_;
}

std::vector<const ReplayEntry*> ReplayBuffer::Sample(size_t n,
                                                     Rng& rng) const {
  if (entries_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sampling an empty replay buffer");
  }
  std::uniform_int_distribution<size_t> pick(0, entries_.size() - 1);
  std::vector<const ReplayEntry*> out(n);
  for (auto& p : out) p = &entries_[pick(rng)];
  return out;
}

}  // namespace azalign
