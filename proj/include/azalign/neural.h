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

// Two-headed policy/value network over the flat board encoding.
//
// Trunk: Linear(input -> width) + ReLU, then `depth` residual blocks
// h <- ReLU(h + Linear(ReLU(Linear(h)))). Policy head: Linear + ReLU +
// Linear to logits, masked softmax. Value head: Linear + ReLU + Linear,
// tanh. All parameters live in one flat vector so the optimizer, gradient
// checks and checkpoints operate on a single buffer.

#ifndef AZALIGN_NEURAL_H_
#define AZALIGN_NEURAL_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "azalign/common.h"
#include "azalign/evaluator.h"
#include "azalign/game.h"

namespace azalign {
namespace internal {

template <typename T>
struct CacheAlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};
  CacheAlignedAllocator() = default;
  template <typename U>
  CacheAlignedAllocator(const CacheAlignedAllocator<U>&) {}
  T* allocate(size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
  }
  void deallocate(T* p, size_t) { ::operator delete(p, kAlign); }
  template <typename U>
  bool operator==(const CacheAlignedAllocator<U>&) const { return true; }
};

}  // namespace internal

struct NetConfig {
  int input_dim = 27;
  int width = 128;
  int depth = 2;
  int action_count = 9;
  double l2_lambda = 1e-4;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  uint64_t seed = 0;

  // Per-game defaults: width 128, depth 2 for ttt3 and 4 otherwise, learning
  // rate 1e-3 for ttt3 and 1e-4 otherwise, lambda 1e-4.
  static NetConfig ForGame(const GameSpec& spec);
  // Throws Error(kInvalidArgument) naming the offending field.
  void Validate() const;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

using NetOutput = Evaluation;

struct ReplayEntry {
  FeatureTensor features;
  std::vector<double> target_policy;  // zero on illegal actions, sums to 1
  double target_z = 0.0;              // outcome for the player to move
  ActionMask legal_mask;
};

struct LossTerms {
  double value = 0.0;   // mean (z - v)^2
  double policy = 0.0;  // mean -pi . log p
  double l2 = 0.0;      // lambda * ||theta||^2
  double total() const { return value + policy + l2; }
};

template <typename T>
class Network {
 public:
  // He-uniform weights drawn from `config.seed`, zero biases.
  explicit Network(const NetConfig& config);
  static Network Zeros(const NetConfig& config);

  const NetConfig& config() const { return config_; }
  // Storage size, including zero padding between layers. Gradient and
  // velocity buffers use this size.
  size_t num_params() const { return params_.size(); }
  // Weights and biases only.
  size_t num_trainable() const;
  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }
  // Name of the layer tensor that owns parameter `index`, for diagnostics.
  std::string ParamName(size_t index) const;

  // Masked softmax policy (exact zeros on illegal actions) and tanh value.
  // Throws Error(kInvalidArgument) on dimension mismatch or empty mask.
  NetOutput Forward(std::span<const float> features,
                    const ActionMask& mask) const;
  // Value head only.
  double ForwardValue(std::span<const float> features) const;

  // Mean loss over `batch` plus the L2 term. When `grads` is non-empty it
  // receives d(loss)/d(params). Throws Error(kInvalidArgument) on an empty
  // batch.
  LossTerms Loss(std::span<const ReplayEntry* const> batch,
                 std::span<T> grads) const;
  LossTerms Loss(const std::vector<ReplayEntry>& batch,
                 std::vector<T>* grads) const;

  struct Layer {
    size_t weight;  // offset of the out x in column-major weight matrix
    size_t bias;
    int out;
    int in;
  };

 private:
  Network(const NetConfig& config, bool randomize);
  void CheckInput(std::span<const float> features) const;

  NetConfig config_;
  // Cache-line aligned with every layer starting on a 64-byte boundary, so
  // Eigen's vectorized kernels see the same alignment on every run and the
  // float summation order does not depend on where the heap put the buffer.
  std::vector<T, internal::CacheAlignedAllocator<T>> params_;
  Layer stem_;
  std::vector<Layer> blocks_;  // two per residual block
  Layer policy_hidden_, policy_out_, value_hidden_, value_out_;
};

extern template class Network<float>;
extern template class Network<double>;

using Net = Network<float>;

// Stochastic gradient descent with momentum:
//   velocity <- momentum * velocity + grad;  params -= lr * velocity.
template <typename T>
class SgdMomentum {
 public:
  SgdMomentum(double learning_rate, double momentum, size_t num_params)
      : learning_rate_(learning_rate), momentum_(momentum),
        velocity_(num_params, T(0)) {}

  // Throws Error(kDivergence) naming the first non-finite gradient or
  // parameter; `params` is left unmodified in the gradient case.
  void Step(Network<T>& net, std::span<const T> grads);
  std::span<const T> velocity() const { return velocity_; }

 private:
  double learning_rate_;
  double momentum_;
  std::vector<T> velocity_;
};

extern template class SgdMomentum<float>;
extern template class SgdMomentum<double>;

// Checkpoint file, little-endian:
//   "AZNET\0\0\0" | u32 version | char[16] game | u32 input_dim | u32 width
//   | u32 depth | u32 action_count | f64 l2_lambda | f64 learning_rate
//   | f64 momentum | u64 seed | u64 param_count | f32 x param_count
void SaveCheckpoint(const Net& net, const std::string& game,
                    const std::string& path);

struct Checkpoint {
  std::string game;
  Net net;
};
// Throws Error(kIo) / Error(kFormat) on unreadable or corrupt files.
Checkpoint LoadCheckpoint(const std::string& path);
// Also throws Error(kFormat) naming every field that differs from `expected`.
Checkpoint LoadCheckpoint(const std::string& path, const NetConfig& expected);

// Adapts a network snapshot to the search Evaluator interface.
class NetworkEvaluator : public Evaluator {
 public:
  explicit NetworkEvaluator(std::shared_ptr<const Net> net)
      : net_(std::move(net)) {}
  Evaluation Evaluate(const GameState& state) const override;
  double Value(const GameState& state) const override;
  const Net& net() const { return *net_; }

 private:
  std::shared_ptr<const Net> net_;
};

// Fixed-capacity FIFO of training examples.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);
  void Add(ReplayEntry entry);
  // Uniform with replacement. Throws Error(kInvalidArgument) when empty.
  std::vector<const ReplayEntry*> Sample(size_t n, Rng& rng) const;
  size_t size() const { return entries_.size(); }
  size_t capacity() const { return capacity_; }
  uint64_t total_added() const { return total_added_; }
  const ReplayEntry& operator[](size_t i) const { return entries_[i]; }

 private:
  size_t capacity_;
  size_t next_ = 0;
  uint64_t total_added_ = 0;
  std::vector<ReplayEntry> entries_;
};

}  // namespace azalign

#endif  // AZALIGN_NEURAL_H_
