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

#ifndef AZALIGN_COMMON_H_
#define AZALIGN_COMMON_H_

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace azalign {

// Error categories surfaced through the C API as status codes.
enum class ErrorCode {
  kInvalidArgument = 1,
  kRuleViolation = 2,
  kResourceExhausted = 3,
  kIo = 4,
  kFormat = 5,
  kCoverage = 6,
  kDivergence = 7,
  kInternal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Every stochastic component takes one of these explicitly; there is no
// global generator.
using Rng = std::mt19937_64;

// Derives an independent stream seed from a base seed and a stream index
// (splitmix64 finalizer).
inline uint64_t DeriveSeed(uint64_t base, uint64_t stream) {
  uint64_t z = base + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Collision-free identity of a position: the two piece bitboards plus the
// side to move. Boards have at most 42 cells so the turn bit fits in `lo`.
struct HashKey {
  uint64_t hi = 0;
  uint64_t lo = 0;

  friend bool operator==(const HashKey&, const HashKey&) = default;
  friend auto operator<=>(const HashKey&, const HashKey&) = default;
  std::string ToHex() const;
  static HashKey FromHex(const std::string& hex);
};

struct HashKeyHash {
  size_t operator()(const HashKey& k) const {
    return static_cast<size_t>(DeriveSeed(k.hi, k.lo));
  }
};

}  // namespace azalign

#endif  // AZALIGN_COMMON_H_
