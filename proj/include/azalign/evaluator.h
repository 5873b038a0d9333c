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

#ifndef AZALIGN_EVALUATOR_H_
#define AZALIGN_EVALUATOR_H_

#include <vector>

#include "azalign/game.h"

namespace azalign {

// Policy over the full action space (zero on illegal actions) and a value
// in [-1, 1] for the player to move.
struct Evaluation {
  std::vector<double> policy;
  double value = 0.0;
};

// Anything that can stand where the network stands during search. Must be
// safe to call concurrently.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  // `state` is non-terminal.
  virtual Evaluation Evaluate(const GameState& state) const = 0;
  virtual double Value(const GameState& state) const {
    return Evaluate(state).value;
  }
};

// Uniform over legal actions, value 0.
class UniformEvaluator : public Evaluator {
 public:
  Evaluation Evaluate(const GameState& state) const override;
};

std::vector<double> UniformPolicy(const ActionMask& mask);

}  // namespace azalign

#endif  // AZALIGN_EVALUATOR_H_
