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

#include "azalign/evaluator.h"

namespace azalign {

std::vector<double> UniformPolicy(const ActionMask& mask) {
  std::vector<double> p(mask.size(), 0.0);
  const double share = 1.0 / mask.count();
  for (Action a : mask.actions()) p[a] = share;
  return p;
}

Evaluation UniformEvaluator::Evaluate(const GameState& state) const {
  return Evaluation{UniformPolicy(LegalActions(state)), 0.0};
}

}  // namespace azalign
