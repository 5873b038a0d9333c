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

// PUCT Monte-Carlo tree search.
//
// Values are negamax style: every node value is for the player to move at
// that node, and an edge (s, a) accumulates values from the perspective of
// the player to move at s.
//
// Visit accounting: the root is expanded before the first simulation. Each
// simulation then adds exactly one visit to every edge on its path, so the
// root edges sum to num_simulations and a non-root node reached through an
// edge with N visits has children summing to N - 1 (the expanding visit
// stops at the node itself). Terminal nodes are never expanded; revisits
// back up their exact outcome again without calling the evaluator.

#ifndef AZALIGN_MCTS_H_
#define AZALIGN_MCTS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "azalign/common.h"
#include "azalign/evaluator.h"
#include "azalign/game.h"

namespace azalign {

struct SearchConfig {
  int num_simulations = 25;
  double c_puct = 2.0;
  // Action-selection temperature before temperature_drop_ply; greedy after.
  // A temperature <= 0 means greedy throughout.
  double temperature = 1.0;
  int temperature_drop_ply = 5;
  bool root_noise = false;
  double dirichlet_alpha = 0.0;  // 0 selects 10 / action_count
  double dirichlet_fraction = 0.25;

  // 25 simulations (50 for connect4), c = 2.0, tau drop after 5/9/21 plies.
  static SearchConfig ForGame(const GameSpec& spec);
  // Greedy, noise-free copy used at evaluation time.
  SearchConfig ForEvaluation() const;
  void Validate() const;
};

struct EdgeStats {
  Action action = 0;
  int visits = 0;
  double total_value = 0.0;
  double mean_value = 0.0;
  double prior = 0.0;
};

struct SearchNode {
  GameState state;
  HashKey key;
  bool terminal = false;
  double terminal_value = 0.0;
  std::vector<EdgeStats> edges;  // legal actions, ascending
  std::vector<int> children;     // parallel to edges, -1 until visited

  int TotalVisits() const;
};

class SearchTree {
 public:
  const SearchNode& root() const { return nodes_.front(); }
  const SearchNode& node(int index) const { return nodes_[index]; }
  size_t size() const { return nodes_.size(); }
  // Evaluator calls made, including the root expansion.
  int evaluations() const { return evaluations_; }

 private:
  friend SearchTree RunSearch(const GameState&, const Evaluator&,
                              const SearchConfig&, Rng&);
  std::vector<SearchNode> nodes_;
  int evaluations_ = 0;
};

// Runs cfg.num_simulations simulations from `root`. `rng` is only drawn from
// when root noise is enabled. Throws Error(kInvalidArgument) for a terminal
// root.
SearchTree RunSearch(const GameState& root, const Evaluator& evaluator,
                     const SearchConfig& cfg, Rng& rng);

// pi(a) proportional to N(a)^(1/temperature); temperature <= 0 gives a
// one-hot on the most visited action, lowest index on ties. Throws
// Error(kInvalidArgument) when the node has no visits.
std::vector<double> SearchPolicy(const SearchNode& node, int action_count,
                                 double temperature);
std::vector<double> SearchPolicy(const std::vector<int>& visits,
                                 double temperature);

// Visit-weighted mean of the root edge values, for the player to move.
double RootValue(const SearchNode& node);

// JSON array of {action, N, W, Q, P} for each edge of `node`.
std::string DumpEdgesJson(const SearchNode& node);

}  // namespace azalign

#endif  // AZALIGN_MCTS_H_
