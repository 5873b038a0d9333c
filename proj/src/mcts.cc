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

#include "azalign/mcts.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace azalign {
namespace {

SearchNode MakeNode(const GameState& state) {
  SearchNode node{state, CanonicalKey(state), false, 0.0, {}, {}};
  if (auto v = TerminalValue(state)) {
    node.terminal = true;
    node.terminal_value = *v;
  }
  return node;
}

void SetPriors(SearchNode& node, const std::vector<double>& policy) {
  const ActionMask legal = LegalActions(node.state);
  double mass = 0.0;
  for (Action a : legal.actions()) mass += policy[a];
  for (Action a : legal.actions()) {
    EdgeStats e;
    e.action = a;
    e.prior = mass > 0.0 ? policy[a] / mass : 1.0 / legal.count();
    node.edges.push_back(e);
  }
  node.children.assign(node.edges.size(), -1);
}

void AddDirichletNoise(SearchNode& node, const SearchConfig& cfg, Rng& rng) {
  const double alpha = cfg.dirichlet_alpha > 0.0
                           ? cfg.dirichlet_alpha
                           : 10.0 / node.state.spec().action_count;
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> noise(node.edges.size());
  double sum = 0.0;
  for (double& n : noise) sum += (n = gamma(rng));
  if (sum <= 0.0) return;
  for (size_t i = 0; i < noise.size(); ++i) {
    EdgeStats& e = node.edges[i];
    e.prior = (1.0 - cfg.dirichlet_fraction) * e.prior +
              cfg.dirichlet_fraction * noise[i] / sum;
  }
}

// argmax_a Q + c P sqrt(sum_b N_b) / (1 + N_a); ties go to the larger prior,
// then the lower action.
int SelectEdge(const SearchNode& node, double c_puct) {
  const double sqrt_total = std::sqrt(static_cast<double>(node.TotalVisits()));
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < node.edges.size(); ++i) {
    const EdgeStats& e = node.edges[i];
    const double score =
        e.mean_value + c_puct * e.prior * sqrt_total / (1.0 + e.visits);
    if (score > best_score ||
        (score == best_score && e.prior > node.edges[best].prior)) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

SearchConfig SearchConfig::ForGame(const GameSpec& spec) {
  SearchConfig c;
  switch (spec.id) {
    case GameId::kTicTacToe3:
      c.num_simulations = 25;
      c.temperature_drop_ply = 5;
      break;
    case GameId::kTicTacToe4:
      c.num_simulations = 25;
      c.temperature_drop_ply = 9;
      break;
    case GameId::kConnectFour:
      c.num_simulations = 50;
      c.temperature_drop_ply = 21;
      break;
  }
  return c;
}

SearchConfig SearchConfig::ForEvaluation() const {
  SearchConfig c = *this;
  c.temperature = 0.0;
  c.root_noise = false;
  return c;
}

void SearchConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "invalid search config: " + what);
  };
  if (num_simulations < 1) fail("num_simulations must be >= 1");
  if (!(c_puct >= 0.0)) fail("c_puct must be >= 0");
  if (temperature_drop_ply < 0) fail("temperature_drop_ply must be >= 0");
  if (dirichlet_alpha < 0.0) fail("dirichlet_alpha must be >= 0");
  if (!(dirichlet_fraction >= 0.0 && dirichlet_fraction <= 1.0)) {
    fail("dirichlet_fraction must be in [0, 1]");
  }
}

int SearchNode::TotalVisits() const {
  int n = 0;
  for (const EdgeStats& e : edges) n += e.visits;
  return n;
}

SearchTree RunSearch(const GameState& root, const Evaluator& evaluator,
                     const SearchConfig& cfg, Rng& rng) {
  cfg.Validate();
  if (IsTerminal(root)) {
    throw Error(ErrorCode::kInvalidArgument, "search from a terminal state");
  }
  SearchTree tree;
  tree.nodes_.reserve(cfg.num_simulations + 1);
  tree.nodes_.push_back(MakeNode(root));
  SetPriors(tree.nodes_[0], evaluator.Evaluate(root).policy);
  ++tree.evaluations_;
  if (cfg.root_noise) AddDirichletNoise(tree.nodes_[0], cfg, rng);

  std::vector<std::pair<int, int>> path;  // (node, edge)
  for (int sim = 0; sim < cfg.num_simulations; ++sim) {
    path.clear();
    int current = 0;
    double leaf_value = 0.0;
    while (true) {
      const int edge = SelectEdge(tree.nodes_[current], cfg.c_puct);
      path.emplace_back(current, edge);
      const int child = tree.nodes_[current].children[edge];
      if (child < 0) {
        const SearchNode& parent = tree.nodes_[current];
        SearchNode fresh =
            MakeNode(Apply(parent.state, parent.edges[edge].action));
        if (fresh.terminal) {
          leaf_value = fresh.terminal_value;
        } else {
          Evaluation eval = evaluator.Evaluate(fresh.state);
          ++tree.evaluations_;
          SetPriors(fresh, eval.policy);
          leaf_value = eval.value;
        }
        tree.nodes_.push_back(std::move(fresh));
        tree.nodes_[current].children[edge] =
            static_cast<int>(tree.nodes_.size()) - 1;
        break;
      }
      if (tree.nodes_[child].terminal) {
        leaf_value = tree.nodes_[child].terminal_value;
        break;
      }
      current = child;
    }
    // leaf_value is for the player to move at the leaf; each edge above it
    // belongs to the opponent of the node below.
    double v = leaf_value;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      v = -v;
      EdgeStats& e = tree.nodes_[it->first].edges[it->second];
      e.visits += 1;
      e.total_value += v;
      e.mean_value = e.total_value / e.visits;
    }
  }
  return tree;
}

std::vector<double> SearchPolicy(const std::vector<int>& visits,
                                 double temperature) {
  int total = 0;
  int max_visits = 0;
  size_t argmax = 0;
  for (size_t a = 0; a < visits.size(); ++a) {
    total += visits[a];
    if (visits[a] > max_visits) {
      max_visits = visits[a];
      argmax = a;
    }
  }
  if (total <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "search policy with no visits");
  }
  std::vector<double> pi(visits.size(), 0.0);
  if (temperature <= 0.0) {
    pi[argmax] = 1.0;
    return pi;
  }
  // Normalizing by the max count keeps N^(1/tau) in range for small tau.
  double sum = 0.0;
  for (size_t a = 0; a < visits.size(); ++a) {
    if (visits[a] > 0) {
      pi[a] = std::pow(static_cast<double>(visits[a]) / max_visits,
                       1.0 / temperature);
      sum += pi[a];
    }
  }
  for (double& p : pi) p /= sum;
  return pi;
}

std::vector<double> SearchPolicy(const SearchNode& node, int action_count,
                                 double temperature) {
  std::vector<int> visits(action_count, 0);
  for (const EdgeStats& e : node.edges) visits[e.action] = e.visits;
  return SearchPolicy(visits, temperature);
}

double RootValue(const SearchNode& node) {
  double w = 0.0;
  int n = 0;
  for (const EdgeStats& e : node.edges) {
    w += e.total_value;
    n += e.visits;
  }
  if (n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "root value with no visits");
  }
  return w / n;
}

std::string DumpEdgesJson(const SearchNode& node) {
  nlohmann::json edges = nlohmann::json::array();
  for (const EdgeStats& e : node.edges) {
    edges.push_back({{"action", e.action},
                     {"N", e.visits},
                     {"W", e.total_value},
                     {"Q", e.mean_value},
                     {"P", e.prior}});
  }
  return edges.dump();
}

}  // namespace azalign
