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

// Exact game-tree values by depth-first negamax over a transposition table.
// All values are from the perspective of the player to move.

#ifndef AZALIGN_ORACLE_H_
#define AZALIGN_ORACLE_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "azalign/common.h"
#include "azalign/evaluator.h"
#include "azalign/game.h"

namespace azalign {

struct SolvedEntry {
  HashKey key;
  int8_t value = 0;              // -1, 0 or +1
  uint32_t optimal_actions = 0;  // bitmask over action indices
  // Plies to the end of the game under optimal play: fastest win, slowest
  // loss, longest draw.
  uint8_t depth_to_outcome = 0;

  bool IsOptimal(Action a) const { return (optimal_actions >> a) & 1u; }
  std::vector<Action> OptimalActions() const;
  friend bool operator==(const SolvedEntry&, const SolvedEntry&) = default;
};

class StateTable {
 public:
  explicit StateTable(GameId game) : game_(game) {}

  const GameSpec& spec() const { return GameSpec::Get(game_); }
  size_t size() const { return entries_.size(); }

  const SolvedEntry* Find(const HashKey& key) const;
  // Throws Error(kCoverage) when the state was never solved.
  const SolvedEntry& At(const GameState& state) const;
  void Insert(const SolvedEntry& entry) { entries_[entry.key] = entry; }

  // Training visitation counts keyed like the entries.
  uint64_t Visits(const HashKey& key) const;
  void AddVisits(const HashKey& key, uint64_t n) { visits_[key] += n; }
  const std::unordered_map<HashKey, uint64_t, HashKeyHash>& visits() const {
    return visits_;
  }
  void ClearVisits() { visits_.clear(); }

  // Entries sorted by key; the order used for persistence.
  std::vector<SolvedEntry> SortedEntries() const;

  // Binary format, little-endian:
  //   "AZTABLE\0" | u32 version | char[16] game | u64 entries | u64 visits
  //   entries x { u64 key.hi, u64 key.lo, i8 value, u8 depth, u16 0,
  //               u32 optimal_mask }
  //   visits  x { u64 key.hi, u64 key.lo, u64 count }
  // Records are sorted by key so equal tables give identical bytes.
  void Save(const std::string& path) const;
  static StateTable Load(const std::string& path);

 private:
  GameId game_;
  std::unordered_map<HashKey, SolvedEntry, HashKeyHash> entries_;
  std::unordered_map<HashKey, uint64_t, HashKeyHash> visits_;
};

inline constexpr size_t kDefaultSolveBudget = 20'000'000;

// Solves every state reachable from `root`. Throws Error(kResourceExhausted)
// once more than `max_entries` states would be stored.
StateTable Solve(const GameSpec& spec, const GameState& root,
                 size_t max_entries = kDefaultSolveBudget);

// Exact solver for single late-game positions. Solved subtrees are cached
// across calls; the budget bounds the cache.
class EndgameSolver {
 public:
  explicit EndgameSolver(const GameSpec& spec,
                         size_t max_entries = 2'000'000);

  // Throws Error(kResourceExhausted) if the subtree does not fit.
  SolvedEntry Solve(const GameState& state);
  int Value(const GameState& state) { return Solve(state).value; }

  size_t cache_size() const { return table_.size(); }

 private:
  size_t max_entries_;
  StateTable table_;
};

// Uniform choice among the table's optimal actions for `state`.
// Throws Error(kCoverage) if the state is missing.
Action OracleOpponent(const GameState& state, const StateTable& table,
                      Rng& rng);

// All states reachable from the initial position, breadth-first with
// actions in ascending order, including terminal states.
std::vector<GameState> EnumerateStates(const GameSpec& spec,
                                       size_t max_states = 2'000'000);

enum class OraclePrior {
  kUniform,  // uniform over legal actions
  kOptimal,  // uniform over the optimal actions
};

// Exact table value with a uniform prior. Stands in for a network when
// search correctness is tested in isolation; kOptimal makes it a perfect
// network.
class OracleEvaluator : public Evaluator {
 public:
  explicit OracleEvaluator(const StateTable& table,
                           OraclePrior prior = OraclePrior::kUniform)
      : table_(table), prior_(prior) {}
  Evaluation Evaluate(const GameState& state) const override;

 private:
  const StateTable& table_;
  OraclePrior prior_;
};

}  // namespace azalign

#endif  // AZALIGN_ORACLE_H_
