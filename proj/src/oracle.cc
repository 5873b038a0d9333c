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

#include "azalign/oracle.h"

#include <algorithm>
#include <bit>
#include <deque>
#include <unordered_set>

#include "binary_io.h"

namespace azalign {
namespace {

constexpr char kTableMagic[8] = {'A', 'Z', 'T', 'A', 'B', 'L', 'E', '\0'};
constexpr uint32_t kTableVersion = 1;

// Depth-first negamax filling `table` with every state below `state`.
SolvedEntry SolveInto(const GameState& state, StateTable& table,
                      size_t max_entries) {
  const HashKey key = CanonicalKey(state);
  if (const SolvedEntry* hit = table.Find(key)) return *hit;

  SolvedEntry entry;
  entry.key = key;
  if (auto terminal = TerminalValue(state)) {
    entry.value = static_cast<int8_t>(*terminal);
  } else {
    int best = -2;
    int best_depth = 0;
    for (Action a : LegalActions(state).actions()) {
      const SolvedEntry child = SolveInto(Apply(state, a), table, max_entries);
      const int v = -child.value;
      const int d = child.depth_to_outcome + 1;
      if (v > best) {
        best = v;
        best_depth = d;
        entry.optimal_actions = uint32_t{1} << a;
      } else if (v == best) {
        entry.optimal_actions |= uint32_t{1} << a;
        best_depth = v > 0 ? std::min(best_depth, d) : std::max(best_depth, d);
      }
    }
    entry.value = static_cast<int8_t>(best);
    entry.depth_to_outcome = static_cast<uint8_t>(best_depth);
  }
  if (table.size() >= max_entries) {
    throw Error(ErrorCode::kResourceExhausted,
                "solver budget of " + std::to_string(max_entries) +
                    " states exceeded");
  }
  table.Insert(entry);
  return entry;
}

}  // namespace

std::vector<Action> SolvedEntry::OptimalActions() const {
  std::vector<Action> out;
  for (uint32_t b = optimal_actions; b; b &= b - 1) {
    out.push_back(std::countr_zero(b));
  }
  return out;
}

const SolvedEntry* StateTable::Find(const HashKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

const SolvedEntry& StateTable::At(const GameState& state) const {
  const SolvedEntry* e = Find(CanonicalKey(state));
  if (e == nullptr) {
    throw Error(ErrorCode::kCoverage,
                "state not in oracle table:\n" + state.ToString());
  }
  return *e;
}

uint64_t StateTable::Visits(const HashKey& key) const {
  auto it = visits_.find(key);
  return it == visits_.end() ? 0 : it->second;
}

std::vector<SolvedEntry> StateTable::SortedEntries() const {
  std::vector<SolvedEntry> out;
  out.reserve(entries_.size());
  for (const auto& [k, e] : entries_) out.push_back(e);
  std::sort(out.begin(), out.end(),
            [](const SolvedEntry& a, const SolvedEntry& b) {
              return a.key < b.key;
            });
  return out;
}

void StateTable::Save(const std::string& path) const {
  internal::BinaryWriter w(path);
  w.PutBytes(std::string_view(kTableMagic, sizeof(kTableMagic)));
  w.Put<uint32_t>(kTableVersion);
  w.PutFixedString(spec().name, 16);
  w.Put<uint64_t>(entries_.size());
  w.Put<uint64_t>(visits_.size());
  for (const SolvedEntry& e : SortedEntries()) {
    w.Put<uint64_t>(e.key.hi);
    w.Put<uint64_t>(e.key.lo);
    w.Put<int8_t>(e.value);
    w.Put<uint8_t>(e.depth_to_outcome);
    w.Put<uint16_t>(0);
    w.Put<uint32_t>(e.optimal_actions);
  }
  std::vector<std::pair<HashKey, uint64_t>> visits(visits_.begin(),
                                                   visits_.end());
  std::sort(visits.begin(), visits.end());
  for (const auto& [k, n] : visits) {
    w.Put<uint64_t>(k.hi);
    w.Put<uint64_t>(k.lo);
    w.Put<uint64_t>(n);
  }
  w.Close();
}

StateTable StateTable::Load(const std::string& path) {
  internal::BinaryReader r(path);
  if (r.GetBytes(sizeof(kTableMagic)) !=
      std::string_view(kTableMagic, sizeof(kTableMagic))) {
    throw Error(ErrorCode::kFormat, "'" + path + "' is not an oracle table");
  }
  const uint32_t version = r.Get<uint32_t>();
  if (version != kTableVersion) {
    throw Error(ErrorCode::kFormat, "'" + path + "' has table version " +
                                        std::to_string(version) +
                                        ", expected " +
                                        std::to_string(kTableVersion));
  }
  StateTable table(GameSpec::FromName(r.GetFixedString(16)).id);
  const uint64_t n_entries = r.Get<uint64_t>();
  const uint64_t n_visits = r.Get<uint64_t>();
  table.entries_.reserve(n_entries);
  for (uint64_t i = 0; i < n_entries; ++i) {
    SolvedEntry e;
    e.key.hi = r.Get<uint64_t>();
    e.key.lo = r.Get<uint64_t>();
    e.value = r.Get<int8_t>();
    e.depth_to_outcome = r.Get<uint8_t>();
    r.Get<uint16_t>();
    e.optimal_actions = r.Get<uint32_t>();
    if (e.value < -1 || e.value > 1) {
      throw Error(ErrorCode::kFormat, "'" + path + "' has a corrupt entry");
    }
    table.entries_.emplace(e.key, e);
  }
  for (uint64_t i = 0; i < n_visits; ++i) {
    HashKey k{r.Get<uint64_t>(), r.Get<uint64_t>()};
    table.visits_[k] = r.Get<uint64_t>();
  }
  if (!r.AtEnd()) {
    throw Error(ErrorCode::kFormat, "'" + path + "' has trailing bytes");
  }
  return table;
}

StateTable Solve(const GameSpec& spec, const GameState& root,
                 size_t max_entries) {
  StateTable table(spec.id);
  SolveInto(root, table, max_entries);
  return table;
}

EndgameSolver::EndgameSolver(const GameSpec& spec, size_t max_entries)
    : max_entries_(max_entries), table_(spec.id) {}

SolvedEntry EndgameSolver::Solve(const GameState& state) {
  return SolveInto(state, table_, max_entries_);
}

Action OracleOpponent(const GameState& state, const StateTable& table,
                      Rng& rng) {
  const SolvedEntry& e = table.At(state);
  const std::vector<Action> best = e.OptimalActions();
  if (best.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "oracle asked to move in a terminal state");
  }
  std::uniform_int_distribution<size_t> pick(0, best.size() - 1);
  return best[pick(rng)];
}

std::vector<GameState> EnumerateStates(const GameSpec& spec,
                                       size_t max_states) {
  std::vector<GameState> out;
  std::unordered_set<HashKey, HashKeyHash> seen;
  std::deque<GameState> frontier;
  const GameState initial = GameState::Initial(spec);
  frontier.push_back(initial);
  seen.insert(CanonicalKey(initial));
  while (!frontier.empty()) {
    GameState s = frontier.front();
    frontier.pop_front();
    out.push_back(s);
    if (out.size() > max_states) {
      throw Error(ErrorCode::kResourceExhausted,
                  "state enumeration budget of " + std::to_string(max_states) +
                      " exceeded");
    }
    if (IsTerminal(s)) continue;
    for (Action a : LegalActions(s).actions()) {
      GameState child = Apply(s, a);
      if (seen.insert(CanonicalKey(child)).second) frontier.push_back(child);
    }
  }
  return out;
}

Evaluation OracleEvaluator::Evaluate(const GameState& state) const {
  const SolvedEntry& e = table_.At(state);
  if (prior_ == OraclePrior::kOptimal && e.optimal_actions != 0) {
    return Evaluation{
        UniformPolicy(ActionMask(state.spec().action_count, e.optimal_actions)),
        static_cast<double>(e.value)};
  }
  return Evaluation{UniformPolicy(LegalActions(state)),
                    static_cast<double>(e.value)};
}

}  // namespace azalign
