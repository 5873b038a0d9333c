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

// Self-play training: episode generation, value-informed action selection
// (VIS), value-informed symmetric augmentation (VISA) and the optimization
// schedule.
//
// Rounds of `refresh_every` games are played against one read-only network
// snapshot. Game i always draws from streams derived from (seed, i), and the
// trainer consumes finished games in index order, so a run is reproducible
// for any worker count.

#ifndef AZALIGN_TRAINING_H_
#define AZALIGN_TRAINING_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "azalign/common.h"
#include "azalign/evaluator.h"
#include "azalign/game.h"
#include "azalign/mcts.h"
#include "azalign/neural.h"
#include "azalign/oracle.h"

namespace azalign {

enum class TrainMode {
  kAlphaZero,
  kVisOnly,
  kVisaOnly,
  kVisaVis,
  kAlphaZeroRandomStarts,
};

std::string TrainModeName(TrainMode mode);
// Throws Error(kInvalidArgument) listing the valid names.
TrainMode TrainModeFromName(const std::string& name);
bool UsesVis(TrainMode mode);
bool UsesVisa(TrainMode mode);

struct TrainConfig {
  GameId game = GameId::kTicTacToe3;
  NetConfig net;
  SearchConfig search;
  TrainMode mode = TrainMode::kAlphaZero;
  double vis_epsilon = 0.5;  // probability of the search-policy branch
  double vis_softmax_temp = 1.0;
  int64_t total_games = 20'000;
  int batch_size = 64;
  int buffer_capacity = 1 << 16;
  int train_steps_per_game = 1;
  int64_t checkpoint_every = 1'000;
  int64_t refresh_every = 100;  // games per network snapshot
  uint64_t seed = 0;
  int workers = 1;

  // "desk" uses the reduced game counts (20k / 60k / 100k), "full" the long
  // budgets (5e5 / 1.75e6 / 7.5e6). Network, batch, learning-rate and search
  // settings are shared.
  static TrainConfig ForGame(GameId game, const std::string& profile = "desk");
  const GameSpec& spec() const { return GameSpec::Get(game); }
  // Throws Error(kInvalidArgument) naming the offending field.
  void Validate() const;
};

// Flat "key = value" text with [game], [net], [search] and [train]
// sections; '#' and ';' start comments. Keys left out keep the per-game
// defaults for `[game] name`. Throws Error(kInvalidArgument) naming an
// unknown key or unparsable value, Error(kIo) if unreadable.
TrainConfig ParseTrainConfig(const std::string& text);
TrainConfig LoadTrainConfig(const std::string& path);
// Applies one "section.key=value" override.
void ApplyOverride(TrainConfig& config, const std::string& assignment);
std::string FormatTrainConfig(const TrainConfig& config);

// pi_v: softmax over one-step lookahead scores divided by `temp`. A
// successor's score is minus its value for the opponent (exact for terminal
// successors, the network otherwise). Zero on illegal actions.
std::vector<double> ValuePolicy(const GameState& state,
                                const Evaluator& evaluator, double temp);

enum class SelectionBranch { kPolicy, kValue };

struct VisChoice {
  Action action;
  SelectionBranch branch;
};

// eta ~ U(0, 1) from `vis_rng`; eta < epsilon samples from pi_p, otherwise
// from pi_v. The action itself is drawn from `rng`, so with epsilon = 1 the
// `rng` stream is consumed exactly as plain pi_p sampling would.
VisChoice VisSelect(const GameState& state, const std::vector<double>& pi_p,
                    const Evaluator& evaluator, double epsilon,
                    double softmax_temp, Rng& rng, Rng& vis_rng);

struct AugmentedPair {
  ReplayEntry original;
  ReplayEntry transformed;
  SymmetryOp op;
  // Disagreement (v(s) - v(s_sigma))^2 of every candidate, in op order.
  std::vector<double> disagreements;
  // Outcome for player one of each entry. Inversion swaps which colour the
  // mover holds, so it negates this while the mover-frame target_z is kept.
  double original_z_p1 = 0.0;
  double transformed_z_p1 = 0.0;
};

// Evaluates every non-identity symmetry of `state`, keeps the one whose
// value differs most from v(state) (first in op order on ties), and returns
// the original entry plus the transformed one with its policy target
// permuted through the transform.
AugmentedPair VisaAugment(const GameState& state,
                          const std::vector<double>& pi_p, double z_mover,
                          const Evaluator& evaluator);

struct EpisodeStep {
  GameState state;
  std::vector<double> pi_p;  // visit distribution at tau = 1 (the target)
  Action action = 0;
  SelectionBranch branch = SelectionBranch::kPolicy;
};

struct EpisodeRecord {
  std::vector<EpisodeStep> steps;
  GameState final_state;
  int z_p1 = 0;  // outcome for player one

  // Outcome seen by the player to move at step i.
  double ZFor(size_t i) const;
};

// Uniformly random number of uniformly random moves, re-drawn until the
// position is non-terminal.
GameState RandomStartState(const GameSpec& spec, Rng& rng);

// Self-play from `start` to a terminal state. The search policy is sampled
// at the configured temperature until temperature_drop_ply plies have been
// played in the episode and greedily afterwards; VIS replaces that choice
// when `vis` is set.
EpisodeRecord PlayEpisode(const GameState& start, const Evaluator& evaluator,
                          const SearchConfig& search, bool vis,
                          double vis_epsilon, double vis_softmax_temp, Rng& rng,
                          Rng& vis_rng);

// Replay entries for one finished episode: one per step, or two with VISA.
std::vector<ReplayEntry> EpisodeEntries(const EpisodeRecord& episode,
                                        const Evaluator& evaluator, bool visa);

struct CheckpointRecord {
  int64_t games = 0;
  int64_t steps = 0;
  LossTerms loss;  // mean over the steps since the previous record
  size_t buffer_size = 0;
  uint64_t entries_added = 0;
  double policy_branch_fraction = 1.0;
  double elapsed_seconds = 0.0;
  std::string checkpoint;
};

// One-line JSON form used in train_log.jsonl.
std::string CheckpointRecordJson(const CheckpointRecord& record);

struct TrainResult {
  std::vector<std::string> checkpoints;
  std::vector<CheckpointRecord> log;
  std::shared_ptr<Net> net;
  StateTable visits;  // visit counts only; no solved entries
  std::string log_path;
  std::string visits_path;
  std::string final_checkpoint;
};

// Runs the full schedule. With a non-empty `out_dir` writes
// ckpt_<games>.aznet every checkpoint_every games, final.aznet,
// train_log.jsonl, visits.aztable and config.ini there. Throws
// Error(kDivergence) after writing divergence.json when training produces
// non-finite values. `progress`, if set, is called after every record.
TrainResult Train(
    const TrainConfig& config, const std::string& out_dir,
    const std::function<void(const CheckpointRecord&)>& progress = nullptr);

}  // namespace azalign

#endif  // AZALIGN_TRAINING_H_
