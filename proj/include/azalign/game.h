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

// Rules, state representation and symmetries for Tic-Tac-Toe (3x3), the
// 4x4 Tic-Tac-Toe variant and Connect Four.
//
// Cells are indexed row-major, `cell = row * width + col`. Tic-Tac-Toe rows
// count from the top; Connect Four rows count from the bottom so that a disc
// dropped into an empty column lands in row 0. Actions are cell indices for
// the Tic-Tac-Toe variants and column indices for Connect Four.

#ifndef AZALIGN_GAME_H_
#define AZALIGN_GAME_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "azalign/common.h"

namespace azalign {

using Action = int;
using FeatureTensor = std::vector<float>;

enum class GameId { kTicTacToe3, kTicTacToe4, kConnectFour };

struct GameSpec {
  GameId id;
  std::string_view name;  // "ttt3", "ttt4" or "connect4"
  int height;
  int width;
  int action_count;
  int win_length;
  bool gravity;
  // Every winning line as a cell bitmask.
  std::vector<uint64_t> lines;

  int cells() const { return height * width; }
  int feature_size() const { return 3 * cells(); }
  bool square() const { return height == width; }

  static const GameSpec& Get(GameId id);
  // Throws Error(kInvalidArgument) for unknown names.
  static const GameSpec& FromName(std::string_view name);
};

enum class Player : uint8_t { kP1 = 0, kP2 = 1 };

inline Player Opponent(Player p) {
  return p == Player::kP1 ? Player::kP2 : Player::kP1;
}

// Fixed-size boolean vector over a game's action space.
class ActionMask {
 public:
  ActionMask() = default;
  ActionMask(int size, uint64_t bits) : size_(size), bits_(bits) {}
  static ActionMask All(int size);

  bool operator[](Action a) const { return (bits_ >> a) & 1u; }
  int size() const { return size_; }
  uint64_t bits() const { return bits_; }
  int count() const;
  bool none() const { return bits_ == 0; }
  std::vector<Action> actions() const;

  friend bool operator==(const ActionMask&, const ActionMask&) = default;

 private:
  int size_ = 0;
  uint64_t bits_ = 0;
};

// Immutable position. Pieces are stored as one bitboard per player.
class GameState {
 public:
  static GameState Initial(const GameSpec& spec);
  // `board` lists rows top to bottom with 'x' (P1), 'o' (P2) and '.'
  // (empty); whitespace and '/' are ignored. The move count is the number of
  // pieces on the board.
  static GameState FromString(const GameSpec& spec, std::string_view board,
                              Player to_move);
  static GameState FromBitboards(const GameSpec& spec, uint64_t p1,
                                 uint64_t p2, Player to_move);

  const GameSpec& spec() const { return *spec_; }
  uint64_t pieces(Player p) const { return p == Player::kP1 ? p1_ : p2_; }
  uint64_t occupied() const { return p1_ | p2_; }
  Player to_move() const { return to_move_; }
  int move_count() const { return move_count_; }
  int empty_cells() const;
  // Piece owner at a cell, if any.
  std::optional<Player> At(int cell) const;

  // One character per cell, rows top to bottom separated by '\n'.
  std::string ToString() const;
  // Single-line form accepted by FromString, e.g. "x.o/...../...".
  std::string ToCompactString() const;

  friend bool operator==(const GameState& a, const GameState& b) {
    return a.spec_->id == b.spec_->id && a.p1_ == b.p1_ && a.p2_ == b.p2_ &&
           a.to_move_ == b.to_move_ && a.move_count_ == b.move_count_;
  }

 private:
  GameState(const GameSpec* spec, uint64_t p1, uint64_t p2, Player to_move,
            int move_count)
      : spec_(spec), p1_(p1), p2_(p2), to_move_(to_move),
        move_count_(move_count) {}

  friend GameState Apply(const GameState&, Action);

  const GameSpec* spec_;
  uint64_t p1_;
  uint64_t p2_;
  Player to_move_;
  int move_count_;
};

// Outcome from the perspective of the player to move in `state`: +1 win,
// 0 draw, -1 loss. Empty for non-terminal states.
std::optional<int> TerminalValue(const GameState& state);
bool IsTerminal(const GameState& state);
// Outcome of a terminal state seen from `player`.
int OutcomeFor(const GameState& terminal, Player player);

// Throws Error(kRuleViolation) when `state` is terminal.
ActionMask LegalActions(const GameState& state);
// Throws Error(kRuleViolation) when `action` is not legal in `state`.
GameState Apply(const GameState& state, Action action);

enum class SymmetryKind {
  kIdentity,
  kRotate90,   // clockwise
  kRotate180,
  kRotate270,
  kMirrorLeftRight,
  kMirrorUpDown,
  kTranspose,
  kAntiTranspose,
  kInvert,  // swap piece planes and the side to move
};

struct SymmetryOp {
  SymmetryKind kind = SymmetryKind::kIdentity;

  bool is_dihedral() const { return kind != SymmetryKind::kInvert; }
  std::string_view name() const;
  friend bool operator==(const SymmetryOp&, const SymmetryOp&) = default;
};

bool IsSupported(SymmetryOp op, const GameSpec& spec);
// Supported operations in fixed order: rotations, reflections, inversion.
std::vector<SymmetryOp> SymmetryOps(const GameSpec& spec,
                                    bool include_identity);

// Throws Error(kInvalidArgument) for ops the board does not admit.
GameState Transform(const GameState& state, SymmetryOp op);
Action TransformAction(Action action, SymmetryOp op, const GameSpec& spec);
// Inverse of the dihedral part of `op` (inversion is its own inverse).
SymmetryOp InverseOp(SymmetryOp op);

// Planes in order: P1 pieces, P2 pieces, turn (0 for P1 to move, 1 for P2).
FeatureTensor Encode(const GameState& state);
void EncodeInto(const GameState& state, std::span<float> out);

HashKey CanonicalKey(const GameState& state);
GameState StateFromKey(const GameSpec& spec, const HashKey& key);

}  // namespace azalign

#endif  // AZALIGN_GAME_H_
