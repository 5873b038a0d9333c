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

#include "azalign/game.h"

#include <array>
#include <bit>
#include <cstdio>

namespace azalign {
namespace {

std::vector<uint64_t> BuildLines(int h, int w, int k) {
  std::vector<uint64_t> lines;
  const int dirs[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (const auto& d : dirs) {
        int er = r + d[0] * (k - 1);
        int ec = c + d[1] * (k - 1);
        if (er < 0 || er >= h || ec < 0 || ec >= w) continue;
        uint64_t mask = 0;
        for (int i = 0; i < k; ++i) {
          mask |= uint64_t{1} << ((r + d[0] * i) * w + (c + d[1] * i));
        }
        lines.push_back(mask);
      }
    }
  }
  return lines;
}

GameSpec MakeSpec(GameId id, std::string_view name, int h, int w, int k,
                  bool gravity) {
  return GameSpec{id,      name, h, w, gravity ? w : h * w,
                  k,       gravity, BuildLines(h, w, k)};
}

const std::array<GameSpec, 3>& AllSpecs() {
  static const std::array<GameSpec, 3> specs = {
      MakeSpec(GameId::kTicTacToe3, "ttt3", 3, 3, 3, false),
      MakeSpec(GameId::kTicTacToe4, "ttt4", 4, 4, 4, false),
      MakeSpec(GameId::kConnectFour, "connect4", 6, 7, 4, true),
  };
  return specs;
}

bool HasLine(const GameSpec& spec, uint64_t bits) {
  for (uint64_t line : spec.lines) {
    if ((bits & line) == line) return true;
  }
  return false;
}

uint64_t FullBoard(const GameSpec& spec) {
  return spec.cells() == 64 ? ~uint64_t{0}
                            : (uint64_t{1} << spec.cells()) - 1;
}

// Destination cell of (r, c) under a dihedral op on an n x n board.
int MapSquare(SymmetryKind kind, int n, int r, int c) {
  int nr = r, nc = c;
  switch (kind) {
    case SymmetryKind::kIdentity:
    case SymmetryKind::kInvert:
      break;
    case SymmetryKind::kRotate90:
      nr = c;
      nc = n - 1 - r;
      break;
    case SymmetryKind::kRotate180:
      nr = n - 1 - r;
      nc = n - 1 - c;
      break;
    case SymmetryKind::kRotate270:
      nr = n - 1 - c;
      nc = r;
      break;
    case SymmetryKind::kMirrorLeftRight:
      nc = n - 1 - c;
      break;
    case SymmetryKind::kMirrorUpDown:
      nr = n - 1 - r;
      break;
    case SymmetryKind::kTranspose:
      nr = c;
      nc = r;
      break;
    case SymmetryKind::kAntiTranspose:
      nr = n - 1 - c;
      nc = n - 1 - r;
      break;
  }
  return nr * n + nc;
}

constexpr int kNumKinds = 9;

// perm[cell] = destination cell, per game and op.
const std::vector<int>& CellPermutation(const GameSpec& spec,
                                        SymmetryKind kind) {
  static const auto tables = [] {
    std::array<std::array<std::vector<int>, kNumKinds>, 3> t;
    for (const GameSpec& s : AllSpecs()) {
      for (int k = 0; k < kNumKinds; ++k) {
        auto kind = static_cast<SymmetryKind>(k);
        std::vector<int> perm(s.cells());
        for (int r = 0; r < s.height; ++r) {
          for (int c = 0; c < s.width; ++c) {
            int cell = r * s.width + c;
            if (s.square()) {
              perm[cell] = MapSquare(kind, s.width, r, c);
            } else if (kind == SymmetryKind::kMirrorLeftRight) {
              perm[cell] = r * s.width + (s.width - 1 - c);
            } else {
              perm[cell] = cell;
            }
          }
        }
        t[static_cast<int>(s.id)][k] = std::move(perm);
      }
    }
    return t;
  }();
  return tables[static_cast<int>(spec.id)][static_cast<int>(kind)];
}

uint64_t PermuteBits(uint64_t bits, const std::vector<int>& perm) {
  uint64_t out = 0;
  while (bits) {
    int cell = std::countr_zero(bits);
    bits &= bits - 1;
    out |= uint64_t{1} << perm[cell];
  }
  return out;
}

void CheckSupported(SymmetryOp op, const GameSpec& spec) {
  if (!IsSupported(op, spec)) {
    throw Error(ErrorCode::kInvalidArgument,
                "symmetry " + std::string(op.name()) + " is not supported on " +
                    std::string(spec.name));
  }
}

// Text row index (top to bottom) to storage row.
int StorageRow(const GameSpec& spec, int text_row) {
  return spec.gravity ? spec.height - 1 - text_row : text_row;
}

}  // namespace

std::string HashKey::ToHex() const {
  char buf[34];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

HashKey HashKey::FromHex(const std::string& hex) {
  if (hex.size() != 32) {
    throw Error(ErrorCode::kFormat, "bad state key '" + hex + "'");
  }
  try {
    return HashKey{std::stoull(hex.substr(0, 16), nullptr, 16),
                   std::stoull(hex.substr(16), nullptr, 16)};
  } catch (const std::exception&) {
    throw Error(ErrorCode::kFormat, "bad state key '" + hex + "'");
  }
}

const GameSpec& GameSpec::Get(GameId id) {
  return AllSpecs()[static_cast<int>(id)];
}

const GameSpec& GameSpec::FromName(std::string_view name) {
  for (const GameSpec& s : AllSpecs()) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown game '" + std::string(name) +
                  "' (expected ttt3, ttt4 or connect4)");
}

ActionMask ActionMask::All(int size) {
  return ActionMask(size, size == 64 ? ~uint64_t{0}
                                     : (uint64_t{1} << size) - 1);
}

int ActionMask::count() const { return std::popcount(bits_); }

std::vector<Action> ActionMask::actions() const {
  std::vector<Action> out;
  out.reserve(count());
  for (uint64_t b = bits_; b; b &= b - 1) out.push_back(std::countr_zero(b));
  return out;
}

GameState GameState::Initial(const GameSpec& spec) {
  return GameState(&spec, 0, 0, Player::kP1, 0);
}

GameState GameState::FromBitboards(const GameSpec& spec, uint64_t p1,
                                   uint64_t p2, Player to_move) {
  if ((p1 & p2) != 0 || ((p1 | p2) & ~FullBoard(spec)) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "overlapping or off-board pieces");
  }
  return GameState(&spec, p1, p2, to_move,
                   std::popcount(p1) + std::popcount(p2));
}

GameState GameState::FromString(const GameSpec& spec, std::string_view board,
                                Player to_move) {
  uint64_t p1 = 0, p2 = 0;
  int seen = 0;
  for (char ch : board) {
    if (ch == ' ' || ch == '\n' || ch == '\t' || ch == '/' || ch == '\r') {
      continue;
    }
    if (seen >= spec.cells()) {
      throw Error(ErrorCode::kInvalidArgument, "board string too long");
    }
    int cell = StorageRow(spec, seen / spec.width) * spec.width +
               seen % spec.width;
    switch (ch) {
      case 'x':
      case 'X':
        p1 |= uint64_t{1} << cell;
        break;
      case 'o':
      case 'O':
        p2 |= uint64_t{1} << cell;
        break;
      case '.':
        break;
      default:
        throw Error(ErrorCode::kInvalidArgument,
                    std::string("bad board character '") + ch + "'");
    }
    ++seen;
  }
  if (seen != spec.cells()) {
    throw Error(ErrorCode::kInvalidArgument, "board string too short");
  }
  return FromBitboards(spec, p1, p2, to_move);
}

int GameState::empty_cells() const {
  return spec_->cells() - std::popcount(occupied());
}

std::optional<Player> GameState::At(int cell) const {
  if ((p1_ >> cell) & 1u) return Player::kP1;
  if ((p2_ >> cell) & 1u) return Player::kP2;
  return std::nullopt;
}

std::string GameState::ToString() const {
  std::string out;
  for (int tr = 0; tr < spec_->height; ++tr) {
    int r = StorageRow(*spec_, tr);
    for (int c = 0; c < spec_->width; ++c) {
      auto owner = At(r * spec_->width + c);
      out += !owner ? '.' : (*owner == Player::kP1 ? 'x' : 'o');
    }
    out += '\n';
  }
  return out;
}

std::string GameState::ToCompactString() const {
  std::string s = ToString();
  s.pop_back();
  for (char& ch : s) {
    if (ch == '\n') ch = '/';
  }
  return s;
}

std::optional<int> TerminalValue(const GameState& state) {
  const GameSpec& spec = state.spec();
  Player mover = state.to_move();
  if (HasLine(spec, state.pieces(Opponent(mover)))) return -1;
  if (HasLine(spec, state.pieces(mover))) return 1;
  if (state.occupied() == FullBoard(spec)) return 0;
  return std::nullopt;
}

bool IsTerminal(const GameState& state) {
  return TerminalValue(state).has_value();
}

int OutcomeFor(const GameState& terminal, Player player) {
  auto v = TerminalValue(terminal);
  if (!v) throw Error(ErrorCode::kInvalidArgument, "state is not terminal");
  return player == terminal.to_move() ? *v : -*v;
}

ActionMask LegalActions(const GameState& state) {
  if (IsTerminal(state)) {
    throw Error(ErrorCode::kRuleViolation,
                "no legal actions in a terminal state");
  }
  const GameSpec& spec = state.spec();
  uint64_t occ = state.occupied();
  uint64_t bits = 0;
  if (spec.gravity) {
    int top = (spec.height - 1) * spec.width;
    for (int c = 0; c < spec.width; ++c) {
      if (!((occ >> (top + c)) & 1u)) bits |= uint64_t{1} << c;
    }
  } else {
    bits = ~occ & FullBoard(spec);
  }
  return ActionMask(spec.action_count, bits);
}

GameState Apply(const GameState& state, Action action) {
  const GameSpec& spec = state.spec();
  if (action < 0 || action >= spec.action_count ||
      !LegalActions(state)[action]) {
    throw Error(ErrorCode::kRuleViolation,
                "illegal action " + std::to_string(action) + " in\n" +
                    state.ToString());
  }
  int cell = action;
  if (spec.gravity) {
    uint64_t occ = state.occupied();
    int r = 0;
    while ((occ >> (r * spec.width + action)) & 1u) ++r;
    cell = r * spec.width + action;
  }
  uint64_t bit = uint64_t{1} << cell;
  uint64_t p1 = state.p1_, p2 = state.p2_;
  if (state.to_move() == Player::kP1) {
    p1 |= bit;
  } else {
    p2 |= bit;
  }
  return GameState(state.spec_, p1, p2, Opponent(state.to_move()),
                   state.move_count() + 1);
}

std::string_view SymmetryOp::name() const {
  switch (kind) {
    case SymmetryKind::kIdentity: return "identity";
    case SymmetryKind::kRotate90: return "rotate90";
    case SymmetryKind::kRotate180: return "rotate180";
    case SymmetryKind::kRotate270: return "rotate270";
    case SymmetryKind::kMirrorLeftRight: return "mirror_lr";
    case SymmetryKind::kMirrorUpDown: return "mirror_ud";
    case SymmetryKind::kTranspose: return "transpose";
    case SymmetryKind::kAntiTranspose: return "anti_transpose";
    case SymmetryKind::kInvert: return "invert";
  }
  return "?";
}

bool IsSupported(SymmetryOp op, const GameSpec& spec) {
  if (spec.square()) return true;
  return op.kind == SymmetryKind::kIdentity ||
         op.kind == SymmetryKind::kMirrorLeftRight ||
         op.kind == SymmetryKind::kInvert;
}

std::vector<SymmetryOp> SymmetryOps(const GameSpec& spec,
                                    bool include_identity) {
  std::vector<SymmetryOp> ops;
  for (int k = include_identity ? 0 : 1; k < kNumKinds; ++k) {
    SymmetryOp op{static_cast<SymmetryKind>(k)};
    if (IsSupported(op, spec)) ops.push_back(op);
  }
  return ops;
}

GameState Transform(const GameState& state, SymmetryOp op) {
  const GameSpec& spec = state.spec();
  CheckSupported(op, spec);
  if (op.kind == SymmetryKind::kInvert) {
    return GameState::FromBitboards(spec, state.pieces(Player::kP2),
                                    state.pieces(Player::kP1),
                                    Opponent(state.to_move()));
  }
  const auto& perm = CellPermutation(spec, op.kind);
  return GameState::FromBitboards(
      spec, PermuteBits(state.pieces(Player::kP1), perm),
      PermuteBits(state.pieces(Player::kP2), perm), state.to_move());
}

Action TransformAction(Action action, SymmetryOp op, const GameSpec& spec) {
  CheckSupported(op, spec);
  if (op.kind == SymmetryKind::kInvert) return action;
  if (spec.gravity) {
    return op.kind == SymmetryKind::kMirrorLeftRight
               ? spec.width - 1 - action
               : action;
  }
  return CellPermutation(spec, op.kind)[action];
}

SymmetryOp InverseOp(SymmetryOp op) {
  switch (op.kind) {
    case SymmetryKind::kRotate90: return {SymmetryKind::kRotate270};
    case SymmetryKind::kRotate270: return {SymmetryKind::kRotate90};
    default: return op;
  }
}

FeatureTensor Encode(const GameState& state) {
  FeatureTensor out(state.spec().feature_size());
  EncodeInto(state, out);
  return out;
}

void EncodeInto(const GameState& state, std::span<float> out) {
  const int n = state.spec().cells();
  if (static_cast<int>(out.size()) != 3 * n) {
    throw Error(ErrorCode::kInvalidArgument, "feature buffer size mismatch");
  }
  const uint64_t p1 = state.pieces(Player::kP1);
  const uint64_t p2 = state.pieces(Player::kP2);
  const float turn = state.to_move() == Player::kP1 ? 0.0f : 1.0f;
  for (int i = 0; i < n; ++i) {
    out[i] = static_cast<float>((p1 >> i) & 1u);
    out[n + i] = static_cast<float>((p2 >> i) & 1u);
    out[2 * n + i] = turn;
  }
}

HashKey CanonicalKey(const GameState& state) {
  uint64_t turn = state.to_move() == Player::kP2 ? uint64_t{1} << 63 : 0;
  return HashKey{state.pieces(Player::kP2), state.pieces(Player::kP1) | turn};
}

GameState StateFromKey(const GameSpec& spec, const HashKey& key) {
  constexpr uint64_t kTurn = uint64_t{1} << 63;
  return GameState::FromBitboards(spec, key.lo & ~kTurn, key.hi,
                                  (key.lo & kTurn) ? Player::kP2 : Player::kP1);
}

}  // namespace azalign
