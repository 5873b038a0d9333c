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

#include <set>
#include <string>

#include "gtest/gtest.h"
#include "test_util.h"

namespace azalign {
namespace {

const GameSpec& kTtt3 = GameSpec::Get(GameId::kTicTacToe3);
const GameSpec& kTtt4 = GameSpec::Get(GameId::kTicTacToe4);
const GameSpec& kC4 = GameSpec::Get(GameId::kConnectFour);

TEST(GameSpecTest, Dimensions) {
  EXPECT_EQ(kTtt3.action_count, 9);
  EXPECT_EQ(kTtt4.action_count, 16);
  EXPECT_EQ(kC4.action_count, kC4.width);
  EXPECT_EQ(kC4.action_count, 7);
  EXPECT_EQ(kTtt3.lines.size(), 8u);
  EXPECT_EQ(kTtt4.lines.size(), 10u);
  EXPECT_EQ(kC4.lines.size(), 69u);
  EXPECT_EQ(&GameSpec::FromName("connect4"), &kC4);
  EXPECT_THROW(GameSpec::FromName("go"), Error);
}

TEST(LegalActionsTest, EmptyBoard) {
  EXPECT_EQ(LegalActions(GameState::Initial(kTtt3)).count(), 9);
}

TEST(LegalActionsTest, CenterOccupied) {
  GameState s = Apply(GameState::Initial(kTtt3), 4);
  ActionMask m = LegalActions(s);
  EXPECT_EQ(m.count(), 8);
  EXPECT_FALSE(m[4]);
}

TEST(LegalActionsTest, FullConnectFourColumn) {
  GameState s = GameState::Initial(kC4);
  for (int i = 0; i < 6; ++i) s = Apply(s, 0);
  ActionMask m = LegalActions(s);
  EXPECT_FALSE(m[0]);
  for (int c = 1; c < 7; ++c) EXPECT_TRUE(m[c]) << c;
}

TEST(LegalActionsTest, TerminalStateIsAnError) {
  GameState s = GameState::FromString(kTtt3, "xxx/oo./...", Player::kP2);
  try {
    LegalActions(s);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRuleViolation);
  }
}

TEST(ApplyTest, CenterMove) {
  const GameState empty = GameState::Initial(kTtt3);
  GameState s = Apply(empty, 4);
  EXPECT_EQ(s.ToString(), "...\n.x.\n...\n");
  EXPECT_EQ(s.to_move(), Player::kP2);
  EXPECT_EQ(s.move_count(), 1);
  EXPECT_EQ(empty.move_count(), 0);
  EXPECT_EQ(empty.occupied(), 0u);
}

TEST(ApplyTest, ConnectFourGravity) {
  GameState s = Apply(Apply(GameState::Initial(kC4), 3), 3);
  EXPECT_EQ(s.At(0 * 7 + 3), Player::kP1);
  EXPECT_EQ(s.At(1 * 7 + 3), Player::kP2);
  EXPECT_FALSE(s.At(2 * 7 + 3).has_value());
}

TEST(ApplyTest, WinningMoveEndsGameForMover) {
  // x x . / o o . / . . .  with x to move: cell 2 completes the top row.
  GameState s = GameState::FromString(kTtt3, "xx./oo./...", Player::kP1);
  ASSERT_FALSE(IsTerminal(s));
  GameState after = Apply(s, 2);
  ASSERT_TRUE(IsTerminal(after));
  // Terminal value is for o (to move), who lost; x, the mover, won.
  EXPECT_EQ(TerminalValue(after), -1);
  EXPECT_EQ(OutcomeFor(after, Player::kP1), 1);
}

TEST(ApplyTest, IllegalActionIsRuleViolation) {
  GameState s = Apply(GameState::Initial(kTtt3), 4);
  try {
    Apply(s, 4);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRuleViolation);
  }
  EXPECT_THROW(Apply(s, 9), Error);
  EXPECT_THROW(Apply(s, -1), Error);
}

TEST(TerminalValueTest, TopRowMoverLost) {
  GameState s = GameState::FromString(kTtt3, "xxx/oo./...", Player::kP2);
  EXPECT_EQ(TerminalValue(s), -1);
}

TEST(TerminalValueTest, FullBoardDraw) {
  GameState s = GameState::FromString(kTtt3, "xox/xoo/oxx", Player::kP2);
  EXPECT_EQ(TerminalValue(s), 0);
}

TEST(TerminalValueTest, NonTerminal) {
  EXPECT_FALSE(TerminalValue(GameState::Initial(kC4)).has_value());
}

TEST(TerminalValueTest, ConnectFourDiagonal) {
  // Built by hand: x climbs the diagonal (0,0) (1,1) (2,2) (3,3).
  GameState s = GameState::Initial(kC4);
  for (Action a : {0, 1, 1, 2, 2, 3, 2, 3, 3, 6}) s = Apply(s, a);
  ASSERT_FALSE(IsTerminal(s));
  ASSERT_EQ(s.to_move(), Player::kP1);
  s = Apply(s, 3);
  EXPECT_EQ(s.ToString(),
            ".......\n"
            ".......\n"
            "...x...\n"
            "..xx...\n"
            ".xxo...\n"
            "xooo..o\n");
  EXPECT_EQ(TerminalValue(s), -1);  // o to move, x completed the diagonal
  EXPECT_EQ(OutcomeFor(s, Player::kP1), 1);
  EXPECT_EQ(OutcomeFor(s, Player::kP2), -1);
}

TEST(TerminalValueTest, ZeroSumOverAllTicTacToeTerminals) {
  int terminals = 0;
  for (const GameState& s : test_util::BruteForceReachable(kTtt3)) {
    if (!IsTerminal(s)) continue;
    ++terminals;
    EXPECT_EQ(OutcomeFor(s, Player::kP1), -OutcomeFor(s, Player::kP2));
  }
  EXPECT_GT(terminals, 0);
}

TEST(GameStateTest, ReachableInvariants) {
  Rng rng(7);
  for (const GameSpec* spec : {&kTtt3, &kTtt4, &kC4}) {
    for (int game = 0; game < 200; ++game) {
      for (const GameState& s : test_util::RandomPlayout(*spec, rng)) {
        EXPECT_EQ(s.pieces(Player::kP1) & s.pieces(Player::kP2), 0u);
        const int diff = std::popcount(s.pieces(Player::kP1)) -
                         std::popcount(s.pieces(Player::kP2));
        EXPECT_TRUE(diff == 0 || diff == 1);
        EXPECT_EQ(s.to_move(), diff == 0 ? Player::kP1 : Player::kP2);
        FeatureTensor f = Encode(s);
        const int n = spec->cells();
        for (int i = 1; i < n; ++i) EXPECT_EQ(f[2 * n + i], f[2 * n]);
        if (spec->gravity) {
          for (int cell = spec->width; cell < n; ++cell) {
            if (s.At(cell)) {
              EXPECT_TRUE(s.At(cell - spec->width));
            }
          }
        }
      }
    }
  }
}

TEST(GameStateTest, StringRoundTrip) {
  GameState s = GameState::FromString(kC4,
                                      ".......\n.......\n.......\n"
                                      ".......\n...o...\n..xxo..",
                                      Player::kP1);
  EXPECT_EQ(GameState::FromString(kC4, s.ToCompactString(), Player::kP1), s);
  EXPECT_EQ(s.At(2), Player::kP1);  // bottom row is row 0
  EXPECT_THROW(GameState::FromString(kTtt3, "xx", Player::kP1), Error);
  EXPECT_THROW(GameState::FromString(kTtt3, "xx./q../...", Player::kP1),
               Error);
}

TEST(SymmetryTest, OpSets) {
  EXPECT_EQ(SymmetryOps(kTtt3, true).size(), 9u);  // 8 dihedral + invert
  EXPECT_EQ(SymmetryOps(kTtt3, false).front().kind, SymmetryKind::kRotate90);
  EXPECT_EQ(SymmetryOps(kTtt3, false).back().kind, SymmetryKind::kInvert);
  auto c4 = SymmetryOps(kC4, true);
  ASSERT_EQ(c4.size(), 3u);
  EXPECT_EQ(c4[1].kind, SymmetryKind::kMirrorLeftRight);
}

TEST(SymmetryTest, IdentityRotationAndInvolution) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    GameState s = test_util::RandomState(kTtt3, rng);
    EXPECT_EQ(Transform(s, {SymmetryKind::kIdentity}), s);
    GameState r = s;
    for (int k = 0; k < 4; ++k) r = Transform(r, {SymmetryKind::kRotate90});
    EXPECT_EQ(r, s);
    SymmetryOp inv{SymmetryKind::kInvert};
    EXPECT_EQ(Transform(Transform(s, inv), inv), s);
    EXPECT_EQ(Transform(s, inv).to_move(), Opponent(s.to_move()));
    EXPECT_EQ(Transform(s, inv).pieces(Player::kP1), s.pieces(Player::kP2));
  }
}

TEST(SymmetryTest, DihedralGroupClosure) {
  // Composition of any two square ops is again one of the eight.
  Rng rng(5);
  GameState s = test_util::RandomState(kTtt4, rng);
  while (s.move_count() < 5) s = test_util::RandomState(kTtt4, rng);
  auto ops = SymmetryOps(kTtt4, true);
  ops.pop_back();  // invert
  std::set<std::string> images;
  for (SymmetryOp op : ops) images.insert(Transform(s, op).ToString());
  for (SymmetryOp a : ops) {
    for (SymmetryOp b : ops) {
      EXPECT_TRUE(images.count(Transform(Transform(s, a), b).ToString()));
    }
    EXPECT_EQ(Transform(Transform(s, a), InverseOp(a)), s);
  }
}

TEST(SymmetryTest, RotationOnConnectFourIsUnsupported) {
  GameState s = GameState::Initial(kC4);
  try {
    Transform(s, {SymmetryKind::kRotate90});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  EXPECT_THROW(TransformAction(0, {SymmetryKind::kTranspose}, kC4), Error);
}

TEST(TransformActionTest, CoordinateMaps) {
  EXPECT_EQ(TransformAction(0, {SymmetryKind::kRotate90}, kTtt3), 2);
  EXPECT_EQ(TransformAction(2, {SymmetryKind::kRotate90}, kTtt3), 8);
  EXPECT_EQ(TransformAction(4, {SymmetryKind::kRotate90}, kTtt3), 4);
  for (int c = 0; c < 7; ++c) {
    EXPECT_EQ(TransformAction(c, {SymmetryKind::kMirrorLeftRight}, kC4),
              6 - c);
  }
  EXPECT_EQ(TransformAction(5, {SymmetryKind::kInvert}, kTtt4), 5);
}

TEST(TransformActionTest, CommutesWithApplyOnRandomTriples) {
  Rng rng(2026);
  int checked = 0;
  for (const GameSpec* spec : {&kTtt3, &kTtt4, &kC4}) {
    const auto ops = SymmetryOps(*spec, true);
    std::uniform_int_distribution<size_t> pick_op(0, ops.size() - 1);
    while (checked < 1000 * (spec == &kTtt3 ? 1 : spec == &kTtt4 ? 2 : 3)) {
      GameState s = test_util::RandomState(*spec, rng);
      if (IsTerminal(s)) continue;
      auto legal = LegalActions(s).actions();
      std::uniform_int_distribution<size_t> pick_a(0, legal.size() - 1);
      const Action a = legal[pick_a(rng)];
      const SymmetryOp op = ops[pick_op(rng)];
      EXPECT_EQ(Apply(Transform(s, op), TransformAction(a, op, *spec)),
                Transform(Apply(s, a), op))
          << op.name() << "\n" << s.ToString() << "action " << a;
      ++checked;
    }
  }
}

TEST(EncodeTest, EmptyBoardP1ToMove) {
  FeatureTensor f = Encode(GameState::Initial(kTtt3));
  ASSERT_EQ(f.size(), 27u);
  for (float x : f) EXPECT_EQ(x, 0.0f);
}

TEST(EncodeTest, PlaneOrder) {
  GameState s = GameState::FromString(kTtt3, "x../.o./...", Player::kP1);
  FeatureTensor f = Encode(s);
  EXPECT_EQ(f[0], 1.0f);      // P1 plane
  EXPECT_EQ(f[9 + 4], 1.0f);  // P2 plane
  EXPECT_EQ(f[18], 0.0f);     // P1 to move
  FeatureTensor g = Encode(Apply(GameState::Initial(kTtt3), 0));
  for (int i = 18; i < 27; ++i) EXPECT_EQ(g[i], 1.0f);
}

TEST(EncodeTest, InjectiveOnReachableStates) {
  std::set<FeatureTensor> seen;
  auto states = test_util::BruteForceReachable(kTtt3);
  for (const GameState& s : states) seen.insert(Encode(s));
  EXPECT_EQ(seen.size(), states.size());
  EXPECT_EQ(Encode(Transform(states[100], {SymmetryKind::kIdentity})),
            Encode(states[100]));
}

TEST(CanonicalKeyTest, IdentityEqualityDistinctness) {
  GameState a = Apply(GameState::Initial(kTtt3), 4);
  GameState b = GameState::FromString(kTtt3, ".../.x./...", Player::kP2);
  GameState c = GameState::FromString(kTtt3, ".../.x./...", Player::kP1);
  EXPECT_EQ(CanonicalKey(a), CanonicalKey(a));
  EXPECT_EQ(CanonicalKey(a), CanonicalKey(b));
  EXPECT_NE(CanonicalKey(a), CanonicalKey(c));
  EXPECT_EQ(StateFromKey(kTtt3, CanonicalKey(a)), a);
  EXPECT_EQ(HashKey::FromHex(CanonicalKey(c).ToHex()), CanonicalKey(c));
}

TEST(CanonicalKeyTest, CollisionFreeOverReachableStates) {
  std::set<HashKey> keys;
  auto states = test_util::BruteForceReachable(kTtt3);
  for (const GameState& s : states) keys.insert(CanonicalKey(s));
  EXPECT_EQ(keys.size(), states.size());
}

TEST(EnumerationTest, TicTacToeReachableCount) {
  // Independent of EnumerateStates: depth-first over rendered boards.
  EXPECT_EQ(test_util::BruteForceReachable(kTtt3).size(), 5478u);
}

}  // namespace
}  // namespace azalign
