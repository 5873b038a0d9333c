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

// Measurements of a trained network against exact game values: matches
// against an oracle opponent, value error, policy-value misalignment,
// error by training visitation, and an adversarial endgame detector.
//
// Value errors are squared, e = (v - z)^2 in [0, 4], with v and z both for
// the player to move. Threshold counts use strict inequality.

#ifndef AZALIGN_ANALYSIS_H_
#define AZALIGN_ANALYSIS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "azalign/common.h"
#include "azalign/evaluator.h"
#include "azalign/game.h"
#include "azalign/mcts.h"
#include "azalign/oracle.h"

namespace azalign {

// ---------------------------------------------------------------------------
// Matches against the oracle.

struct MatchScores {
  int64_t wins = 0;
  int64_t draws = 0;
  int64_t losses = 0;

  int64_t games() const { return wins + draws + losses; }
  double non_loss_rate() const;
  double loss_rate() const;
  MatchScores& operator+=(const MatchScores& o);
  friend bool operator==(const MatchScores&, const MatchScores&) = default;
};

struct MatchConfig {
  // Used through ForEvaluation(): greedy, no root noise.
  SearchConfig search;
  // Without search the agent samples its move from the network policy.
  bool use_search = true;
  int64_t games = 1000;
  uint64_t seed = 0;
  int workers = 1;
};

// The agent moves first in even-numbered games and second in odd ones. The
// oracle picks uniformly among its optimal moves. Game i draws only from a
// stream derived from (seed, i), so scores do not depend on `workers`.
// Throws Error(kCoverage) if play leaves the table.
MatchScores EvaluateMatches(const Evaluator& agent, const StateTable& table,
                            const MatchConfig& config);

// ---------------------------------------------------------------------------
// Value error.

inline constexpr double kErrorThresholds[] = {1.0, 3.0, 3.5};
inline constexpr int kHistogramBins = 40;  // width 0.1 over [0, 4]

struct ValueErrorStats {
  std::vector<double> errors;         // (v - z)^2 per state
  std::vector<double> signed_errors;  // v - z per state
  // Squared errors over [0, 4] and signed errors over [-2, 2]; the top edge
  // falls in the last bin.
  std::vector<int64_t> histogram;
  std::vector<int64_t> signed_histogram;
  double mean = 0.0;

  size_t size() const { return errors.size(); }
  // Fraction of states with error strictly above `threshold`.
  double FractionAbove(double threshold) const;
};

int HistogramBin(double error);
ValueErrorStats SummarizeErrors(std::vector<double> signed_errors);

// Raw network values (no search) against the table's exact values. Throws
// Error(kCoverage) for states missing from the table.
ValueErrorStats ScanValueError(const Evaluator& net,
                               std::span<const GameState> states,
                               const StateTable& table, int workers = 1);

// Every non-terminal state of the table, in key order.
std::vector<GameState> NonTerminalStates(const StateTable& table);

// ---------------------------------------------------------------------------
// Policy-value misalignment.

inline constexpr double kKlSmoothing = 1e-6;

// KL(p || q) over the legal actions after adding `delta` to every legal
// entry of both distributions and renormalizing.
double SmoothedKl(const std::vector<double>& p, const std::vector<double>& q,
                  const ActionMask& mask, double delta = kKlSmoothing);

enum class PolicySource {
  kSearch,     // visit distribution of a fresh search
  kRawPolicy,  // the network's prior p
};

struct MisalignmentConfig {
  // Used through ForEvaluation().
  SearchConfig search;
  PolicySource source = PolicySource::kSearch;
  // Temperature applied to the visit counts; <= 0 is greedy, the
  // evaluation default.
  double policy_temp = 0.0;
  double value_temp = 1.0;
};

struct MisalignmentSample {
  std::vector<double> pi_p;
  std::vector<double> pi_v;
  double kl = 0.0;
};

// `state` must be non-terminal. Deterministic: evaluation search uses no
// noise.
MisalignmentSample Misalignment(const GameState& state,
                                const Evaluator& net,
                                const MisalignmentConfig& config);
std::vector<double> MisalignmentScan(const Evaluator& net,
                                     std::span<const GameState> states,
                                     const MisalignmentConfig& config,
                                     int workers = 1);

// ---------------------------------------------------------------------------
// Error by training visitation.

struct VisitBucket {
  std::string label;       // "0", "1-10", "11-100", "101-1000", ">1000"
  uint64_t min_visits = 0;
  uint64_t max_visits = 0;  // inclusive; UINT64_MAX for the open bucket
  int64_t count = 0;
  double mean_error = 0.0;
};

struct GeneralizationCurve {
  std::vector<VisitBucket> buckets;  // empty buckets are left out
  // Mean error over never-visited states, if there were any.
  std::optional<double> generalization_error;
  bool zero_visit_bucket_empty = false;
};

// `errors[i]` belongs to `states[i]`; visits are looked up by CanonicalKey.
GeneralizationCurve BuildGeneralizationCurve(
    std::span<const GameState> states, std::span<const double> errors,
    const StateTable& visits);

// ---------------------------------------------------------------------------
// Adversarial endgame detector.

struct AdversarialState {
  GameState state;
  double net_value = 0.0;
  int oracle_value = 0;
  double error = 0.0;
  std::vector<double> pi_p;
  std::vector<double> pi_v;
  double misalignment = 0.0;
};

struct AdversarialStateSet {
  std::string game;
  double threshold = 1.0;
  int max_empty_cells = 0;
  int64_t games = 0;
  int64_t endgame_states_seen = 0;  // distinct endgame states scored
  int64_t skipped = 0;              // solver budget exceeded
  std::vector<AdversarialState> states;  // sorted by CanonicalKey

  double MeanError() const;
  double MeanMisalignment() const;
};

struct DetectorConfig {
  // Drives move choice: the forced move is the least visited root action of
  // a noisy search, ties broken uniformly at random.
  SearchConfig search;
  int64_t games = 10'000;
  double threshold = 1.0;
  // <= 0 picks the per-game default (DefaultEndgameCells).
  int max_empty_cells = 0;
  size_t solver_budget = 2'000'000;
  MisalignmentConfig misalignment;
  uint64_t seed = 0;
  int workers = 1;
};

// 12 for connect4, 8 for ttt4, all cells for ttt3.
int DefaultEndgameCells(const GameSpec& spec);

// Self-play in which both sides take the least probable move. Each
// non-terminal state with at most max_empty_cells empty cells is solved
// exactly; states whose error exceeds the threshold are kept once.
AdversarialStateSet DetectAdversarialStates(const Evaluator& net,
                                            const GameSpec& spec,
                                            const DetectorConfig& config);

// Scores `set`'s states with another network. Every state is kept and the
// oracle values are reused.
AdversarialStateSet RescoreStates(const Evaluator& net,
                                  const AdversarialStateSet& set,
                                  const MisalignmentConfig& config,
                                  int workers = 1);

std::string AdversarialSetToJson(const AdversarialStateSet& set);
AdversarialStateSet AdversarialSetFromJson(const std::string& text);

// ---------------------------------------------------------------------------
// Reports.

struct EvalReport {
  std::string game;
  std::string label;
  int seeds_aggregated = 1;
  std::optional<MatchScores> with_search;
  std::optional<MatchScores> policy_only;
  int64_t value_states = 0;
  std::vector<int64_t> value_error_histogram;
  std::vector<int64_t> signed_error_histogram;
  double mean_value_error = 0.0;
  // Parallel to kErrorThresholds.
  std::vector<double> high_error_fraction;
  std::string misalignment_source = "search";
  int64_t misalignment_states = 0;
  double misalignment_mean = 0.0;
  GeneralizationCurve generalization;
};

struct ReportConfig {
  SearchConfig search;
  int64_t match_games = 1000;
  bool matches_with_search = true;
  bool matches_policy_only = true;
  PolicySource misalignment_source = PolicySource::kSearch;
  double value_temp = 1.0;
  uint64_t seed = 0;
  int workers = 1;
};

// Every metric above over all non-terminal states of `table`. `visits` may
// be null, in which case the generalization curve is left empty.
EvalReport EvaluateNetwork(const Evaluator& net, const StateTable& table,
                           const StateTable* visits, const ReportConfig& config,
                           const std::string& label);

// Sums match counts and histograms and takes count-weighted means. Throws
// Error(kInvalidArgument) for an empty list or mixed games.
EvalReport MergeReports(std::span<const EvalReport> reports,
                        const std::string& label);

std::string ReportToJson(const EvalReport& report);
// Throws Error(kFormat) for malformed input.
EvalReport ReportFromJson(const std::string& text);
// "bin_low,bin_high,count" rows.
std::string HistogramCsv(const EvalReport& report);
// "bucket,min_visits,max_visits,count,mean_error" rows.
std::string CurveCsv(const EvalReport& report);
// Standalone SVG documents.
std::string HistogramSvg(std::span<const EvalReport> reports);
std::string CurveSvg(std::span<const EvalReport> reports);

struct ComparisonRow {
  std::string metric;
  std::string label;  // the compared report
  double baseline = 0.0;
  double value = 0.0;
  double delta = 0.0;  // value - baseline
  // 100 * (baseline - value) / baseline; empty when the baseline is 0.
  std::optional<double> percent_reduction;
};

struct ComparisonTable {
  std::string game;
  std::string baseline;
  std::vector<ComparisonRow> rows;
};

// The first report is the baseline. Throws Error(kInvalidArgument) for
// fewer than two reports or mixed games.
ComparisonTable CompareReports(std::span<const EvalReport> reports);
// One line per row, e.g.
//   misalignment_mean  visa_vis  1.0000 -> 0.5000  (50.0% reduction)
std::string FormatComparison(const ComparisonTable& table);
std::string ComparisonToJson(const ComparisonTable& table);

}  // namespace azalign

#endif  // AZALIGN_ANALYSIS_H_
