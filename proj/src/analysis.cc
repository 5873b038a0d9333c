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

#include "azalign/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "azalign/training.h"
#include "json.hpp"
#include "parallel.h"

namespace azalign {
namespace {

using nlohmann::json;

constexpr uint64_t kNoUpperBound = std::numeric_limits<uint64_t>::max();

// Index drawn from `probs` by one uniform variate; zero entries never win.
int SampleFrom(const std::vector<double>& probs, Rng& rng) {
  double total = 0.0;
  for (double p : probs) total += p;
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  int last = -1;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  if (last < 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot sample from all zeros");
  }
  return last;
}

Action Argmax(const std::vector<double>& v) {
  return static_cast<Action>(std::max_element(v.begin(), v.end()) -
                             v.begin());
}

Action AgentMove(const GameState& state, const Evaluator& agent,
                 const SearchConfig& search, bool use_search, Rng& rng) {
  if (use_search) {
    SearchTree tree = RunSearch(state, agent, search, rng);
    return Argmax(SearchPolicy(tree.root(), state.spec().action_count, 0.0));
  }
  return SampleFrom(agent.Evaluate(state).policy, rng);
}

int SignedBin(double d) {
  const int b = static_cast<int>(std::floor((d + 2.0) * kHistogramBins / 4.0));
  return std::clamp(b, 0, kHistogramBins - 1);
}

struct BucketDef {
  const char* label;
  uint64_t lo;
  uint64_t hi;
};

constexpr BucketDef kBuckets[] = {{"0", 0, 0},
                                  {"1-10", 1, 10},
                                  {"11-100", 11, 100},
                                  {"101-1000", 101, 1000},
                                  {">1000", 1001, kNoUpperBound}};

std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#ff7f0e", "#9467bd", "#8c564b"};

// --- JSON helpers ---------------------------------------------------------

json ScoresJson(const MatchScores& s) {
  return {{"wins", s.wins}, {"draws", s.draws}, {"losses", s.losses}};
}

MatchScores ScoresFromJson(const json& j) {
  return {j.at("wins").get<int64_t>(), j.at("draws").get<int64_t>(),
          j.at("losses").get<int64_t>()};
}

json DoubleVector(const std::vector<double>& v) { return json(v); }

}  // namespace

// ---------------------------------------------------------------------------

double MatchScores::non_loss_rate() const {
  return games() == 0 ? 0.0 : static_cast<double>(wins + draws) / games();
}

double MatchScores::loss_rate() const {
  return games() == 0 ? 0.0 : static_cast<double>(losses) / games();
}

MatchScores& MatchScores::operator+=(const MatchScores& o) {
  wins += o.wins;
  draws += o.draws;
  losses += o.losses;
  return *this;
}

MatchScores EvaluateMatches(const Evaluator& agent, const StateTable& table,
                            const MatchConfig& config) {
  if (config.games < 0 || config.workers < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "match games must be >= 0 and workers >= 1");
  }
  const GameSpec& spec = table.spec();
  const SearchConfig search = config.search.ForEvaluation();
  search.Validate();
  std::vector<int> outcomes(config.games);
  internal::ParallelFor(config.games, config.workers, [&](int64_t g) {
    Rng rng(DeriveSeed(config.seed, g));
    const Player side = g % 2 == 0 ? Player::kP1 : Player::kP2;
    GameState s = GameState::Initial(spec);
    while (!IsTerminal(s)) {
      const Action a = s.to_move() == side
                           ? AgentMove(s, agent, search, config.use_search,
                                       rng)
                           : OracleOpponent(s, table, rng);
      s = Apply(s, a);
    }
    outcomes[g] = OutcomeFor(s, side);
  });
  MatchScores scores;
  for (int z : outcomes) {
    if (z > 0) {
      ++scores.wins;
    } else if (z == 0) {
      ++scores.draws;
    } else {
      ++scores.losses;
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------

double ValueErrorStats::FractionAbove(double threshold) const {
  if (errors.empty()) return 0.0;
  const auto n = std::count_if(errors.begin(), errors.end(),
                               [threshold](double e) { return e > threshold; });
  return static_cast<double>(n) / errors.size();
}

int HistogramBin(double error) {
  const int b = static_cast<int>(std::floor(error * kHistogramBins / 4.0));
  return std::clamp(b, 0, kHistogramBins - 1);
}

ValueErrorStats SummarizeErrors(std::vector<double> signed_errors) {
  ValueErrorStats out;
  out.histogram.assign(kHistogramBins, 0);
  out.signed_histogram.assign(kHistogramBins, 0);
  out.errors.reserve(signed_errors.size());
  double sum = 0.0;
  for (double d : signed_errors) {
    const double e = d * d;
    out.errors.push_back(e);
    ++out.histogram[HistogramBin(e)];
    ++out.signed_histogram[SignedBin(d)];
    sum += e;
  }
  out.mean = signed_errors.empty() ? 0.0 : sum / signed_errors.size();
  out.signed_errors = std::move(signed_errors);
  return out;
}

ValueErrorStats ScanValueError(const Evaluator& net,
                               std::span<const GameState> states,
                               const StateTable& table, int workers) {
  std::vector<double> signed_errors(states.size());
  internal::ParallelFor(
      static_cast<int64_t>(states.size()), workers, [&](int64_t i) {
        const double z = table.At(states[i]).value;
        signed_errors[i] = net.Value(states[i]) - z;
      });
  return SummarizeErrors(std::move(signed_errors));
}

std::vector<GameState> NonTerminalStates(const StateTable& table) {
  std::vector<GameState> out;
  for (const SolvedEntry& e : table.SortedEntries()) {
    if (e.optimal_actions != 0) out.push_back(StateFromKey(table.spec(), e.key));
  }
  return out;
}

// ---------------------------------------------------------------------------

double SmoothedKl(const std::vector<double>& p, const std::vector<double>& q,
                  const ActionMask& mask, double delta) {
  if (static_cast<int>(p.size()) != mask.size() ||
      static_cast<int>(q.size()) != mask.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "distribution size does not match the action mask");
  }
  double sp = 0.0, sq = 0.0;
  int n = 0;
  for (Action a : mask.actions()) {
    sp += p[a];
    sq += q[a];
    ++n;
  }
  sp += n * delta;
  sq += n * delta;
  double kl = 0.0;
  for (Action a : mask.actions()) {
    const double pa = (p[a] + delta) / sp;
    const double qa = (q[a] + delta) / sq;
    kl += pa * std::log(pa / qa);
  }
  // Rounding can leave a tiny negative sum for equal inputs.
  return std::max(kl, 0.0);
}

MisalignmentSample Misalignment(const GameState& state, const Evaluator& net,
                                const MisalignmentConfig& config) {
  const int actions = state.spec().action_count;
  MisalignmentSample out;
  if (config.source == PolicySource::kSearch) {
    Rng unused(0);
    SearchTree tree =
        RunSearch(state, net, config.search.ForEvaluation(), unused);
    out.pi_p = SearchPolicy(tree.root(), actions, config.policy_temp);
  } else {
    out.pi_p = net.Evaluate(state).policy;
  }
  out.pi_v = ValuePolicy(state, net, config.value_temp);
  out.kl = SmoothedKl(out.pi_p, out.pi_v, LegalActions(state));
  return out;
}

std::vector<double> MisalignmentScan(const Evaluator& net,
                                     std::span<const GameState> states,
                                     const MisalignmentConfig& config,
                                     int workers) {
  std::vector<double> out(states.size());
  internal::ParallelFor(static_cast<int64_t>(states.size()), workers,
                        [&](int64_t i) {
                          out[i] = Misalignment(states[i], net, config).kl;
                        });
  return out;
}

// ---------------------------------------------------------------------------

GeneralizationCurve BuildGeneralizationCurve(
    std::span<const GameState> states, std::span<const double> errors,
    const StateTable& visits) {
  if (states.size() != errors.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "one error per state is required");
  }
  constexpr int kN = std::size(kBuckets);
  int64_t count[kN] = {};
  double sum[kN] = {};
  for (size_t i = 0; i < states.size(); ++i) {
    const uint64_t n = visits.Visits(CanonicalKey(states[i]));
    for (int b = 0; b < kN; ++b) {
      if (n >= kBuckets[b].lo && n <= kBuckets[b].hi) {
        ++count[b];
        sum[b] += errors[i];
        break;
      }
    }
  }
  GeneralizationCurve curve;
  for (int b = 0; b < kN; ++b) {
    if (count[b] == 0) continue;
    curve.buckets.push_back({kBuckets[b].label, kBuckets[b].lo,
                             kBuckets[b].hi, count[b], sum[b] / count[b]});
  }
  curve.zero_visit_bucket_empty = count[0] == 0;
  if (count[0] > 0) curve.generalization_error = sum[0] / count[0];
  return curve;
}

// ---------------------------------------------------------------------------

double AdversarialStateSet::MeanError() const {
  if (states.empty()) return 0.0;
  double s = 0.0;
  for (const AdversarialState& a : states) s += a.error;
  return s / states.size();
}

double AdversarialStateSet::MeanMisalignment() const {
  if (states.empty()) return 0.0;
  double s = 0.0;
  for (const AdversarialState& a : states) s += a.misalignment;
  return s / states.size();
}

int DefaultEndgameCells(const GameSpec& spec) {
  switch (spec.id) {
    case GameId::kConnectFour:
      return 12;
    case GameId::kTicTacToe4:
      return 8;
    case GameId::kTicTacToe3:
      break;
  }
  return spec.cells();
}

namespace {

struct ScoredState {
  HashKey key;
  GameState state;
  double net_value;
  int oracle_value;
};

struct DetectorGame {
  std::vector<ScoredState> scored;
  std::vector<HashKey> skipped;
};

// Exact value with a budget that only depends on the state itself: a failed
// solve on a warm cache is retried once on an empty one.
std::optional<int> SolveWithinBudget(std::unique_ptr<EndgameSolver>& solver,
                                     const GameSpec& spec, size_t budget,
                                     const GameState& state) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      return solver->Value(state);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kResourceExhausted) throw;
      const bool was_cold = solver->cache_size() == 0;
      solver = std::make_unique<EndgameSolver>(spec, budget);
      if (was_cold) break;
    }
  }
  return std::nullopt;
}

AdversarialState Describe(const GameState& state, double net_value,
                          int oracle_value, const Evaluator& net,
                          const MisalignmentConfig& config) {
  MisalignmentSample m = Misalignment(state, net, config);
  const double d = net_value - oracle_value;
  return {state, net_value, oracle_value, d * d,
          std::move(m.pi_p), std::move(m.pi_v), m.kl};
}

bool KeyLess(const AdversarialState& a, const AdversarialState& b) {
  return CanonicalKey(a.state) < CanonicalKey(b.state);
}

}  // namespace

AdversarialStateSet DetectAdversarialStates(const Evaluator& net,
                                            const GameSpec& spec,
                                            const DetectorConfig& config) {
  if (config.games < 0 || config.workers < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "detector games must be >= 0 and workers >= 1");
  }
  SearchConfig search = config.search;
  search.root_noise = true;
  search.Validate();
  const int max_empty = config.max_empty_cells > 0
                            ? config.max_empty_cells
                            : DefaultEndgameCells(spec);

  const int pool = static_cast<int>(
      std::clamp<int64_t>(config.workers, 1, std::max<int64_t>(config.games, 1)));
  std::vector<std::unique_ptr<EndgameSolver>> solvers;
  for (int w = 0; w < pool; ++w) {
    solvers.push_back(
        std::make_unique<EndgameSolver>(spec, config.solver_budget));
  }

  std::vector<DetectorGame> games(config.games);
  internal::ParallelForWorkers(config.games, config.workers, [&](int64_t g,
                                                                  int w) {
    Rng rng(DeriveSeed(config.seed, g));
    DetectorGame& out = games[g];
    std::unordered_set<HashKey, HashKeyHash> seen;
    GameState s = GameState::Initial(spec);
    while (!IsTerminal(s)) {
      const HashKey key = CanonicalKey(s);
      if (s.empty_cells() <= max_empty && seen.insert(key).second) {
        const std::optional<int> z =
            SolveWithinBudget(solvers[w], spec, config.solver_budget, s);
        if (z) {
          out.scored.push_back({key, s, net.Value(s), *z});
        } else {
          out.skipped.push_back(key);
        }
      }
      SearchTree tree = RunSearch(s, net, search, rng);
      int fewest = std::numeric_limits<int>::max();
      std::vector<Action> ties;
      for (const EdgeStats& e : tree.root().edges) {
        if (e.visits < fewest) {
          fewest = e.visits;
          ties.clear();
        }
        if (e.visits == fewest) ties.push_back(e.action);
      }
      std::uniform_int_distribution<size_t> pick(0, ties.size() - 1);
      s = Apply(s, ties[pick(rng)]);
    }
  });

  AdversarialStateSet set;
  set.game = std::string(spec.name);
  set.threshold = config.threshold;
  set.max_empty_cells = max_empty;
  set.games = config.games;
  std::unordered_set<HashKey, HashKeyHash> scored_keys, skipped_keys;
  std::vector<const ScoredState*> flagged;
  for (const DetectorGame& game : games) {
    for (const ScoredState& s : game.scored) {
      if (!scored_keys.insert(s.key).second) continue;
      const double d = s.net_value - s.oracle_value;
      if (d * d > config.threshold) flagged.push_back(&s);
    }
    for (const HashKey& k : game.skipped) skipped_keys.insert(k);
  }
  set.endgame_states_seen = static_cast<int64_t>(scored_keys.size());
  set.skipped = static_cast<int64_t>(skipped_keys.size());

  std::vector<std::optional<AdversarialState>> described(flagged.size());
  internal::ParallelFor(
      static_cast<int64_t>(flagged.size()), config.workers, [&](int64_t i) {
        const ScoredState& s = *flagged[i];
        described[i] = Describe(s.state, s.net_value, s.oracle_value, net,
                                config.misalignment);
      });
  for (auto& d : described) set.states.push_back(std::move(*d));
  std::sort(set.states.begin(), set.states.end(), KeyLess);
  return set;
}

AdversarialStateSet RescoreStates(const Evaluator& net,
                                  const AdversarialStateSet& set,
                                  const MisalignmentConfig& config,
                                  int workers) {
  std::vector<std::optional<AdversarialState>> described(set.states.size());
  internal::ParallelFor(
      static_cast<int64_t>(set.states.size()), workers, [&](int64_t i) {
        const AdversarialState& s = set.states[i];
        described[i] = Describe(s.state, net.Value(s.state), s.oracle_value,
                                net, config);
      });
  AdversarialStateSet out = set;
  out.states.clear();
  for (auto& d : described) out.states.push_back(std::move(*d));
  return out;
}

std::string AdversarialSetToJson(const AdversarialStateSet& set) {
  json states = json::array();
  for (const AdversarialState& s : set.states) {
    states.push_back({{"key", CanonicalKey(s.state).ToHex()},
                      {"board", s.state.ToCompactString()},
                      {"net_value", s.net_value},
                      {"oracle_value", s.oracle_value},
                      {"error", s.error},
                      {"pi_p", DoubleVector(s.pi_p)},
                      {"pi_v", DoubleVector(s.pi_v)},
                      {"misalignment", s.misalignment}});
  }
  json j = {{"game", set.game},
            {"threshold", set.threshold},
            {"max_empty_cells", set.max_empty_cells},
            {"games", set.games},
            {"endgame_states_seen", set.endgame_states_seen},
            {"skipped", set.skipped},
            {"unique_states", set.states.size()},
            {"mean_error", set.MeanError()},
            {"mean_misalignment", set.MeanMisalignment()},
            {"states", states}};
  return j.dump(1) + "\n";
}

AdversarialStateSet AdversarialSetFromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    AdversarialStateSet set;
    set.game = j.at("game").get<std::string>();
    const GameSpec& spec = GameSpec::FromName(set.game);
    set.threshold = j.at("threshold").get<double>();
    set.max_empty_cells = j.at("max_empty_cells").get<int>();
    set.games = j.at("games").get<int64_t>();
    set.endgame_states_seen = j.at("endgame_states_seen").get<int64_t>();
    set.skipped = j.at("skipped").get<int64_t>();
    for (const json& s : j.at("states")) {
      set.states.push_back(
          {StateFromKey(spec, HashKey::FromHex(s.at("key").get<std::string>())),
           s.at("net_value").get<double>(), s.at("oracle_value").get<int>(),
           s.at("error").get<double>(),
           s.at("pi_p").get<std::vector<double>>(),
           s.at("pi_v").get<std::vector<double>>(),
           s.at("misalignment").get<double>()});
    }
    return set;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat,
                std::string("malformed adversarial state set: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

EvalReport EvaluateNetwork(const Evaluator& net, const StateTable& table,
                           const StateTable* visits, const ReportConfig& config,
                           const std::string& label) {
  EvalReport r;
  r.game = std::string(table.spec().name);
  r.label = label;
  const std::vector<GameState> states = NonTerminalStates(table);

  const ValueErrorStats ve = ScanValueError(net, states, table, config.workers);
  r.value_states = static_cast<int64_t>(ve.size());
  r.value_error_histogram = ve.histogram;
  r.signed_error_histogram = ve.signed_histogram;
  r.mean_value_error = ve.mean;
  for (double t : kErrorThresholds) {
    r.high_error_fraction.push_back(ve.FractionAbove(t));
  }

  MisalignmentConfig mc;
  mc.search = config.search;
  mc.source = config.misalignment_source;
  mc.value_temp = config.value_temp;
  r.misalignment_source =
      config.misalignment_source == PolicySource::kSearch ? "search" : "raw";
  const std::vector<double> kl =
      MisalignmentScan(net, states, mc, config.workers);
  r.misalignment_states = static_cast<int64_t>(kl.size());
  double kl_sum = 0.0;
  for (double k : kl) kl_sum += k;
  r.misalignment_mean = kl.empty() ? 0.0 : kl_sum / kl.size();

  if (visits != nullptr) {
    r.generalization = BuildGeneralizationCurve(states, ve.errors, *visits);
  }

  MatchConfig match;
  match.search = config.search;
  match.games = config.match_games;
  match.workers = config.workers;
  if (config.matches_with_search) {
    match.use_search = true;
    match.seed = DeriveSeed(config.seed, 1);
    r.with_search = EvaluateMatches(net, table, match);
  }
  if (config.matches_policy_only) {
    match.use_search = false;
    match.seed = DeriveSeed(config.seed, 2);
    r.policy_only = EvaluateMatches(net, table, match);
  }
  return r;
}

EvalReport MergeReports(std::span<const EvalReport> reports,
                        const std::string& label) {
  if (reports.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no reports to merge");
  }
  EvalReport out;
  out.game = reports[0].game;
  out.label = label;
  out.seeds_aggregated = 0;
  out.misalignment_source = reports[0].misalignment_source;
  out.value_error_histogram.assign(kHistogramBins, 0);
  out.signed_error_histogram.assign(kHistogramBins, 0);
  out.high_error_fraction.assign(std::size(kErrorThresholds), 0.0);
  double err_sum = 0.0, kl_sum = 0.0;
  std::map<uint64_t, VisitBucket> buckets;  // keyed by min_visits
  for (const EvalReport& r : reports) {
    if (r.game != out.game) {
      throw Error(ErrorCode::kInvalidArgument,
                  "cannot merge reports for " + out.game + " and " + r.game);
    }
    out.seeds_aggregated += r.seeds_aggregated;
    auto add_scores = [](std::optional<MatchScores>& to,
                         const std::optional<MatchScores>& from) {
      if (!from) return;
      if (!to) to = MatchScores{};
      *to += *from;
    };
    add_scores(out.with_search, r.with_search);
    add_scores(out.policy_only, r.policy_only);
    out.value_states += r.value_states;
    for (int b = 0; b < kHistogramBins; ++b) {
      if (b < static_cast<int>(r.value_error_histogram.size())) {
        out.value_error_histogram[b] += r.value_error_histogram[b];
      }
      if (b < static_cast<int>(r.signed_error_histogram.size())) {
        out.signed_error_histogram[b] += r.signed_error_histogram[b];
      }
    }
    err_sum += r.mean_value_error * r.value_states;
    for (size_t t = 0; t < out.high_error_fraction.size() &&
                       t < r.high_error_fraction.size();
         ++t) {
      out.high_error_fraction[t] += r.high_error_fraction[t] * r.value_states;
    }
    out.misalignment_states += r.misalignment_states;
    kl_sum += r.misalignment_mean * r.misalignment_states;
    for (const VisitBucket& b : r.generalization.buckets) {
      VisitBucket& m = buckets[b.min_visits];
      if (m.count == 0) m = {b.label, b.min_visits, b.max_visits, 0, 0.0};
      m.mean_error += b.mean_error * b.count;
      m.count += b.count;
    }
  }
  if (out.value_states > 0) {
    out.mean_value_error = err_sum / out.value_states;
    for (double& f : out.high_error_fraction) f /= out.value_states;
  }
  if (out.misalignment_states > 0) {
    out.misalignment_mean = kl_sum / out.misalignment_states;
  }
  for (auto& [lo, b] : buckets) {
    b.mean_error /= b.count;
    out.generalization.buckets.push_back(b);
  }
  out.generalization.zero_visit_bucket_empty = !buckets.contains(0);
  if (buckets.contains(0)) {
    out.generalization.generalization_error = buckets.at(0).mean_error;
  }
  return out;
}

std::string ReportToJson(const EvalReport& r) {
  json j;
  j["game"] = r.game;
  j["label"] = r.label;
  j["seeds_aggregated"] = r.seeds_aggregated;
  j["match_scores"] = json::object();
  if (r.with_search) {
    j["match_scores"]["vs_oracle_with_search"] = ScoresJson(*r.with_search);
  }
  if (r.policy_only) {
    j["match_scores"]["vs_oracle_policy_only"] = ScoresJson(*r.policy_only);
  }
  json thresholds = json::array();
  for (size_t t = 0; t < r.high_error_fraction.size(); ++t) {
    thresholds.push_back({{"threshold", kErrorThresholds[t]},
                          {"fraction_above", r.high_error_fraction[t]}});
  }
  j["value_error"] = {{"states", r.value_states},
                      {"mean", r.mean_value_error},
                      {"histogram", r.value_error_histogram},
                      {"signed_histogram", r.signed_error_histogram},
                      {"thresholds", thresholds}};
  j["misalignment"] = {{"source", r.misalignment_source},
                       {"states", r.misalignment_states},
                       {"mean", r.misalignment_mean}};
  json buckets = json::array();
  for (const VisitBucket& b : r.generalization.buckets) {
    buckets.push_back({{"bucket", b.label},
                       {"min_visits", b.min_visits},
                       {"max_visits", b.max_visits == kNoUpperBound
                                          ? json(nullptr)
                                          : json(b.max_visits)},
                       {"count", b.count},
                       {"mean_error", b.mean_error}});
  }
  j["generalization"] = {
      {"curve", buckets},
      {"zero_visit_bucket_empty", r.generalization.zero_visit_bucket_empty},
      {"generalization_error",
       r.generalization.generalization_error
           ? json(*r.generalization.generalization_error)
           : json(nullptr)}};
  return j.dump(2) + "\n";
}

EvalReport ReportFromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    EvalReport r;
    r.game = j.at("game").get<std::string>();
    r.label = j.at("label").get<std::string>();
    r.seeds_aggregated = j.at("seeds_aggregated").get<int>();
    const json& m = j.at("match_scores");
    if (m.contains("vs_oracle_with_search")) {
      r.with_search = ScoresFromJson(m["vs_oracle_with_search"]);
    }
    if (m.contains("vs_oracle_policy_only")) {
      r.policy_only = ScoresFromJson(m["vs_oracle_policy_only"]);
    }
    const json& ve = j.at("value_error");
    r.value_states = ve.at("states").get<int64_t>();
    r.mean_value_error = ve.at("mean").get<double>();
    r.value_error_histogram = ve.at("histogram").get<std::vector<int64_t>>();
    r.signed_error_histogram =
        ve.at("signed_histogram").get<std::vector<int64_t>>();
    for (const json& t : ve.at("thresholds")) {
      r.high_error_fraction.push_back(t.at("fraction_above").get<double>());
    }
    const json& mis = j.at("misalignment");
    r.misalignment_source = mis.at("source").get<std::string>();
    r.misalignment_states = mis.at("states").get<int64_t>();
    r.misalignment_mean = mis.at("mean").get<double>();
    const json& g = j.at("generalization");
    for (const json& b : g.at("curve")) {
      const json& hi = b.at("max_visits");
      r.generalization.buckets.push_back(
          {b.at("bucket").get<std::string>(), b.at("min_visits").get<uint64_t>(),
           hi.is_null() ? kNoUpperBound : hi.get<uint64_t>(),
           b.at("count").get<int64_t>(), b.at("mean_error").get<double>()});
    }
    r.generalization.zero_visit_bucket_empty =
        g.at("zero_visit_bucket_empty").get<bool>();
    if (!g.at("generalization_error").is_null()) {
      r.generalization.generalization_error =
          g["generalization_error"].get<double>();
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat,
                std::string("malformed evaluation report: ") + e.what());
  }
}

std::string HistogramCsv(const EvalReport& r) {
  std::ostringstream out;
  out << "bin_low,bin_high,count\n";
  for (size_t b = 0; b < r.value_error_histogram.size(); ++b) {
    out << Fmt("%.1f", b * 4.0 / kHistogramBins) << ","
        << Fmt("%.1f", (b + 1) * 4.0 / kHistogramBins) << ","
        << r.value_error_histogram[b] << "\n";
  }
  return out.str();
}

std::string CurveCsv(const EvalReport& r) {
  std::ostringstream out;
  out << "bucket,min_visits,max_visits,count,mean_error\n";
  for (const VisitBucket& b : r.generalization.buckets) {
    out << b.label << "," << b.min_visits << ",";
    if (b.max_visits != kNoUpperBound) out << b.max_visits;
    out << "," << b.count << "," << Fmt("%.17g", b.mean_error) << "\n";
  }
  return out.str();
}

namespace {

constexpr int kSvgWidth = 720, kSvgHeight = 360;
constexpr int kLeft = 60, kRight = 20, kTop = 30, kBottom = 50;

std::string SvgFrame(const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::string& body,
                     std::span<const EvalReport> reports) {
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth
    << "\" height=\"" << kSvgHeight << "\" font-family=\"sans-serif\""
    << " font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kSvgWidth / 2 << "\" y=\"18\" text-anchor=\"middle\">"
    << XmlEscape(title) << "</text>\n"
    << "<line x1=\"" << kLeft << "\" y1=\"" << kSvgHeight - kBottom
    << "\" x2=\"" << kSvgWidth - kRight << "\" y2=\"" << kSvgHeight - kBottom
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
    << "\" y2=\"" << kSvgHeight - kBottom << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << kSvgWidth / 2 << "\" y=\"" << kSvgHeight - 10
    << "\" text-anchor=\"middle\">" << XmlEscape(x_label) << "</text>\n"
    << "<text x=\"14\" y=\"" << kSvgHeight / 2
    << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << kSvgHeight / 2 << ")\">" << XmlEscape(y_label) << "</text>\n"
    << body;
  for (size_t k = 0; k < reports.size(); ++k) {
    const int y = kTop + 14 * static_cast<int>(k);
    o << "<rect x=\"" << kSvgWidth - kRight - 150 << "\" y=\"" << y - 9
      << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[k % 6]
      << "\"/>\n"
      << "<text x=\"" << kSvgWidth - kRight - 135 << "\" y=\"" << y << "\">"
      << XmlEscape(reports[k].label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace

std::string HistogramSvg(std::span<const EvalReport> reports) {
  const double plot_w = kSvgWidth - kLeft - kRight;
  const double plot_h = kSvgHeight - kTop - kBottom;
  double max_frac = 1e-9;
  for (const EvalReport& r : reports) {
    for (int64_t c : r.value_error_histogram) {
      if (r.value_states > 0) {
        max_frac = std::max(max_frac, static_cast<double>(c) / r.value_states);
      }
    }
  }
  std::ostringstream body;
  const double bin_w = plot_w / kHistogramBins;
  const double bar_w = bin_w / std::max<size_t>(reports.size(), 1);
  for (size_t k = 0; k < reports.size(); ++k) {
    const EvalReport& r = reports[k];
    for (size_t b = 0; b < r.value_error_histogram.size(); ++b) {
      const double frac =
          r.value_states > 0
              ? static_cast<double>(r.value_error_histogram[b]) / r.value_states
              : 0.0;
      const double h = plot_h * frac / max_frac;
      body << "<rect x=\"" << Fmt("%.2f", kLeft + b * bin_w + k * bar_w)
           << "\" y=\"" << Fmt("%.2f", kTop + plot_h - h) << "\" width=\""
           << Fmt("%.2f", bar_w) << "\" height=\"" << Fmt("%.2f", h)
           << "\" fill=\"" << kPalette[k % 6] << "\"/>\n";
    }
  }
  for (int tick = 0; tick <= 4; ++tick) {
    body << "<text x=\"" << Fmt("%.1f", kLeft + plot_w * tick / 4.0)
         << "\" y=\"" << kSvgHeight - kBottom + 15
         << "\" text-anchor=\"middle\">" << tick << "</text>\n";
  }
  for (double t : kErrorThresholds) {
    const double x = kLeft + plot_w * t / 4.0;
    body << "<line x1=\"" << Fmt("%.1f", x) << "\" y1=\"" << kTop
         << "\" x2=\"" << Fmt("%.1f", x) << "\" y2=\"" << kTop + plot_h
         << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }
  body << "<text x=\"" << kLeft - 5 << "\" y=\"" << kTop + 4
       << "\" text-anchor=\"end\">" << Fmt("%.3f", max_frac) << "</text>\n";
  return SvgFrame("Value error (v - z)^2", "squared error",
                  "fraction of states", body.str(), reports);
}

std::string CurveSvg(std::span<const EvalReport> reports) {
  const double plot_w = kSvgWidth - kLeft - kRight;
  const double plot_h = kSvgHeight - kTop - kBottom;
  constexpr int kN = std::size(kBuckets);
  auto x_of = [&](int b) { return kLeft + plot_w * (b + 0.5) / kN; };
  auto y_of = [&](double e) { return kTop + plot_h * (1.0 - e / 4.0); };
  std::ostringstream body;
  for (int b = 0; b < kN; ++b) {
    body << "<text x=\"" << Fmt("%.1f", x_of(b)) << "\" y=\""
         << kSvgHeight - kBottom + 15 << "\" text-anchor=\"middle\">"
         << XmlEscape(kBuckets[b].label) << "</text>\n";
  }
  for (int tick = 0; tick <= 4; ++tick) {
    body << "<text x=\"" << kLeft - 5 << "\" y=\""
         << Fmt("%.1f", y_of(tick) + 4) << "\" text-anchor=\"end\">" << tick
         << "</text>\n";
  }
  for (size_t k = 0; k < reports.size(); ++k) {
    std::string points;
    for (const VisitBucket& vb : reports[k].generalization.buckets) {
      int b = 0;
      while (b < kN && kBuckets[b].lo != vb.min_visits) ++b;
      if (b == kN) continue;
      points += Fmt("%.1f", x_of(b)) + "," + Fmt("%.1f", y_of(vb.mean_error)) +
                " ";
      body << "<circle cx=\"" << Fmt("%.1f", x_of(b)) << "\" cy=\""
           << Fmt("%.1f", y_of(vb.mean_error)) << "\" r=\"3\" fill=\""
           << kPalette[k % 6] << "\"/>\n";
    }
    body << "<polyline fill=\"none\" stroke=\"" << kPalette[k % 6]
         << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
  }
  return SvgFrame("Mean value error by training visits", "visits",
                  "mean squared error", body.str(), reports);
}

// ---------------------------------------------------------------------------

ComparisonTable CompareReports(std::span<const EvalReport> reports) {
  if (reports.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "comparison needs at least two reports");
  }
  const EvalReport& base = reports[0];
  ComparisonTable table{base.game, base.label, {}};
  for (size_t k = 1; k < reports.size(); ++k) {
    const EvalReport& r = reports[k];
    if (r.game != base.game) {
      throw Error(ErrorCode::kInvalidArgument,
                  "cannot compare " + base.game + " with " + r.game);
    }
    auto row = [&](const std::string& metric, double b, double v) {
      ComparisonRow out{metric, r.label, b, v, v - b, std::nullopt};
      if (b != 0.0) out.percent_reduction = 100.0 * (b - v) / b;
      table.rows.push_back(out);
    };
    row("misalignment_mean", base.misalignment_mean, r.misalignment_mean);
    row("mean_value_error", base.mean_value_error, r.mean_value_error);
    if (base.generalization.generalization_error &&
        r.generalization.generalization_error) {
      row("generalization_error", *base.generalization.generalization_error,
          *r.generalization.generalization_error);
    }
    for (size_t t = 0; t < std::size(kErrorThresholds); ++t) {
      if (t < base.high_error_fraction.size() &&
          t < r.high_error_fraction.size()) {
        row("error_above_" + Fmt("%.1f", kErrorThresholds[t]),
            base.high_error_fraction[t], r.high_error_fraction[t]);
      }
    }
    if (base.with_search && r.with_search) {
      row("loss_rate_with_search", base.with_search->loss_rate(),
          r.with_search->loss_rate());
    }
    if (base.policy_only && r.policy_only) {
      row("loss_rate_policy_only", base.policy_only->loss_rate(),
          r.policy_only->loss_rate());
    }
  }
  return table;
}

std::string FormatComparison(const ComparisonTable& table) {
  std::ostringstream out;
  out << "game " << table.game << ", baseline " << table.baseline << "\n";
  for (const ComparisonRow& r : table.rows) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s %-16s %.4f -> %.4f", r.metric.c_str(),
                  r.label.c_str(), r.baseline, r.value);
    out << line;
    if (r.percent_reduction) {
      const double p = *r.percent_reduction;
      out << Fmt(p >= 0.0 ? "  (%.1f%% reduction)" : "  (%.1f%% increase)",
                 std::abs(p));
    } else {
      out << Fmt("  (delta %+.4f)", r.delta);
    }
    out << "\n";
  }
  return out.str();
}

std::string ComparisonToJson(const ComparisonTable& table) {
  json rows = json::array();
  for (const ComparisonRow& r : table.rows) {
    rows.push_back({{"metric", r.metric},
                    {"label", r.label},
                    {"baseline", r.baseline},
                    {"value", r.value},
                    {"delta", r.delta},
                    {"percent_reduction", r.percent_reduction
                                              ? json(*r.percent_reduction)
                                              : json(nullptr)}});
  }
  json j = {{"game", table.game}, {"baseline", table.baseline}, {"rows", rows}};
  return j.dump(2) + "\n";
}

}  // namespace azalign
