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

// Acceptance suite: runs criteria 1-10 end to end and prints one PASS or
// FAIL line per criterion. Trained networks and their reports are cached
// under --cache (keyed by the full training config and seed), so a rerun
// only repeats the cheap checks.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "azalign/analysis.h"
#include "azalign/game.h"
#include "azalign/mcts.h"
#include "azalign/neural.h"
#include "azalign/oracle.h"
#include "azalign/training.h"
#include "json.hpp"

#ifndef AZALIGN_ACCEPTANCE_CACHE
#define AZALIGN_ACCEPTANCE_CACHE "acceptance_cache"
#endif

namespace azalign {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr uint64_t kSeeds[] = {0, 1, 2};
// Bump when anything feeding the cache changes meaning.
constexpr const char* kCacheVersion = "acceptance-v1";

const GameSpec& kTtt3 = GameSpec::Get(GameId::kTicTacToe3);
const GameSpec& kTtt4 = GameSpec::Get(GameId::kTicTacToe4);

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

uint64_t Fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string Hex(uint64_t v) { return Fmt("%016llx", (unsigned long long)v); }

std::string ReadText(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
  }
  fs::rename(tmp, p);
}

struct Options {
  fs::path cache = AZALIGN_ACCEPTANCE_CACHE;
  int workers = 1;
  std::set<int> only;
};

Options& Opts() {
  static Options o;
  return o;
}

// ---------------------------------------------------------------------------
// Cached training and evaluation.

struct Model {
  std::string name;
  std::string key;
  std::shared_ptr<const Net> net;
  StateTable visits{GameId::kTicTacToe3};  // replaced on load
  double train_seconds = 0.0;
};

TrainConfig ConfigFor(const GameSpec& spec, TrainMode mode, uint64_t seed) {
  TrainConfig c = TrainConfig::ForGame(spec.id, "desk");
  c.mode = mode;
  c.seed = seed;
  return c;
}

std::string ModelName(const TrainConfig& c) {
  std::string name = std::string(c.spec().name) + "/" + TrainModeName(c.mode) +
                     "/seed" + std::to_string(c.seed);
  if (UsesVis(c.mode) && c.vis_epsilon != 0.5) {
    name += Fmt("/eps%.2f", c.vis_epsilon);
  }
  return name;
}

Model TrainCached(TrainConfig config) {
  config.workers = 1;  // results do not depend on it
  const std::string key =
      Hex(Fnv1a(std::string(kCacheVersion) + "\n" + FormatTrainConfig(config)));
  const fs::path dir = Opts().cache / ("train-" + key);
  Model m;
  m.name = ModelName(config);
  m.key = key;
  if (!fs::exists(dir / "meta.json")) {
    std::cerr << "  training " << m.name << " (" << config.total_games
              << " games)\n";
    const fs::path tmp = dir.string() + ".partial";
    fs::remove_all(tmp);
    config.workers = Opts().workers;
    const auto start = Clock::now();
    Train(config, tmp.string(), [&](const CheckpointRecord& rec) {
      if (rec.games % (config.total_games / 4) == 0) {
        std::cerr << Fmt("    %lld games  loss %.3f  %.0fs\n",
                         (long long)rec.games, rec.loss.total(),
                         rec.elapsed_seconds);
      }
    });
    json meta = {{"name", m.name},
                 {"train_seconds", Seconds(start)},
                 {"config", FormatTrainConfig(config)}};
    WriteText(tmp / "meta.json", meta.dump(2));
    fs::remove_all(dir);
    fs::rename(tmp, dir);
  }
  const json meta = json::parse(ReadText(dir / "meta.json"));
  m.train_seconds = meta["train_seconds"].get<double>();
  Checkpoint ck = LoadCheckpoint((dir / "final.aznet").string());
  m.net = std::make_shared<const Net>(std::move(ck.net));
  m.visits = StateTable::Load((dir / "visits.aztable").string());
  return m;
}

struct Evaluated {
  EvalReport report;
  double seconds = 0.0;
};

Evaluated EvaluateCached(const Model& m, const StateTable& table,
                         ReportConfig rc, const std::string& label) {
  const std::string key = Hex(Fnv1a(
      Fmt("%s|%s|%lld|%d|%d|%d|%.17g|%llu|%d|%.17g|%d", m.key.c_str(),
          label.c_str(), (long long)rc.match_games, rc.matches_with_search,
          rc.matches_policy_only, static_cast<int>(rc.misalignment_source),
          rc.value_temp, (unsigned long long)rc.seed, rc.search.num_simulations,
          rc.search.c_puct, rc.search.temperature_drop_ply)));
  const fs::path path = Opts().cache / ("report-" + key + ".json");
  Evaluated e;
  if (fs::exists(path)) {
    const json j = json::parse(ReadText(path));
    e.report = ReportFromJson(j["report"].dump());
    e.seconds = j["seconds"].get<double>();
    return e;
  }
  rc.workers = Opts().workers;
  const auto start = Clock::now();
  NetworkEvaluator eval(m.net);
  e.report = EvaluateNetwork(eval, table, &m.visits, rc, label);
  e.seconds = Seconds(start);
  const json j = {{"report", json::parse(ReportToJson(e.report))},
                  {"seconds", e.seconds}};
  WriteText(path, j.dump());
  return e;
}

// Shared ttt3 state: the solved table and the per-mode, per-seed reports.
struct Ttt3Runs {
  std::unique_ptr<StateTable> table;
  std::map<TrainMode, std::vector<Model>> models;
  std::map<TrainMode, std::vector<Evaluated>> reports;
};

Ttt3Runs& Runs() {
  static Ttt3Runs runs;
  return runs;
}

const StateTable& Ttt3Table() {
  Ttt3Runs& r = Runs();
  if (!r.table) {
    r.table =
        std::make_unique<StateTable>(Solve(kTtt3, GameState::Initial(kTtt3)));
  }
  return *r.table;
}

ReportConfig Ttt3ReportConfig(uint64_t seed) {
  ReportConfig rc;
  rc.search = SearchConfig::ForGame(kTtt3);
  rc.match_games = 1000;
  rc.seed = seed;
  return rc;
}

const std::vector<Evaluated>& ReportsFor(TrainMode mode) {
  Ttt3Runs& r = Runs();
  auto it = r.reports.find(mode);
  if (it != r.reports.end()) return it->second;
  std::vector<Model> models;
  std::vector<Evaluated> reports;
  for (uint64_t seed : kSeeds) {
    Model m = TrainCached(ConfigFor(kTtt3, mode, seed));
    reports.push_back(EvaluateCached(m, Ttt3Table(), Ttt3ReportConfig(seed),
                                     TrainModeName(mode)));
    models.push_back(std::move(m));
  }
  r.models[mode] = std::move(models);
  return r.reports[mode] = std::move(reports);
}

const std::vector<Model>& ModelsFor(TrainMode mode) {
  ReportsFor(mode);
  return Runs().models.at(mode);
}

EvalReport Merged(TrainMode mode) {
  std::vector<EvalReport> reps;
  for (const Evaluated& e : ReportsFor(mode)) reps.push_back(e.report);
  return MergeReports(reps, TrainModeName(mode));
}

double Gen(const EvalReport& r) {
  return r.generalization.generalization_error.value_or(-1.0);
}

double Above3(const EvalReport& r) { return r.high_error_fraction.at(1); }

// ---------------------------------------------------------------------------
// Criteria.

struct Outcome {
  bool pass = false;
  std::string detail;
};

void Info(const std::string& line) { std::cout << "  info: " << line << "\n"; }

Outcome OracleCorrectness() {
  const auto start = Clock::now();
  const StateTable table = Solve(kTtt3, GameState::Initial(kTtt3));
  const int root = table.At(GameState::Initial(kTtt3)).value;
  Rng rng(DeriveSeed(2026, 1));
  int draws = 0;
  for (int g = 0; g < 1000; ++g) {
    GameState s = GameState::Initial(kTtt3);
    while (!IsTerminal(s)) s = Apply(s, OracleOpponent(s, table, rng));
    if (*TerminalValue(s) == 0) ++draws;
  }
  const double secs = Seconds(start);
  return {root == 0 && draws == 1000 && secs < 60.0,
          Fmt("root value %d, %d/1000 oracle self-play draws, %.1fs (< 60s)",
              root, draws, secs)};
}

Outcome SearchCorrectness() {
  const auto start = Clock::now();
  const StateTable& table = Ttt3Table();
  OracleEvaluator stub(table, OraclePrior::kUniform);
  SearchConfig cfg = SearchConfig::ForGame(kTtt3).ForEvaluation();
  cfg.num_simulations = 400;
  Rng rng(DeriveSeed(2026, 2));
  int positions = 0, optimal = 0;
  while (positions < 500) {
    // Uniform ply of a uniformly random playout.
    std::vector<GameState> line{GameState::Initial(kTtt3)};
    while (!IsTerminal(line.back())) {
      const auto legal = LegalActions(line.back()).actions();
      std::uniform_int_distribution<size_t> pick(0, legal.size() - 1);
      line.push_back(Apply(line.back(), legal[pick(rng)]));
    }
    line.pop_back();
    std::uniform_int_distribution<size_t> ply(0, line.size() - 1);
    const GameState s = line[ply(rng)];
    const SearchTree tree = RunSearch(s, stub, cfg, rng);
    const auto pi = SearchPolicy(tree.root(), kTtt3.action_count, 0.0);
    Action best = 0;
    for (Action a = 0; a < kTtt3.action_count; ++a) {
      if (pi[a] > pi[best]) best = a;
    }
    ++positions;
    if (table.At(s).IsOptimal(best)) ++optimal;
  }
  const double rate = static_cast<double>(optimal) / positions;
  const double secs = Seconds(start);
  return {rate >= 0.99 && secs < 300.0,
          Fmt("%d/%d positions choose an optimal move (%.1f%%, need >= 99%%), "
              "%.1fs (< 300s)",
              optimal, positions, 100.0 * rate, secs)};
}

Outcome AlphaZeroStrength() {
  const auto& reps = ReportsFor(TrainMode::kAlphaZero);
  const auto& models = ModelsFor(TrainMode::kAlphaZero);
  bool pass = true;
  double seconds = 0.0;
  std::string per_seed;
  for (size_t i = 0; i < reps.size(); ++i) {
    const double rate = reps[i].report.with_search->non_loss_rate();
    pass = pass && rate >= 0.99;
    seconds += models[i].train_seconds + reps[i].seconds;
    per_seed += Fmt("%s%.3f", i ? ", " : "", rate);
  }
  pass = pass && seconds < 7200.0;
  return {pass, Fmt("non-loss vs oracle with search per seed [%s] (need >= "
                    "0.99 each), train+eval %.0fs (< 7200s)",
                    per_seed.c_str(), seconds)};
}

Outcome SearchWithheldGap() {
  const auto& reps = ReportsFor(TrainMode::kAlphaZero);
  bool pass = true;
  std::string per_seed;
  for (size_t i = 0; i < reps.size(); ++i) {
    const double with = reps[i].report.with_search->loss_rate();
    const double without = reps[i].report.policy_only->loss_rate();
    pass = pass && without > with;
    per_seed += Fmt("%s%.3f vs %.3f", i ? ", " : "", without, with);
  }
  return {pass, Fmt("loss rate policy-only vs with search per seed [%s] "
                    "(need policy-only strictly higher)",
                    per_seed.c_str())};
}

Outcome VisaVisPolicyImprovement() {
  const EvalReport az = Merged(TrainMode::kAlphaZero);
  const EvalReport vv = Merged(TrainMode::kVisaVis);
  const double a = az.policy_only->non_loss_rate();
  const double v = vv.policy_only->non_loss_rate();
  return {v - a >= 0.10,
          Fmt("policy-only non-loss over 3 seeds: alphazero %.3f, visa_vis "
              "%.3f, gap %+.1f points (need >= +10)",
              a, v, 100.0 * (v - a))};
}

Outcome MisalignmentReduction() {
  const EvalReport az = Merged(TrainMode::kAlphaZero);
  const EvalReport vv = Merged(TrainMode::kVisaVis);
  const double reduction = 1.0 - vv.misalignment_mean / az.misalignment_mean;

  // Context for reading the number: the same metric for a network with exact
  // values, and the raw-policy variant.
  const StateTable& table = Ttt3Table();
  const std::vector<GameState> states = NonTerminalStates(table);
  MisalignmentConfig mc;
  mc.search = SearchConfig::ForGame(kTtt3);
  OracleEvaluator exact(table, OraclePrior::kOptimal);
  const std::vector<double> floor =
      MisalignmentScan(exact, states, mc, Opts().workers);
  double floor_mean = 0.0;
  for (double d : floor) floor_mean += d;
  floor_mean /= static_cast<double>(floor.size());
  Info(
      Fmt("exact-value network scores %.4f on this metric; excess over it: "
          "alphazero %.4f, visa_vis %.4f",
          floor_mean, az.misalignment_mean - floor_mean,
          vv.misalignment_mean - floor_mean));
  mc.source = PolicySource::kRawPolicy;
  double raw[2] = {0.0, 0.0};
  const TrainMode modes[2] = {TrainMode::kAlphaZero, TrainMode::kVisaVis};
  for (int k = 0; k < 2; ++k) {
    for (const Model& m : ModelsFor(modes[k])) {
      NetworkEvaluator eval(m.net);
      double sum = 0.0;
      for (double d : MisalignmentScan(eval, states, mc, Opts().workers)) {
        sum += d;
      }
      raw[k] += sum / static_cast<double>(states.size()) / std::size(kSeeds);
    }
  }
  Info(
      Fmt("raw network policy instead of search: alphazero %.4f, visa_vis "
          "%.4f (%.1f%% lower)",
          raw[0], raw[1], 100.0 * (1.0 - raw[1] / raw[0])));

  return {reduction >= 0.30,
          Fmt("mean KL(pi_p || pi_v) over %lld states, 3 seeds: alphazero "
              "%.4f, visa_vis %.4f, %.1f%% lower (need >= 30%%)",
              (long long)az.misalignment_states / az.seeds_aggregated,
              az.misalignment_mean, vv.misalignment_mean, 100.0 * reduction)};
}

Outcome ValueErrorReduction() {
  const EvalReport az = Merged(TrainMode::kAlphaZero);
  const EvalReport vv = Merged(TrainMode::kVisaVis);
  const double ratio = Gen(vv) / Gen(az);
  const bool gen_ok = Gen(az) > 0.0 && Gen(vv) >= 0.0 && ratio <= 0.7;
  const bool tail_ok = Above3(vv) < Above3(az);
  return {gen_ok && tail_ok,
          Fmt("zero-visit mean squared error alphazero %.4f, visa_vis %.4f "
              "(ratio %.2f, need <= 0.70); fraction e > 3.0 alphazero %.4f, "
              "visa_vis %.4f (need strictly lower)",
              Gen(az), Gen(vv), ratio, Above3(az), Above3(vv))};
}

Outcome AblationOrdering() {
  const EvalReport az = Merged(TrainMode::kAlphaZero);
  const EvalReport vis = Merged(TrainMode::kVisOnly);
  const EvalReport visa = Merged(TrainMode::kVisaOnly);
  const EvalReport vv = Merged(TrainMode::kVisaVis);
  for (const EvalReport* r : {&az, &vis, &visa, &vv}) {
    Info(
        Fmt("%-10s value error %.4f  misalignment %.4f  generalization "
            "%.4f  e > 3.0 %.4f",
            r->label.c_str(), r->mean_value_error, r->misalignment_mean,
            Gen(*r), Above3(*r)));
  }
  // VIS ablation knob at seed 0.
  for (double eps : {0.25, 0.75}) {
    TrainConfig c = ConfigFor(kTtt3, TrainMode::kVisaVis, 0);
    c.vis_epsilon = eps;
    const Model m = TrainCached(c);
    const EvalReport r =
        EvaluateCached(m, Ttt3Table(), Ttt3ReportConfig(0), m.name).report;
    Info(
        Fmt("visa_vis seed 0 epsilon %.2f: value error %.4f  misalignment "
            "%.4f  policy-only non-loss %.3f",
            eps, r.mean_value_error, r.misalignment_mean,
            r.policy_only->non_loss_rate()));
  }
  const bool visa_targets = visa.mean_value_error < az.mean_value_error;
  const bool vis_targets = vis.misalignment_mean < az.misalignment_mean;
  const bool combined = vv.mean_value_error <= vis.mean_value_error &&
                        vv.mean_value_error <= visa.mean_value_error &&
                        vv.misalignment_mean <= vis.misalignment_mean &&
                        vv.misalignment_mean <= visa.misalignment_mean;
  return {visa_targets && vis_targets && combined,
          Fmt("visa_only value error below alphazero: %s; vis_only "
              "misalignment below alphazero: %s; visa_vis at or below both "
              "ablations on both metrics: %s",
              visa_targets ? "yes" : "no", vis_targets ? "yes" : "no",
              combined ? "yes" : "no")};
}

Outcome AdversarialDetector() {
  const Model az = TrainCached(ConfigFor(kTtt4, TrainMode::kAlphaZero, 0));
  const Model vv = TrainCached(ConfigFor(kTtt4, TrainMode::kVisaVis, 0));
  DetectorConfig dc;
  dc.search = SearchConfig::ForGame(kTtt4);
  dc.misalignment.search = dc.search;
  dc.games = 10'000;
  dc.threshold = 1.0;
  dc.seed = 0;
  const fs::path path = Opts().cache / ("detect-" + az.key + ".json");
  AdversarialStateSet set;
  if (fs::exists(path)) {
    set = AdversarialSetFromJson(ReadText(path));
  } else {
    std::cerr << "  detecting on " << az.name << " (" << dc.games
              << " games)\n";
    dc.workers = Opts().workers;
    NetworkEvaluator eval(az.net);
    set = DetectAdversarialStates(eval, kTtt4, dc);
    WriteText(path, AdversarialSetToJson(set));
  }
  NetworkEvaluator vv_eval(vv.net);
  const AdversarialStateSet rescored =
      RescoreStates(vv_eval, set, dc.misalignment, Opts().workers);
  Info(
      Fmt("detector saw %lld distinct endgame states, %lld skipped on "
          "solver budget; misalignment on the set alphazero %.3f, visa_vis "
          "%.3f",
          (long long)set.endgame_states_seen, (long long)set.skipped,
          set.MeanMisalignment(), rescored.MeanMisalignment()));
  const size_t n = set.states.size();
  return {n >= 100 && rescored.MeanError() < set.MeanError(),
          Fmt("ttt4: %zu unique endgame states with e > 1.0 for alphazero "
              "(need >= 100); mean error on that set alphazero %.3f, "
              "visa_vis %.3f (need strictly lower)",
              n, n ? set.MeanError() : 0.0, n ? rescored.MeanError() : 0.0)};
}

// Runs one gtest binary restricted to `filter`; true when it passes and ran
// at least one test.
bool RunGtest(const std::string& binary, const std::string& filter, int* tests,
              std::string* tail) {
  const std::string cmd =
      "'" + binary + "' --gtest_filter='" + filter + "' 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return false;
  std::string out;
  char buf[4096];
  for (size_t n; (n = fread(buf, 1, sizeof(buf), pipe)) > 0;)
    out.append(buf, n);
  const int status = pclose(pipe);
  std::smatch m;
  static const std::regex kPassed(R"(\[  PASSED  \] (\d+) test)");
  *tests = std::regex_search(out, m, kPassed) ? std::stoi(m[1]) : 0;
  *tail = out.size() > 2000 ? out.substr(out.size() - 2000) : out;
  return WIFEXITED(status) && WEXITSTATUS(status) == 0 && *tests > 0;
}

Outcome PropertySuites() {
  struct Suite {
    const char* name;
    const char* binary;
    const char* filter;
  };
  const Suite suites[] = {
      {"gradient vs finite differences", AZALIGN_NEURAL_TEST, "GradientTest.*"},
      {"masked softmax normalization", AZALIGN_NEURAL_TEST,
       "ForwardTest.MaskedSoftmaxNormalization:"
       "ForwardTest.SingleLegalActionHasProbabilityOne"},
      {"search visit conservation and Q range", AZALIGN_MCTS_TEST,
       "RunSearchTest.RootVisitsEqualSimulations:"
       "RunSearchTest.ConservationOnRandomPositions"},
      {"symmetry closure, involution, action commutativity", AZALIGN_GAME_TEST,
       "SymmetryTest.*:TransformActionTest.CommutesWithApplyOnRandomTriples"},
      {"oracle minimax consistency", AZALIGN_ORACLE_TEST,
       "OracleTest.MinimaxConsistency:"
       "SolveTest.MinimaxConsistencyOnSampledTtt4Entries"},
      {"VIS epsilon 0 and 1", AZALIGN_TRAINING_TEST,
       "VisSelectTest.DegenerateEpsilons:"
       "PlayEpisodeTest.VisWithEpsilonOneMatchesPlainSelection:"
       "TrainTest.VisWithEpsilonOneIsAlphaZero"},
      {"VISA outcome under inversion", AZALIGN_TRAINING_TEST,
       "VisaAugmentTest.InversionKeepsMoverOutcomeAndFlipsFixedFrame"},
      {"checkpoint round trip", AZALIGN_NEURAL_TEST,
       "CheckpointTest.RoundTripIsBitExact"},
      {"KL non-negativity", AZALIGN_ANALYSIS_TEST, "SmoothedKlTest.*"},
  };
  const auto start = Clock::now();
  int passed = 0, total_tests = 0;
  for (const Suite& s : suites) {
    int tests = 0;
    std::string tail;
    const bool ok = RunGtest(s.binary, s.filter, &tests, &tail);
    passed += ok;
    total_tests += tests;
    Info(Fmt("%-52s %s (%d tests)", s.name, ok ? "ok" : "FAILED", tests));
    if (!ok) std::cout << tail << "\n";
  }
  const double secs = Seconds(start);
  const int n = static_cast<int>(std::size(suites));
  return {passed == n && secs < 300.0,
          Fmt("%d/%d property suites pass (%d tests), %.1fs (< 300s)", passed,
              n, total_tests, secs)};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace azalign

int main(int argc, char** argv) {
  using namespace azalign;
  Options& opts = Opts();
  opts.workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AZALIGN_ACCEPTANCE_CACHE"); env && *env) {
    opts.cache = env;
  }
  std::vector<int> only;
  CLI::App app{"Acceptance criteria"};
  app.add_option("--cache", opts.cache, "Directory for trained artifacts");
  app.add_option("--workers", opts.workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--only", only, "Criterion ids to run")
      ->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  opts.only.insert(only.begin(), only.end());
  fs::create_directories(opts.cache);

  const Criterion criteria[] = {
      {1, "oracle correctness", OracleCorrectness},
      {2, "search correctness", SearchCorrectness},
      {3, "alphazero strength with search", AlphaZeroStrength},
      {4, "search-withheld gap", SearchWithheldGap},
      {5, "visa_vis policy improvement", VisaVisPolicyImprovement},
      {6, "misalignment reduction", MisalignmentReduction},
      {7, "value error and generalization", ValueErrorReduction},
      {8, "ablation ordering", AblationOrdering},
      {9, "adversarial detector", AdversarialDetector},
      {10, "property suites", PropertySuites},
  };
  int failed = 0, ran = 0;
  for (const Criterion& c : criteria) {
    if (!opts.only.empty() && !opts.only.count(c.id)) continue;
    std::cout << "criterion " << c.id << ": " << c.title << "\n" << std::flush;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    ++ran;
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " ("
              << c.title << "): " << o.detail << "\n"
              << std::flush;
  }
  std::cout << "acceptance: " << ran - failed << "/" << ran
            << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
