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

#include "azalign/training.h"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "parallel.h"

namespace azalign {
namespace {

// Stream indices for DeriveSeed.
constexpr uint64_t kNetInitStream = 1;
constexpr uint64_t kTrainerStream = 2;
constexpr uint64_t kGameStream = 3;
constexpr uint64_t kVisStream = 4;

Action SampleIndex(const std::vector<double>& probs, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double u = uniform(rng);
  Action last = 0;
  for (size_t a = 0; a < probs.size(); ++a) {
    if (probs[a] <= 0.0) continue;
    last = static_cast<Action>(a);
    u -= probs[a];
    if (u < 0.0) return last;
  }
  return last;  // rounding left a sliver of mass
}

[[noreturn]] void BadConfig(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

int64_t ParseInt(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  BadConfig("config key '" + key + "' expects an integer, got '" + value + "'");
}

double ParseDouble(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  BadConfig("config key '" + key + "' expects a number, got '" + value + "'");
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  BadConfig("config key '" + key + "' expects true or false, got '" + value +
            "'");
}

using Setter = std::function<void(TrainConfig&, const std::string& key,
                                  const std::string& value)>;

const std::map<std::string, Setter>& Setters() {
  static const auto* setters = new std::map<std::string, Setter>{
      {"net.width",
       [](TrainConfig& c, auto& k, auto& v) { c.net.width = ParseInt(k, v); }},
      {"net.depth",
       [](TrainConfig& c, auto& k, auto& v) { c.net.depth = ParseInt(k, v); }},
      {"net.learning_rate",
       [](TrainConfig& c, auto& k, auto& v) {
         c.net.learning_rate = ParseDouble(k, v);
       }},
      {"net.l2_lambda", [](TrainConfig& c, auto& k,
                           auto& v) { c.net.l2_lambda = ParseDouble(k, v); }},
      {"net.momentum", [](TrainConfig& c, auto& k,
                          auto& v) { c.net.momentum = ParseDouble(k, v); }},
      {"search.num_simulations",
       [](TrainConfig& c, auto& k, auto& v) {
         c.search.num_simulations = ParseInt(k, v);
       }},
      {"search.c_puct", [](TrainConfig& c, auto& k,
                           auto& v) { c.search.c_puct = ParseDouble(k, v); }},
      {"search.temperature",
       [](TrainConfig& c, auto& k, auto& v) {
         c.search.temperature = ParseDouble(k, v);
       }},
      {"search.temperature_drop_ply",
       [](TrainConfig& c, auto& k, auto& v) {
         c.search.temperature_drop_ply = ParseInt(k, v);
       }},
      {"search.root_noise",
       [](TrainConfig& c, auto& k, auto& v) {
         c.search.root_noise = ParseBool(k, v);
       }},
      {"search.dirichlet_alpha",
       [](TrainConfig& c, auto& k, auto& v) {
         c.search.dirichlet_alpha = ParseDouble(k, v);
       }},
      {"search.dirichlet_fraction",
       [](TrainConfig& c, auto& k, auto& v) {
         c.search.dirichlet_fraction = ParseDouble(k, v);
       }},
      {"train.mode",
       [](TrainConfig& c, auto&, auto& v) { c.mode = TrainModeFromName(v); }},
      {"train.vis_epsilon", [](TrainConfig& c, auto& k,
                               auto& v) { c.vis_epsilon = ParseDouble(k, v); }},
      {"train.vis_softmax_temp",
       [](TrainConfig& c, auto& k, auto& v) {
         c.vis_softmax_temp = ParseDouble(k, v);
       }},
      {"train.total_games", [](TrainConfig& c, auto& k,
                               auto& v) { c.total_games = ParseInt(k, v); }},
      {"train.batch_size",
       [](TrainConfig& c, auto& k, auto& v) { c.batch_size = ParseInt(k, v); }},
      {"train.buffer_capacity",
       [](TrainConfig& c, auto& k, auto& v) {
         c.buffer_capacity = ParseInt(k, v);
       }},
      {"train.train_steps_per_game",
       [](TrainConfig& c, auto& k, auto& v) {
         c.train_steps_per_game = ParseInt(k, v);
       }},
      {"train.checkpoint_every",
       [](TrainConfig& c, auto& k, auto& v) {
         c.checkpoint_every = ParseInt(k, v);
       }},
      {"train.refresh_every",
       [](TrainConfig& c, auto& k, auto& v) {
         c.refresh_every = ParseInt(k, v);
       }},
      {"train.seed",
       [](TrainConfig& c, auto& k, auto& v) {
         c.seed = static_cast<uint64_t>(ParseInt(k, v));
       }},
      {"train.workers",
       [](TrainConfig& c, auto& k, auto& v) { c.workers = ParseInt(k, v); }},
  };
  return *setters;
}

void SetKey(TrainConfig& config, const std::string& key,
            const std::string& value) {
  auto it = Setters().find(key);
  if (it == Setters().end()) BadConfig("unknown config key '" + key + "'");
  it->second(config, key, value);
}

std::string Trim(const std::string& s) {
  const size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool AllFinite(const LossTerms& t) {
  return std::isfinite(t.value) && std::isfinite(t.policy) &&
         std::isfinite(t.l2);
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  }
}

struct GameResult {
  EpisodeRecord episode;
  std::vector<ReplayEntry> entries;
};

GameResult PlayTrainingGame(const TrainConfig& config,
                            const Evaluator& evaluator, int64_t index) {
  Rng rng(DeriveSeed(DeriveSeed(config.seed, kGameStream), index));
  Rng vis_rng(DeriveSeed(DeriveSeed(config.seed, kVisStream), index));
  const GameState start = config.mode == TrainMode::kAlphaZeroRandomStarts
                              ? RandomStartState(config.spec(), rng)
                              : GameState::Initial(config.spec());
  EpisodeRecord episode =
      PlayEpisode(start, evaluator, config.search, UsesVis(config.mode),
                  config.vis_epsilon, config.vis_softmax_temp, rng, vis_rng);
  std::vector<ReplayEntry> entries =
      EpisodeEntries(episode, evaluator, UsesVisa(config.mode));
  return {std::move(episode), std::move(entries)};
}

// Plays games [first, first + count) against one snapshot.
std::vector<std::optional<GameResult>> PlayRound(
    const TrainConfig& config, std::shared_ptr<const Net> snapshot,
    int64_t first, int64_t count) {
  NetworkEvaluator evaluator(std::move(snapshot));
  std::vector<std::optional<GameResult>> results(count);
  internal::ParallelFor(count, config.workers, [&](int64_t i) {
    results[i] = PlayTrainingGame(config, evaluator, first + i);
  });
  return results;
}

}  // namespace

std::string TrainModeName(TrainMode mode) {
  switch (mode) {
    case TrainMode::kAlphaZero:
      return "alphazero";
    case TrainMode::kVisOnly:
      return "vis_only";
    case TrainMode::kVisaOnly:
      return "visa_only";
    case TrainMode::kVisaVis:
      return "visa_vis";
    case TrainMode::kAlphaZeroRandomStarts:
      return "alphazero_random_starts";
  }
  return "?";
}

TrainMode TrainModeFromName(const std::string& name) {
  for (TrainMode m :
       {TrainMode::kAlphaZero, TrainMode::kVisOnly, TrainMode::kVisaOnly,
        TrainMode::kVisaVis, TrainMode::kAlphaZeroRandomStarts}) {
    if (TrainModeName(m) == name) return m;
  }
  BadConfig("unknown training mode '" + name +
            "' (expected alphazero, vis_only, visa_only, visa_vis or "
            "alphazero_random_starts)");
}

bool UsesVis(TrainMode mode) {
  return mode == TrainMode::kVisOnly || mode == TrainMode::kVisaVis;
}

bool UsesVisa(TrainMode mode) {
  return mode == TrainMode::kVisaOnly || mode == TrainMode::kVisaVis;
}

TrainConfig TrainConfig::ForGame(GameId game, const std::string& profile) {
  if (profile != "desk" && profile != "full") {
    BadConfig("unknown profile '" + profile + "' (expected desk or full)");
  }
  const bool full = profile == "full";
  TrainConfig c;
  c.game = game;
  const GameSpec& spec = GameSpec::Get(game);
  c.net = NetConfig::ForGame(spec);
  c.search = SearchConfig::ForGame(spec);
  switch (game) {
    case GameId::kTicTacToe3:
      c.batch_size = 64;
      c.total_games = full ? 500'000 : 20'000;
      break;
    case GameId::kTicTacToe4:
      c.batch_size = 128;
      c.total_games = full ? 1'750'000 : 60'000;
      break;
    case GameId::kConnectFour:
      c.batch_size = 256;
      c.total_games = full ? 7'500'000 : 100'000;
      break;
  }
  c.checkpoint_every = c.total_games / 20;
  return c;
}

void TrainConfig::Validate() const {
  net.Validate();
  search.Validate();
  const GameSpec& s = spec();
  if (net.input_dim != s.feature_size() || net.action_count != s.action_count) {
    BadConfig("net dimensions do not match " + std::string(s.name));
  }
  if (!(vis_epsilon >= 0.0 && vis_epsilon <= 1.0)) {
    BadConfig("train.vis_epsilon must be in [0, 1]");
  }
  if (!(vis_softmax_temp > 0.0)) {
    BadConfig("train.vis_softmax_temp must be > 0");
  }
  if (total_games < 1) BadConfig("train.total_games must be >= 1");
  if (batch_size < 1) BadConfig("train.batch_size must be >= 1");
  if (buffer_capacity < batch_size) {
    BadConfig("train.buffer_capacity must be >= train.batch_size");
  }
  if (train_steps_per_game < 0) {
    BadConfig("train.train_steps_per_game must be >= 0");
  }
  if (checkpoint_every < 1) BadConfig("train.checkpoint_every must be >= 1");
  if (refresh_every < 1) BadConfig("train.refresh_every must be >= 1");
  if (workers < 1) BadConfig("train.workers must be >= 1");
}

TrainConfig ParseTrainConfig(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    BadConfig(std::string("malformed config: ") + e.what());
  }
  std::string game_name = "ttt3";
  std::string profile = "desk";
  std::vector<std::pair<std::string, std::string>> assignments;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      BadConfig("config key '" + section + "' is outside any section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const std::string v = Trim(value.data());
      if (full == "game.name") {
        game_name = v;
      } else if (full == "train.profile") {
        profile = v;
      } else {
        assignments.emplace_back(full, v);
      }
    }
  }
  TrainConfig c =
      TrainConfig::ForGame(GameSpec::FromName(game_name).id, profile);
  for (const auto& [key, value] : assignments) SetKey(c, key, value);
  c.Validate();
  return c;
}

TrainConfig LoadTrainConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  return ParseTrainConfig(text.str());
}

void ApplyOverride(TrainConfig& config, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    BadConfig("override '" + assignment + "' is not section.key=value");
  }
  const std::string key = Trim(assignment.substr(0, eq));
  const std::string value = Trim(assignment.substr(eq + 1));
  if (key == "game.name" || key == "train.profile") {
    BadConfig("'" + key + "' selects defaults and cannot be overridden");
  }
  SetKey(config, key, value);
}

std::string FormatTrainConfig(const TrainConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "[game]\nname = " << c.spec().name << "\n\n"
      << "[net]\nwidth = " << c.net.width << "\ndepth = " << c.net.depth
      << "\nlearning_rate = " << c.net.learning_rate
      << "\nl2_lambda = " << c.net.l2_lambda
      << "\nmomentum = " << c.net.momentum << "\n\n"
      << "[search]\nnum_simulations = " << c.search.num_simulations
      << "\nc_puct = " << c.search.c_puct
      << "\ntemperature = " << c.search.temperature
      << "\ntemperature_drop_ply = " << c.search.temperature_drop_ply
      << "\nroot_noise = " << (c.search.root_noise ? "true" : "false")
      << "\ndirichlet_alpha = " << c.search.dirichlet_alpha
      << "\ndirichlet_fraction = " << c.search.dirichlet_fraction << "\n\n"
      << "[train]\nmode = " << TrainModeName(c.mode)
      << "\nvis_epsilon = " << c.vis_epsilon
      << "\nvis_softmax_temp = " << c.vis_softmax_temp
      << "\ntotal_games = " << c.total_games
      << "\nbatch_size = " << c.batch_size
      << "\nbuffer_capacity = " << c.buffer_capacity
      << "\ntrain_steps_per_game = " << c.train_steps_per_game
      << "\ncheckpoint_every = " << c.checkpoint_every
      << "\nrefresh_every = " << c.refresh_every << "\nseed = " << c.seed
      << "\nworkers = " << c.workers << "\n";
  return out.str();
}

std::vector<double> ValuePolicy(const GameState& state,
                                const Evaluator& evaluator, double temp) {
  if (!(temp > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "value policy temperature <= 0");
  }
  const ActionMask legal = LegalActions(state);  // throws on terminal
  std::vector<double> scores(legal.size(),
                             -std::numeric_limits<double>::infinity());
  double best = -std::numeric_limits<double>::infinity();
  for (Action a : legal.actions()) {
    const GameState next = Apply(state, a);
    const auto terminal = TerminalValue(next);
    const double v = terminal ? *terminal : evaluator.Value(next);
    scores[a] = -v / temp;
    best = std::max(best, scores[a]);
  }
  std::vector<double> pi(legal.size(), 0.0);
  double sum = 0.0;
  for (Action a : legal.actions()) sum += (pi[a] = std::exp(scores[a] - best));
  for (double& p : pi) p /= sum;
  return pi;
}

VisChoice VisSelect(const GameState& state, const std::vector<double>& pi_p,
                    const Evaluator& evaluator, double epsilon,
                    double softmax_temp, Rng& rng, Rng& vis_rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  if (uniform(vis_rng) < epsilon) {
    return {SampleIndex(pi_p, rng), SelectionBranch::kPolicy};
  }
  return {SampleIndex(ValuePolicy(state, evaluator, softmax_temp), rng),
          SelectionBranch::kValue};
}

AugmentedPair VisaAugment(const GameState& state,
                          const std::vector<double>& pi_p, double z_mover,
                          const Evaluator& evaluator) {
  const GameSpec& spec = state.spec();
  const double v = evaluator.Value(state);
  AugmentedPair out;
  out.original = {Encode(state), pi_p, z_mover, LegalActions(state)};
  const auto ops = SymmetryOps(spec, /*include_identity=*/false);
  size_t best = 0;
  for (size_t i = 0; i < ops.size(); ++i) {
    const double d = v - evaluator.Value(Transform(state, ops[i]));
    out.disagreements.push_back(d * d);
    if (out.disagreements[i] > out.disagreements[best]) best = i;
  }
  out.op = ops[best];
  const GameState t = Transform(state, out.op);
  std::vector<double> permuted(pi_p.size(), 0.0);
  for (size_t a = 0; a < pi_p.size(); ++a) {
    permuted[TransformAction(static_cast<Action>(a), out.op, spec)] = pi_p[a];
  }
  out.transformed = {Encode(t), std::move(permuted), z_mover, LegalActions(t)};
  out.original_z_p1 = state.to_move() == Player::kP1 ? z_mover : -z_mover;
  out.transformed_z_p1 = t.to_move() == Player::kP1 ? z_mover : -z_mover;
  return out;
}

double EpisodeRecord::ZFor(size_t i) const {
  return steps[i].state.to_move() == Player::kP1 ? z_p1 : -z_p1;
}

GameState RandomStartState(const GameSpec& spec, Rng& rng) {
  std::uniform_int_distribution<int> plies(0, spec.cells() - 1);
  while (true) {
    GameState s = GameState::Initial(spec);
    const int n = plies(rng);
    for (int i = 0; i < n && !IsTerminal(s); ++i) {
      const auto legal = LegalActions(s).actions();
      std::uniform_int_distribution<size_t> pick(0, legal.size() - 1);
      s = Apply(s, legal[pick(rng)]);
    }
    if (!IsTerminal(s)) return s;
  }
}

EpisodeRecord PlayEpisode(const GameState& start, const Evaluator& evaluator,
                          const SearchConfig& search, bool vis,
                          double vis_epsilon, double vis_softmax_temp, Rng& rng,
                          Rng& vis_rng) {
  const int actions = start.spec().action_count;
  std::vector<EpisodeStep> steps;
  GameState state = start;
  for (int ply = 0; !IsTerminal(state); ++ply) {
    const SearchTree tree = RunSearch(state, evaluator, search, rng);
    const double tau =
        ply < search.temperature_drop_ply ? search.temperature : 0.0;
    const std::vector<double> acting = SearchPolicy(tree.root(), actions, tau);
    EpisodeStep step{state, SearchPolicy(tree.root(), actions, 1.0), 0,
                     SelectionBranch::kPolicy};
    if (vis) {
      const VisChoice c = VisSelect(state, acting, evaluator, vis_epsilon,
                                    vis_softmax_temp, rng, vis_rng);
      step.action = c.action;
      step.branch = c.branch;
    } else {
      step.action = SampleIndex(acting, rng);
    }
    state = Apply(state, step.action);
    steps.push_back(std::move(step));
  }
  const int z_p1 = OutcomeFor(state, Player::kP1);
  return {std::move(steps), state, z_p1};
}

std::vector<ReplayEntry> EpisodeEntries(const EpisodeRecord& episode,
                                        const Evaluator& evaluator, bool visa) {
  std::vector<ReplayEntry> out;
  out.reserve(episode.steps.size() * (visa ? 2 : 1));
  for (size_t i = 0; i < episode.steps.size(); ++i) {
    const EpisodeStep& step = episode.steps[i];
    const double z = episode.ZFor(i);
    if (visa) {
      AugmentedPair pair = VisaAugment(step.state, step.pi_p, z, evaluator);
      out.push_back(std::move(pair.original));
      out.push_back(std::move(pair.transformed));
    } else {
      out.push_back(
          {Encode(step.state), step.pi_p, z, LegalActions(step.state)});
    }
  }
  return out;
}

std::string CheckpointRecordJson(const CheckpointRecord& r) {
  nlohmann::json j = {{"games", r.games},
                      {"steps", r.steps},
                      {"loss",
                       {{"value", r.loss.value},
                        {"policy", r.loss.policy},
                        {"l2", r.loss.l2},
                        {"total", r.loss.total()}}},
                      {"buffer_size", r.buffer_size},
                      {"entries_added", r.entries_added},
                      {"policy_branch_fraction", r.policy_branch_fraction},
                      {"elapsed_seconds", r.elapsed_seconds},
                      {"checkpoint", r.checkpoint}};
  return j.dump();
}

TrainResult Train(
    const TrainConfig& config, const std::string& out_dir,
    const std::function<void(const CheckpointRecord&)>& progress) {
  config.Validate();
  const auto start_time = std::chrono::steady_clock::now();
  const std::filesystem::path dir(out_dir);
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      throw Error(ErrorCode::kIo,
                  "cannot create '" + out_dir + "': " + ec.message());
    }
    WriteText(dir / "config.ini", FormatTrainConfig(config));
  }

  NetConfig net_config = config.net;
  net_config.seed = DeriveSeed(config.seed, kNetInitStream);
  TrainResult result{
      {}, {}, std::make_shared<Net>(net_config), StateTable(config.game), "",
      "", ""};
  Net& net = *result.net;
  SgdMomentum<float> optimizer(net_config.learning_rate, net_config.momentum,
                               net.num_params());
  ReplayBuffer buffer(config.buffer_capacity);
  Rng trainer_rng(DeriveSeed(config.seed, kTrainerStream));
  std::vector<float> grads(net.num_params());
  const std::string game_name(config.spec().name);
  std::ofstream log;
  if (!out_dir.empty()) {
    result.log_path = (dir / "train_log.jsonl").string();
    log.open(result.log_path, std::ios::trunc);
  }

  int64_t games = 0, steps = 0;
  LossTerms window_loss;
  int64_t window_steps = 0, window_moves = 0, window_policy_moves = 0;
  auto diverged = [&](const std::string& message) {
    if (!out_dir.empty()) {
      nlohmann::json dump = {{"games", games},
                             {"steps", steps},
                             {"message", message},
                             {"buffer_size", buffer.size()}};
      WriteText(dir / "divergence.json", dump.dump(2) + "\n");
    }
    throw Error(ErrorCode::kDivergence, message + " (games " +
                                            std::to_string(games) + ", steps " +
                                            std::to_string(steps) + ")");
  };

  while (games < config.total_games) {
    const int64_t to_checkpoint =
        config.checkpoint_every - games % config.checkpoint_every;
    const int64_t round = std::min(
        {config.refresh_every, config.total_games - games, to_checkpoint});
    auto snapshot = std::make_shared<const Net>(net);
    auto results = PlayRound(config, std::move(snapshot), games, round);

    for (std::optional<GameResult>& played : results) {
      GameResult& r = *played;
      for (const EpisodeStep& step : r.episode.steps) {
        result.visits.AddVisits(CanonicalKey(step.state), 1);
        ++window_moves;
        window_policy_moves += step.branch == SelectionBranch::kPolicy;
      }
      for (ReplayEntry& e : r.entries) buffer.Add(std::move(e));
      for (int k = 0; k < config.train_steps_per_game; ++k) {
        if (buffer.size() < static_cast<size_t>(config.batch_size)) break;
        const auto batch = buffer.Sample(config.batch_size, trainer_rng);
        const LossTerms terms = net.Loss(batch, grads);
        if (!AllFinite(terms)) diverged("loss became non-finite");
        try {
          optimizer.Step(net, grads);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kDivergence) diverged(e.what());
          throw;
        }
        window_loss.value += terms.value;
        window_loss.policy += terms.policy;
        window_loss.l2 += terms.l2;
        ++window_steps;
        ++steps;
      }
    }
    games += round;

    if (games % config.checkpoint_every == 0 || games == config.total_games) {
      CheckpointRecord rec;
      rec.games = games;
      rec.steps = steps;
      if (window_steps > 0) {
        rec.loss = {window_loss.value / window_steps,
                    window_loss.policy / window_steps,
                    window_loss.l2 / window_steps};
      }
      rec.buffer_size = buffer.size();
      rec.entries_added = buffer.total_added();
      rec.policy_branch_fraction =
          window_moves > 0
              ? static_cast<double>(window_policy_moves) / window_moves
              : 1.0;
      rec.elapsed_seconds = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start_time)
                                .count();
      if (!out_dir.empty()) {
        char name[32];
        std::snprintf(name, sizeof(name), "ckpt_%09lld.aznet",
                      static_cast<long long>(games));
        rec.checkpoint = (dir / name).string();
        SaveCheckpoint(net, game_name, rec.checkpoint);
        result.checkpoints.push_back(rec.checkpoint);
        log << CheckpointRecordJson(rec) << "\n" << std::flush;
      }
      result.log.push_back(rec);
      if (progress) progress(rec);
      window_loss = {};
      window_steps = window_moves = window_policy_moves = 0;
    }
  }

  if (!out_dir.empty()) {
    result.final_checkpoint = (dir / "final.aznet").string();
    SaveCheckpoint(net, game_name, result.final_checkpoint);
    result.visits_path = (dir / "visits.aztable").string();
    result.visits.Save(result.visits_path);
  }
  return result;
}

}  // namespace azalign
