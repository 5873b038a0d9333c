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

// azalign: command line front end over the C library.
//
//   azalign solve    --game ttt3 [--out FILE]
//   azalign train    [--config FILE | --game G] [--mode M] [--set k=v]...
//   azalign evaluate --checkpoint FILE [--table FILE] [--out FILE]
//   azalign detect   --checkpoint FILE [--rescore SET] [--out FILE]
//   azalign compare  REPORT REPORT... [--json FILE]
//   azalign report   REPORT... [--merge LABEL] [--out-dir DIR]
//
// Exit status: 0 on success, 1 when the work failed, 2 on usage errors.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "azalign/azalign.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void Check(az_status status) {
  if (status != AZ_OK) {
    throw std::runtime_error(std::string(az_status_name(status)) + ": " +
                             az_last_error());
  }
}

std::string Take(char* s) {
  std::string out = s ? s : "";
  az_string_free(s);
  return out;
}

// Owns a library handle.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};
using Table = Handle<az_table, az_table_free>;
using Network = Handle<az_network, az_network_free>;

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void RequireParent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw std::runtime_error("output directory '" + parent.string() +
                             "' does not exist");
  }
}

// Writes via a temporary file and rename so readers never see a partial file.
void WriteAtomic(const fs::path& path, const std::string& text) {
  RequireParent(path);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
}

std::string UtcTime(bool compact) {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf),
                compact ? "%Y%m%dT%H%M%SZ" : "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string OneLine(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

struct Globals {
  std::optional<uint64_t> seed;
  int workers = 1;
  std::string run_root = "runs";
  std::vector<std::string> argv;
};

// A runs/<timestamp>-<mode>-<game>/ directory and its manifest.
class Run {
 public:
  Run(const Globals& g, fs::path dir, const std::string& command,
      const std::string& mode, const std::string& game)
      : dir_(std::move(dir)) {
    manifest_ = {{"tool", "azalign"},
                 {"version", az_version()},
                 {"command", command},
                 {"argv", g.argv},
                 {"mode", mode},
                 {"game", game},
                 {"seed", g.seed.value_or(0)},
                 {"workers", g.workers},
                 {"started_at", UtcTime(false)},
                 {"artifacts", json::array()}};
  }

  static fs::path Fresh(const Globals& g, const std::string& mode,
                        const std::string& game) {
    const fs::path root(g.run_root);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) {
      throw std::runtime_error("cannot create run directory '" + root.string() +
                               "': " + ec.message());
    }
    const std::string base = UtcTime(true) + "-" + mode + "-" + game;
    for (int i = 1;; ++i) {
      const fs::path dir =
          root / (i == 1 ? base : base + "-" + std::to_string(i));
      if (fs::create_directory(dir, ec)) return dir;
      if (ec) {
        throw std::runtime_error("cannot create '" + dir.string() +
                                 "': " + ec.message());
      }
    }
  }

  const fs::path& dir() const { return dir_; }
  void Set(const std::string& key, json value) {
    manifest_[key] = std::move(value);
  }
  void Add(const fs::path& artifact) {
    const fs::path rel = artifact.lexically_relative(dir_);
    manifest_["artifacts"].push_back(
        rel.empty() || *rel.begin() == ".." ? artifact.string() : rel.string());
  }
  void Finish() {
    manifest_["finished_at"] = UtcTime(false);
    WriteAtomic(dir_ / "manifest.json", manifest_.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  json manifest_;
};

std::string GameOf(const az_network* net) {
  char* info = nullptr;
  Check(az_network_info(net, &info));
  return json::parse(Take(info))["game"].get<std::string>();
}

void PutCommon(const Globals& g, json& opts) { opts["workers"] = g.workers; }

// --- solve -----------------------------------------------------------------

struct SolveArgs {
  std::string game;
  std::string out;
  uint64_t max_states = 0;
};

void CmdSolve(const Globals& g, const SolveArgs& a) {
  if (!a.out.empty()) RequireParent(a.out);
  Table table;
  Check(az_table_solve(a.game.c_str(), a.max_states, &table.ptr));
  std::optional<Run> run;
  fs::path out = a.out;
  if (out.empty()) {
    run.emplace(g, Run::Fresh(g, "solve", a.game), "solve", "solve", a.game);
    out = run->dir() / (a.game + ".aztable");
  }
  Check(az_table_save(table.ptr, out.c_str()));
  char* info = nullptr;
  Check(az_table_info(table.ptr, &info));
  const json j = json::parse(Take(info));
  if (run) {
    run->Set("table", j);
    run->Add(out);
    run->Finish();
  }
  std::cout << a.game << ": " << j["entries"] << " states, root value "
            << j["root_value"].dump() << " -> " << out.string() << "\n";
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string game;
  std::string profile;
  std::string mode;
  std::vector<std::string> sets;
  std::string out;
  bool quiet = false;
};

std::string ConfigValue(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  const std::string prefix = key + " = ";
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  }
  return "";
}

void PrintRecord(const char* record, void* user) {
  if (*static_cast<bool*>(user)) return;
  const json r = json::parse(record);
  std::fprintf(
      stderr, "games %lld  steps %lld  loss %.4f  buffer %lld  %.1fs\n",
      r["games"].get<long long>(), r["steps"].get<long long>(),
      r["loss"]["total"].get<double>(), r["buffer_size"].get<long long>(),
      r["elapsed_seconds"].get<double>());
}

void CmdTrain(const Globals& g, const TrainArgs& a) {
  std::string text;
  if (!a.config.empty()) {
    if (!a.game.empty() || !a.profile.empty()) {
      throw UsageError(
          "--game and --profile cannot be combined with --config; set them "
          "in the [game] and [train] sections");
    }
    text = ReadText(a.config);
  } else {
    text = "[game]\nname = " + (a.game.empty() ? "ttt3" : a.game) +
           "\n[train]\nprofile = " + (a.profile.empty() ? "desk" : a.profile) +
           "\n";
  }
  std::vector<std::string> overrides;
  if (!a.mode.empty()) overrides.push_back("train.mode=" + a.mode);
  if (g.seed) overrides.push_back("train.seed=" + std::to_string(*g.seed));
  overrides.push_back("train.workers=" + std::to_string(g.workers));
  overrides.insert(overrides.end(), a.sets.begin(), a.sets.end());
  std::vector<const char*> ptrs;
  for (const std::string& o : overrides) ptrs.push_back(o.c_str());

  char* resolved_c = nullptr;
  Check(az_train_config(text.c_str(), ptrs.data(),
                        static_cast<int>(ptrs.size()), &resolved_c));
  const std::string resolved = Take(resolved_c);
  const std::string game = ConfigValue(resolved, "name");
  const std::string mode = ConfigValue(resolved, "mode");

  const fs::path dir =
      a.out.empty() ? Run::Fresh(g, mode, game) : fs::path(a.out);
  Run run(g, dir, "train", mode, game);
  run.Set("seed", std::stoull(ConfigValue(resolved, "seed")));
  run.Set("config", resolved);
  bool quiet = a.quiet;
  char* result_c = nullptr;
  Check(az_train(resolved.c_str(), nullptr, 0, dir.c_str(), PrintRecord, &quiet,
                 &result_c));
  const json result = json::parse(Take(result_c));
  run.Add(dir / "config.ini");
  for (const auto& c : result["checkpoints"]) run.Add(c.get<std::string>());
  run.Add(result["final_checkpoint"].get<std::string>());
  run.Add(result["log_path"].get<std::string>());
  run.Add(result["visits_path"].get<std::string>());
  run.Finish();
  std::cout << "trained " << mode << " on " << game << " -> "
            << result["final_checkpoint"].get<std::string>() << "\n";
}

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string checkpoint;
  std::string table;
  std::string visits;
  bool no_visits = false;
  std::string label;
  int64_t games = 1000;
  bool no_search_matches = false;
  bool no_policy_matches = false;
  bool raw_policy = false;
  int simulations = 0;
  std::string out;
};

void CmdEvaluate(const Globals& g, const EvaluateArgs& a) {
  Network net;
  Check(az_network_load(a.checkpoint.c_str(), &net.ptr));
  const std::string game = GameOf(net.ptr);
  Table table;
  if (a.table.empty()) {
    Check(az_table_solve(game.c_str(), 0, &table.ptr));
  } else {
    Check(az_table_load(a.table.c_str(), &table.ptr));
  }
  // The training run keeps its visit counts next to the checkpoints.
  fs::path visits_path = a.visits;
  if (visits_path.empty() && !a.no_visits) {
    const fs::path sibling =
        fs::path(a.checkpoint).parent_path() / "visits.aztable";
    if (fs::exists(sibling)) visits_path = sibling;
  }
  Table visits;
  if (!visits_path.empty()) {
    Check(az_table_load(visits_path.c_str(), &visits.ptr));
  }

  json opts = {
      {"label",
       a.label.empty() ? fs::path(a.checkpoint).stem().string() : a.label},
      {"match_games", a.games},
      {"matches_with_search", !a.no_search_matches},
      {"matches_policy_only", !a.no_policy_matches},
      {"misalignment_source", a.raw_policy ? "raw" : "search"},
      {"seed", g.seed.value_or(0)}};
  if (a.simulations > 0) opts["simulations"] = a.simulations;
  PutCommon(g, opts);
  char* report = nullptr;
  Check(az_evaluate(net.ptr, table.ptr, visits.ptr, opts.dump().c_str(),
                    &report));
  const std::string text = Take(report);

  std::optional<Run> run;
  fs::path out = a.out;
  if (out.empty()) {
    run.emplace(g, Run::Fresh(g, "evaluate", game), "evaluate", "evaluate",
                game);
    out = run->dir() / "report.json";
  }
  WriteAtomic(out, text + "\n");
  if (run) {
    run->Set("inputs", {{"checkpoint", a.checkpoint},
                        {"table", a.table},
                        {"visits", visits_path.string()}});
    run->Set("options", opts);
    run->Add(out);
    run->Finish();
  }
  std::cout << "report -> " << out.string() << "\n";
}

// --- detect ----------------------------------------------------------------

struct DetectArgs {
  std::string checkpoint;
  std::string rescore;
  int64_t games = 10000;
  double threshold = 1.0;
  int max_empty = 0;
  uint64_t solver_budget = 0;
  int simulations = 0;
  std::string out;
};

void CmdDetect(const Globals& g, const DetectArgs& a) {
  Network net;
  Check(az_network_load(a.checkpoint.c_str(), &net.ptr));
  const std::string game = GameOf(net.ptr);
  json opts = json::object();
  if (a.simulations > 0) opts["simulations"] = a.simulations;
  PutCommon(g, opts);
  char* set = nullptr;
  if (!a.rescore.empty()) {
    Check(az_rescore(net.ptr, ReadText(a.rescore).c_str(), opts.dump().c_str(),
                     &set));
  } else {
    opts["games"] = a.games;
    opts["threshold"] = a.threshold;
    opts["seed"] = g.seed.value_or(0);
    if (a.max_empty > 0) opts["max_empty_cells"] = a.max_empty;
    if (a.solver_budget > 0) opts["solver_budget"] = a.solver_budget;
    Check(az_detect(net.ptr, opts.dump().c_str(), &set));
  }
  const std::string text = Take(set);

  std::optional<Run> run;
  fs::path out = a.out;
  const std::string mode = a.rescore.empty() ? "detect" : "rescore";
  if (out.empty()) {
    run.emplace(g, Run::Fresh(g, mode, game), "detect", mode, game);
    out = run->dir() / "states.json";
  }
  WriteAtomic(out, text + "\n");
  if (run) {
    run->Set("inputs", {{"checkpoint", a.checkpoint}, {"states", a.rescore}});
    run->Set("options", opts);
    run->Add(out);
    run->Finish();
  }
  const json j = json::parse(text);
  if (a.rescore.empty()) {
    std::cout << j["states"].size() << " states above " << j["threshold"];
  } else {
    std::cout << "rescored " << j["states"].size() << " states";
  }
  std::cout << " -> " << out.string() << "\n";
}

// --- compare / report ------------------------------------------------------

std::string ReportArray(const std::vector<std::string>& paths) {
  json arr = json::array();
  for (const std::string& p : paths) {
    try {
      arr.push_back(json::parse(ReadText(p)));
    } catch (const json::parse_error& e) {
      throw std::runtime_error("'" + p + "' is not JSON: " + e.what());
    }
  }
  return arr.dump();
}

struct CompareArgs {
  std::vector<std::string> reports;
  std::string json_out;
};

void CmdCompare(const CompareArgs& a) {
  if (a.reports.size() < 2) {
    throw UsageError("compare needs a baseline report and at least one more");
  }
  char* table_json = nullptr;
  char* table_text = nullptr;
  Check(az_compare(ReportArray(a.reports).c_str(), &table_json, &table_text));
  const std::string j = Take(table_json);
  std::cout << Take(table_text);
  if (!a.json_out.empty()) WriteAtomic(a.json_out, j + "\n");
}

struct ReportArgs {
  std::vector<std::string> reports;
  std::string merge;
  std::string out_dir;
};

std::string Render(const std::string& array, const char* kind) {
  char* out = nullptr;
  Check(az_render(array.c_str(), kind, &out));
  return Take(out);
}

std::string SafeName(const std::string& s) {
  std::string out;
  for (char c : s) {
    out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.'
               ? c
               : '_';
  }
  return out;
}

void CmdReport(const Globals& g, const ReportArgs& a) {
  if (a.reports.empty()) throw UsageError("report needs at least one report");
  std::vector<std::string> singles;  // one-element JSON arrays
  std::vector<std::string> labels;
  std::string array = ReportArray(a.reports);
  if (!a.merge.empty()) {
    char* merged = nullptr;
    Check(az_merge_reports(array.c_str(), a.merge.c_str(), &merged));
    array = "[" + Take(merged) + "]";
  }
  const json reports = json::parse(array);
  for (const json& r : reports) {
    singles.push_back(json::array({r}).dump());
    labels.push_back(r.value("label", "report"));
  }
  const std::string game = reports[0].value("game", "unknown");

  std::optional<Run> run;
  fs::path dir = a.out_dir;
  if (dir.empty()) {
    run.emplace(g, Run::Fresh(g, "report", game), "report", "report", game);
    dir = run->dir();
  } else if (!fs::is_directory(dir)) {
    throw std::runtime_error("output directory '" + dir.string() +
                             "' does not exist");
  }
  std::vector<fs::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    written.push_back(dir / name);
    WriteAtomic(written.back(), text);
  };
  if (!a.merge.empty()) emit("merged.json", reports[0].dump(2) + "\n");
  for (size_t i = 0; i < singles.size(); ++i) {
    const std::string prefix =
        singles.size() == 1
            ? ""
            : std::to_string(i) + "-" + SafeName(labels[i]) + "-";
    emit(prefix + "histogram.csv", Render(singles[i], "histogram_csv"));
    emit(prefix + "curve.csv", Render(singles[i], "curve_csv"));
  }
  emit("histogram.svg", Render(array, "histogram_svg"));
  emit("curve.svg", Render(array, "curve_svg"));
  if (run) {
    run->Set("inputs", a.reports);
    for (const fs::path& p : written) run->Add(p);
    run->Finish();
  }
  for (const fs::path& p : written) std::cout << p.string() << "\n";
}

void Diagnose(const std::string& message) {
  std::cerr << "azalign: error: " << OneLine(message) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  g.argv.assign(argv, argv + argc);
  if (const char* env = std::getenv("AZALIGN_RUN_DIR"); env && *env) {
    g.run_root = env;
  }

  CLI::App app{"AlphaZero training and policy-value analysis on solved games",
               "azalign"};
  app.set_version_flag("--version", std::string(az_version()));
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", g.seed, "Seed for training, matches and detection");
  app.add_option("--workers", g.workers, "Worker threads")
      ->check(CLI::Range(1, 1024));
  app.add_option("--run-dir", g.run_root,
                 "Root for new run directories (env AZALIGN_RUN_DIR, "
                 "default runs)");

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a game exactly");
  solve_cmd->add_option("--game", solve.game, "ttt3, ttt4 or connect4")
      ->required();
  solve_cmd->add_option("--out", solve.out, "Table file to write");
  solve_cmd->add_option("--max-states", solve.max_states,
                        "State budget (0 = default)");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train by self-play");
  train_cmd->add_option("--config", train.config, "Config file");
  train_cmd->add_option("--game", train.game, "Game when no config is given");
  train_cmd->add_option("--profile", train.profile, "desk or full budgets");
  train_cmd->add_option("--mode", train.mode,
                        "alphazero, vis_only, visa_only, visa_vis or "
                        "alphazero_random_starts");
  train_cmd->add_option("--set", train.sets, "Override section.key=value");
  train_cmd->add_option("--out", train.out, "Output directory");
  train_cmd->add_flag("--quiet", train.quiet, "No progress lines");

  EvaluateArgs eval;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "Score a checkpoint against the oracle");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Network checkpoint")
      ->required();
  eval_cmd->add_option("--table", eval.table,
                       "Solved table (solved on the fly when omitted)");
  eval_cmd->add_option("--visits", eval.visits,
                       "Training visit counts (default: visits.aztable "
                       "beside the checkpoint)");
  eval_cmd->add_flag("--no-visits", eval.no_visits,
                     "Skip the generalization curve");
  eval_cmd->add_option("--label", eval.label, "Report label");
  eval_cmd->add_option("--games", eval.games, "Games per match")
      ->check(CLI::NonNegativeNumber);
  eval_cmd->add_flag("--no-search-matches", eval.no_search_matches);
  eval_cmd->add_flag("--no-policy-matches", eval.no_policy_matches);
  eval_cmd->add_flag("--raw-policy", eval.raw_policy,
                     "Misalignment from the network policy, not search");
  eval_cmd->add_option("--simulations", eval.simulations,
                       "Search simulations (default per game)");
  eval_cmd->add_option("--out", eval.out, "Report file to write");

  DetectArgs detect;
  CLI::App* detect_cmd =
      app.add_subcommand("detect", "Find endgame states the network misjudges");
  detect_cmd
      ->add_option("--checkpoint", detect.checkpoint, "Network checkpoint")
      ->required();
  detect_cmd->add_option("--rescore", detect.rescore,
                         "Score an existing state set instead of searching");
  detect_cmd->add_option("--games", detect.games, "Detector games");
  detect_cmd->add_option("--threshold", detect.threshold,
                         "Keep states with squared error above this");
  detect_cmd->add_option("--max-empty", detect.max_empty,
                         "Endgame size in empty cells (default per game)");
  detect_cmd->add_option("--solver-budget", detect.solver_budget,
                         "Nodes per endgame solve");
  detect_cmd->add_option("--simulations", detect.simulations,
                         "Search simulations (default per game)");
  detect_cmd->add_option("--out", detect.out, "State set file to write");

  CompareArgs compare;
  CLI::App* compare_cmd =
      app.add_subcommand("compare", "Compare reports against a baseline");
  compare_cmd->add_option("reports", compare.reports,
                          "Report files; the first is the baseline");
  compare_cmd->add_option("--json", compare.json_out, "Also write JSON here");

  ReportArgs report;
  CLI::App* report_cmd =
      app.add_subcommand("report", "Render CSV and SVG from reports");
  report_cmd->add_option("reports", report.reports, "Report files");
  report_cmd->add_option("--merge", report.merge,
                         "Merge the reports under this label first");
  report_cmd->add_option("--out-dir", report.out_dir, "Directory to write to");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    Diagnose(e.what());
    return kExitUsage;
  }

  try {
    if (*solve_cmd) CmdSolve(g, solve);
    if (*train_cmd) CmdTrain(g, train);
    if (*eval_cmd) CmdEvaluate(g, eval);
    if (*detect_cmd) CmdDetect(g, detect);
    if (*compare_cmd) CmdCompare(compare);
    if (*report_cmd) CmdReport(g, report);
  } catch (const UsageError& e) {
    Diagnose(e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    Diagnose(e.what());
    return kExitFailure;
  }
  return 0;
}
