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

#include <cstdlib>
#include <cstring>
#include <initializer_list>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "azalign/analysis.h"
#include "azalign/azalign.h"
#include "azalign/neural.h"
#include "azalign/oracle.h"
#include "azalign/training.h"
#include "json.hpp"

#ifndef AZALIGN_VERSION
#define AZALIGN_VERSION "0.0.0"
#endif

struct az_table {
  azalign::StateTable table;
};

struct az_network {
  std::string game;
  std::shared_ptr<const azalign::Net> net;
};

namespace {

using azalign::Error;
using azalign::ErrorCode;
using nlohmann::json;

thread_local std::string last_error;

az_status Fail(az_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, mapping exceptions to status codes.
template <typename Fn>
az_status Guard(Fn&& body) {
  try {
    body();
    return AZ_OK;
  } catch (const Error& e) {
    return Fail(static_cast<az_status>(e.code()), e.what());
  } catch (const json::exception& e) {
    return Fail(AZ_FORMAT, std::string("malformed JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return Fail(AZ_RESOURCE_EXHAUSTED, "out of memory");
  } catch (const std::exception& e) {
    return Fail(AZ_INTERNAL, e.what());
  } catch (...) {
    return Fail(AZ_INTERNAL, "unknown error");
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
  }
}

char* CopyOut(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Parsed option object restricted to `allowed` keys.
json Options(const char* text, std::initializer_list<const char*> allowed) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text);
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "options must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= key == a;
    if (!ok) {
      throw Error(ErrorCode::kInvalidArgument, "unknown option '" + key + "'");
    }
  }
  return j;
}

template <typename T>
T Get(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::vector<azalign::EvalReport> ParseReports(const char* text) {
  Require(text, "reports_json");
  const json j = json::parse(text);
  if (!j.is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "reports must be a JSON array");
  }
  std::vector<azalign::EvalReport> out;
  for (const json& r : j) out.push_back(azalign::ReportFromJson(r.dump()));
  return out;
}

azalign::TrainConfig ResolveConfig(const char* config_text,
                                   const char* const* overrides, int count) {
  if (count < 0 || (count > 0 && overrides == nullptr)) {
    throw Error(ErrorCode::kInvalidArgument, "bad override list");
  }
  azalign::TrainConfig cfg =
      azalign::ParseTrainConfig(config_text ? config_text : "");
  for (int i = 0; i < count; ++i) {
    Require(overrides[i], "override");
    azalign::ApplyOverride(cfg, overrides[i]);
  }
  cfg.Validate();
  return cfg;
}

azalign::SearchConfig SearchFor(const std::string& game, const json& opts) {
  azalign::SearchConfig s =
      azalign::SearchConfig::ForGame(azalign::GameSpec::FromName(game));
  s.num_simulations = Get<int>(opts, "simulations", s.num_simulations);
  s.Validate();
  return s;
}

int Workers(const json& opts) {
  const int w = Get<int>(opts, "workers", 1);
  if (w < 1) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
  return w;
}

}  // namespace

extern "C" {

const char* az_version(void) { return AZALIGN_VERSION; }

const char* az_status_name(az_status status) {
  switch (status) {
    case AZ_OK:
      return "ok";
    case AZ_INVALID_ARGUMENT:
      return "invalid argument";
    case AZ_RULE_VIOLATION:
      return "rule violation";
    case AZ_RESOURCE_EXHAUSTED:
      return "resource exhausted";
    case AZ_IO:
      return "i/o error";
    case AZ_FORMAT:
      return "format error";
    case AZ_COVERAGE:
      return "coverage error";
    case AZ_DIVERGENCE:
      return "divergence";
    case AZ_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* az_last_error(void) { return last_error.c_str(); }

void az_string_free(char* s) { std::free(s); }

az_status az_table_solve(const char* game, uint64_t max_states,
                         az_table** out) {
  return Guard([&] {
    Require(game, "game");
    Require(out, "out");
    const azalign::GameSpec& spec = azalign::GameSpec::FromName(game);
    *out = new az_table{azalign::Solve(
        spec, azalign::GameState::Initial(spec),
        max_states == 0 ? azalign::kDefaultSolveBudget : max_states)};
  });
}

az_status az_table_load(const char* path, az_table** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new az_table{azalign::StateTable::Load(path)};
  });
}

az_status az_table_save(const az_table* table, const char* path) {
  return Guard([&] {
    Require(table, "table");
    Require(path, "path");
    table->table.Save(path);
  });
}

az_status az_table_info(const az_table* table, char** out) {
  return Guard([&] {
    Require(table, "table");
    Require(out, "out");
    const azalign::StateTable& t = table->table;
    const azalign::SolvedEntry* root =
        t.Find(azalign::CanonicalKey(azalign::GameState::Initial(t.spec())));
    json j = {{"game", std::string(t.spec().name)},
              {"entries", t.size()},
              {"visit_entries", t.visits().size()},
              {"root_value", root ? json(root->value) : json(nullptr)}};
    *out = CopyOut(j.dump());
  });
}

void az_table_free(az_table* table) { delete table; }

az_status az_network_load(const char* path, az_network** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    azalign::Checkpoint ck = azalign::LoadCheckpoint(path);
    azalign::GameSpec::FromName(ck.game);
    *out = new az_network{
        ck.game, std::make_shared<const azalign::Net>(std::move(ck.net))};
  });
}

az_status az_network_info(const az_network* net, char** out) {
  return Guard([&] {
    Require(net, "net");
    Require(out, "out");
    const azalign::NetConfig& c = net->net->config();
    json j = {{"game", net->game},
              {"input_dim", c.input_dim},
              {"width", c.width},
              {"depth", c.depth},
              {"action_count", c.action_count},
              {"parameters", net->net->num_trainable()}};
    *out = CopyOut(j.dump());
  });
}

az_status az_network_evaluate(const az_network* net, const char* board,
                              int to_move, double* policy, int policy_len,
                              double* value) {
  return Guard([&] {
    Require(net, "net");
    Require(board, "board");
    Require(policy, "policy");
    Require(value, "value");
    const azalign::GameSpec& spec = azalign::GameSpec::FromName(net->game);
    if (policy_len != spec.action_count) {
      throw Error(ErrorCode::kInvalidArgument,
                  "policy_len must be " + std::to_string(spec.action_count));
    }
    if (to_move != 1 && to_move != 2) {
      throw Error(ErrorCode::kInvalidArgument, "to_move must be 1 or 2");
    }
    const azalign::GameState s = azalign::GameState::FromString(
        spec, board,
        to_move == 1 ? azalign::Player::kP1 : azalign::Player::kP2);
    const azalign::Evaluation e =
        azalign::NetworkEvaluator(net->net).Evaluate(s);
    for (int a = 0; a < policy_len; ++a) policy[a] = e.policy[a];
    *value = e.value;
  });
}

void az_network_free(az_network* net) { delete net; }

az_status az_train_config(const char* config_text, const char* const* overrides,
                          int count, char** config_out) {
  return Guard([&] {
    Require(config_out, "config_out");
    *config_out = CopyOut(azalign::FormatTrainConfig(
        ResolveConfig(config_text, overrides, count)));
  });
}

az_status az_train(const char* config_text, const char* const* overrides,
                   int count, const char* out_dir, az_progress_fn progress,
                   void* user, char** result_json) {
  return Guard([&] {
    Require(result_json, "result_json");
    const azalign::TrainConfig cfg =
        ResolveConfig(config_text, overrides, count);
    auto on_record = [&](const azalign::CheckpointRecord& rec) {
      if (progress) progress(azalign::CheckpointRecordJson(rec).c_str(), user);
    };
    azalign::TrainResult r =
        azalign::Train(cfg, out_dir ? out_dir : "", on_record);
    json log = json::array();
    for (const azalign::CheckpointRecord& rec : r.log) {
      log.push_back(json::parse(azalign::CheckpointRecordJson(rec)));
    }
    json j = {{"checkpoints", r.checkpoints},
              {"final_checkpoint", r.final_checkpoint},
              {"log_path", r.log_path},
              {"visits_path", r.visits_path},
              {"log", log}};
    *result_json = CopyOut(j.dump(2));
  });
}

az_status az_evaluate(const az_network* net, const az_table* table,
                      const az_table* visits, const char* options_json,
                      char** report_json) {
  return Guard([&] {
    Require(net, "net");
    Require(table, "table");
    Require(report_json, "report_json");
    const json opts =
        Options(options_json, {"label", "match_games", "matches_with_search",
                               "matches_policy_only", "misalignment_source",
                               "simulations", "seed", "workers"});
    const std::string game(table->table.spec().name);
    if (game != net->game) {
      throw Error(
          ErrorCode::kInvalidArgument,
          "network plays " + net->game + " but the table is for " + game);
    }
    azalign::ReportConfig rc;
    rc.search = SearchFor(game, opts);
    rc.match_games = Get<int64_t>(opts, "match_games", rc.match_games);
    if (rc.match_games < 0) {
      throw Error(ErrorCode::kInvalidArgument, "match_games must be >= 0");
    }
    rc.matches_with_search =
        Get<bool>(opts, "matches_with_search", rc.matches_with_search);
    rc.matches_policy_only =
        Get<bool>(opts, "matches_policy_only", rc.matches_policy_only);
    const std::string source =
        Get<std::string>(opts, "misalignment_source", "search");
    if (source == "raw") {
      rc.misalignment_source = azalign::PolicySource::kRawPolicy;
    } else if (source != "search") {
      throw Error(ErrorCode::kInvalidArgument,
                  "misalignment_source must be 'search' or 'raw'");
    }
    rc.seed = Get<uint64_t>(opts, "seed", 0);
    rc.workers = Workers(opts);
    azalign::NetworkEvaluator eval(net->net);
    const azalign::EvalReport report = azalign::EvaluateNetwork(
        eval, table->table, visits ? &visits->table : nullptr, rc,
        Get<std::string>(opts, "label", "network"));
    *report_json = CopyOut(azalign::ReportToJson(report));
  });
}

az_status az_detect(const az_network* net, const char* options_json,
                    char** set_json) {
  return Guard([&] {
    Require(net, "net");
    Require(set_json, "set_json");
    const json opts = Options(
        options_json, {"games", "threshold", "max_empty_cells", "solver_budget",
                       "simulations", "seed", "workers"});
    azalign::DetectorConfig dc;
    dc.search = SearchFor(net->game, opts);
    dc.misalignment.search = dc.search;
    dc.games = Get<int64_t>(opts, "games", dc.games);
    dc.threshold = Get<double>(opts, "threshold", dc.threshold);
    dc.max_empty_cells = Get<int>(opts, "max_empty_cells", 0);
    dc.solver_budget = Get<size_t>(opts, "solver_budget", dc.solver_budget);
    dc.seed = Get<uint64_t>(opts, "seed", 0);
    dc.workers = Workers(opts);
    azalign::NetworkEvaluator eval(net->net);
    *set_json =
        CopyOut(azalign::AdversarialSetToJson(azalign::DetectAdversarialStates(
            eval, azalign::GameSpec::FromName(net->game), dc)));
  });
}

az_status az_rescore(const az_network* net, const char* set_json,
                     const char* options_json, char** out_json) {
  return Guard([&] {
    Require(net, "net");
    Require(set_json, "set_json");
    Require(out_json, "out_json");
    const json opts = Options(options_json, {"simulations", "workers"});
    const azalign::AdversarialStateSet set =
        azalign::AdversarialSetFromJson(set_json);
    if (set.game != net->game) {
      throw Error(
          ErrorCode::kInvalidArgument,
          "network plays " + net->game + " but the states are " + set.game);
    }
    azalign::MisalignmentConfig mc;
    mc.search = SearchFor(net->game, opts);
    azalign::NetworkEvaluator eval(net->net);
    *out_json = CopyOut(azalign::AdversarialSetToJson(
        azalign::RescoreStates(eval, set, mc, Workers(opts))));
  });
}

az_status az_merge_reports(const char* reports_json, const char* label,
                           char** report_json) {
  return Guard([&] {
    Require(report_json, "report_json");
    const auto reports = ParseReports(reports_json);
    *report_json = CopyOut(azalign::ReportToJson(
        azalign::MergeReports(reports, label ? label : "merged")));
  });
}

az_status az_compare(const char* reports_json, char** table_json,
                     char** table_text) {
  return Guard([&] {
    const auto reports = ParseReports(reports_json);
    const azalign::ComparisonTable t = azalign::CompareReports(reports);
    if (table_json) *table_json = CopyOut(azalign::ComparisonToJson(t));
    if (table_text) *table_text = CopyOut(azalign::FormatComparison(t));
  });
}

az_status az_render(const char* reports_json, const char* kind, char** out) {
  return Guard([&] {
    Require(kind, "kind");
    Require(out, "out");
    const auto reports = ParseReports(reports_json);
    if (reports.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "no reports to render");
    }
    const std::string k = kind;
    if (k == "histogram_csv" || k == "curve_csv") {
      if (reports.size() != 1) {
        throw Error(ErrorCode::kInvalidArgument,
                    k + " renders exactly one report");
      }
      *out = CopyOut(k == "histogram_csv" ? azalign::HistogramCsv(reports[0])
                                          : azalign::CurveCsv(reports[0]));
    } else if (k == "histogram_svg") {
      *out = CopyOut(azalign::HistogramSvg(reports));
    } else if (k == "curve_svg") {
      *out = CopyOut(azalign::CurveSvg(reports));
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown render kind '" + k + "'");
    }
  });
}

}  // extern "C"
