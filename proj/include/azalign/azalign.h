/* Copyright 2026 The AZAlign Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libazalign.
 *
 * Every call returns an az_status. On failure az_last_error() describes the
 * problem; the message is per thread and stays valid until the next failing
 * call on that thread. Strings returned through `char**` are allocated by
 * the library and released with az_string_free(). Handles are opaque and
 * released with their *_free function; passing NULL to a free function is a
 * no-op.
 *
 * Structured inputs and outputs are JSON documents. Option objects may omit
 * any key; unknown keys are rejected with AZ_INVALID_ARGUMENT.
 */

#ifndef AZALIGN_AZALIGN_H_
#define AZALIGN_AZALIGN_H_

#include <stdint.h>

#if defined(AZALIGN_BUILDING_LIBRARY)
#define AZ_EXPORT __attribute__((visibility("default")))
#else
#define AZ_EXPORT
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  AZ_OK = 0,
  AZ_INVALID_ARGUMENT = 1,
  AZ_RULE_VIOLATION = 2,
  AZ_RESOURCE_EXHAUSTED = 3,
  AZ_IO = 4,
  AZ_FORMAT = 5,
  AZ_COVERAGE = 6,
  AZ_DIVERGENCE = 7,
  AZ_INTERNAL = 8,
} az_status;

typedef struct az_table az_table;      /* solved game table or visit counts */
typedef struct az_network az_network;  /* policy-value network */

AZ_EXPORT const char* az_version(void);
AZ_EXPORT const char* az_status_name(az_status status);
AZ_EXPORT const char* az_last_error(void);
AZ_EXPORT void az_string_free(char* s);

/* --- Oracle tables -------------------------------------------------------
 * `game` is "ttt3", "ttt4" or "connect4". */

/* Solves every reachable state. `max_states` of 0 uses the default budget;
 * AZ_RESOURCE_EXHAUSTED when the game does not fit. */
AZ_EXPORT az_status az_table_solve(const char* game, uint64_t max_states,
                                   az_table** out);
AZ_EXPORT az_status az_table_load(const char* path, az_table** out);
AZ_EXPORT az_status az_table_save(const az_table* table, const char* path);
/* {"game", "entries", "visit_entries", "root_value"}; root_value is null
 * when the initial position is not in the table. */
AZ_EXPORT az_status az_table_info(const az_table* table, char** json);
AZ_EXPORT void az_table_free(az_table* table);

/* --- Networks ------------------------------------------------------------- */

AZ_EXPORT az_status az_network_load(const char* path, az_network** out);
/* {"game", "input_dim", "width", "depth", "action_count", "parameters"} */
AZ_EXPORT az_status az_network_info(const az_network* net, char** json);
/* `board` uses the compact form "x.o/.x./..." and `to_move` is 1 or 2.
 * Writes action_count probabilities and the value for the player to move. */
AZ_EXPORT az_status az_network_evaluate(const az_network* net,
                                        const char* board, int to_move,
                                        double* policy, int policy_len,
                                        double* value);
AZ_EXPORT void az_network_free(az_network* net);

/* --- Training -------------------------------------------------------------
 * `config_text` uses the sectioned key = value format ([game], [net],
 * [search], [train]); NULL or "" means the per-game defaults for ttt3.
 * `overrides` holds `count` strings "section.key=value" applied in order.
 * With a non-empty `out_dir` checkpoints, the log, visit counts and the
 * config snapshot are written there. On success `result_json` receives
 * {"checkpoints", "final_checkpoint", "log_path", "visits_path", "log"}. */

typedef void (*az_progress_fn)(const char* record_json, void* user);

/* Resolved configuration after overrides, in config file form. */
AZ_EXPORT az_status az_train_config(const char* config_text,
                                    const char* const* overrides, int count,
                                    char** config_out);
AZ_EXPORT az_status az_train(const char* config_text,
                             const char* const* overrides, int count,
                             const char* out_dir, az_progress_fn progress,
                             void* user, char** result_json);

/* --- Analysis -------------------------------------------------------------
 * evaluate options: {"label", "match_games", "matches_with_search",
 *   "matches_policy_only", "misalignment_source" ("search" | "raw"),
 *   "simulations", "seed", "workers"}.
 * `visits` may be NULL. Output is an evaluation report. */
AZ_EXPORT az_status az_evaluate(const az_network* net, const az_table* table,
                                const az_table* visits,
                                const char* options_json, char** report_json);

/* detect options: {"games", "threshold", "max_empty_cells",
 *   "solver_budget", "simulations", "seed", "workers"}.
 * Output is an adversarial state set. */
AZ_EXPORT az_status az_detect(const az_network* net, const char* options_json,
                              char** set_json);
/* Scores a state set produced by az_detect with another network.
 * options: {"simulations", "workers"}. */
AZ_EXPORT az_status az_rescore(const az_network* net, const char* set_json,
                               const char* options_json, char** out_json);

/* `reports_json` is a JSON array of evaluation reports. */
AZ_EXPORT az_status az_merge_reports(const char* reports_json,
                                     const char* label, char** report_json);
/* First report is the baseline. Either output may be NULL. */
AZ_EXPORT az_status az_compare(const char* reports_json, char** table_json,
                               char** table_text);
/* kind: "histogram_csv" or "curve_csv" (exactly one report), or
 * "histogram_svg" or "curve_svg" (one or more). */
AZ_EXPORT az_status az_render(const char* reports_json, const char* kind,
                              char** out);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* AZALIGN_AZALIGN_H_ */
