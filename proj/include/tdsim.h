/* Copyright 2026 the tdsim authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C surface of the tdsim shared library. All simulator state lives behind
 * opaque handles; strings returned as char* are heap-allocated and must be
 * released with td_string_free().
 *
 * Return-code convention (mirrors the CLI exit codes):
 *   0  success
 *   1  bad input (config field, unreadable file); message names the field
 *   2  invariant violation (failed audit, mid-run conservation breach)
 */
#ifndef TDSIM_H
#define TDSIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct td_config td_config;
typedef struct td_sim td_sim;

/* Last failure message of the calling thread; valid until the next call. */
const char* td_last_error(void);
void td_string_free(char* s);

/* -- configuration ------------------------------------------------------ */
int td_config_load(const char* path, td_config** out);
int td_config_parse(const char* json_text, td_config** out);
int td_config_override(td_config* config, const char* key, const char* value);
int td_config_set_seed(td_config* config, uint64_t seed);
int td_config_validate(const td_config* config);
void td_config_free(td_config* config);

/* -- simulation ---------------------------------------------------------- */
int td_sim_create(const td_config* config, td_sim** out);
int td_sim_advance(td_sim* sim, uint64_t until_tick);
/* Advances to the horizon and settles; required before reading outputs. */
int td_sim_run(td_sim* sim);
uint64_t td_sim_now(const td_sim* sim);
/* Hex digest of the full simulation state; equal digests, equal states. */
int td_sim_state_digest(const td_sim* sim, char hex_out[65]);

char* td_sim_metrics_json(const td_sim* sim);
char* td_sim_events_jsonl(const td_sim* sim);
char* td_sim_burn_log_csv(const td_sim* sim);
/* Writes metrics.json, events.jsonl and burn_log.csv into dir. */
int td_sim_write_outputs(const td_sim* sim, const char* dir);
void td_sim_free(td_sim* sim);

/* -- audit --------------------------------------------------------------- */
/* Returns 0 when every conservation invariant recomputed from the log
 * holds, 2 otherwise with the violated invariant in *violation_out. */
int td_audit_events_file(const char* path, char** violation_out);

/* -- acceptance ---------------------------------------------------------- */
/* Runs criterion 1..10, or all of them when criterion == 0. Prints one
 * PASS/FAIL line per criterion to stdout; returns 0 iff all pass. */
int td_acceptance_run(int criterion, int quick);

#ifdef __cplusplus
}
#endif

#endif
