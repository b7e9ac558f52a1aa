/* caproute — capability-profile model routing, C API.
 *
 * The library routes instructions across a zoo of candidate models using
 * capability representations built from standardized aptitude tests. All
 * functions return a caproute_status; on failure caproute_last_error()
 * holds a message for the calling thread.
 */
#ifndef CAPROUTE_H
#define CAPROUTE_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum caproute_status {
  CAPROUTE_OK = 0,
  CAPROUTE_ERR_USAGE = 1,    /* unknown command, malformed options/config */
  CAPROUTE_ERR_DATA = 2,     /* missing or inconsistent input data */
  CAPROUTE_ERR_INTERNAL = 3
} caproute_status;

const char* caproute_version(void);

/* Message for the most recent failure on this thread. Valid until the next
 * caproute call on the same thread. Never NULL. */
const char* caproute_last_error(void);

/* Run one pipeline command: "synth", "ingest", "refine", "core", "aptitude",
 * "train", "route", "bench", "coverage", "simulate-release", "report".
 *
 * options_json is a JSON object:
 *   {"out_dir": ".", "workers": 1, "format": "json", "config": {...}}
 * where "config" carries flat key=value settings (e.g. "synth.num_models").
 * Each command reads/writes well-known files under out_dir and writes a
 * <command>_manifest.json next to its outputs. */
caproute_status caproute_run(const char* command, const char* options_json);

/* ------------------------------------------------------------------ */
/* Embedded routing: load a trained scorer + zoo once, route per call. */

typedef struct caproute_engine caproute_engine; /* opaque */

caproute_status caproute_engine_open(const char* scorer_path, const char* zoo_path,
                                     caproute_engine** out_engine);
void caproute_engine_close(caproute_engine* engine);

/* Route one instruction text. options_json may be NULL or override
 * {"num_perturbations": 2, "seed": 0, "inquiry_prompt": "..."}.
 * On success *out_decision_json holds the decision (chosen model and the
 * per-model score map); free it with caproute_string_free. */
caproute_status caproute_engine_route(caproute_engine* engine, const char* instruction_text,
                                      const char* options_json, char** out_decision_json);

void caproute_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CAPROUTE_H */
