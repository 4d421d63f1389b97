/**
 * Copyright 2026 the progen authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the staged text-generation pipeline. All functions return
 * a progen_status; on failure progen_last_error() carries a message for the
 * calling thread. Handles are opaque and freed with their _free function. */

#ifndef PROGEN_H
#define PROGEN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PROGEN_API __declspec(dllexport)
#else
#define PROGEN_API __attribute__((visibility("default")))
#endif

typedef enum progen_status {
  PROGEN_OK = 0,
  PROGEN_ERR_INVALID_ARG = 1, /* bad arguments or validation failure */
  PROGEN_ERR_IO = 2,          /* unreadable/unwritable files */
  PROGEN_ERR_PARSE = 3,       /* malformed input data */
  PROGEN_ERR_CONFIG = 4,      /* invalid run configuration */
  PROGEN_ERR_DATA = 5,        /* empty corpora, duplicate ids, ... */
  PROGEN_ERR_MODEL = 6,       /* corrupt model files, kind mismatches */
  PROGEN_ERR_STATE = 7,       /* missing or stale pipeline artifacts */
  PROGEN_ERR_INTERNAL = 8
} progen_status;

typedef struct progen_config progen_config;

PROGEN_API const char* progen_version(void);

/* Message for the most recent failure on this thread; valid until the next
 * progen call on the same thread. Never NULL. */
PROGEN_API const char* progen_last_error(void);

/* ------------------------------------------------------------------ */
/* Run configuration                                                   */

PROGEN_API progen_status progen_config_load(const char* path, progen_config** out);
PROGEN_API progen_status progen_config_parse(const char* json_text, progen_config** out);
PROGEN_API void progen_config_free(progen_config* config);

/* Known keys: "output_dir" (alias "out"), "seed" (decoder + noise),
 * "stages" (applies the coverage preset for K), "samples". */
PROGEN_API progen_status progen_config_set(progen_config* config, const char* key,
                                           const char* value);

/* Canonical JSON for the resolved configuration; free with progen_string_free. */
PROGEN_API progen_status progen_config_dump(const progen_config* config, char** out_json);

PROGEN_API void progen_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Pipeline steps                                                      */

PROGEN_API progen_status progen_cmd_build_vocab(const progen_config* config);
PROGEN_API progen_status progen_cmd_extract(const progen_config* config);
PROGEN_API progen_status progen_cmd_train(const progen_config* config);

/* mode: "full" or "gold-plan:<k>"; samples 0 uses the config value. */
PROGEN_API progen_status progen_cmd_generate(const progen_config* config,
                                             size_t samples, const char* mode);

/* Writes the report under the configured output directory and, when
 * out_report_json is non-NULL, returns it as a JSON string (free with
 * progen_string_free). */
PROGEN_API progen_status progen_cmd_evaluate(const progen_config* config,
                                             const char* generated_path,
                                             const char* reference_path,
                                             char** out_report_json);

/* Full pipeline with digest-based caching of unchanged steps. */
PROGEN_API progen_status progen_cmd_run(const progen_config* config,
                                        char** out_report_json);

/* ------------------------------------------------------------------ */
/* Sample data                                                         */

PROGEN_API progen_status progen_make_synthetic_corpus(const char* path, size_t docs,
                                                      uint64_t seed, int with_prompts);

#ifdef __cplusplus
}
#endif

#endif /* PROGEN_H */
