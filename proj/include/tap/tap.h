// Copyright 2026 The TAP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the time-aware prompt toolkit.
 *
 * Every fallible call returns a tap_status. On failure a description is
 * available from tap_last_error() until the next failing call on the same
 * thread. Strings returned through char ** are owned by the caller and must
 * be released with tap_string_free(). Handles are released with their
 * matching *_free function; passing NULL to any *_free is a no-op.
 */
#ifndef TAP_TAP_H_
#define TAP_TAP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TAP_API __declspec(dllexport)
#else
#define TAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tap_status {
  TAP_OK = 0,
  TAP_ERR_INVALID_ARGUMENT = 1,
  TAP_ERR_PARSE = 2,
  TAP_ERR_IO = 3,
  TAP_ERR_DIVERGED = 4,
  TAP_ERR_RUNTIME = 5,
} tap_status;

TAP_API const char *tap_version(void);
TAP_API const char *tap_last_error(void);
TAP_API const char *tap_status_name(tap_status status);
TAP_API void tap_string_free(char *s);

/* Diagnostics sink for long-running calls. */
typedef void (*tap_log_fn)(const char *message, void *user);

/* ---- dates and prompts ---- */

typedef struct tap_date {
  int32_t year;
  int32_t month;
  int32_t day;
} tap_date;

TAP_API tap_status tap_date_parse(const char *text, tap_date *out);
TAP_API tap_status tap_date_format_iso(tap_date date, char **out);
TAP_API tap_status tap_date_format_long(tap_date date, char **out);
TAP_API tap_status tap_date_shift(tap_date date, int32_t years, int32_t months,
                                  int32_t days, tap_date *out);

/* template_id in 1..3. */
TAP_API tap_status tap_prompt_render(tap_date date, int32_t template_id, char **out);

/* ---- metrics ----
 * Texts are whitespace tokenized. ROUGE values are F1 in [0, 1], BLEU-4 is
 * on a 0..100 scale and TER is edits per reference token.
 */

TAP_API tap_status tap_metric_bleu4(const char *const *hypotheses,
                                    const char *const *references, size_t count,
                                    double *out);
TAP_API tap_status tap_metric_rouge_n(const char *hypothesis, const char *reference,
                                      int32_t n, double *out);
TAP_API tap_status tap_metric_rouge_l(const char *hypothesis, const char *reference,
                                      double *out);
TAP_API tap_status tap_metric_ter(const char *hypothesis, const char *reference,
                                  double *out);
TAP_API tap_status tap_metric_edit_distance(const char *a, const char *b, int64_t *out);
TAP_API tap_status tap_randomization_test(const double *scores_a, const double *scores_b,
                                          size_t count, int64_t iterations, uint64_t seed,
                                          double *p_value);

/* ---- vocabulary and model handles ---- */

typedef struct tap_vocab tap_vocab;
typedef struct tap_model tap_model;

TAP_API tap_status tap_vocab_load(const char *path, tap_vocab **out);
TAP_API int32_t tap_vocab_size(const tap_vocab *vocab);
TAP_API tap_status tap_vocab_token(const tap_vocab *vocab, int32_t id, char **out);
TAP_API void tap_vocab_free(tap_vocab *vocab);

/* vocab_path may be NULL to use the reference stored in the checkpoint. */
TAP_API tap_status tap_model_load(const char *path, const char *vocab_path, tap_model **out);
TAP_API tap_status tap_model_save(const tap_model *model, const char *path,
                                  const char *vocab_reference);
/* "NONE", "ENC_TEXT", "ENC_LINEAR", "DEC_TEXT" or "DEC_LINEAR". Static storage. */
TAP_API const char *tap_model_variant(const tap_model *model);
TAP_API int64_t tap_model_parameter_count(const tap_model *model);
/* beam_size 1 decodes greedily. */
TAP_API tap_status tap_model_generate(const tap_model *model, const char *source,
                                      tap_date timestamp, int32_t beam_size,
                                      int32_t max_len, char **out);
TAP_API void tap_model_free(tap_model *model);

/* ---- pipelines ----
 * Option structs must be initialised with the matching *_init function.
 * Numeric fields left at their init value mean "use the default", which is
 * taken from the experiment config when config_path is set.
 */

typedef struct tap_synth_options {
  const char *task; /* "month" or "age" */
  int64_t count;
  uint64_t seed;
  tap_date lo;
  tap_date hi;
} tap_synth_options;

TAP_API void tap_synth_options_init(tap_synth_options *options);
TAP_API tap_status tap_synth_generate(const tap_synth_options *options, const char *out_path);
/* Exact accuracy of the best timestamp-blind predictor. */
TAP_API tap_status tap_synth_blind_accuracy(const tap_synth_options *options, double *out);

typedef struct tap_corpus_options {
  const char *input_dir;
  const char *output_dir;
  int32_t interval_low;
  int32_t interval_high;
  int32_t skip_first;
  tap_date cutoff;
  double dev_fraction;
  double test_same_fraction;
  double future_downsample;
  int32_t downsample_same_time; /* boolean */
  uint64_t seed;
} tap_corpus_options;

TAP_API void tap_corpus_options_init(tap_corpus_options *options);
/* stats_json may be NULL. */
TAP_API tap_status tap_corpus_build(const tap_corpus_options *options, char **stats_json);

typedef struct tap_train_options {
  const char *config_path; /* optional experiment config */
  const char *train_path;  /* overrides the config's train corpus */
  const char *variant;     /* required */
  const char *out_path;    /* checkpoint; vocab and loss log are written beside it */
  int32_t template_id;     /* 0: default */
  int32_t d_model, n_heads, n_enc_layers, n_dec_layers, d_ff, max_len; /* 0: default */
  double dropout;          /* < 0: default */
  double learning_rate;    /* 0: default */
  int32_t batch_size;      /* 0: default */
  int32_t steps;           /* 0: default */
  int32_t has_seed;
  uint64_t seed;
  tap_log_fn log;
  void *log_user;
} tap_train_options;

TAP_API void tap_train_options_init(tap_train_options *options);
TAP_API tap_status tap_train(const tap_train_options *options);

/* hypotheses_path and references_path are either corpus files (.jsonl, the
 * target field is scored) or plain text with one whitespace-tokenized output
 * per line. Writes metric JSON to *report_json. */
TAP_API tap_status tap_score_files(const char *hypotheses_path, const char *references_path,
                                   int32_t per_sample, char **report_json);
/* Decodes data_path with the model and scores against its targets. When
 * outputs_path is non-NULL the outputs are written there one per line. */
TAP_API tap_status tap_score_model(const tap_model *model, const char *data_path,
                                   int32_t beam_size, int32_t max_len,
                                   const char *outputs_path, int32_t per_sample,
                                   char **report_json);

typedef struct tap_perturb_options {
  const char *config_path;   /* optional; supplies the remaining defaults */
  const char *model_path;
  const char *vocab_path;    /* optional */
  const char *data_path;
  const char *output_dir;
  const char *task;          /* optional: "month" or "age" */
  const char *perturbations; /* optional comma list of labels, e.g. "m+6,m-6" */
  int64_t sample;            /* -1: min(2000, |data|) */
  int32_t beam_size;         /* 0: default */
  int32_t max_len;           /* 0: default */
  int32_t has_seed;
  uint64_t seed;
} tap_perturb_options;

TAP_API void tap_perturb_options_init(tap_perturb_options *options);
TAP_API tap_status tap_perturb(const tap_perturb_options *options);

typedef struct tap_matrix_options {
  const char *config_path; /* required */
  const char *output_dir;  /* optional override */
  int32_t has_seed;
  uint64_t seed;
  int32_t threads;         /* 0: config value */
  tap_log_fn log;
  void *log_user;
} tap_matrix_options;

TAP_API void tap_matrix_options_init(tap_matrix_options *options);
TAP_API tap_status tap_matrix_run(const tap_matrix_options *options);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* TAP_TAP_H_ */
