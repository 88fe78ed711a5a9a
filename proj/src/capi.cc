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

#include "tap/tap.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tap/corpus.h"
#include "tap/error.h"
#include "tap/harness.h"
#include "tap/metrics.h"
#include "tap/model.h"
#include "tap/prompts.h"
#include "tap/records.h"
#include "tap/synthtask.h"
#include "tap/temporal.h"
#include "tap/tokenizer.h"

struct tap_vocab {
  tap::Vocabulary vocab;
};

struct tap_model {
  tap::Model model;
};

namespace {

namespace fs = std::filesystem;

thread_local std::string g_last_error;

tap_status Fail(tap_status status, const std::string &message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
tap_status Guard(Fn &&fn) {
  try {
    fn();
    return TAP_OK;
  } catch (const tap::Error &e) {
    return Fail(static_cast<tap_status>(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return Fail(TAP_ERR_RUNTIME, "out of memory");
  } catch (const fs::filesystem_error &e) {
    return Fail(TAP_ERR_IO, e.what());
  } catch (const std::exception &e) {
    return Fail(TAP_ERR_RUNTIME, e.what());
  }
}

void Require(const void *p, const char *name) {
  if (p == nullptr) throw tap::InvalidArgument(std::string(name) + " must not be NULL");
}

char *Dup(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tap::CalendarDate ToDate(tap_date d) { return tap::MakeDate(d.year, d.month, d.day); }
tap_date FromDate(const tap::CalendarDate &d) { return {d.year, d.month, d.day}; }

std::vector<std::string> ReadOutputs(const std::string &path) {
  if (fs::path(path).extension() == ".jsonl") {
    std::vector<std::string> out;
    for (const tap::CorpusRecord &r : tap::ReadCorpus(path)) out.push_back(r.target);
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tap::IoError("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

tap::LogFn Logger(tap_log_fn fn, void *user) {
  if (!fn) return {};
  return [fn, user](const std::string &msg) { fn(msg.c_str(), user); };
}

std::vector<tap::LabeledShift> ParsePerturbationList(const std::string &list) {
  std::vector<tap::LabeledShift> out;
  std::stringstream ss(list);
  std::string label;
  const std::vector<tap::LabeledShift> standard = tap::StandardPerturbations();
  while (std::getline(ss, label, ',')) {
    auto it = std::find_if(standard.begin(), standard.end(),
                           [&](const tap::LabeledShift &s) { return s.label == label; });
    if (it == standard.end()) throw tap::InvalidArgument("unknown perturbation " + label);
    out.push_back(*it);
  }
  if (out.empty()) throw tap::InvalidArgument("perturbation list is empty");
  return out;
}

// Config defaults without the file existence checks that Validate() makes.
tap::ExperimentConfig OptionalConfig(const char *path) {
  if (path == nullptr) return {};
  return tap::LoadExperimentConfig(path);
}

}  // namespace

extern "C" {

const char *tap_version(void) { return "1.0.0"; }

const char *tap_last_error(void) { return g_last_error.c_str(); }

const char *tap_status_name(tap_status status) {
  switch (status) {
    case TAP_OK: return "ok";
    case TAP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TAP_ERR_PARSE: return "parse error";
    case TAP_ERR_IO: return "i/o error";
    case TAP_ERR_DIVERGED: return "training diverged";
    case TAP_ERR_RUNTIME: return "runtime error";
  }
  return "unknown status";
}

void tap_string_free(char *s) { std::free(s); }

tap_status tap_date_parse(const char *text, tap_date *out) {
  return Guard([&] {
    Require(text, "text");
    Require(out, "out");
    *out = FromDate(tap::ParseDate(text));
  });
}

tap_status tap_date_format_iso(tap_date date, char **out) {
  return Guard([&] {
    Require(out, "out");
    *out = Dup(tap::FormatIsoDate(ToDate(date)));
  });
}

tap_status tap_date_format_long(tap_date date, char **out) {
  return Guard([&] {
    Require(out, "out");
    *out = Dup(tap::FormatLongDate(ToDate(date)));
  });
}

tap_status tap_date_shift(tap_date date, int32_t years, int32_t months, int32_t days,
                          tap_date *out) {
  return Guard([&] {
    Require(out, "out");
    *out = FromDate(tap::ShiftDate(ToDate(date), {years, months, days}));
  });
}

tap_status tap_prompt_render(tap_date date, int32_t template_id, char **out) {
  return Guard([&] {
    Require(out, "out");
    *out = Dup(tap::RenderTextualPrompt(ToDate(date), template_id));
  });
}

tap_status tap_metric_bleu4(const char *const *hypotheses, const char *const *references,
                            size_t count, double *out) {
  return Guard([&] {
    Require(out, "out");
    if (count > 0) {
      Require(hypotheses, "hypotheses");
      Require(references, "references");
    }
    std::vector<tap::Tokens> hyp, ref;
    for (size_t i = 0; i < count; ++i) {
      Require(hypotheses[i], "hypothesis");
      Require(references[i], "reference");
      hyp.push_back(tap::SplitWhitespace(hypotheses[i]));
      ref.push_back(tap::SplitWhitespace(references[i]));
    }
    *out = tap::Bleu4Corpus(hyp, ref);
  });
}

tap_status tap_metric_rouge_n(const char *hypothesis, const char *reference, int32_t n,
                              double *out) {
  return Guard([&] {
    Require(hypothesis, "hypothesis");
    Require(reference, "reference");
    Require(out, "out");
    *out = tap::RougeN(tap::SplitWhitespace(hypothesis), tap::SplitWhitespace(reference), n);
  });
}

tap_status tap_metric_rouge_l(const char *hypothesis, const char *reference, double *out) {
  return Guard([&] {
    Require(hypothesis, "hypothesis");
    Require(reference, "reference");
    Require(out, "out");
    *out = tap::RougeL(tap::SplitWhitespace(hypothesis), tap::SplitWhitespace(reference));
  });
}

tap_status tap_metric_ter(const char *hypothesis, const char *reference, double *out) {
  return Guard([&] {
    Require(hypothesis, "hypothesis");
    Require(reference, "reference");
    Require(out, "out");
    *out = tap::Ter(tap::SplitWhitespace(hypothesis), tap::SplitWhitespace(reference));
  });
}

tap_status tap_metric_edit_distance(const char *a, const char *b, int64_t *out) {
  return Guard([&] {
    Require(a, "a");
    Require(b, "b");
    Require(out, "out");
    *out = tap::TokenEditDistance(tap::SplitWhitespace(a), tap::SplitWhitespace(b));
  });
}

tap_status tap_randomization_test(const double *scores_a, const double *scores_b, size_t count,
                                  int64_t iterations, uint64_t seed, double *p_value) {
  return Guard([&] {
    Require(p_value, "p_value");
    if (count > 0) {
      Require(scores_a, "scores_a");
      Require(scores_b, "scores_b");
    }
    *p_value = tap::ApproxRandomizationTest(std::vector<double>(scores_a, scores_a + count),
                                            std::vector<double>(scores_b, scores_b + count),
                                            iterations, seed);
  });
}

tap_status tap_vocab_load(const char *path, tap_vocab **out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new tap_vocab{tap::Vocabulary::Load(path)};
  });
}

int32_t tap_vocab_size(const tap_vocab *vocab) { return vocab ? vocab->vocab.size() : 0; }

tap_status tap_vocab_token(const tap_vocab *vocab, int32_t id, char **out) {
  return Guard([&] {
    Require(vocab, "vocab");
    Require(out, "out");
    *out = Dup(vocab->vocab.Token(id));
  });
}

void tap_vocab_free(tap_vocab *vocab) { delete vocab; }

tap_status tap_model_load(const char *path, const char *vocab_path, tap_model **out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new tap_model{tap::LoadCheckpoint(path, vocab_path ? vocab_path : "")};
  });
}

tap_status tap_model_save(const tap_model *model, const char *path, const char *vocab_reference) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    Require(vocab_reference, "vocab_reference");
    tap::SaveCheckpoint(model->model, path, vocab_reference);
  });
}

const char *tap_model_variant(const tap_model *model) {
  if (!model) return "";
  return tap::PromptKindName(model->model.variant.kind).data();
}

int64_t tap_model_parameter_count(const tap_model *model) {
  return model ? tap::ParameterCount(model->model.params) : 0;
}

tap_status tap_model_generate(const tap_model *model, const char *source, tap_date timestamp,
                              int32_t beam_size, int32_t max_len, char **out) {
  return Guard([&] {
    Require(model, "model");
    Require(source, "source");
    Require(out, "out");
    if (beam_size < 1) throw tap::InvalidArgument("beam_size must be >= 1");
    if (max_len < 1) throw tap::InvalidArgument("max_len must be >= 1");
    *out = Dup(tap::Generate(model->model, source, ToDate(timestamp), beam_size, max_len));
  });
}

void tap_model_free(tap_model *model) { delete model; }

void tap_synth_options_init(tap_synth_options *options) {
  if (!options) return;
  const tap::SynthSpec spec;
  options->task = "month";
  options->count = spec.count;
  options->seed = spec.seed;
  options->lo = FromDate(spec.lo);
  options->hi = FromDate(spec.hi);
}

namespace {

tap::SynthSpec ToSpec(const tap_synth_options *options) {
  Require(options, "options");
  Require(options->task, "task");
  tap::SynthSpec spec;
  spec.kind = tap::ParseSynthKind(options->task);
  spec.count = options->count;
  spec.seed = options->seed;
  spec.lo = ToDate(options->lo);
  spec.hi = ToDate(options->hi);
  spec.Validate();
  return spec;
}

}  // namespace

tap_status tap_synth_generate(const tap_synth_options *options, const char *out_path) {
  return Guard([&] {
    Require(out_path, "out_path");
    tap::WriteCorpus(out_path, tap::GenerateSynthetic(ToSpec(options)));
  });
}

tap_status tap_synth_blind_accuracy(const tap_synth_options *options, double *out) {
  return Guard([&] {
    Require(out, "out");
    *out = tap::BayesBlindAccuracy(ToSpec(options));
  });
}

void tap_corpus_options_init(tap_corpus_options *options) {
  if (!options) return;
  const tap::SamplingOptions sampling;
  const tap::SplitOptions splits;
  options->input_dir = nullptr;
  options->output_dir = nullptr;
  options->interval_low = sampling.interval_low;
  options->interval_high = sampling.interval_high;
  options->skip_first = sampling.skip_first;
  options->cutoff = FromDate(splits.cutoff);
  options->dev_fraction = splits.dev_fraction;
  options->test_same_fraction = splits.test_same_fraction;
  options->future_downsample = splits.future_downsample;
  options->downsample_same_time = splits.downsample_same_time ? 1 : 0;
  options->seed = 0;
}

tap_status tap_corpus_build(const tap_corpus_options *options, char **stats_json) {
  return Guard([&] {
    Require(options, "options");
    Require(options->input_dir, "input_dir");
    Require(options->output_dir, "output_dir");
    tap::CorpusBuildOptions o;
    o.input_dir = options->input_dir;
    o.output_dir = options->output_dir;
    o.sampling.interval_low = options->interval_low;
    o.sampling.interval_high = options->interval_high;
    o.sampling.skip_first = options->skip_first;
    o.splits.cutoff = ToDate(options->cutoff);
    o.splits.dev_fraction = options->dev_fraction;
    o.splits.test_same_fraction = options->test_same_fraction;
    o.splits.future_downsample = options->future_downsample;
    o.splits.downsample_same_time = options->downsample_same_time != 0;
    o.seed = options->seed;
    const tap::CorpusBuildStats stats = tap::BuildCorpus(o);
    if (stats_json) {
      nlohmann::ordered_json j;
      j["subjects"] = stats.subjects;
      j["revisions_read"] = stats.revisions_read;
      j["revisions_complete"] = stats.revisions_complete;
      j["revisions_sampled"] = stats.revisions_sampled;
      j["mean_attributes"] = stats.mean_attributes;
      j["mean_lead_words"] = stats.mean_lead_words;
      *stats_json = Dup(j.dump(1) + "\n");
    }
  });
}

void tap_train_options_init(tap_train_options *options) {
  if (!options) return;
  *options = tap_train_options{};
  options->dropout = -1.0;
}

tap_status tap_train(const tap_train_options *options) {
  return Guard([&] {
    Require(options, "options");
    Require(options->variant, "variant");
    Require(options->out_path, "out_path");
    tap::ExperimentConfig c = OptionalConfig(options->config_path);
    if (options->train_path) c.train_path = options->train_path;
    if (c.train_path.empty()) throw tap::InvalidArgument("no training corpus given");
    if (options->template_id) c.template_id = options->template_id;
    tap::GetTextualTemplate(c.template_id);
    auto pick = [](int32_t v, int &field) {
      if (v > 0) field = v;
    };
    pick(options->d_model, c.model.d_model);
    pick(options->n_heads, c.model.n_heads);
    pick(options->n_enc_layers, c.model.n_enc_layers);
    pick(options->n_dec_layers, c.model.n_dec_layers);
    pick(options->d_ff, c.model.d_ff);
    pick(options->max_len, c.model.max_len);
    pick(options->batch_size, c.training.batch_size);
    pick(options->steps, c.training.steps);
    if (options->dropout >= 0.0) c.model.dropout = options->dropout;
    if (options->learning_rate > 0.0) c.training.learning_rate = options->learning_rate;
    if (options->has_seed) c.seed = options->seed;
    const tap::PromptKind kind = tap::ParsePromptKind(options->variant);

    const std::vector<tap::CorpusRecord> train = tap::ReadCorpus(c.train_path);
    const tap::Vocabulary vocab = tap::BuildExperimentVocab(train, {}, c.template_id, c.perturbations);
    const tap::LogFn log = Logger(options->log, options->log_user);
    if (log) log("training " + std::string(tap::PromptKindName(kind)) + " on " +
                 std::to_string(train.size()) + " records");
    std::vector<double> losses;
    const tap::Model model = tap::TrainVariant(c, kind, vocab, train, &losses);

    const fs::path out(options->out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    const std::string stem = out.stem().string();
    const fs::path vocab_path = out.parent_path() / (stem + ".vocab.tsv");
    vocab.Save(vocab_path.string());
    tap::SaveCheckpoint(model, out.string(), vocab_path.filename().string());
    std::ostringstream log_text;
    log_text << "step\tloss\n";
    char buf[64];
    for (size_t s = 0; s < losses.size(); ++s) {
      std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", s, losses[s]);
      log_text << buf;
    }
    tap::WriteFile((out.parent_path() / (stem + ".losses.tsv")).string(), log_text.str());
    if (log && !losses.empty()) {
      std::snprintf(buf, sizeof buf, "%.6f", losses.back());
      log("final loss " + std::string(buf));
    }
  });
}

tap_status tap_score_files(const char *hypotheses_path, const char *references_path,
                           int32_t per_sample, char **report_json) {
  return Guard([&] {
    Require(hypotheses_path, "hypotheses_path");
    Require(references_path, "references_path");
    Require(report_json, "report_json");
    const tap::MetricScores scores =
        tap::ScoreOutputs(ReadOutputs(hypotheses_path), ReadOutputs(references_path));
    *report_json = Dup(tap::MetricScoresToJson(scores, per_sample != 0));
  });
}

tap_status tap_score_model(const tap_model *model, const char *data_path, int32_t beam_size,
                           int32_t max_len, const char *outputs_path, int32_t per_sample,
                           char **report_json) {
  return Guard([&] {
    Require(model, "model");
    Require(data_path, "data_path");
    Require(report_json, "report_json");
    if (beam_size < 1 || max_len < 1) throw tap::InvalidArgument("beam_size and max_len must be >= 1");
    const std::vector<tap::CorpusRecord> data = tap::ReadCorpus(data_path);
    const std::vector<std::string> outputs = tap::DecodeCorpus(model->model, data, beam_size, max_len);
    std::vector<std::string> refs;
    for (const tap::CorpusRecord &r : data) refs.push_back(r.target);
    if (outputs_path) {
      std::string text;
      for (const std::string &o : outputs) text += o + "\n";
      tap::WriteFile(outputs_path, text);
    }
    *report_json = Dup(tap::MetricScoresToJson(tap::ScoreOutputs(outputs, refs), per_sample != 0));
  });
}

void tap_perturb_options_init(tap_perturb_options *options) {
  if (!options) return;
  *options = tap_perturb_options{};
  options->sample = -1;
}

tap_status tap_perturb(const tap_perturb_options *options) {
  return Guard([&] {
    Require(options, "options");
    Require(options->model_path, "model_path");
    Require(options->data_path, "data_path");
    Require(options->output_dir, "output_dir");
    tap::ExperimentConfig c = OptionalConfig(options->config_path);
    if (options->task) c.task = tap::ParseSynthKind(options->task);
    if (options->perturbations) c.perturbations = ParsePerturbationList(options->perturbations);
    if (options->sample >= 0) c.perturbation_sample = options->sample;
    if (options->beam_size > 0) c.perturbation_beam_size = options->beam_size;
    if (options->max_len > 0) c.max_decode_len = options->max_len;
    if (options->has_seed) c.seed = options->seed;
    const int beam = c.perturbation_beam_size > 0 ? c.perturbation_beam_size : c.beam_size;

    const tap::Model model =
        tap::LoadCheckpoint(options->model_path, options->vocab_path ? options->vocab_path : "");
    const std::vector<tap::CorpusRecord> data = tap::ReadCorpus(options->data_path);
    const int64_t size = static_cast<int64_t>(data.size());
    const int64_t n = c.perturbation_sample < 0 ? std::min<int64_t>(2000, size) : c.perturbation_sample;
    if (n > size) throw tap::InvalidArgument("sample size exceeds the dataset size");
    const std::vector<int64_t> indices =
        tap::SampleIndices(size, n, tap::DeriveSeed(c.seed, "perturb/sample"));
    const tap::PerturbationReport report = tap::PerturbationAnalysis(
        model, data, indices, c.perturbations, beam, c.max_decode_len, c.task);
    std::vector<std::string> ids;
    for (const tap::CorpusRecord &r : data) ids.push_back(r.id);
    tap::EmitPerturbationReport(report, model.variant.kind, ids, options->output_dir);
  });
}

void tap_matrix_options_init(tap_matrix_options *options) {
  if (!options) return;
  *options = tap_matrix_options{};
}

tap_status tap_matrix_run(const tap_matrix_options *options) {
  return Guard([&] {
    Require(options, "options");
    Require(options->config_path, "config_path");
    tap::ExperimentConfig c = tap::LoadExperimentConfig(options->config_path);
    if (options->output_dir) c.output_dir = options->output_dir;
    if (options->has_seed) c.seed = options->seed;
    if (options->threads > 0) c.threads = options->threads;
    tap::RunExperiment(c, Logger(options->log, options->log_user));
  });
}

}  // extern "C"
