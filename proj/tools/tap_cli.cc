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

// Command-line front end. Links only the C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tap/tap.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct RuntimeFailure {
  tap_status status;
  std::string message;
};

void Check(tap_status status) {
  if (status != TAP_OK) throw RuntimeFailure{status, tap_last_error()};
}

void LogToStderr(const char *message, void *) { std::fprintf(stderr, "tap: %s\n", message); }

tap_date ParseDateOrThrow(const std::string &text) {
  tap_date d{};
  if (tap_date_parse(text.c_str(), &d) != TAP_OK) throw CLI::ValidationError(tap_last_error());
  return d;
}

const CLI::Validator kDate(
    [](std::string &text) {
      tap_date d{};
      return tap_date_parse(text.c_str(), &d) == TAP_OK ? std::string() : std::string(tap_last_error());
    },
    "YYYY-MM-DD");

const auto kVariants = CLI::IsMember({"NONE", "ENC_TEXT", "ENC_LINEAR", "DEC_TEXT", "DEC_LINEAR"});
const auto kTasks = CLI::IsMember({"month", "age"});

void Emit(char *text, const std::string &out_path) {
  std::string body = text ? text : "";
  tap_string_free(text);
  if (out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  out << body;
  if (!out) throw RuntimeFailure{TAP_ERR_IO, "cannot write " + out_path};
}

const char *OrNull(const std::string &s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Time-aware prompt toolkit", "tap"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", tap_version());

  uint64_t seed = 0;
  std::string config;
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--config", config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  auto has_seed = [&] { return app.count("--seed") > 0 ? 1 : 0; };

  // corpus-build
  auto *corpus_cmd = app.add_subcommand("corpus-build", "Build split corpora from revision files");
  corpus_cmd->fallthrough();
  std::string corpus_in, corpus_out, corpus_cutoff;
  tap_corpus_options corpus;
  tap_corpus_options_init(&corpus);
  corpus_cmd->add_option("--input", corpus_in, "Directory of <subject>.jsonl revision files")
      ->required()
      ->check(CLI::ExistingDirectory);
  corpus_cmd->add_option("--out", corpus_out, "Output directory")->required();
  corpus_cmd->add_option("--cutoff", corpus_cutoff, "Last date of the training period")->check(kDate);
  corpus_cmd->add_option("--interval-low", corpus.interval_low, "Shortest sampling window (days)");
  corpus_cmd->add_option("--interval-high", corpus.interval_high, "Longest sampling window (days)");
  corpus_cmd->add_option("--skip-first", corpus.skip_first, "Revisions discarded per subject");
  corpus_cmd->add_option("--dev-fraction", corpus.dev_fraction);
  corpus_cmd->add_option("--test-same-fraction", corpus.test_same_fraction);
  corpus_cmd->add_option("--future-downsample", corpus.future_downsample);
  bool downsample_same = false;
  corpus_cmd->add_flag("--downsample-same-time", downsample_same,
                       "Also downsample the test-same-time split");

  // synth-gen
  auto *synth_cmd = app.add_subcommand("synth-gen", "Generate a synthetic timestamp-necessary corpus");
  synth_cmd->fallthrough();
  tap_synth_options synth;
  tap_synth_options_init(&synth);
  std::string synth_task = "month", synth_out, synth_lo, synth_hi;
  bool synth_blind = false;
  synth_cmd->add_option("--task", synth_task, "month or age")->check(kTasks);
  synth_cmd->add_option("--count", synth.count, "Number of records")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--out", synth_out, "Output corpus file");
  synth_cmd->add_option("--from", synth_lo, "Earliest timestamp")->check(kDate);
  synth_cmd->add_option("--to", synth_hi, "Latest timestamp")->check(kDate);
  synth_cmd->add_flag("--blind-accuracy", synth_blind,
                      "Print the best timestamp-blind exact-match accuracy");

  // train
  auto *train_cmd = app.add_subcommand("train", "Train one prompt variant");
  train_cmd->fallthrough();
  tap_train_options train;
  tap_train_options_init(&train);
  std::string train_data, train_variant, train_out;
  train_cmd->add_option("--data", train_data, "Training corpus")->check(CLI::ExistingFile);
  train_cmd->add_option("--variant", train_variant)->required()->check(kVariants);
  train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
  train_cmd->add_option("--template", train.template_id)->check(CLI::Range(1, 3));
  train_cmd->add_option("--d-model", train.d_model)->check(CLI::PositiveNumber);
  train_cmd->add_option("--heads", train.n_heads)->check(CLI::PositiveNumber);
  train_cmd->add_option("--enc-layers", train.n_enc_layers)->check(CLI::PositiveNumber);
  train_cmd->add_option("--dec-layers", train.n_dec_layers)->check(CLI::PositiveNumber);
  train_cmd->add_option("--d-ff", train.d_ff)->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-len", train.max_len)->check(CLI::PositiveNumber);
  train_cmd->add_option("--dropout", train.dropout)->check(CLI::Range(0.0, 0.99));
  train_cmd->add_option("--lr", train.learning_rate)->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch-size", train.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--steps", train.steps)->check(CLI::PositiveNumber);

  // score
  auto *score_cmd = app.add_subcommand("score", "Score outputs against references");
  score_cmd->fallthrough();
  std::string score_hyp, score_ref, score_model, score_data, score_outputs, score_out;
  int score_beam = 1, score_max_len = 32;
  bool score_per_sample = false;
  auto *hyp_opt = score_cmd->add_option("--hyp", score_hyp, "Outputs, one per line, or a corpus")
                      ->check(CLI::ExistingFile);
  auto *ref_opt = score_cmd->add_option("--ref", score_ref, "References, one per line, or a corpus")
                      ->check(CLI::ExistingFile);
  auto *model_opt = score_cmd->add_option("--model", score_model, "Checkpoint to decode with")
                        ->check(CLI::ExistingFile);
  auto *data_opt = score_cmd->add_option("--data", score_data, "Corpus decoded by --model")
                       ->check(CLI::ExistingFile);
  hyp_opt->needs(ref_opt)->excludes(model_opt)->excludes(data_opt);
  ref_opt->needs(hyp_opt);
  model_opt->needs(data_opt);
  data_opt->needs(model_opt);
  score_cmd->add_option("--beam", score_beam)->check(CLI::PositiveNumber);
  score_cmd->add_option("--max-len", score_max_len)->check(CLI::PositiveNumber);
  score_cmd->add_option("--outputs", score_outputs, "Write decoded outputs here");
  score_cmd->add_option("--out", score_out, "Write the metric JSON here instead of stdout");
  score_cmd->add_flag("--per-sample", score_per_sample, "Include per-sample ROUGE-L and exact match");

  // perturb
  auto *perturb_cmd = app.add_subcommand("perturb", "Date-perturbation sensitivity analysis");
  perturb_cmd->fallthrough();
  tap_perturb_options perturb;
  tap_perturb_options_init(&perturb);
  std::string perturb_model, perturb_vocab, perturb_data, perturb_out, perturb_task, perturb_list;
  perturb_cmd->add_option("--model", perturb_model)->required()->check(CLI::ExistingFile);
  perturb_cmd->add_option("--vocab", perturb_vocab)->check(CLI::ExistingFile);
  perturb_cmd->add_option("--data", perturb_data)->required()->check(CLI::ExistingFile);
  perturb_cmd->add_option("--out", perturb_out, "Report directory")->required();
  perturb_cmd->add_option("--task", perturb_task, "Synthetic task for shifted-target agreement")
      ->check(kTasks);
  perturb_cmd->add_option("--perturbations", perturb_list, "Comma list, e.g. m+6,m-6");
  perturb_cmd->add_option("--sample", perturb.sample, "Samples to perturb");
  perturb_cmd->add_option("--beam", perturb.beam_size)->check(CLI::PositiveNumber);
  perturb_cmd->add_option("--max-len", perturb.max_len)->check(CLI::PositiveNumber);

  // matrix
  auto *matrix_cmd = app.add_subcommand("matrix", "Train, score and perturb every configured variant");
  matrix_cmd->fallthrough();
  tap_matrix_options matrix;
  tap_matrix_options_init(&matrix);
  std::string matrix_out;
  matrix_cmd->add_option("--out", matrix_out, "Override the config's output directory");
  matrix_cmd->add_option("--threads", matrix.threads, "Concurrent trainings")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    const CLI::App *scope = &app;
    for (const CLI::App *sub : app.get_subcommands()) scope = sub;
    std::cerr << "tap: " << e.what() << "\n\n" << scope->help();
    return kExitUsage;
  }

  try {
    if (*corpus_cmd) {
      corpus.input_dir = corpus_in.c_str();
      corpus.output_dir = corpus_out.c_str();
      if (!corpus_cutoff.empty()) corpus.cutoff = ParseDateOrThrow(corpus_cutoff);
      corpus.downsample_same_time = downsample_same ? 1 : 0;
      corpus.seed = seed;
      char *stats = nullptr;
      Check(tap_corpus_build(&corpus, &stats));
      Emit(stats, "");
    } else if (*synth_cmd) {
      synth.task = synth_task.c_str();
      synth.seed = seed;
      if (!synth_lo.empty()) synth.lo = ParseDateOrThrow(synth_lo);
      if (!synth_hi.empty()) synth.hi = ParseDateOrThrow(synth_hi);
      if (synth_out.empty() && !synth_blind) {
        std::fprintf(stderr, "tap: synth-gen needs --out or --blind-accuracy\n");
        return kExitUsage;
      }
      if (!synth_out.empty()) Check(tap_synth_generate(&synth, synth_out.c_str()));
      if (synth_blind) {
        double accuracy = 0.0;
        Check(tap_synth_blind_accuracy(&synth, &accuracy));
        std::printf("%.17g\n", accuracy);
      }
    } else if (*train_cmd) {
      if (train_data.empty() && config.empty()) {
        std::fprintf(stderr, "tap: train needs --data or --config\n");
        return kExitUsage;
      }
      train.config_path = OrNull(config);
      train.train_path = OrNull(train_data);
      train.variant = train_variant.c_str();
      train.out_path = train_out.c_str();
      train.has_seed = has_seed();
      train.seed = seed;
      train.log = LogToStderr;
      Check(tap_train(&train));
    } else if (*score_cmd) {
      char *report = nullptr;
      if (!score_hyp.empty()) {
        Check(tap_score_files(score_hyp.c_str(), score_ref.c_str(), score_per_sample, &report));
      } else if (!score_model.empty()) {
        tap_model *model = nullptr;
        Check(tap_model_load(score_model.c_str(), nullptr, &model));
        const tap_status status =
            tap_score_model(model, score_data.c_str(), score_beam, score_max_len,
                            OrNull(score_outputs), score_per_sample, &report);
        tap_model_free(model);
        Check(status);
      } else {
        std::fprintf(stderr, "tap: score needs --hyp/--ref or --model/--data\n%s",
                     score_cmd->help().c_str());
        return kExitUsage;
      }
      Emit(report, score_out);
    } else if (*perturb_cmd) {
      perturb.config_path = OrNull(config);
      perturb.model_path = perturb_model.c_str();
      perturb.vocab_path = OrNull(perturb_vocab);
      perturb.data_path = perturb_data.c_str();
      perturb.output_dir = perturb_out.c_str();
      perturb.task = OrNull(perturb_task);
      perturb.perturbations = OrNull(perturb_list);
      perturb.has_seed = has_seed();
      perturb.seed = seed;
      Check(tap_perturb(&perturb));
    } else if (*matrix_cmd) {
      if (config.empty()) {
        std::fprintf(stderr, "tap: matrix needs --config\n%s", matrix_cmd->help().c_str());
        return kExitUsage;
      }
      matrix.config_path = config.c_str();
      matrix.output_dir = OrNull(matrix_out);
      matrix.has_seed = has_seed();
      matrix.seed = seed;
      matrix.log = LogToStderr;
      Check(tap_matrix_run(&matrix));
    }
  } catch (const CLI::ValidationError &e) {
    std::fprintf(stderr, "tap: %s\n", e.what());
    return kExitUsage;
  } catch (const RuntimeFailure &f) {
    std::fprintf(stderr, "tap: %s: %s\n", tap_status_name(f.status), f.message.c_str());
    return kExitRuntime;
  }
  return 0;
}
