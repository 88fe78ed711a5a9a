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

#ifndef TAP_HARNESS_H_
#define TAP_HARNESS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tap/model.h"
#include "tap/records.h"
#include "tap/synthtask.h"
#include "tap/temporal.h"
#include "tap/tokenizer.h"

namespace tap {

inline constexpr int kExperimentFormatVersion = 1;

struct ExperimentConfig {
  std::string train_path;
  std::string eval_path;
  // Set for synthetic corpora; enables exact-match significance and the
  // shifted-target agreement of the perturbation analysis.
  std::optional<SynthKind> task;
  ModelConfig model;  // vocab_size is filled in from the built vocabulary
  TrainHyper training;
  std::vector<PromptKind> variants = AllPromptKinds();
  int template_id = kDefaultTemplateId;
  std::vector<LabeledShift> perturbations = StandardPerturbations();
  // Variants that get the perturbation analysis; defaults to all.
  std::vector<PromptKind> perturbation_variants = AllPromptKinds();
  int64_t perturbation_sample = -1;  // -1 means min(2000, |eval|)
  int beam_size = 1;
  int perturbation_beam_size = 0;    // 0 means beam_size
  int max_decode_len = 32;
  int64_t significance_iterations = 10000;
  std::string output_dir;
  uint64_t seed = 0;
  int threads = 1;  // concurrent variant trainings

  // Throws InvalidArgument; also checks that the corpus files exist.
  void Validate() const;
};

// JSON config; relative paths resolve against base_dir.
ExperimentConfig ParseExperimentConfig(const std::string &text,
                                       const std::string &base_dir);
ExperimentConfig LoadExperimentConfig(const std::string &path);

// Training tokens plus everything a prompt may render for any date:
// template words, month names, days 1..31 and the years of the corpus
// timestamps widened by the largest perturbation.
Vocabulary BuildExperimentVocab(const std::vector<CorpusRecord> &train,
                                const std::vector<CorpusRecord> &eval,
                                int template_id,
                                const std::vector<LabeledShift> &perturbations);

std::vector<TimedSample> EncodeCorpus(const std::vector<CorpusRecord> &records,
                                      const Vocabulary &vocab);

// Trains one variant with the config's model, training and seed settings.
// Divergence is rethrown with the variant name.
Model TrainVariant(const ExperimentConfig &config, PromptKind kind,
                   const Vocabulary &vocab, const std::vector<CorpusRecord> &train,
                   std::vector<double> *losses = nullptr);

std::vector<std::string> DecodeCorpus(const Model &model,
                                      const std::vector<CorpusRecord> &records,
                                      int beam_size, int max_len);

struct MetricScores {
  double bleu4 = 0.0;        // 0..100
  double ter = 0.0;          // edits per reference token
  double rouge1 = 0.0;       // 0..1
  double rouge2 = 0.0;
  double rouge_l = 0.0;
  double exact_match = 0.0;  // 0..1
  std::vector<double> rouge_l_per_sample;
  std::vector<double> exact_match_per_sample;

  friend bool operator==(const MetricScores &, const MetricScores &) = default;
};

MetricScores ScoreOutputs(const std::vector<std::string> &hypotheses,
                          const std::vector<std::string> &references);

std::string MetricScoresToJson(const MetricScores &scores, bool per_sample);

struct PerturbationRow {
  std::string label;  // "orig" for the true timestamps
  DateShift shift;
  double mean_edit_distance = 0.0;
  double delta_bleu4 = 0.0;
  double delta_rouge_l = 0.0;
  double delta_rouge2 = 0.0;
  // Fraction of confident samples whose perturbed output equals the target
  // recomputed for the shifted timestamp; confident means the output for the
  // true timestamp is correct. Empty without a task or confident samples.
  std::optional<double> shifted_agreement;
  int64_t confident = 0;
  std::vector<std::string> outputs;        // per sample
  std::vector<int64_t> edit_distances;     // vs the "orig" outputs

  friend bool operator==(const PerturbationRow &, const PerturbationRow &) = default;
};

struct PerturbationReport {
  std::vector<int64_t> sample_indices;  // into the evaluation corpus
  std::vector<PerturbationRow> rows;    // "orig" first

  friend bool operator==(const PerturbationReport &, const PerturbationReport &) = default;
};

// Decodes each record with its true timestamp and with every shifted one.
PerturbationReport PerturbationAnalysis(const Model &model,
                                        const std::vector<CorpusRecord> &records,
                                        const std::vector<int64_t> &sample_indices,
                                        const std::vector<LabeledShift> &perturbations,
                                        int beam_size, int max_len,
                                        std::optional<SynthKind> task);

// Sorted sample of min(n, size) distinct indices.
std::vector<int64_t> SampleIndices(int64_t size, int64_t n, uint64_t seed);

struct VariantResult {
  PromptKind kind = PromptKind::kNone;
  MetricScores scores;
  std::optional<double> p_rouge_l;      // vs NONE
  std::optional<double> p_exact_match;  // vs NONE, synthetic tasks only
  std::vector<std::string> outputs;
  std::vector<double> losses;
  std::optional<PerturbationReport> perturbation;

  friend bool operator==(const VariantResult &, const VariantResult &) = default;
};

struct ExperimentResults {
  uint64_t seed = 0;
  std::optional<SynthKind> task;
  int64_t train_size = 0;
  int64_t eval_size = 0;
  int vocab_size = 0;
  std::vector<std::string> eval_ids;
  std::vector<VariantResult> variants;

  friend bool operator==(const ExperimentResults &, const ExperimentResults &) = default;
};

struct MatrixArtifacts {
  Vocabulary vocab;
  std::vector<Model> models;  // parallel to results.variants
};

using LogFn = std::function<void(const std::string &)>;

ExperimentResults RunVariantMatrix(const ExperimentConfig &config,
                                   MatrixArtifacts *artifacts = nullptr,
                                   const LogFn &log = {});

// perturbation.json, samples.tsv and table.txt for a single model.
void EmitPerturbationReport(const PerturbationReport &report, PromptKind kind,
                            const std::vector<std::string> &ids,
                            const std::string &output_dir);

// summary.json, samples.tsv and table.txt.
void EmitReport(const ExperimentResults &results, const std::string &output_dir);

std::string ResultsToJson(const ExperimentResults &results);
ExperimentResults ResultsFromJson(const std::string &text);
std::string FormatResultsTable(const ExperimentResults &results);

// Runs the matrix and writes the report, vocab.tsv, per-variant checkpoints
// and loss logs under config.output_dir.
ExperimentResults RunExperiment(const ExperimentConfig &config, const LogFn &log = {});

}  // namespace tap

#endif  // TAP_HARNESS_H_
