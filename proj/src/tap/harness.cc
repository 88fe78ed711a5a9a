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

#include "tap/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "tap/error.h"
#include "tap/metrics.h"
#include "tap/random.h"

namespace tap {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr char kOrigLabel[] = "orig";

std::string ResolvePath(const std::string &path, const std::string &base_dir) {
  if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

std::vector<Tokens> Tokenize(const std::vector<std::string> &texts) {
  std::vector<Tokens> out;
  out.reserve(texts.size());
  for (const std::string &t : texts) out.push_back(SplitWhitespace(t));
  return out;
}

double Mean(const std::vector<double> &v) {
  double total = 0.0;
  for (double x : v) total += x;
  return v.empty() ? 0.0 : total / static_cast<double>(v.size());
}

std::vector<PromptKind> ParseKinds(const nlohmann::json &j, const char *field) {
  if (!j.is_array() || j.empty()) {
    throw InvalidArgument(std::string(field) + " must be a non-empty list");
  }
  std::vector<PromptKind> kinds;
  for (const auto &item : j) kinds.push_back(ParsePromptKind(item.get<std::string>()));
  return kinds;
}

LabeledShift ParseShift(const nlohmann::json &j) {
  if (j.is_string()) {
    const std::string label = j.get<std::string>();
    for (const LabeledShift &s : StandardPerturbations()) {
      if (s.label == label) return s;
    }
    throw InvalidArgument("unknown perturbation " + label);
  }
  for (const auto &[key, value] : j.items()) {
    if (key != "label" && key != "years" && key != "months" && key != "days") {
      throw InvalidArgument("unknown perturbation field " + key);
    }
  }
  LabeledShift s;
  s.label = j.at("label").get<std::string>();
  s.shift.years = j.value("years", 0);
  s.shift.months = j.value("months", 0);
  s.shift.days = j.value("days", 0);
  return s;
}

void RejectUnknownKeys(const nlohmann::json &j, const std::set<std::string> &known,
                       const std::string &where) {
  for (const auto &[key, value] : j.items()) {
    if (!known.count(key)) throw InvalidArgument("unknown " + where + " field " + key);
  }
}

std::string VariantSeedLabel(const std::string &what, PromptKind kind) {
  return what + "/" + std::string(PromptKindName(kind));
}

std::string TableName(PromptKind kind) {
  switch (kind) {
    case PromptKind::kNone: return "-";
    case PromptKind::kEncText: return "Enc:T";
    case PromptKind::kEncLinear: return "Enc:L";
    case PromptKind::kDecText: return "Dec:T";
    case PromptKind::kDecLinear: return "Dec:L";
  }
  return "?";
}

std::string Tsv(std::string s) {
  for (char &c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (variants.empty()) throw InvalidArgument("variant list must be non-empty");
  std::set<PromptKind> seen;
  for (PromptKind k : variants) {
    if (!seen.insert(k).second) {
      throw InvalidArgument("duplicate variant " + std::string(PromptKindName(k)));
    }
  }
  for (PromptKind k : perturbation_variants) {
    if (!seen.count(k)) {
      throw InvalidArgument("perturbation variant " + std::string(PromptKindName(k)) +
                            " is not in the variant list");
    }
  }
  GetTextualTemplate(template_id);
  ModelConfig sizes = model;
  sizes.vocab_size = std::max(sizes.vocab_size, kNumReserved + 1);
  sizes.Validate();
  std::set<std::string> labels{kOrigLabel};
  for (const LabeledShift &s : perturbations) {
    if (s.label.empty() || !labels.insert(s.label).second) {
      throw InvalidArgument("perturbation labels must be unique, non-empty and not \"orig\"");
    }
  }
  if (beam_size < 1) throw InvalidArgument("beam_size must be >= 1");
  if (perturbation_beam_size < 0) throw InvalidArgument("perturbation_beam_size must be >= 0");
  if (max_decode_len < 1) throw InvalidArgument("max_decode_len must be >= 1");
  if (significance_iterations < 1) throw InvalidArgument("significance_iterations must be >= 1");
  if (perturbation_sample < -1) throw InvalidArgument("perturbation_sample must be >= 0");
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
  if (training.steps < 1 || training.batch_size < 1 || !(training.learning_rate > 0.0)) {
    throw InvalidArgument("training needs steps >= 1, batch_size >= 1 and learning_rate > 0");
  }
  for (const auto &[name, path] : {std::pair{"train", &train_path}, std::pair{"eval", &eval_path}}) {
    if (path->empty()) throw InvalidArgument(std::string(name) + " path is required");
    if (!fs::is_regular_file(*path)) throw InvalidArgument(std::string(name) + " file " + *path + " does not exist");
  }
  if (output_dir.empty()) throw InvalidArgument("output_dir is required");
}

ExperimentConfig ParseExperimentConfig(const std::string &text, const std::string &base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("experiment config must be a JSON object");
  try {
    RejectUnknownKeys(j, {"format_version", "train", "eval", "task", "model", "training",
                          "variants", "template", "perturbations", "perturbation_variants",
                          "perturbation_sample", "beam_size", "perturbation_beam_size",
                          "max_decode_len", "significance_iterations", "output_dir", "seed",
                          "threads"},
                      "config");
    const int version = j.at("format_version").get<int>();
    if (version != kExperimentFormatVersion) {
      throw ParseError("unsupported config format_version " + std::to_string(version));
    }
    ExperimentConfig c;
    c.train_path = ResolvePath(j.at("train").get<std::string>(), base_dir);
    c.eval_path = ResolvePath(j.at("eval").get<std::string>(), base_dir);
    if (j.contains("task") && !j["task"].is_null()) c.task = ParseSynthKind(j["task"].get<std::string>());
    if (j.contains("model")) {
      const auto &m = j["model"];
      RejectUnknownKeys(m, {"d_model", "n_heads", "n_enc_layers", "n_dec_layers", "d_ff",
                            "max_len", "dropout"},
                        "model");
      c.model.d_model = m.value("d_model", c.model.d_model);
      c.model.n_heads = m.value("n_heads", c.model.n_heads);
      c.model.n_enc_layers = m.value("n_enc_layers", c.model.n_enc_layers);
      c.model.n_dec_layers = m.value("n_dec_layers", c.model.n_dec_layers);
      c.model.d_ff = m.value("d_ff", c.model.d_ff);
      c.model.max_len = m.value("max_len", c.model.max_len);
      c.model.dropout = m.value("dropout", c.model.dropout);
    }
    if (j.contains("training")) {
      const auto &t = j["training"];
      RejectUnknownKeys(t, {"learning_rate", "batch_size", "steps"}, "training");
      c.training.learning_rate = t.value("learning_rate", c.training.learning_rate);
      c.training.batch_size = t.value("batch_size", c.training.batch_size);
      c.training.steps = t.value("steps", c.training.steps);
    }
    if (j.contains("variants")) c.variants = ParseKinds(j["variants"], "variants");
    c.perturbation_variants = c.variants;
    if (j.contains("perturbation_variants")) {
      c.perturbation_variants = j["perturbation_variants"].empty()
                                    ? std::vector<PromptKind>{}
                                    : ParseKinds(j["perturbation_variants"], "perturbation_variants");
    }
    c.template_id = j.value("template", c.template_id);
    if (j.contains("perturbations")) {
      c.perturbations.clear();
      for (const auto &item : j["perturbations"]) c.perturbations.push_back(ParseShift(item));
    }
    c.perturbation_sample = j.value("perturbation_sample", c.perturbation_sample);
    c.beam_size = j.value("beam_size", c.beam_size);
    c.perturbation_beam_size = j.value("perturbation_beam_size", c.perturbation_beam_size);
    c.max_decode_len = j.value("max_decode_len", c.max_decode_len);
    c.significance_iterations = j.value("significance_iterations", c.significance_iterations);
    c.output_dir = ResolvePath(j.value("output_dir", std::string("out")), base_dir);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    return c;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
}

ExperimentConfig LoadExperimentConfig(const std::string &path) {
  return ParseExperimentConfig(ReadFile(path), fs::path(path).parent_path().string());
}

Vocabulary BuildExperimentVocab(const std::vector<CorpusRecord> &train,
                                const std::vector<CorpusRecord> &eval, int template_id,
                                const std::vector<LabeledShift> &perturbations) {
  if (train.empty()) throw InvalidArgument("training corpus is empty");
  std::vector<std::string> texts;
  texts.reserve(2 * train.size() + 64);
  int year_lo = kMaxYear, year_hi = kMinYear;
  for (const auto *records : {&train, &eval}) {
    for (const CorpusRecord &r : *records) {
      year_lo = std::min(year_lo, r.timestamp.year);
      year_hi = std::max(year_hi, r.timestamp.year);
    }
  }
  for (const CorpusRecord &r : train) {
    texts.push_back(r.source);
    texts.push_back(r.target);
  }
  int widen = 1;
  for (const LabeledShift &s : perturbations) {
    widen = std::max(widen, std::abs(s.shift.years) + std::abs(s.shift.months) / 12 +
                                std::abs(s.shift.days) / 365 + 1);
  }
  std::string extra;
  for (const std::string &t : TextualPromptTokens(train.front().timestamp, template_id)) {
    extra += t + " ";
  }
  for (int m = 1; m <= 12; ++m) extra += std::string(MonthName(m)) + " ";
  for (int d = 1; d <= 31; ++d) extra += std::to_string(d) + " ";
  for (int y = std::max(kMinYear, year_lo - widen); y <= std::min(kMaxYear, year_hi + widen); ++y) {
    extra += std::to_string(y) + " ";
  }
  texts.push_back(extra);
  return Vocabulary::Build(texts, 1);
}

std::vector<TimedSample> EncodeCorpus(const std::vector<CorpusRecord> &records,
                                      const Vocabulary &vocab) {
  std::vector<TimedSample> out;
  out.reserve(records.size());
  for (const CorpusRecord &r : records) {
    out.push_back({vocab.Encode(r.source), vocab.Encode(r.target), r.timestamp});
  }
  return out;
}

Model TrainVariant(const ExperimentConfig &config, PromptKind kind, const Vocabulary &vocab,
                   const std::vector<CorpusRecord> &train, std::vector<double> *losses) {
  Model model;
  model.config = config.model;
  model.config.vocab_size = vocab.size();
  model.config.seed = DeriveSeed(config.seed, "init");
  model.variant = PromptVariant{kind, config.template_id};
  model.vocab = vocab;
  TrainHyper hyper = config.training;
  hyper.seed = DeriveSeed(config.seed, "train");
  try {
    TrainResult result = Train(model.config, model.variant, vocab, EncodeCorpus(train, vocab), hyper);
    model.params = std::move(result.params);
    if (losses) *losses = std::move(result.losses);
  } catch (const Error &e) {
    throw Error(e.code(), "variant " + std::string(PromptKindName(kind)) + ": " + e.what());
  }
  return model;
}

std::vector<std::string> DecodeCorpus(const Model &model, const std::vector<CorpusRecord> &records,
                                      int beam_size, int max_len) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const CorpusRecord &r : records) {
    out.push_back(Generate(model, r.source, r.timestamp, beam_size, max_len));
  }
  return out;
}

MetricScores ScoreOutputs(const std::vector<std::string> &hypotheses,
                          const std::vector<std::string> &references) {
  if (hypotheses.size() != references.size()) {
    throw InvalidArgument("hypothesis and reference counts differ: " +
                          std::to_string(hypotheses.size()) + " vs " +
                          std::to_string(references.size()));
  }
  const std::vector<Tokens> hyp = Tokenize(hypotheses), ref = Tokenize(references);
  MetricScores s;
  if (hyp.empty()) return s;
  s.bleu4 = Bleu4Corpus(hyp, ref);
  s.ter = TerCorpus(hyp, ref);
  s.rouge1 = RougeReport(hyp, ref, 1).value;
  s.rouge2 = RougeReport(hyp, ref, 2).value;
  ScoreReport rl = RougeLReport(hyp, ref);
  s.rouge_l = rl.value;
  s.rouge_l_per_sample = std::move(rl.per_sample);
  ScoreReport em = ExactMatchReport(hyp, ref);
  s.exact_match = em.value;
  s.exact_match_per_sample = std::move(em.per_sample);
  return s;
}

std::string MetricScoresToJson(const MetricScores &s, bool per_sample) {
  Json j;
  j["bleu4"] = s.bleu4;
  j["ter"] = s.ter;
  j["rouge1"] = s.rouge1;
  j["rouge2"] = s.rouge2;
  j["rouge_l"] = s.rouge_l;
  j["exact_match"] = s.exact_match;
  if (per_sample) {
    j["rouge_l_per_sample"] = s.rouge_l_per_sample;
    j["exact_match_per_sample"] = s.exact_match_per_sample;
  }
  return j.dump(1) + "\n";
}

std::vector<int64_t> SampleIndices(int64_t size, int64_t n, uint64_t seed) {
  if (size < 0 || n < 0) throw InvalidArgument("sample sizes must be >= 0");
  std::vector<int64_t> all(static_cast<size_t>(size));
  for (int64_t i = 0; i < size; ++i) all[i] = i;
  if (n >= size) return all;
  Rng rng(seed);
  // Partial Fisher-Yates.
  for (int64_t i = 0; i < n; ++i) {
    const int64_t j = rng.UniformInt(i, size - 1);
    std::swap(all[i], all[j]);
  }
  all.resize(static_cast<size_t>(n));
  std::sort(all.begin(), all.end());
  return all;
}

PerturbationReport PerturbationAnalysis(const Model &model, const std::vector<CorpusRecord> &records,
                                        const std::vector<int64_t> &sample_indices,
                                        const std::vector<LabeledShift> &perturbations,
                                        int beam_size, int max_len,
                                        std::optional<SynthKind> task) {
  PerturbationReport report;
  report.sample_indices = sample_indices;
  std::vector<const CorpusRecord *> sample;
  for (int64_t i : sample_indices) {
    if (i < 0 || i >= static_cast<int64_t>(records.size())) {
      throw InvalidArgument("perturbation sample index out of range");
    }
    sample.push_back(&records[i]);
  }
  std::vector<Tokens> refs;
  for (const CorpusRecord *r : sample) refs.push_back(SplitWhitespace(r->target));

  std::vector<LabeledShift> shifts{{kOrigLabel, DateShift{}}};
  shifts.insert(shifts.end(), perturbations.begin(), perturbations.end());

  std::vector<bool> confident(sample.size(), false);
  std::vector<Tokens> orig_tokens;
  double orig_bleu = 0.0, orig_rouge_l = 0.0, orig_rouge2 = 0.0;
  for (const LabeledShift &ls : shifts) {
    PerturbationRow row;
    row.label = ls.label;
    row.shift = ls.shift;
    std::vector<Tokens> hyp;
    std::vector<double> rouge_l, rouge2;
    int64_t agree = 0;
    for (size_t i = 0; i < sample.size(); ++i) {
      const CalendarDate t = ShiftDate(sample[i]->timestamp, ls.shift);
      std::string out = Generate(model, sample[i]->source, t, beam_size, max_len);
      hyp.push_back(SplitWhitespace(out));
      rouge_l.push_back(RougeL(hyp.back(), refs[i]));
      rouge2.push_back(RougeN(hyp.back(), refs[i], 2));
      if (task) {
        const std::optional<std::string> expected = SynthTarget(*task, sample[i]->source, t);
        const bool correct = expected && SplitWhitespace(*expected) == hyp.back();
        if (row.label == kOrigLabel) confident[i] = correct;
        if (confident[i]) {
          ++row.confident;
          agree += correct;
        }
      }
      row.outputs.push_back(std::move(out));
    }
    const double bleu = hyp.empty() ? 0.0 : Bleu4Corpus(hyp, refs);
    if (row.label == kOrigLabel) {
      orig_tokens = hyp;
      orig_bleu = bleu;
      orig_rouge_l = Mean(rouge_l);
      orig_rouge2 = Mean(rouge2);
    }
    double distance_total = 0.0;
    for (size_t i = 0; i < hyp.size(); ++i) {
      row.edit_distances.push_back(TokenEditDistance(hyp[i], orig_tokens[i]));
      distance_total += static_cast<double>(row.edit_distances.back());
    }
    row.mean_edit_distance = hyp.empty() ? 0.0 : distance_total / hyp.size();
    row.delta_bleu4 = bleu - orig_bleu;
    row.delta_rouge_l = Mean(rouge_l) - orig_rouge_l;
    row.delta_rouge2 = Mean(rouge2) - orig_rouge2;
    if (row.confident > 0) row.shifted_agreement = static_cast<double>(agree) / row.confident;
    report.rows.push_back(std::move(row));
  }
  return report;
}

ExperimentResults RunVariantMatrix(const ExperimentConfig &config, MatrixArtifacts *artifacts,
                                   const LogFn &log) {
  config.Validate();
  auto say = [&](const std::string &msg) {
    if (log) log(msg);
  };
  const std::vector<CorpusRecord> train = ReadCorpus(config.train_path);
  const std::vector<CorpusRecord> eval = ReadCorpus(config.eval_path);
  if (eval.empty()) throw InvalidArgument("evaluation corpus is empty");
  const Vocabulary vocab =
      BuildExperimentVocab(train, eval, config.template_id, config.perturbations);

  ExperimentResults results;
  results.seed = config.seed;
  results.task = config.task;
  results.train_size = static_cast<int64_t>(train.size());
  results.eval_size = static_cast<int64_t>(eval.size());
  results.vocab_size = vocab.size();
  for (const CorpusRecord &r : eval) results.eval_ids.push_back(r.id);

  const int64_t n_perturb = config.perturbation_sample < 0
                                ? std::min<int64_t>(2000, results.eval_size)
                                : config.perturbation_sample;
  if (n_perturb > results.eval_size) {
    throw InvalidArgument("perturbation_sample exceeds the evaluation corpus size");
  }
  const std::vector<int64_t> perturb_indices =
      SampleIndices(results.eval_size, n_perturb, DeriveSeed(config.seed, "perturb/sample"));
  const int perturb_beam =
      config.perturbation_beam_size > 0 ? config.perturbation_beam_size : config.beam_size;

  std::vector<std::string> references;
  for (const CorpusRecord &r : eval) references.push_back(r.target);

  const size_t n = config.variants.size();
  std::vector<VariantResult> variant_results(n);
  std::vector<Model> models(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        const PromptKind kind = config.variants[i];
        VariantResult &vr = variant_results[i];
        vr.kind = kind;
        say("training " + std::string(PromptKindName(kind)));
        models[i] = TrainVariant(config, kind, vocab, train, &vr.losses);
        say("decoding " + std::string(PromptKindName(kind)));
        vr.outputs = DecodeCorpus(models[i], eval, config.beam_size, config.max_decode_len);
        vr.scores = ScoreOutputs(vr.outputs, references);
        if (std::find(config.perturbation_variants.begin(), config.perturbation_variants.end(),
                      kind) != config.perturbation_variants.end()) {
          say("perturbing " + std::string(PromptKindName(kind)));
          vr.perturbation = PerturbationAnalysis(models[i], eval, perturb_indices,
                                                 config.perturbations, perturb_beam,
                                                 config.max_decode_len, config.task);
        }
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(config.threads, static_cast<int>(n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread &t : pool) t.join();
  }
  for (const std::exception_ptr &f : failures) {
    if (f) std::rethrow_exception(f);
  }

  const auto none = std::find(config.variants.begin(), config.variants.end(), PromptKind::kNone);
  if (none != config.variants.end()) {
    const VariantResult &base = variant_results[none - config.variants.begin()];
    for (VariantResult &vr : variant_results) {
      if (vr.kind == PromptKind::kNone) continue;
      vr.p_rouge_l = ApproxRandomizationTest(
          vr.scores.rouge_l_per_sample, base.scores.rouge_l_per_sample,
          config.significance_iterations,
          DeriveSeed(config.seed, VariantSeedLabel("significance/rouge_l", vr.kind)));
      if (config.task) {
        vr.p_exact_match = ApproxRandomizationTest(
            vr.scores.exact_match_per_sample, base.scores.exact_match_per_sample,
            config.significance_iterations,
            DeriveSeed(config.seed, VariantSeedLabel("significance/exact_match", vr.kind)));
      }
    }
  }
  results.variants = std::move(variant_results);
  if (artifacts) {
    artifacts->vocab = vocab;
    artifacts->models = std::move(models);
  }
  return results;
}

namespace {

Json ShiftToJson(const DateShift &s) { return {{"years", s.years}, {"months", s.months}, {"days", s.days}}; }

DateShift ShiftFromJson(const nlohmann::json &j) {
  return {j.at("years").get<int>(), j.at("months").get<int>(), j.at("days").get<int>()};
}

template <typename T>
Json Optional(const std::optional<T> &v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> OptionalFrom(const nlohmann::json &j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

}  // namespace

std::string ResultsToJson(const ExperimentResults &r) {
  Json j;
  j["format_version"] = kExperimentFormatVersion;
  j["seed"] = r.seed;
  j["task"] = r.task ? Json(std::string(SynthKindName(*r.task))) : Json(nullptr);
  j["train_size"] = r.train_size;
  j["eval_size"] = r.eval_size;
  j["vocab_size"] = r.vocab_size;
  j["eval_ids"] = r.eval_ids;
  Json variants = Json::array();
  for (const VariantResult &v : r.variants) {
    Json jv;
    jv["variant"] = std::string(PromptKindName(v.kind));
    jv["scores"] = Json::parse(MetricScoresToJson(v.scores, true));
    jv["p_rouge_l"] = Optional(v.p_rouge_l);
    jv["p_exact_match"] = Optional(v.p_exact_match);
    jv["outputs"] = v.outputs;
    jv["losses"] = v.losses;
    if (v.perturbation) {
      Json jp;
      jp["sample_indices"] = v.perturbation->sample_indices;
      Json rows = Json::array();
      for (const PerturbationRow &row : v.perturbation->rows) {
        Json jr;
        jr["label"] = row.label;
        jr["shift"] = ShiftToJson(row.shift);
        jr["mean_edit_distance"] = row.mean_edit_distance;
        jr["delta_bleu4"] = row.delta_bleu4;
        jr["delta_rouge_l"] = row.delta_rouge_l;
        jr["delta_rouge2"] = row.delta_rouge2;
        jr["shifted_agreement"] = Optional(row.shifted_agreement);
        jr["confident"] = row.confident;
        jr["outputs"] = row.outputs;
        jr["edit_distances"] = row.edit_distances;
        rows.push_back(std::move(jr));
      }
      jp["rows"] = std::move(rows);
      jv["perturbation"] = std::move(jp);
    } else {
      jv["perturbation"] = nullptr;
    }
    variants.push_back(std::move(jv));
  }
  j["variants"] = std::move(variants);
  return j.dump(1) + "\n";
}

ExperimentResults ResultsFromJson(const std::string &text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != kExperimentFormatVersion) {
      throw ParseError("unsupported summary format_version");
    }
    ExperimentResults r;
    r.seed = j.at("seed").get<uint64_t>();
    if (!j.at("task").is_null()) r.task = ParseSynthKind(j["task"].get<std::string>());
    r.train_size = j.at("train_size").get<int64_t>();
    r.eval_size = j.at("eval_size").get<int64_t>();
    r.vocab_size = j.at("vocab_size").get<int>();
    r.eval_ids = j.at("eval_ids").get<std::vector<std::string>>();
    for (const auto &jv : j.at("variants")) {
      VariantResult v;
      v.kind = ParsePromptKind(jv.at("variant").get<std::string>());
      const auto &s = jv.at("scores");
      v.scores.bleu4 = s.at("bleu4").get<double>();
      v.scores.ter = s.at("ter").get<double>();
      v.scores.rouge1 = s.at("rouge1").get<double>();
      v.scores.rouge2 = s.at("rouge2").get<double>();
      v.scores.rouge_l = s.at("rouge_l").get<double>();
      v.scores.exact_match = s.at("exact_match").get<double>();
      v.scores.rouge_l_per_sample = s.at("rouge_l_per_sample").get<std::vector<double>>();
      v.scores.exact_match_per_sample = s.at("exact_match_per_sample").get<std::vector<double>>();
      v.p_rouge_l = OptionalFrom<double>(jv.at("p_rouge_l"));
      v.p_exact_match = OptionalFrom<double>(jv.at("p_exact_match"));
      v.outputs = jv.at("outputs").get<std::vector<std::string>>();
      v.losses = jv.at("losses").get<std::vector<double>>();
      if (!jv.at("perturbation").is_null()) {
        const auto &jp = jv["perturbation"];
        PerturbationReport p;
        p.sample_indices = jp.at("sample_indices").get<std::vector<int64_t>>();
        for (const auto &jr : jp.at("rows")) {
          PerturbationRow row;
          row.label = jr.at("label").get<std::string>();
          row.shift = ShiftFromJson(jr.at("shift"));
          row.mean_edit_distance = jr.at("mean_edit_distance").get<double>();
          row.delta_bleu4 = jr.at("delta_bleu4").get<double>();
          row.delta_rouge_l = jr.at("delta_rouge_l").get<double>();
          row.delta_rouge2 = jr.at("delta_rouge2").get<double>();
          row.shifted_agreement = OptionalFrom<double>(jr.at("shifted_agreement"));
          row.confident = jr.at("confident").get<int64_t>();
          row.outputs = jr.at("outputs").get<std::vector<std::string>>();
          row.edit_distances = jr.at("edit_distances").get<std::vector<int64_t>>();
          p.rows.push_back(std::move(row));
        }
        v.perturbation = std::move(p);
      }
      r.variants.push_back(std::move(v));
    }
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("summary: ") + e.what());
  }
}

std::string FormatResultsTable(const ExperimentResults &r) {
  std::ostringstream out;
  char buf[256];
  out << "Prompt    B-4      TER      R-1      R-2      R-L      EM\n";
  bool any_p = false;
  for (const VariantResult &v : r.variants) {
    auto star = [&](const std::optional<double> &p) {
      any_p = any_p || p.has_value();
      return p && *p < 0.001 ? "*" : " ";
    };
    std::snprintf(buf, sizeof buf, "%-6s %6.2f   %6.2f   %6.2f   %6.2f   %6.2f%s  %6.2f%s\n",
                  TableName(v.kind).c_str(), v.scores.bleu4, 100.0 * v.scores.ter,
                  100.0 * v.scores.rouge1, 100.0 * v.scores.rouge2, 100.0 * v.scores.rouge_l,
                  star(v.p_rouge_l), 100.0 * v.scores.exact_match, star(v.p_exact_match));
    out << buf;
  }
  if (any_p) out << "* significantly better or worse than - (approximate randomization, p < 0.001)\n";
  for (const VariantResult &v : r.variants) {
    if (!v.perturbation) continue;
    out << "\nPerturbation " << TableName(v.kind) << " (" << v.perturbation->sample_indices.size()
        << " samples)\n";
    out << "Shift    Dist     dB-4     dR-L     dR-2     Agree\n";
    for (const PerturbationRow &row : v.perturbation->rows) {
      std::string agree = "-";
      if (row.shifted_agreement) {
        std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *row.shifted_agreement);
        agree = buf;
      }
      std::snprintf(buf, sizeof buf, "%-6s %6.3f   %6.2f   %6.2f   %6.2f   %s\n", row.label.c_str(),
                    row.mean_edit_distance, row.delta_bleu4, 100.0 * row.delta_rouge_l,
                    100.0 * row.delta_rouge2, agree.c_str());
      out << buf;
    }
  }
  return out.str();
}

namespace {

void WriteSamplesHeader(std::ostream &tsv) {
  tsv << "variant\tperturbation\tsample\tid\toutput\tedit_distance\n";
}

void WriteSamples(std::ostream &tsv, const PerturbationReport &p, PromptKind kind,
                  const std::vector<std::string> &ids) {
  for (const PerturbationRow &row : p.rows) {
    for (size_t i = 0; i < row.outputs.size(); ++i) {
      const int64_t index = p.sample_indices[i];
      tsv << PromptKindName(kind) << '\t' << row.label << '\t' << index << '\t'
          << Tsv(ids.at(index)) << '\t' << Tsv(row.outputs[i]) << '\t'
          << row.edit_distances[i] << '\n';
    }
  }
}

}  // namespace

void EmitPerturbationReport(const PerturbationReport &report, PromptKind kind,
                            const std::vector<std::string> &ids, const std::string &output_dir) {
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create " + output_dir + ": " + ec.message());
  ExperimentResults wrapper;
  wrapper.eval_ids = ids;
  VariantResult v;
  v.kind = kind;
  v.perturbation = report;
  wrapper.variants.push_back(std::move(v));
  const Json full = Json::parse(ResultsToJson(wrapper));
  Json j;
  j["format_version"] = kExperimentFormatVersion;
  j["variant"] = std::string(PromptKindName(kind));
  j["perturbation"] = full["variants"][0]["perturbation"];
  WriteFile((fs::path(output_dir) / "perturbation.json").string(), j.dump(1) + "\n");
  const std::string table = FormatResultsTable(wrapper);
  WriteFile((fs::path(output_dir) / "table.txt").string(), table.substr(table.find("Perturbation ")));
  std::ostringstream tsv;
  WriteSamplesHeader(tsv);
  WriteSamples(tsv, report, kind, ids);
  WriteFile((fs::path(output_dir) / "samples.tsv").string(), tsv.str());
}

void EmitReport(const ExperimentResults &r, const std::string &output_dir) {
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create " + output_dir + ": " + ec.message());
  WriteFile((fs::path(output_dir) / "summary.json").string(), ResultsToJson(r));
  WriteFile((fs::path(output_dir) / "table.txt").string(), FormatResultsTable(r));

  std::ostringstream tsv;
  WriteSamplesHeader(tsv);
  for (const VariantResult &v : r.variants) {
    if (v.perturbation) WriteSamples(tsv, *v.perturbation, v.kind, r.eval_ids);
  }
  WriteFile((fs::path(output_dir) / "samples.tsv").string(), tsv.str());
}

ExperimentResults RunExperiment(const ExperimentConfig &config, const LogFn &log) {
  MatrixArtifacts artifacts;
  ExperimentResults results = RunVariantMatrix(config, &artifacts, log);
  const fs::path dir(config.output_dir);
  EmitReport(results, dir.string());
  artifacts.vocab.Save((dir / "vocab.tsv").string());
  fs::create_directories(dir / "checkpoints");
  fs::create_directories(dir / "losses");
  for (size_t i = 0; i < results.variants.size(); ++i) {
    const std::string name(PromptKindName(results.variants[i].kind));
    SaveCheckpoint(artifacts.models[i], (dir / "checkpoints" / (name + ".tapm")).string(),
                   "../vocab.tsv");
    std::ostringstream losses;
    losses << "step\tloss\n";
    char buf[64];
    for (size_t s = 0; s < results.variants[i].losses.size(); ++s) {
      std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", s, results.variants[i].losses[s]);
      losses << buf;
    }
    WriteFile((dir / "losses" / (name + ".tsv")).string(), losses.str());
  }
  return results;
}

}  // namespace tap
