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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers as arguments to run a
// subset, e.g. `acceptance_test 2 3 4`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "oracles.h"
#include "tap/corpus.h"
#include "tap/error.h"
#include "tap/harness.h"
#include "tap/metrics.h"
#include "tap/model.h"
#include "tap/prompts.h"
#include "tap/random.h"
#include "tap/records.h"
#include "tap/synthtask.h"
#include "tap/tap.h"
#include "tap/temporal.h"

namespace tap {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Collects failed checks for one criterion.
class Checker {
 public:
  void Expect(bool ok, const std::string &what) {
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  const std::vector<std::string> &failures() const { return failures_; }
  std::string detail;

 private:
  std::vector<std::string> failures_;
};

std::string Fmt(const char *format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

fs::path WorkDir(const std::string &name) {
  const char *tmp = std::getenv("TMPDIR");
  const fs::path dir = fs::path(tmp && *tmp ? tmp : "/tmp") / ("tap_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ModelConfig ReferenceModel() {
  ModelConfig c;  // d_model 64, 4 heads, 2+2 layers, d_ff 128, dropout 0.1, max_len 64
  return c;
}

// ---- 1: gradient fidelity ----

void GradientFidelity(Checker &check) {
  const auto start = Clock::now();
  SynthSpec spec;
  spec.count = 4;
  spec.seed = 3;
  const std::vector<CorpusRecord> records = GenerateMonthResolution(spec);
  const Vocabulary vocab =
      BuildExperimentVocab(records, {}, kDefaultTemplateId, StandardPerturbations());
  ModelConfig config = ReferenceModel();
  config.vocab_size = vocab.size();
  config.dropout = 0.0;
  config.seed = 1;
  const std::vector<TimedSample> samples = EncodeCorpus(records, vocab);
  std::ostringstream detail;
  for (PromptKind kind : AllPromptKinds()) {
    const PromptVariant variant{kind, kDefaultTemplateId};
    const ModelParameters params = InitParameters(config, variant);
    std::vector<AssembledInputs> batch;
    for (const TimedSample &s : samples) {
      batch.push_back(AssembleInputs(s, variant, vocab, params, config));
    }
    GradCheckOptions options;
    options.epsilon = 1e-4;
    options.coordinates = 256;
    options.seed = 7;
    const GradCheckResult r = GradCheck(params, config, batch, options);
    const std::string name(PromptKindName(kind));
    check.Expect(r.max_relative_error < 1e-4,
                 name + " max relative error " + Fmt("%.3g", r.max_relative_error) + " at " +
                     r.worst_parameter);
    check.Expect(r.checked >= 200, name + " checked fewer than 200 coordinates");
    detail << name << "=" << Fmt("%.2g", r.max_relative_error) << " ";
  }
  const double elapsed = Seconds(start);
  check.Expect(elapsed < 60.0, "runtime " + Fmt("%.1f", elapsed) + " s");
  detail << "in " << Fmt("%.1f", elapsed) << " s";
  check.detail = detail.str();
}

// ---- 2: metric oracles ----

// Integer-valued metrics must agree exactly. BLEU is a geometric mean that the
// library computes in log space and the oracle as a product, so those two
// agree up to rounding only.
bool SameReal(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)); }

void MetricOracles(Checker &check) {
  Rng rng(2024);
  int ter_gap = 0;
  const int pairs = 200;
  std::vector<Tokens> hyps, refs;
  for (int k = 0; k < pairs; ++k) {
    auto seq = [&](int min_len) {
      Tokens s;
      const int len = static_cast<int>(rng.UniformInt(min_len, 8));
      for (int i = 0; i < len; ++i) s.push_back(std::string(1, 'a' + rng.UniformInt(0, 3)));
      return s;
    };
    const Tokens hyp = seq(0), ref = seq(1);
    hyps.push_back(hyp);
    refs.push_back(ref);
    const std::string at = " on pair " + std::to_string(k);
    check.Expect(SameReal(Bleu4Corpus({hyp}, {ref}), oracle::Bleu4({hyp}, {ref})), "BLEU-4" + at);
    for (int n : {1, 2}) {
      check.Expect(RougeN(hyp, ref, n) == oracle::RougeN(hyp, ref, n),
                   "ROUGE-" + std::to_string(n) + at);
    }
    check.Expect(RougeL(hyp, ref) == oracle::RougeL(hyp, ref), "ROUGE-L" + at);
    check.Expect(TokenEditDistance(hyp, ref) == oracle::EditDistance(hyp, ref),
                 "edit distance" + at);
    const int64_t ter = TerEdits(hyp, ref);
    const int optimal = oracle::OptimalTerEdits(hyp, ref);
    check.Expect(ter == oracle::GreedyTerEdits(hyp, ref), "TER shift search" + at);
    check.Expect(ter >= optimal, "TER below the exhaustive optimum" + at);
    check.Expect(ter <= oracle::EditDistance(hyp, ref), "TER above edit distance" + at);
    check.Expect(Ter(hyp, ref) == static_cast<double>(oracle::GreedyTerEdits(hyp, ref)) / ref.size(),
                 "TER rate" + at);
    ter_gap += ter != optimal;
  }
  check.Expect(SameReal(Bleu4Corpus(hyps, refs), oracle::Bleu4(hyps, refs)), "corpus BLEU-4");
  check.detail = std::to_string(pairs) + " pairs; greedy TER above exhaustive optimum on " +
                 std::to_string(ter_gap);
}

// ---- 3 and 4: prompts and date arithmetic ----

void PromptFormatting(Checker &check) {
  const CalendarDate d{2015, 1, 18};
  const std::vector<std::string> expected = {"Date: 18 January 2015.",
                                             "Today is 18 January 2015.",
                                             "The following text is written on 18 January 2015."};
  for (int t = 1; t <= 3; ++t) {
    const std::string got = RenderTextualPrompt(d, t);
    check.Expect(got == expected[t - 1], "template " + std::to_string(t) + " gave \"" + got + "\"");
  }
  char *c_text = nullptr;
  check.Expect(tap_prompt_render({2015, 1, 18}, 2, &c_text) == TAP_OK &&
                   std::string(c_text) == expected[1],
               "C API rendering");
  tap_string_free(c_text);
  check.detail = "\"" + RenderTextualPrompt(d, 2) + "\"";
}

void DateAnchors(Checker &check) {
  auto expect = [&](CalendarDate from, DateShift s, CalendarDate to) {
    const CalendarDate got = ShiftDate(from, s);
    check.Expect(got == to, FormatIsoDate(from) + " shifted gave " + FormatIsoDate(got) +
                                ", expected " + FormatIsoDate(to));
  };
  expect({2017, 2, 9}, {0, 6, 0}, {2017, 8, 9});
  expect({2017, 2, 9}, {0, 1, 0}, {2017, 3, 9});
  expect({2017, 8, 9}, {0, -6, 0}, {2017, 2, 9});
  expect({2016, 2, 29}, {1, 0, 0}, {2017, 2, 28});
  expect({2016, 2, 29}, {-4, 0, 0}, {2012, 2, 29});
  expect({2017, 1, 31}, {0, 1, 0}, {2017, 2, 28});
  expect({2016, 1, 31}, {0, 1, 0}, {2016, 2, 29});
  expect({2016, 8, 31}, {0, 6, 0}, {2017, 2, 28});
  check.Expect(ShiftClamps({2016, 2, 29}, {1, 0, 0}), "clamp flag for 2016-02-29 + 1y");
  check.Expect(!ShiftClamps({2017, 2, 9}, {0, 6, 0}), "no clamp flag for 2017-02-09 + 6m");
  check.detail = "2017-02-09 +6m -> " + FormatIsoDate(ShiftDate({2017, 2, 9}, {0, 6, 0})) +
                 ", +1m -> " + FormatIsoDate(ShiftDate({2017, 2, 9}, {0, 1, 0})) +
                 ", 2016-02-29 +1y -> " + FormatIsoDate(ShiftDate({2016, 2, 29}, {1, 0, 0}));
}

// ---- 5 and 6: separation and sensitivity on the month task ----

struct SeparationRun {
  uint64_t seed;
  double seconds;
  ExperimentResults results;
};

std::vector<SeparationRun> *g_separation = nullptr;

const VariantResult &Find(const ExperimentResults &r, PromptKind kind) {
  for (const VariantResult &v : r.variants) {
    if (v.kind == kind) return v;
  }
  throw Error(ErrorCode::kRuntime, "variant missing from results");
}

const std::vector<uint64_t> kSeparationSeeds = {1, 2, 3, 4, 5};

std::vector<SeparationRun> &SeparationRuns() {
  if (g_separation) return *g_separation;
  g_separation = new std::vector<SeparationRun>();
  for (uint64_t seed : kSeparationSeeds) {
    const fs::path dir = WorkDir("separation_" + std::to_string(seed));
    SynthSpec spec;
    spec.count = 5000;
    spec.seed = DeriveSeed(seed, "data/train");
    WriteCorpus((dir / "train.jsonl").string(), GenerateMonthResolution(spec));
    spec.count = 1000;
    spec.seed = DeriveSeed(seed, "data/test");
    WriteCorpus((dir / "test.jsonl").string(), GenerateMonthResolution(spec));

    ExperimentConfig config;
    config.train_path = (dir / "train.jsonl").string();
    config.eval_path = (dir / "test.jsonl").string();
    config.task = SynthKind::kMonthResolution;
    config.model = ReferenceModel();
    config.training = {1e-3, 32, 1000, 0};
    config.variants = {PromptKind::kNone, PromptKind::kEncText, PromptKind::kEncLinear};
    config.perturbation_variants = {PromptKind::kNone, PromptKind::kEncText};
    config.max_decode_len = 8;
    config.output_dir = (dir / "out").string();
    config.seed = seed;
    const auto start = Clock::now();
    ExperimentResults results = RunVariantMatrix(config);
    g_separation->push_back({seed, Seconds(start), std::move(results)});
    std::fprintf(stderr, "  separation seed %llu done in %.0f s\n",
                 static_cast<unsigned long long>(seed), g_separation->back().seconds);
  }
  return *g_separation;
}

void Separation(Checker &check) {
  SynthSpec spec;
  const double bayes = BayesBlindAccuracy(spec);
  check.Expect(bayes <= 0.20, "blind Bayes bound " + Fmt("%.4f", bayes));
  std::ostringstream detail;
  detail << "Bayes blind bound " << Fmt("%.4f", bayes) << ";";
  for (const SeparationRun &run : SeparationRuns()) {
    const std::string at = " (seed " + std::to_string(run.seed) + ")";
    const double none = Find(run.results, PromptKind::kNone).scores.exact_match;
    const double text = Find(run.results, PromptKind::kEncText).scores.exact_match;
    const double linear = Find(run.results, PromptKind::kEncLinear).scores.exact_match;
    check.Expect(text >= 0.90, "ENC_TEXT exact match " + Fmt("%.3f", text) + at);
    check.Expect(linear >= 0.90, "ENC_LINEAR exact match " + Fmt("%.3f", linear) + at);
    check.Expect(none <= 0.20, "NONE exact match " + Fmt("%.3f", none) + at);
    check.Expect(run.seconds <= 15 * 60, "runtime " + Fmt("%.0f", run.seconds) + " s" + at);
    detail << " seed " << run.seed << ": T=" << Fmt("%.3f", text) << " L=" << Fmt("%.3f", linear)
           << " -=" << Fmt("%.3f", none) << " (" << Fmt("%.0f", run.seconds) << " s)";
  }
  check.detail = detail.str();
}

void Sensitivity(Checker &check) {
  std::ostringstream detail;
  for (const SeparationRun &run : SeparationRuns()) {
    const std::string at = " (seed " + std::to_string(run.seed) + ")";
    const PerturbationReport &text = *Find(run.results, PromptKind::kEncText).perturbation;
    const PerturbationReport &none = *Find(run.results, PromptKind::kNone).perturbation;
    for (const PerturbationRow &row : text.rows) {
      if (row.label != "m+6" && row.label != "m-6") continue;
      check.Expect(row.mean_edit_distance > 0.0, "ENC_TEXT " + row.label + " distance 0" + at);
      const double agree = row.shifted_agreement.value_or(0.0);
      check.Expect(agree >= 0.90, "ENC_TEXT " + row.label + " agreement " + Fmt("%.3f", agree) + at);
      if (run.seed == kSeparationSeeds.front()) {
        detail << "ENC_TEXT " << row.label << " dist " << Fmt("%.3f", row.mean_edit_distance)
               << " agree " << Fmt("%.3f", agree) << "; ";
      }
    }
    for (const PerturbationRow &row : none.rows) {
      for (int64_t d : row.edit_distances) {
        if (d != 0) {
          check.Expect(false, "NONE " + row.label + " nonzero distance" + at);
          break;
        }
      }
    }
  }
  detail << "NONE distance 0 under all perturbations on " << kSeparationSeeds.size() << " seeds";
  check.detail = detail.str();
}

// ---- 7: corpus invariants ----

std::string FixturePage(int subject, int revision, bool infobox) {
  const std::string name = "Person " + std::to_string(subject);
  std::string page = "{{Short description|Fixture biography}}\n";
  if (infobox) {
    page += "{{Infobox person\n| name = [[" + name + "]]\n| revision = " +
            std::to_string(revision) + "<ref>r</ref>\n| known_for = {{nowrap|Item " +
            std::to_string(subject % 7) + "}}\n}}\n";
  }
  page += "'''" + name + "''' is a fixture subject, revision " + std::to_string(revision) + ".";
  return page;
}

// 50 subjects: some too short to survive the discard, a block created after
// the cutoff, and scattered revisions without an infobox or on the same day.
void WriteCorpusFixture(const fs::path &dir) {
  Rng rng(50);
  for (int s = 0; s < 50; ++s) {
    const int start_year = s < 20 ? static_cast<int>(rng.UniformInt(2019, 2020))
                                  : static_cast<int>(rng.UniformInt(2004, 2017));
    const int revisions = s % 10 == 3 ? static_cast<int>(rng.UniformInt(1, 5))
                                      : static_cast<int>(rng.UniformInt(8, 40));
    int64_t day = DaysFromCivil({start_year, 1, 1}) + rng.UniformInt(0, 200);
    std::ofstream out(dir / ("subject" + std::to_string(100 + s) + ".jsonl"));
    for (int r = 0; r < revisions; ++r) {
      const bool infobox = rng.UniformInt(0, 9) != 0;
      out << nlohmann::json{{"timestamp", FormatIsoDate(CivilFromDays(day))},
                            {"wikitext", FixturePage(s, r, infobox)}}
                 .dump()
          << "\n";
      if (rng.UniformInt(0, 14) == 0) {
        out << nlohmann::json{{"timestamp", FormatIsoDate(CivilFromDays(day))},
                              {"wikitext", FixturePage(s, r + 1000, true)}}
                   .dump()
            << "\n";
      }
      day += rng.UniformInt(1, 160);
    }
  }
}

std::vector<size_t> OracleWindows(const std::vector<int64_t> &days, size_t skip,
                                  const std::vector<int> &draws) {
  std::vector<size_t> out;
  if (days.size() <= skip) return out;
  out.push_back(skip);
  int64_t t = days[skip];
  size_t used = 0;
  while (t < days.back()) {
    const int64_t end = t + draws.at(used++);
    for (size_t i = days.size(); i-- > skip + 1;) {
      if (days[i] > t && days[i] <= end) {
        out.push_back(i);
        break;
      }
    }
    t = end;
  }
  return out;
}

void CorpusInvariants(Checker &check) {
  const fs::path in = WorkDir("corpus_in"), out = WorkDir("corpus_out");
  WriteCorpusFixture(in);
  CorpusBuildOptions options;
  options.input_dir = in.string();
  options.output_dir = out.string();
  options.seed = 11;
  const CorpusBuildStats stats = BuildCorpus(options);
  check.Expect(stats.subjects == 50, "fixture subject count");
  const SplitManifest m = ManifestFromJson(ReadFile((out / "manifest.json").string()));

  // Sampled revisions per subject, from the written split files.
  std::map<std::string, std::set<CalendarDate>> written;
  for (const char *split : {"train", "dev", "test_same_time", "test_future"}) {
    for (const CorpusRecord &r : ReadCorpus((out / (std::string(split) + ".jsonl")).string())) {
      written[r.id.substr(0, r.id.find('@'))].insert(r.timestamp);
    }
  }

  // Discard rule and window sampling against the oracle, fed with the
  // per-subject interval stream. The split stage is then replayed on the
  // oracle timelines and must reproduce the manifest.
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(in)) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<SubjectTimeline> timelines;
  int short_subjects = 0;
  for (const fs::path &file : files) {
    const std::string subject = file.stem().string();
    const std::vector<RevisionRecord> complete = ReadRevisionFile(file.string(), subject);
    std::vector<int64_t> days;
    for (const RevisionRecord &r : complete) days.push_back(DaysFromCivil(r.timestamp));
    Rng rng(DeriveSeed(options.seed, "corpus/sample/" + subject));
    std::vector<int> draws;
    for (int i = 0; i < 500; ++i) draws.push_back(static_cast<int>(rng.UniformInt(270, 450)));
    SubjectTimeline timeline{subject, {}};
    for (size_t i : OracleWindows(days, 5, draws)) timeline.timestamps.push_back(complete[i].timestamp);
    if (complete.size() <= 5) ++short_subjects;
    for (size_t i = 0; i < std::min<size_t>(5, complete.size()); ++i) {
      check.Expect(written[subject].count(complete[i].timestamp) == 0,
                   subject + " kept one of its first five revisions");
    }
    for (const CalendarDate &d : written[subject]) {
      check.Expect(std::count(timeline.timestamps.begin(), timeline.timestamps.end(), d) == 1,
                   subject + " wrote " + FormatIsoDate(d) + " outside the oracle sample");
    }
    timelines.push_back(std::move(timeline));
  }
  check.Expect(short_subjects > 0, "fixture has no subject shorter than the discard");
  Rng split_rng(DeriveSeed(options.seed, "corpus/splits"));
  check.Expect(BuildSplits(timelines, {}, split_rng) == m,
               "manifest differs from splits of the oracle sample");

  // Twenty constructed timelines with scripted draws.
  int scripted = 0;
  Rng gen(20);
  for (int t = 0; t < 20; ++t) {
    std::vector<int64_t> days;
    int64_t day = 0;
    const int n = t < 2 ? 4 + t : static_cast<int>(gen.UniformInt(6, 30));
    for (int i = 0; i < n; ++i) days.push_back(day += gen.UniformInt(1, 500));
    std::vector<int> draws;
    for (int i = 0; i < 200; ++i) draws.push_back(static_cast<int>(gen.UniformInt(270, 450)));
    std::vector<CalendarDate> dates;
    for (int64_t d : days) dates.push_back(CivilFromDays(DaysFromCivil({2000, 1, 1}) + d));
    size_t pos = 0;
    const std::vector<size_t> got =
        SampleRevisionIndices(dates, {}, [&] { return draws.at(pos++); });
    check.Expect(got == OracleWindows(days, 5, draws), "timeline " + std::to_string(t));
    ++scripted;
  }

  // Split invariants: this manifest and thirty more seeds.
  auto split_checks = [&](const SplitManifest &man, const std::string &at) {
    std::map<std::string, int> owner;
    const std::vector<const std::vector<SplitEntry> *> splits = {
        &man.train, &man.dev, &man.test_same_time, &man.test_future};
    for (size_t k = 0; k < splits.size(); ++k) {
      for (const SplitEntry &e : *splits[k]) {
        auto [it, fresh] = owner.emplace(e.subject_id, static_cast<int>(k));
        check.Expect(fresh || it->second == static_cast<int>(k),
                     e.subject_id + " in two splits" + at);
      }
    }
    for (const SplitEntry &e : man.test_future) {
      check.Expect(CalendarDate{2018, 12, 31} < e.timestamp, "test-future entry at cutoff" + at);
    }
    for (size_t k = 0; k < 3; ++k) {
      for (const SplitEntry &e : *splits[k]) {
        check.Expect(e.timestamp <= CalendarDate{2018, 12, 31}, "post-cutoff entry" + at);
      }
    }
    std::set<std::string> future;
    for (const SplitEntry &e : man.test_future) future.insert(e.subject_id);
    check.Expect(std::fabs(static_cast<double>(future.size()) - 0.1 * man.future_pool_subjects) <= 1.0,
                 "future downsampling " + std::to_string(future.size()) + " of " +
                     std::to_string(man.future_pool_subjects) + at);
  };
  split_checks(m, "");
  check.Expect(m.future_pool_subjects >= 10, "fixture future pool too small");
  for (uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    split_checks(BuildSplits(timelines, {}, rng), " (seed " + std::to_string(seed) + ")");
  }
  std::set<std::string> future;
  for (const SplitEntry &e : m.test_future) future.insert(e.subject_id);
  check.detail = std::to_string(stats.revisions_read) + " revisions, " +
                 std::to_string(stats.revisions_sampled) + " sampled; " +
                 std::to_string(scripted) + " scripted timelines; future " +
                 std::to_string(future.size()) + " of pool " +
                 std::to_string(m.future_pool_subjects);
}

// ---- 8: randomization test calibration ----

void RandomizationCalibration(Checker &check) {
  // Real per-sample scores from the month-task run when available, else a
  // synthetic score list.
  std::vector<double> scores;
  if (g_separation && !g_separation->empty()) {
    scores = Find(g_separation->front().results, PromptKind::kEncText).scores.rouge_l_per_sample;
  } else {
    Rng rng(8);
    for (int i = 0; i < 500; ++i) scores.push_back(rng.Uniform());
  }
  int above = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    above += ApproxRandomizationTest(scores, scores, 1000, DeriveSeed(seed, "self")) > 0.05;
  }
  check.Expect(above >= 95, "self-comparison p > 0.05 on " + std::to_string(above) + " of 100");

  // Null calibration: two systems with exchangeable scores.
  int rejected = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    Rng rng(DeriveSeed(81, static_cast<uint64_t>(t)));
    std::vector<double> a(100), b(100);
    for (int i = 0; i < 100; ++i) {
      const double base = rng.Uniform();
      a[i] = base + 0.2 * rng.Gaussian();
      b[i] = base + 0.2 * rng.Gaussian();
    }
    rejected += ApproxRandomizationTest(a, b, 500, DeriveSeed(82, static_cast<uint64_t>(t))) <= 0.05;
  }
  const double rate = static_cast<double>(rejected) / trials;
  // Binomial(1000, 0.05) has a standard deviation of 0.0069.
  check.Expect(std::fabs(rate - 0.05) <= 0.025, "null rejection rate " + Fmt("%.3f", rate));

  double worst = 0.0;
  Rng rng(83);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> a(3), b(3);
    for (int i = 0; i < 3; ++i) {
      a[i] = static_cast<double>(rng.UniformInt(0, 4)) / 4;
      b[i] = static_cast<double>(rng.UniformInt(0, 4)) / 4;
    }
    const double exact = oracle::ExhaustiveRandomizationP(a, b);
    const double mc = ApproxRandomizationTest(a, b, 100000, DeriveSeed(84, static_cast<uint64_t>(t)));
    worst = std::max(worst, std::fabs(exact - mc));
  }
  check.Expect(worst <= 0.01, "n=3 Monte Carlo deviation " + Fmt("%.4f", worst));
  check.detail = "self p > 0.05 on " + std::to_string(above) + "/100 seeds; null rejection " +
                 Fmt("%.3f", rate) + "; n=3 max deviation " + Fmt("%.4f", worst);
}

// ---- 9: end-to-end determinism ----

std::map<std::string, std::string> DirectoryContents(const fs::path &root) {
  std::map<std::string, std::string> out;
  for (const auto &e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = ReadFile(e.path().string());
  }
  return out;
}

void MatrixDeterminism(Checker &check) {
  const fs::path dir = WorkDir("matrix");
  SynthSpec spec;
  spec.count = 600;
  spec.seed = 91;
  WriteCorpus((dir / "train.jsonl").string(), GenerateMonthResolution(spec));
  spec.count = 100;
  spec.seed = 92;
  WriteCorpus((dir / "test.jsonl").string(), GenerateMonthResolution(spec));
  std::ofstream(dir / "exp.json") << R"({
  "format_version": 1,
  "train": "train.jsonl",
  "eval": "test.jsonl",
  "task": "month",
  "model": {"d_model": 32, "n_heads": 4, "d_ff": 64},
  "training": {"steps": 60, "batch_size": 16},
  "max_decode_len": 8,
  "beam_size": 2,
  "significance_iterations": 2000,
  "seed": 17
})";
  const std::string config = (dir / "exp.json").string();
  for (const char *run : {"a", "b"}) {
    const std::string out = (dir / run).string();
    tap_matrix_options options;
    tap_matrix_options_init(&options);
    options.config_path = config.c_str();
    options.output_dir = out.c_str();
    options.threads = run[0] == 'a' ? 1 : 3;
    const tap_status status = tap_matrix_run(&options);
    check.Expect(status == TAP_OK, std::string("matrix run failed: ") + tap_last_error());
  }
  const auto a = DirectoryContents(dir / "a"), b = DirectoryContents(dir / "b");
  check.Expect(!a.empty() && a.size() == b.size(), "different file sets");
  size_t bytes = 0;
  for (const auto &[name, contents] : a) {
    auto it = b.find(name);
    check.Expect(it != b.end() && it->second == contents, name + " differs");
    bytes += contents.size();
  }
  check.detail = std::to_string(a.size()) + " files, " + std::to_string(bytes) + " bytes identical";
}

struct Criterion {
  int id;
  const char *name;
  std::function<void(Checker &)> run;
};

}  // namespace
}  // namespace tap

int main(int argc, char **argv) {
  using namespace tap;
  const std::vector<Criterion> criteria = {
      {1, "gradient fidelity", GradientFidelity},
      {2, "metric oracle equivalence", MetricOracles},
      {3, "prompt formatting", PromptFormatting},
      {4, "perturbation arithmetic", DateAnchors},
      {5, "separation experiment", Separation},
      {6, "sensitivity protocol", Sensitivity},
      {7, "corpus invariants", CorpusInvariants},
      {8, "randomization test calibration", RandomizationCalibration},
      {9, "end-to-end determinism", MatrixDeterminism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const Criterion &c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Checker check;
    const auto start = Clock::now();
    try {
      c.run(check);
    } catch (const std::exception &e) {
      check.Expect(false, std::string("exception: ") + e.what());
    }
    const double elapsed = Seconds(start);
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", check.ok() ? "PASS" : "FAIL", c.id, c.name,
                check.detail.c_str(), elapsed);
    const size_t shown = std::min<size_t>(check.failures().size(), 10);
    for (size_t i = 0; i < shown; ++i) std::printf("    %s\n", check.failures()[i].c_str());
    if (check.failures().size() > shown) {
      std::printf("    ... %zu more\n", check.failures().size() - shown);
    }
    std::fflush(stdout);
    failed += !check.ok();
  }
  return failed == 0 ? 0 : 1;
}
