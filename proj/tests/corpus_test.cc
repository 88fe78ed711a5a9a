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


#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "nlohmann/json.hpp"
#include "tap/corpus.h"
#include "tap/error.h"
#include "tap/random.h"
#include "tap/records.h"
#include "tap/wikitext.h"

namespace tap {
namespace {

namespace fs = std::filesystem;

TEST(Infobox, PersonExample) {
  const auto box = ParseInfobox("{{Infobox person|name=Ada|born=[[London]]}}");
  ASSERT_TRUE(box);
  EXPECT_EQ(*box, (Infobox{{"name", "Ada"}, {"born", "London"}}));
}

TEST(Infobox, NestedTemplateUsesPositionalArgs) {
  const auto box = ParseInfobox("{{Infobox x|a={{nowrap|J. Smith}}}}");
  ASSERT_TRUE(box);
  EXPECT_EQ(*box, (Infobox{{"a", "J. Smith"}}));
}

TEST(Infobox, Absent) {
  EXPECT_FALSE(ParseInfobox("Plain text, no template."));
  EXPECT_FALSE(ParseInfobox(""));
  EXPECT_FALSE(ParseInfobox("{{Cite web|url=x}} text"));
  EXPECT_FALSE(ParseInfobox("{{Infobox person|name=Ada"));
}

TEST(Infobox, CleaningRules) {
  const auto box = ParseInfobox(
      "{{Use dmy dates}}\n{{infobox officeholder\n"
      " | name = [[Joseph Melville Broughton Jr.|J. Melville Broughton Jr.]]\n"
      " | term_start = December 31, 1948<ref name=\"a\">Cited.</ref>\n"
      " | note = <!-- hidden -->kept   text<ref>x</ref>\n"
      " | birth_date = {{birth date|1888|11|17}}\n"
      " | empty =\n"
      " | 1948\n"
      "}}\nLead.");
  ASSERT_TRUE(box);
  EXPECT_EQ(*box, (Infobox{{"name", "J. Melville Broughton Jr."},
                           {"term_start", "December 31, 1948"},
                           {"note", "kept text"},
                           {"birth_date", "1888 11 17"},
                           {"empty", ""}}));
}

TEST(Infobox, ValuesNeverHaveUnbalancedBrackets) {
  const auto box = ParseInfobox("{{Infobox x|a=[[b|c]] d|e=[[f]]|g={{h|[[i]]}}}}");
  ASSERT_TRUE(box);
  for (const Attribute &a : *box) {
    EXPECT_FALSE(a.name.empty());
    EXPECT_EQ(std::count(a.value.begin(), a.value.end(), '['),
              std::count(a.value.begin(), a.value.end(), ']'))
        << a.value;
  }
  EXPECT_EQ((*box)[2].value, "i");
}

TEST(Lead, BoldRemovedAfterInfobox) {
  EXPECT_EQ(ExtractLead("{{Infobox person|name=Ada}}\n'''Ada''' was a mathematician."),
            "Ada was a mathematician.");
}

TEST(Lead, EmptyPage) { EXPECT_EQ(ExtractLead(""), ""); }

TEST(Lead, SkipsStackedTemplates) {
  const std::string page =
      "{{Short description|English mathematician}}\n"
      "{{Infobox person\n|name=Ada\n|born=1815}}\n"
      "\n"
      "'''Augusta Ada King''', ''Countess of Lovelace'' was an [[England|English]] "
      "mathematician.<ref>Cite.</ref>\n"
      "\n"
      "Second paragraph.";
  EXPECT_EQ(ExtractLead(page),
            "Augusta Ada King, Countess of Lovelace was an English mathematician.");
  EXPECT_EQ(ExtractLead("{{a}}{{b}}\n\n\nOnly [[x|this]]."), "Only this.");
}

TEST(Linearize, FigureExample) {
  EXPECT_EQ(LinearizeInfobox({{"name", "J. Melville Broughton Jr."},
                              {"term_start", "December 31, 1948"}}),
            "name[J. Melville Broughton Jr.] term_start[December 31, 1948]");
  EXPECT_EQ(LinearizeInfobox({{"k", "v"}}), "k[v]");
  EXPECT_THROW(LinearizeInfobox({}), Error);
  EXPECT_THROW(LinearizeInfobox({{"", "v"}}), Error);
}

TEST(Linearize, Escapes) {
  EXPECT_EQ(LinearizeInfobox({{"k", "a]b"}}), "k[a\\]b]");
  EXPECT_EQ(LinearizeInfobox({{"k", "a[b\\"}}), "k[a\\[b\\\\]");
}

TEST(Linearize, RoundTrip) {
  Rng rng(7);
  const std::string alphabet = "ab []\\x";
  for (int trial = 0; trial < 300; ++trial) {
    Infobox box;
    const int n = static_cast<int>(rng.UniformInt(1, 4));
    for (int i = 0; i < n; ++i) {
      std::string name = "n" + std::to_string(i);
      std::string value;
      const int len = static_cast<int>(rng.UniformInt(0, 6));
      for (int j = 0; j < len; ++j) value += alphabet[rng.UniformInt(0, alphabet.size() - 1)];
      box.push_back({name, value});
    }
    EXPECT_EQ(ParseLinearizedInfobox(LinearizeInfobox(box)), box);
  }
}

TEST(Linearize, ParseErrors) {
  EXPECT_THROW(ParseLinearizedInfobox("k[v"), Error);
  EXPECT_THROW(ParseLinearizedInfobox("k v]"), Error);
  EXPECT_THROW(ParseLinearizedInfobox("[v]"), Error);
}

TEST(Linearize, ParsedInfoboxRoundTrips) {
  const auto box = ParseInfobox("{{Infobox x|a=[[b|c]]|d=e]f|g=h[i}}");
  ASSERT_TRUE(box);
  EXPECT_EQ(ParseLinearizedInfobox(LinearizeInfobox(*box)), *box);
}

// Dates at the given day offsets from 2000-01-01.
std::vector<CalendarDate> Offsets(const std::vector<int> &days) {
  std::vector<CalendarDate> out;
  const int64_t base = DaysFromCivil({2000, 1, 1});
  for (int d : days) out.push_back(CivilFromDays(base + d));
  return out;
}

IntervalSource Scripted(std::vector<int> draws, int *used = nullptr) {
  auto pos = std::make_shared<size_t>(0);
  return [draws, pos, used]() {
    if (used) ++*used;
    return draws.at((*pos)++);
  };
}

TEST(Sampling, FewerThanSkipGivesNothing) {
  SamplingOptions opts;
  EXPECT_TRUE(SampleRevisionIndices(Offsets({0, 1, 2, 3}), opts, Scripted({})).empty());
  EXPECT_TRUE(SampleRevisionIndices(Offsets({0, 1, 2, 3, 4}), opts, Scripted({})).empty());
  EXPECT_EQ(SampleRevisionIndices(Offsets({0, 1, 2, 3, 4, 5}), opts, Scripted({})),
            std::vector<size_t>{5});
}

TEST(Sampling, WorkedExample) {
  SamplingOptions opts;
  opts.skip_first = 0;
  int used = 0;
  const auto picked = SampleRevisionIndices(Offsets({0, 50, 400, 700, 1100}), opts,
                                            Scripted({300, 300, 400, 400, 999}, &used));
  EXPECT_EQ(picked, (std::vector<size_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(used, 4);
}

TEST(Sampling, EmptyWindowsStillAdvance) {
  SamplingOptions opts;
  opts.skip_first = 1;
  // After the discard: days 10, 20, 900. Windows (10,310] (310,610] (610,910].
  const auto picked =
      SampleRevisionIndices(Offsets({0, 10, 20, 900}), opts, Scripted({300, 300, 300}));
  EXPECT_EQ(picked, (std::vector<size_t>{1, 2, 3}));
}

TEST(Sampling, Errors) {
  SamplingOptions opts;
  EXPECT_THROW(SampleRevisionIndices(Offsets({0, 5, 5}), opts, Scripted({})), Error);
  opts.interval_low = 500;
  EXPECT_THROW(SampleRevisionIndices(Offsets({0}), opts, Scripted({})), Error);
}

// Day-offset simulation of the window rule.
std::vector<size_t> OracleSample(const std::vector<int> &days, int skip,
                                 const std::vector<int> &draws, size_t *consumed) {
  std::vector<size_t> out;
  *consumed = 0;
  if (static_cast<int>(days.size()) <= skip) return out;
  out.push_back(skip);
  long t = days[skip];
  while (t < days.back()) {
    const long end = t + draws[(*consumed)++];
    long best = -1;
    for (size_t i = 0; i < days.size(); ++i) {
      if (static_cast<int>(i) > skip && days[i] > t && days[i] <= end) best = static_cast<long>(i);
    }
    if (best >= 0) out.push_back(best);
    t = end;
  }
  return out;
}

TEST(Sampling, MatchesOracleOnRandomTimelines) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> days;
    int day = static_cast<int>(rng.UniformInt(0, 100));
    const int n = static_cast<int>(rng.UniformInt(0, 40));
    for (int i = 0; i < n; ++i) {
      days.push_back(day);
      day += static_cast<int>(rng.UniformInt(1, 500));
    }
    std::vector<int> draws;
    for (int i = 0; i < 200; ++i) draws.push_back(static_cast<int>(rng.UniformInt(270, 450)));
    size_t consumed = 0;
    const auto expected = OracleSample(days, 5, draws, &consumed);
    int used = 0;
    const auto got = SampleRevisionIndices(Offsets(days), {}, Scripted(draws, &used));
    EXPECT_EQ(got, expected) << "trial " << trial;
    EXPECT_EQ(static_cast<size_t>(used), consumed);
    for (size_t k = 1; k < got.size(); ++k) EXPECT_LT(got[k - 1], got[k]);
  }
}

TEST(Sampling, DrawsAfterLastRevisionDoNotMatter) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> days;
    int day = 0;
    for (int i = 0; i < 25; ++i) days.push_back(day += static_cast<int>(rng.UniformInt(1, 400)));
    std::vector<int> draws;
    for (int i = 0; i < 100; ++i) draws.push_back(static_cast<int>(rng.UniformInt(270, 450)));
    int used = 0;
    const auto a = SampleRevisionIndices(Offsets(days), {}, Scripted(draws, &used));
    for (size_t i = used; i < draws.size(); ++i) draws[i] = 270 + (draws[i] * 7) % 181;
    EXPECT_EQ(SampleRevisionIndices(Offsets(days), {}, Scripted(draws)), a);
  }
}

TEST(Sampling, SeededUniformIntervals) {
  Rng a(9), b(9);
  SamplingOptions opts;
  IntervalSource da = UniformIntervals(a, opts), db = UniformIntervals(b, opts);
  for (int i = 0; i < 1000; ++i) {
    const int x = da();
    EXPECT_GE(x, 270);
    EXPECT_LE(x, 450);
    EXPECT_EQ(x, db());
  }
}

SubjectTimeline Timeline(const std::string &id, std::vector<CalendarDate> dates) {
  return {id, std::move(dates)};
}

std::set<std::string> Subjects(const std::vector<SplitEntry> &entries) {
  std::set<std::string> out;
  for (const SplitEntry &e : entries) out.insert(e.subject_id);
  return out;
}

std::vector<SubjectTimeline> RandomSubjects(Rng &rng, int n) {
  std::vector<SubjectTimeline> out;
  for (int i = 0; i < n; ++i) {
    const int start = static_cast<int>(rng.UniformInt(2004, 2021));
    std::vector<CalendarDate> dates;
    int64_t day = DaysFromCivil({start, 1, 1}) + rng.UniformInt(0, 300);
    const int count = static_cast<int>(rng.UniformInt(1, 8));
    for (int k = 0; k < count; ++k) {
      dates.push_back(CivilFromDays(day));
      day += rng.UniformInt(270, 450);
    }
    out.push_back(Timeline("s" + std::to_string(1000 + i), dates));
  }
  return out;
}

void ExpectInvariants(const SplitManifest &m) {
  EXPECT_NO_THROW(CheckManifestInvariants(m));
  const std::vector<std::set<std::string>> sets = {
      Subjects(m.train), Subjects(m.dev), Subjects(m.test_same_time), Subjects(m.test_future)};
  for (size_t i = 0; i < sets.size(); ++i) {
    for (size_t j = i + 1; j < sets.size(); ++j) {
      for (const std::string &s : sets[i]) EXPECT_EQ(sets[j].count(s), 0u) << s;
    }
  }
  for (const SplitEntry &e : m.test_future) EXPECT_LT(m.cutoff, e.timestamp);
  for (const auto *split : {&m.train, &m.dev, &m.test_same_time}) {
    for (const SplitEntry &e : *split) EXPECT_LE(e.timestamp, m.cutoff);
  }
}

TEST(Splits, CutoffRules) {
  std::vector<SubjectTimeline> subjects = {
      Timeline("old", {{2016, 1, 1}, {2016, 9, 1}}),
      Timeline("new", {{2019, 3, 1}, {2020, 1, 1}}),
      Timeline("straddle", {{2018, 6, 1}, {2019, 6, 1}})};
  SplitOptions opts;
  opts.future_downsample = 1.0;
  opts.dev_fraction = 0.01;
  opts.test_same_fraction = 0.01;
  Rng rng(1);
  const SplitManifest m = BuildSplits(subjects, opts, rng);
  ExpectInvariants(m);
  EXPECT_EQ(m.future_pool_subjects, 1);
  EXPECT_EQ(Subjects(m.test_future), std::set<std::string>{"new"});
  EXPECT_EQ(m.test_future.size(), 2u);
  // The straddling subject keeps only its pre-cutoff revision.
  EXPECT_EQ(Subjects(m.train), (std::set<std::string>{"old", "straddle"}));
  EXPECT_EQ(m.train.size(), 3u);
}

TEST(Splits, InvariantsOnManySeeds) {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    Rng gen(seed);
    const std::vector<SubjectTimeline> subjects = RandomSubjects(gen, 120);
    Rng rng(seed + 100);
    const SplitManifest m = BuildSplits(subjects, {}, rng);
    ExpectInvariants(m);
    const double target = m.future_pool_subjects * 0.10;
    EXPECT_LE(std::abs(static_cast<double>(Subjects(m.test_future).size()) - target), 1.0);
  }
}

TEST(Splits, DeterministicPerSeed) {
  Rng gen(3);
  const std::vector<SubjectTimeline> subjects = RandomSubjects(gen, 80);
  Rng a(4), b(4), c(5);
  const SplitManifest ma = BuildSplits(subjects, {}, a);
  EXPECT_EQ(ma, BuildSplits(subjects, {}, b));
  const SplitManifest mc = BuildSplits(subjects, {}, c);
  EXPECT_NE(Subjects(ma.train), Subjects(mc.train));
  // Input order does not matter.
  std::vector<SubjectTimeline> reversed(subjects.rbegin(), subjects.rend());
  Rng d(4);
  EXPECT_EQ(ma, BuildSplits(reversed, {}, d));
}

TEST(Splits, SameTimeDownsamplingIsOptIn) {
  Rng gen(6);
  const std::vector<SubjectTimeline> subjects = RandomSubjects(gen, 200);
  SplitOptions opts;
  Rng a(1);
  const SplitManifest full = BuildSplits(subjects, opts, a);
  opts.downsample_same_time = true;
  Rng b(1);
  const SplitManifest down = BuildSplits(subjects, opts, b);
  ExpectInvariants(down);
  EXPECT_LT(Subjects(down.test_same_time).size(), Subjects(full.test_same_time).size());
  EXPECT_NEAR(static_cast<double>(Subjects(down.test_same_time).size()),
              Subjects(full.test_same_time).size() * 0.1, 1.0);
}

TEST(Splits, Errors) {
  Rng rng(1);
  EXPECT_THROW(BuildSplits({}, {}, rng), Error);
  SplitOptions opts;
  opts.dev_fraction = 0.0;
  EXPECT_THROW(BuildSplits({Timeline("a", {{2010, 1, 1}})}, opts, rng), Error);
  EXPECT_THROW(BuildSplits({Timeline("a", {{2010, 1, 1}}), Timeline("a", {{2011, 1, 1}})}, {}, rng),
               Error);
}

TEST(Splits, CheckerRejectsViolations) {
  SplitManifest m;
  m.cutoff = {2018, 12, 31};
  m.train = {{"a", {2017, 1, 1}}};
  m.test_future = {{"a", {2019, 1, 1}}};
  EXPECT_THROW(CheckManifestInvariants(m), Error);
  m.test_future = {{"b", {2018, 12, 31}}};
  EXPECT_THROW(CheckManifestInvariants(m), Error);
  m.test_future = {{"b", {2019, 1, 1}}};
  EXPECT_NO_THROW(CheckManifestInvariants(m));
  m.dev = {{"c", {2019, 1, 1}}};
  EXPECT_THROW(CheckManifestInvariants(m), Error);
}

TEST(Splits, ManifestJsonRoundTrip) {
  Rng gen(8), rng(9);
  const SplitManifest m = BuildSplits(RandomSubjects(gen, 60), {}, rng);
  EXPECT_EQ(ManifestFromJson(ManifestToJson(m)), m);
  EXPECT_THROW(ManifestFromJson("{\"cutoff\": 3}"), Error);
}

fs::path FreshDir(const std::string &name) {
  const fs::path dir = fs::path(::testing::TempDir()) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Page(const std::string &name, int year) {
  return "{{Infobox person|name=" + name + "|years_active=" + std::to_string(year) +
         "}}\n'''" + name + "''' is a person documented in " + std::to_string(year) + ".";
}

void WriteRevisions(const fs::path &file,
                    const std::vector<std::pair<CalendarDate, std::string>> &revs) {
  std::ofstream out(file);
  for (const auto &[date, text] : revs) {
    out << nlohmann::json{{"timestamp", FormatIsoDate(date)}, {"wikitext", text}}.dump() << "\n";
  }
}

TEST(RevisionFile, CollapsesSameDayAndDropsIncomplete) {
  const fs::path dir = FreshDir("tap_revfile");
  WriteRevisions(dir / "x.jsonl", {{{2010, 1, 1}, Page("A", 1)},
                                   {{2010, 1, 1}, Page("B", 2)},
                                   {{2010, 2, 1}, "no infobox here"},
                                   {{2010, 3, 1}, "{{Infobox person}}\nLead."},
                                   {{2010, 4, 1}, "{{Infobox person|name=C}}"},
                                   {{2010, 5, 1}, Page("D", 4)}});
  int64_t read = 0;
  const auto revs = ReadRevisionFile((dir / "x.jsonl").string(), "x", &read);
  EXPECT_EQ(read, 5);
  ASSERT_EQ(revs.size(), 2u);
  EXPECT_EQ(revs[0].infobox[0].value, "B");
  EXPECT_EQ(revs[0].lead, "B is a person documented in 2.");
  EXPECT_EQ(revs[1].timestamp, (CalendarDate{2010, 5, 1}));
  EXPECT_EQ(revs[1].subject_id, "x");
}

TEST(RevisionFile, Errors) {
  const fs::path dir = FreshDir("tap_revfile_bad");
  WriteRevisions(dir / "order.jsonl", {{{2010, 2, 1}, Page("A", 1)}, {{2010, 1, 1}, Page("B", 1)}});
  EXPECT_THROW(ReadRevisionFile((dir / "order.jsonl").string(), "order"), Error);
  std::ofstream(dir / "json.jsonl") << "{not json\n";
  EXPECT_THROW(ReadRevisionFile((dir / "json.jsonl").string(), "json"), Error);
  std::ofstream(dir / "date.jsonl") << "{\"timestamp\": \"2010-02-30\", \"wikitext\": \"\"}\n";
  EXPECT_THROW(ReadRevisionFile((dir / "date.jsonl").string(), "date"), Error);
  EXPECT_THROW(ReadRevisionFile((dir / "missing.jsonl").string(), "missing"), Error);
}

TEST(BuildCorpus, SmallFixture) {
  const fs::path in = FreshDir("tap_corpus_in");
  const fs::path out = FreshDir("tap_corpus_out");
  Rng rng(2);
  for (int s = 0; s < 40; ++s) {
    std::vector<std::pair<CalendarDate, std::string>> revs;
    const int start = static_cast<int>(rng.UniformInt(2005, 2020));
    int64_t day = DaysFromCivil({start, 1, 1});
    for (int k = 0; k < 12; ++k) {
      const CalendarDate d = CivilFromDays(day);
      revs.push_back({d, Page("P" + std::to_string(s), d.year)});
      day += rng.UniformInt(30, 200);
    }
    WriteRevisions(in / ("p" + std::to_string(100 + s) + ".jsonl"), revs);
  }
  CorpusBuildOptions opts;
  opts.input_dir = in.string();
  opts.output_dir = out.string();
  opts.seed = 17;
  const CorpusBuildStats stats = BuildCorpus(opts);
  EXPECT_EQ(stats.subjects, 40);
  EXPECT_EQ(stats.revisions_read, 480);
  EXPECT_EQ(stats.revisions_complete, 480);
  EXPECT_GT(stats.revisions_sampled, 40);
  EXPECT_DOUBLE_EQ(stats.mean_attributes, 2.0);

  const SplitManifest m = ManifestFromJson(ReadFile((out / "manifest.json").string()));
  ExpectInvariants(m);
  size_t total = 0;
  const std::vector<std::pair<std::string, const std::vector<SplitEntry> *>> splits = {
      {"train", &m.train}, {"dev", &m.dev}, {"test_same_time", &m.test_same_time},
      {"test_future", &m.test_future}};
  for (const auto &[name, entries] : splits) {
    const std::vector<CorpusRecord> records = ReadCorpus((out / (name + ".jsonl")).string());
    ASSERT_EQ(records.size(), entries->size()) << name;
    for (size_t i = 0; i < records.size(); ++i) {
      EXPECT_EQ(records[i].id,
                (*entries)[i].subject_id + "@" + FormatIsoDate((*entries)[i].timestamp));
      EXPECT_EQ(records[i].timestamp, (*entries)[i].timestamp);
      EXPECT_EQ(ParseLinearizedInfobox(records[i].source)[1].value,
                std::to_string(records[i].timestamp.year));
    }
    total += records.size();
  }
  EXPECT_GT(total, 0u);

  // Same seed, same bytes.
  const fs::path again = FreshDir("tap_corpus_again");
  opts.output_dir = again.string();
  BuildCorpus(opts);
  for (const char *f : {"train.jsonl", "dev.jsonl", "test_same_time.jsonl", "test_future.jsonl",
                        "manifest.json"}) {
    EXPECT_EQ(ReadFile((out / f).string()), ReadFile((again / f).string())) << f;
  }
}

TEST(BuildCorpus, MissingInput) {
  CorpusBuildOptions opts;
  opts.input_dir = (fs::path(::testing::TempDir()) / "tap_no_such_dir").string();
  opts.output_dir = FreshDir("tap_corpus_unused").string();
  EXPECT_THROW(BuildCorpus(opts), Error);
  opts.input_dir = FreshDir("tap_corpus_empty").string();
  EXPECT_THROW(BuildCorpus(opts), Error);
}

}  // namespace
}  // namespace tap
