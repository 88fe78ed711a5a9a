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

#include "tap/corpus.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "tap/error.h"
#include "tap/records.h"
#include "tap/tokenizer.h"

namespace tap {

namespace {

int64_t RoundCount(double x) { return static_cast<int64_t>(std::llround(x)); }

void CheckFraction(double value, const char *name, bool allow_one = false) {
  if (!(value > 0.0 && (value < 1.0 || (allow_one && value == 1.0)))) {
    throw InvalidArgument(std::string(name) + (allow_one ? " must lie in (0, 1]" : " must lie in (0, 1)"));
  }
}

bool EntryLess(const SplitEntry &a, const SplitEntry &b) {
  if (a.subject_id != b.subject_id) return a.subject_id < b.subject_id;
  return a.timestamp < b.timestamp;
}

nlohmann::ordered_json EntriesToJson(const std::vector<SplitEntry> &entries) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const SplitEntry &e : entries) {
    list.push_back({e.subject_id, FormatIsoDate(e.timestamp)});
  }
  return list;
}

std::vector<SplitEntry> EntriesFromJson(const nlohmann::json &list) {
  std::vector<SplitEntry> entries;
  for (const auto &item : list) {
    entries.push_back({item.at(0).get<std::string>(),
                       ParseDate(item.at(1).get<std::string>())});
  }
  return entries;
}

}  // namespace

IntervalSource UniformIntervals(Rng &rng, const SamplingOptions &options) {
  return [&rng, options] {
    return static_cast<int>(rng.UniformInt(options.interval_low, options.interval_high));
  };
}

std::vector<size_t> SampleRevisionIndices(const std::vector<CalendarDate> &timestamps,
                                          const SamplingOptions &options,
                                          const IntervalSource &draw) {
  if (options.interval_low > options.interval_high || options.interval_low < 1) {
    throw InvalidArgument("sampling interval must satisfy 1 <= low <= high");
  }
  if (options.skip_first < 0) throw InvalidArgument("skip_first must be >= 0");
  for (size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i - 1] < timestamps[i])) {
      throw InvalidArgument("revision timestamps must be strictly increasing");
    }
  }
  std::vector<size_t> selected;
  const size_t first = static_cast<size_t>(options.skip_first);
  if (timestamps.size() <= first) return selected;
  selected.push_back(first);
  int64_t anchor = DaysFromCivil(timestamps[first]);
  const int64_t last = DaysFromCivil(timestamps.back());
  size_t next = first + 1;
  while (anchor < last) {
    const int64_t window_end = anchor + draw();
    std::optional<size_t> latest;
    while (next < timestamps.size() && DaysFromCivil(timestamps[next]) <= window_end) {
      latest = next++;
    }
    if (latest) selected.push_back(*latest);
    anchor = window_end;
  }
  return selected;
}

std::vector<RevisionRecord> SampleRevisions(const std::vector<RevisionRecord> &revisions,
                                            const SamplingOptions &options,
                                            const IntervalSource &draw) {
  std::vector<CalendarDate> timestamps;
  for (const RevisionRecord &r : revisions) timestamps.push_back(r.timestamp);
  std::vector<RevisionRecord> out;
  for (size_t i : SampleRevisionIndices(timestamps, options, draw)) out.push_back(revisions[i]);
  return out;
}

SplitManifest BuildSplits(const std::vector<SubjectTimeline> &subjects,
                          const SplitOptions &options, Rng &rng) {
  if (subjects.empty()) throw InvalidArgument("cannot split an empty subject list");
  CheckFraction(options.dev_fraction, "dev_fraction");
  CheckFraction(options.test_same_fraction, "test_same_fraction");
  CheckFraction(options.future_downsample, "future_downsample", true);
  if (options.dev_fraction + options.test_same_fraction >= 1.0) {
    throw InvalidArgument("dev_fraction + test_same_fraction must be < 1");
  }
  if (!IsValidDate(options.cutoff)) throw InvalidArgument("invalid cutoff date");

  std::vector<const SubjectTimeline *> ordered;
  std::set<std::string> seen;
  for (const SubjectTimeline &s : subjects) {
    if (!seen.insert(s.subject_id).second) {
      throw InvalidArgument("duplicate subject id " + s.subject_id);
    }
    if (!s.timestamps.empty()) ordered.push_back(&s);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto *a, const auto *b) { return a->subject_id < b->subject_id; });

  std::vector<const SubjectTimeline *> future_pool, present_pool;
  for (const SubjectTimeline *s : ordered) {
    const CalendarDate earliest = *std::min_element(s->timestamps.begin(), s->timestamps.end());
    (options.cutoff < earliest ? future_pool : present_pool).push_back(s);
  }

  SplitManifest manifest;
  manifest.cutoff = options.cutoff;
  manifest.future_pool_subjects = static_cast<int64_t>(future_pool.size());

  rng.Shuffle(future_pool);
  future_pool.resize(std::min<size_t>(
      future_pool.size(), RoundCount(future_pool.size() * options.future_downsample)));
  for (const SubjectTimeline *s : future_pool) {
    for (const CalendarDate &t : s->timestamps) manifest.test_future.push_back({s->subject_id, t});
  }

  rng.Shuffle(present_pool);
  const int64_t n = static_cast<int64_t>(present_pool.size());
  const int64_t n_test = RoundCount(n * options.test_same_fraction);
  const int64_t n_dev = std::min(n - n_test, RoundCount(n * options.dev_fraction));
  int64_t n_test_kept = n_test;
  if (options.downsample_same_time) {
    n_test_kept = RoundCount(n_test * options.future_downsample);
  }
  for (int64_t i = 0; i < n; ++i) {
    const SubjectTimeline *s = present_pool[i];
    std::vector<SplitEntry> *split = nullptr;
    if (i < n_test) {
      if (i >= n_test_kept) continue;
      split = &manifest.test_same_time;
    } else if (i < n_test + n_dev) {
      split = &manifest.dev;
    } else {
      split = &manifest.train;
    }
    for (const CalendarDate &t : s->timestamps) {
      if (t <= options.cutoff) split->push_back({s->subject_id, t});
    }
  }
  for (auto *split : {&manifest.train, &manifest.dev, &manifest.test_same_time,
                      &manifest.test_future}) {
    std::sort(split->begin(), split->end(), EntryLess);
  }
  return manifest;
}

void CheckManifestInvariants(const SplitManifest &m) {
  auto fail = [](const std::string &what) { throw Error(ErrorCode::kRuntime, "manifest invariant violated: " + what); };
  std::set<std::string> seen_subjects, test_subjects;
  for (const auto *split : {&m.train, &m.dev}) {
    for (const SplitEntry &e : *split) {
      seen_subjects.insert(e.subject_id);
      if (m.cutoff < e.timestamp) fail("train/dev revision after cutoff");
    }
  }
  for (const SplitEntry &e : m.test_same_time) {
    test_subjects.insert(e.subject_id);
    if (m.cutoff < e.timestamp) fail("test-same-time revision after cutoff");
  }
  for (const SplitEntry &e : m.test_future) {
    test_subjects.insert(e.subject_id);
    if (!(m.cutoff < e.timestamp)) fail("test-future revision at or before cutoff");
  }
  for (const std::string &s : test_subjects) {
    if (seen_subjects.count(s)) fail("subject " + s + " in both train/dev and test");
  }
}

std::string ManifestToJson(const SplitManifest &m) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["cutoff"] = FormatIsoDate(m.cutoff);
  j["future_pool_subjects"] = m.future_pool_subjects;
  j["train"] = EntriesToJson(m.train);
  j["dev"] = EntriesToJson(m.dev);
  j["test_same_time"] = EntriesToJson(m.test_same_time);
  j["test_future"] = EntriesToJson(m.test_future);
  return j.dump(1) + "\n";
}

SplitManifest ManifestFromJson(const std::string &text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format_version").get<int>() != 1) throw ParseError("unsupported manifest version");
    SplitManifest m;
    m.cutoff = ParseDate(j.at("cutoff").get<std::string>());
    m.future_pool_subjects = j.at("future_pool_subjects").get<int64_t>();
    m.train = EntriesFromJson(j.at("train"));
    m.dev = EntriesFromJson(j.at("dev"));
    m.test_same_time = EntriesFromJson(j.at("test_same_time"));
    m.test_future = EntriesFromJson(j.at("test_future"));
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
}

std::vector<RevisionRecord> ReadRevisionFile(const std::string &path,
                                             const std::string &subject_id,
                                             int64_t *read_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open revision file " + path);
  std::vector<std::pair<CalendarDate, std::string>> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      const CalendarDate t = ParseDate(j.at("timestamp").get<std::string>());
      if (!raw.empty() && t < raw.back().first) {
        throw ParseError("revisions are not in chronological order");
      }
      if (!raw.empty() && raw.back().first == t) {
        raw.back().second = j.at("wikitext").get<std::string>();
      } else {
        raw.emplace_back(t, j.at("wikitext").get<std::string>());
      }
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(where + ": " + e.what());
    } catch (const Error &e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  if (read_count) *read_count = static_cast<int64_t>(raw.size());
  std::vector<RevisionRecord> revisions;
  for (auto &[timestamp, wikitext] : raw) {
    std::optional<Infobox> box = ParseInfobox(wikitext);
    if (!box || box->empty()) continue;
    std::string lead = ExtractLead(wikitext);
    if (lead.empty()) continue;
    revisions.push_back({subject_id, timestamp, std::move(*box), std::move(lead)});
  }
  return revisions;
}

CorpusBuildStats BuildCorpus(const CorpusBuildOptions &options) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(options.input_dir)) {
    throw IoError("input directory " + options.input_dir + " does not exist");
  }
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(options.input_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidArgument("no .jsonl revision files in " + options.input_dir);

  CorpusBuildStats stats;
  std::map<std::string, std::vector<RevisionRecord>> sampled;
  std::vector<SubjectTimeline> timelines;
  double attribute_total = 0.0, lead_words_total = 0.0;
  for (const fs::path &file : files) {
    const std::string subject = file.stem().string();
    int64_t read = 0;
    std::vector<RevisionRecord> complete = ReadRevisionFile(file.string(), subject, &read);
    stats.revisions_read += read;
    stats.revisions_complete += static_cast<int64_t>(complete.size());
    Rng rng(DeriveSeed(options.seed, "corpus/sample/" + subject));
    std::vector<RevisionRecord> chosen =
        SampleRevisions(complete, options.sampling, UniformIntervals(rng, options.sampling));
    SubjectTimeline timeline{subject, {}};
    for (const RevisionRecord &r : chosen) {
      timeline.timestamps.push_back(r.timestamp);
      attribute_total += static_cast<double>(r.infobox.size());
      lead_words_total += static_cast<double>(SplitWhitespace(r.lead).size());
    }
    stats.revisions_sampled += static_cast<int64_t>(chosen.size());
    timelines.push_back(std::move(timeline));
    sampled[subject] = std::move(chosen);
  }
  stats.subjects = static_cast<int64_t>(files.size());
  if (stats.revisions_sampled > 0) {
    stats.mean_attributes = attribute_total / stats.revisions_sampled;
    stats.mean_lead_words = lead_words_total / stats.revisions_sampled;
  }

  Rng split_rng(DeriveSeed(options.seed, "corpus/splits"));
  const SplitManifest manifest = BuildSplits(timelines, options.splits, split_rng);
  CheckManifestInvariants(manifest);

  fs::create_directories(options.output_dir);
  auto write_split = [&](const std::string &name, const std::vector<SplitEntry> &entries) {
    std::vector<CorpusRecord> records;
    for (const SplitEntry &e : entries) {
      for (const RevisionRecord &r : sampled.at(e.subject_id)) {
        if (r.timestamp != e.timestamp) continue;
        records.push_back({r.subject_id + "@" + FormatIsoDate(r.timestamp), r.timestamp,
                           LinearizeInfobox(r.infobox), r.lead});
      }
    }
    WriteCorpus((fs::path(options.output_dir) / (name + ".jsonl")).string(), records);
  };
  write_split("train", manifest.train);
  write_split("dev", manifest.dev);
  write_split("test_same_time", manifest.test_same_time);
  write_split("test_future", manifest.test_future);

  nlohmann::ordered_json j = nlohmann::ordered_json::parse(ManifestToJson(manifest));
  nlohmann::ordered_json s;
  s["subjects"] = stats.subjects;
  s["revisions_read"] = stats.revisions_read;
  s["revisions_complete"] = stats.revisions_complete;
  s["revisions_sampled"] = stats.revisions_sampled;
  s["mean_attributes"] = stats.mean_attributes;
  s["mean_lead_words"] = stats.mean_lead_words;
  j["stats"] = s;
  WriteFile((fs::path(options.output_dir) / "manifest.json").string(), j.dump(1) + "\n");
  return stats;
}

}  // namespace tap
