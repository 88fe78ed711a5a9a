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

#ifndef TAP_CORPUS_H_
#define TAP_CORPUS_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tap/random.h"
#include "tap/temporal.h"
#include "tap/wikitext.h"

namespace tap {

// One retained revision of a subject's article.
struct RevisionRecord {
  std::string subject_id;
  CalendarDate timestamp;
  Infobox infobox;
  std::string lead;
};

struct SamplingOptions {
  int interval_low = 270;
  int interval_high = 450;
  int skip_first = 5;
};

// Draws the next window length in days.
using IntervalSource = std::function<int()>;

// Uniform integer window lengths in [low, high] from rng.
IntervalSource UniformIntervals(Rng &rng, const SamplingOptions &options);

// Indices of the selected revisions. After dropping the first skip_first
// revisions, the earliest remaining one is selected and anchors the window
// at its date t. Then, until t reaches the last revision date: X is drawn,
// the latest revision in (t, t + X] is selected if any, and t advances to
// t + X. Timestamps must be strictly increasing.
std::vector<size_t> SampleRevisionIndices(const std::vector<CalendarDate> &timestamps,
                                          const SamplingOptions &options,
                                          const IntervalSource &draw);

std::vector<RevisionRecord> SampleRevisions(const std::vector<RevisionRecord> &revisions,
                                            const SamplingOptions &options,
                                            const IntervalSource &draw);

struct SubjectTimeline {
  std::string subject_id;
  std::vector<CalendarDate> timestamps;  // sampled revisions
};

struct SplitEntry {
  std::string subject_id;
  CalendarDate timestamp;

  friend bool operator==(const SplitEntry &, const SplitEntry &) = default;
};

struct SplitOptions {
  CalendarDate cutoff{2018, 12, 31};
  double dev_fraction = 0.1;
  double test_same_fraction = 0.1;
  double future_downsample = 0.10;
  // Also downsample the test-same-time subjects by future_downsample.
  bool downsample_same_time = false;
};

struct SplitManifest {
  CalendarDate cutoff;
  std::vector<SplitEntry> train;
  std::vector<SplitEntry> dev;
  std::vector<SplitEntry> test_same_time;
  std::vector<SplitEntry> test_future;
  int64_t future_pool_subjects = 0;  // before downsampling

  friend bool operator==(const SplitManifest &, const SplitManifest &) = default;
};

// Subjects whose every revision is after the cutoff form the future pool,
// which is downsampled to round(pool * future_downsample) subjects. Every
// other subject goes whole to exactly one of test-same-time, dev or train
// (round(n * fraction) subjects each for the first two), keeping only
// revisions at or before the cutoff. Entries are sorted by (subject, date).
SplitManifest BuildSplits(const std::vector<SubjectTimeline> &subjects,
                          const SplitOptions &options, Rng &rng);

// Throws Error(kRuntime) describing the first violated manifest invariant.
void CheckManifestInvariants(const SplitManifest &manifest);

// Structured-text (JSON) manifest.
std::string ManifestToJson(const SplitManifest &manifest);
SplitManifest ManifestFromJson(const std::string &text);

struct CorpusBuildOptions {
  std::string input_dir;   // one <subject>.jsonl per subject
  std::string output_dir;  // receives <split>.jsonl and manifest.json
  SamplingOptions sampling;
  SplitOptions splits;
  uint64_t seed = 0;
};

struct CorpusBuildStats {
  int64_t subjects = 0;
  int64_t revisions_read = 0;
  int64_t revisions_complete = 0;
  int64_t revisions_sampled = 0;
  double mean_attributes = 0.0;  // over sampled revisions
  double mean_lead_words = 0.0;  // over sampled revisions
};

// Revision input file: one JSON object per line,
//   {"timestamp": "YYYY-MM-DD", "wikitext": "..."}
// in chronological order. Several revisions on one day collapse to the last
// of that day. Revisions without a non-empty infobox or lead are dropped
// before sampling.
std::vector<RevisionRecord> ReadRevisionFile(const std::string &path,
                                             const std::string &subject_id,
                                             int64_t *read_count = nullptr);

CorpusBuildStats BuildCorpus(const CorpusBuildOptions &options);

}  // namespace tap

#endif  // TAP_CORPUS_H_
