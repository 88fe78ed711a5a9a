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

#ifndef TAP_SYNTHTASK_H_
#define TAP_SYNTHTASK_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tap/records.h"
#include "tap/temporal.h"

namespace tap {

enum class SynthKind {
  kMonthResolution,  // "report period months_ago K" -> "period ends <Month>"
  kAge,              // "name <N> birth_year <Y>" -> "age <year - Y>"
};

std::string_view SynthKindName(SynthKind kind);  // "month", "age"
SynthKind ParseSynthKind(std::string_view name);

struct SynthSpec {
  SynthKind kind = SynthKind::kMonthResolution;
  int64_t count = 1000;
  uint64_t seed = 0;
  CalendarDate lo{2010, 1, 1};
  CalendarDate hi{2020, 12, 31};
  // Age task only.
  int birth_year_lo = 1921;
  int birth_year_hi = 2010;
  int num_names = 100;

  // Throws InvalidArgument (including when an age could leave [0, 99]).
  void Validate() const;
};

inline constexpr int kMaxMonthsAgo = 6;

// Sample i uses its own generator seeded from (seed, i).
std::vector<CorpusRecord> GenerateMonthResolution(const SynthSpec &spec);
std::vector<CorpusRecord> GenerateAgeTask(const SynthSpec &spec);
std::vector<CorpusRecord> GenerateSynthetic(const SynthSpec &spec);

// The generator's target for a source under a (possibly perturbed)
// timestamp; nullopt when the source does not belong to the task.
std::optional<std::string> SynthTarget(SynthKind kind, std::string_view source,
                                       const CalendarDate &timestamp);

// Exact accuracy of the best timestamp-blind predictor: for every source,
// the probability of its most likely target, averaged over the generator's
// joint distribution (enumerated day by day over [lo, hi]).
double BayesBlindAccuracy(const SynthSpec &spec);

}  // namespace tap

#endif  // TAP_SYNTHTASK_H_
