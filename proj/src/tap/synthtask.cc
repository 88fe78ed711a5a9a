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

#include "tap/synthtask.h"

#include <algorithm>
#include <array>
#include <map>

#include "tap/error.h"
#include "tap/random.h"
#include "tap/tokenizer.h"

namespace tap {

namespace {

CalendarDate UniformDate(Rng &rng, const CalendarDate &lo, const CalendarDate &hi) {
  return CivilFromDays(rng.UniformInt(DaysFromCivil(lo), DaysFromCivil(hi)));
}

std::string MonthSource(int months_ago) {
  return "report period months_ago " + std::to_string(months_ago);
}

std::string MonthTarget(const CalendarDate &timestamp, int months_ago) {
  const CalendarDate period_end = ShiftDate(timestamp, {0, -months_ago, 0});
  return "period ends " + std::string(MonthName(period_end.month));
}

bool ParseInt(const std::string &text, int *out) {
  if (text.empty() || text.size() > 9) return false;
  int value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  *out = value;
  return true;
}

}  // namespace

std::string_view SynthKindName(SynthKind kind) {
  return kind == SynthKind::kAge ? "age" : "month";
}

SynthKind ParseSynthKind(std::string_view name) {
  if (name == "month") return SynthKind::kMonthResolution;
  if (name == "age") return SynthKind::kAge;
  throw InvalidArgument("unknown synthetic task \"" + std::string(name) +
                        "\" (expected month or age)");
}

void SynthSpec::Validate() const {
  if (count < 1) throw InvalidArgument("synthetic sample count must be >= 1");
  if (!IsValidDate(lo) || !IsValidDate(hi)) throw InvalidArgument("invalid timestamp range");
  if (hi < lo) throw InvalidArgument("timestamp range is empty (lo > hi)");
  if (kind == SynthKind::kAge) {
    if (birth_year_lo > birth_year_hi) throw InvalidArgument("birth year range is empty");
    if (num_names < 1) throw InvalidArgument("num_names must be >= 1");
    if (hi.year - birth_year_lo > 99 || lo.year - birth_year_hi < 0) {
      throw InvalidArgument("age task configuration can produce ages outside [0, 99]");
    }
  }
}

std::vector<CorpusRecord> GenerateMonthResolution(const SynthSpec &spec) {
  spec.Validate();
  std::vector<CorpusRecord> records;
  records.reserve(spec.count);
  for (int64_t i = 0; i < spec.count; ++i) {
    Rng rng(DeriveSeed(spec.seed, static_cast<uint64_t>(i)));
    const int months_ago = static_cast<int>(rng.UniformInt(1, kMaxMonthsAgo));
    const CalendarDate timestamp = UniformDate(rng, spec.lo, spec.hi);
    records.push_back({"month-" + std::to_string(i), timestamp,
                       MonthSource(months_ago), MonthTarget(timestamp, months_ago)});
  }
  return records;
}

std::vector<CorpusRecord> GenerateAgeTask(const SynthSpec &spec) {
  spec.Validate();
  std::vector<CorpusRecord> records;
  records.reserve(spec.count);
  for (int64_t i = 0; i < spec.count; ++i) {
    Rng rng(DeriveSeed(spec.seed, static_cast<uint64_t>(i)));
    const int name = static_cast<int>(rng.UniformInt(0, spec.num_names - 1));
    const int birth_year = static_cast<int>(rng.UniformInt(spec.birth_year_lo, spec.birth_year_hi));
    const CalendarDate timestamp = UniformDate(rng, spec.lo, spec.hi);
    const int age = timestamp.year - birth_year;
    if (age < 0 || age > 99) throw InvalidArgument("generated age out of [0, 99]");
    records.push_back({"age-" + std::to_string(i), timestamp,
                       "name " + std::to_string(name) + " birth_year " +
                           std::to_string(birth_year),
                       "age " + std::to_string(age)});
  }
  return records;
}

std::vector<CorpusRecord> GenerateSynthetic(const SynthSpec &spec) {
  return spec.kind == SynthKind::kAge ? GenerateAgeTask(spec)
                                      : GenerateMonthResolution(spec);
}

std::optional<std::string> SynthTarget(SynthKind kind, std::string_view source,
                                       const CalendarDate &timestamp) {
  const std::vector<std::string> tokens = SplitWhitespace(source);
  int value = 0;
  if (kind == SynthKind::kMonthResolution) {
    if (tokens.size() != 4 || tokens[0] != "report" || tokens[1] != "period" ||
        tokens[2] != "months_ago" || !ParseInt(tokens[3], &value)) {
      return std::nullopt;
    }
    return MonthTarget(timestamp, value);
  }
  if (tokens.size() != 4 || tokens[0] != "name" || tokens[2] != "birth_year" ||
      !ParseInt(tokens[3], &value)) {
    return std::nullopt;
  }
  return "age " + std::to_string(timestamp.year - value);
}

double BayesBlindAccuracy(const SynthSpec &spec) {
  spec.Validate();
  // Both tasks share one structure: the source carries an offset (K or Y)
  // drawn independently of the timestamp, and the target is a function of
  // (offset, calendar field of the timestamp). The best blind guess for a
  // source is the modal target under the timestamp marginal.
  const int64_t first = DaysFromCivil(spec.lo);
  const int64_t last = DaysFromCivil(spec.hi);
  const double days = static_cast<double>(last - first + 1);
  if (spec.kind == SynthKind::kMonthResolution) {
    double accuracy = 0.0;
    for (int k = 1; k <= kMaxMonthsAgo; ++k) {
      std::array<int64_t, 13> counts{};
      for (int64_t d = first; d <= last; ++d) {
        ++counts[ShiftDate(CivilFromDays(d), {0, -k, 0}).month];
      }
      accuracy += *std::max_element(counts.begin(), counts.end()) / days;
    }
    return accuracy / kMaxMonthsAgo;
  }
  std::map<int, int64_t> year_counts;
  for (int64_t d = first; d <= last; ++d) ++year_counts[CivilFromDays(d).year];
  int64_t best = 0;
  for (const auto &[year, count] : year_counts) best = std::max(best, count);
  // The modal age for every birth year is the modal timestamp year.
  return best / days;
}

}  // namespace tap
