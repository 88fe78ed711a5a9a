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

#include "tap/prompts.h"

#include <sstream>

#include "tap/error.h"
#include "tap/random.h"

namespace tap {

namespace {

constexpr std::string_view kSlot = "[timestamp]";

constexpr std::array<TextualTemplate, 3> kTemplates = {{
    {1, "Date: [timestamp]."},
    {2, "Today is [timestamp]."},
    {3, "The following text is written on [timestamp]."},
}};

constexpr double kInitStddev = 0.02;

}  // namespace

const std::array<TextualTemplate, 3> &AllTextualTemplates() {
  return kTemplates;
}

const TextualTemplate &GetTextualTemplate(int id) {
  if (id < 1 || id > 3) {
    throw InvalidArgument("unknown textual template id " + std::to_string(id));
  }
  return kTemplates[id - 1];
}

std::string RenderTextualPrompt(const CalendarDate &date, int template_id) {
  const std::string_view pattern = GetTextualTemplate(template_id).pattern;
  const size_t slot = pattern.find(kSlot);
  std::string out(pattern.substr(0, slot));
  out += FormatLongDate(date);
  out += pattern.substr(slot + kSlot.size());
  return out;
}

std::vector<std::string> TextualPromptTokens(const CalendarDate &date,
                                             int template_id) {
  std::istringstream in(RenderTextualPrompt(date, template_id));
  std::vector<std::string> tokens;
  std::string token;
  while (in >> token) tokens.push_back(token);
  if (!tokens.empty() && tokens.back().size() > 1 && tokens.back().back() == '.') {
    tokens.back().pop_back();
    tokens.emplace_back(".");
  }
  return tokens;
}

DateScalars NormalizeDateScalars(const CalendarDate &date,
                                 const LinearPromptParams &params) {
  return {(date.year - params.year_center) / params.year_scale,
          date.month / params.month_scale, date.day / params.day_scale};
}

std::array<RowVector, 3> LinearPromptVectors(const CalendarDate &date,
                                             const LinearPromptParams &params) {
  const DateScalars s = NormalizeDateScalars(date, params);
  return {s.year * params.w_year, s.month * params.w_month,
          s.day * params.w_day};
}

LinearPromptParams InitLinearPromptParams(int dim, uint64_t seed) {
  if (dim < 1) {
    throw InvalidArgument("linear prompt dimension must be >= 1");
  }
  Rng rng(seed);
  LinearPromptParams params;
  for (RowVector *w : {&params.w_year, &params.w_month, &params.w_day}) {
    w->resize(dim);
    for (int i = 0; i < dim; ++i) (*w)[i] = kInitStddev * rng.Gaussian();
  }
  return params;
}

}  // namespace tap
