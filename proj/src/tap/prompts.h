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

#ifndef TAP_PROMPTS_H_
#define TAP_PROMPTS_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tap/linalg.h"
#include "tap/temporal.h"

namespace tap {

// The three textual prompt patterns. Each carries a single "[timestamp]"
// slot that is filled with FormatLongDate().
struct TextualTemplate {
  int id;
  std::string_view pattern;
};

inline constexpr int kDefaultTemplateId = 2;

// Throws InvalidArgument for ids outside {1, 2, 3}.
const TextualTemplate &GetTextualTemplate(int id);
const std::array<TextualTemplate, 3> &AllTextualTemplates();

// e.g. "Today is 18 January 2015."
std::string RenderTextualPrompt(const CalendarDate &date, int template_id);

// Whitespace tokens of the rendered prompt with the sentence-final period
// split into its own token: "Today is 18 January 2015 .".
std::vector<std::string> TextualPromptTokens(const CalendarDate &date,
                                             int template_id);

// Learned direction vectors for the linear prompt, plus the fixed
// normalization applied to the raw calendar fields.
struct LinearPromptParams {
  RowVector w_year;
  RowVector w_month;
  RowVector w_day;
  double year_center = 2000.0;
  double year_scale = 100.0;
  double month_scale = 12.0;
  double day_scale = 31.0;

  int dim() const { return static_cast<int>(w_year.size()); }
};

struct DateScalars {
  double year;
  double month;
  double day;

  double operator[](int i) const { return i == 0 ? year : i == 1 ? month : day; }
};

DateScalars NormalizeDateScalars(const CalendarDate &date,
                                 const LinearPromptParams &params);

// [s_year * w_year, s_month * w_month, s_day * w_day].
std::array<RowVector, 3> LinearPromptVectors(const CalendarDate &date,
                                             const LinearPromptParams &params);

// Each direction drawn i.i.d. from N(0, 0.02^2). Throws for dim < 1.
LinearPromptParams InitLinearPromptParams(int dim, uint64_t seed);

}  // namespace tap

#endif  // TAP_PROMPTS_H_
