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

#ifndef TAP_TEMPORAL_H_
#define TAP_TEMPORAL_H_

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tap {

// An exact Gregorian calendar date. Construct through MakeDate() or
// ParseDate() to get validation; the aggregate form is unchecked.
struct CalendarDate {
  int year = 1970;
  int month = 1;
  int day = 1;

  friend auto operator<=>(const CalendarDate &, const CalendarDate &) = default;
};

// Signed calendar shift, applied years first, then months, then days.
struct DateShift {
  int years = 0;
  int months = 0;
  int days = 0;

  DateShift Negated() const { return {-years, -months, -days}; }
  bool IsIdentity() const { return years == 0 && months == 0 && days == 0; }
  friend bool operator==(const DateShift &, const DateShift &) = default;
};

struct LabeledShift {
  std::string label;
  DateShift shift;
};

inline constexpr int kMinYear = 1;
inline constexpr int kMaxYear = 9999;

bool IsLeapYear(int year);
int DaysInMonth(int year, int month);
bool IsValidDate(const CalendarDate &date);

// Throws InvalidArgument naming the offending field.
CalendarDate MakeDate(int year, int month, int day);

// Parses exactly "YYYY-MM-DD". Throws ParseError on malformed input or an
// out-of-range field.
CalendarDate ParseDate(std::string_view text);

// "YYYY-MM-DD", zero padded.
std::string FormatIsoDate(const CalendarDate &date);

// "<day> <MonthName> <year>", e.g. "18 January 2015".
std::string FormatLongDate(const CalendarDate &date);

// English month name for month in [1, 12].
std::string_view MonthName(int month);

// Returns the month number for an English month name, or 0.
int MonthFromName(std::string_view name);

// Applies years, then months (carrying into years), then days. After each of
// the first two stages a day past the end of the month clamps to its last
// day; the day component is then added as a day count.
// Throws InvalidArgument when the result leaves [kMinYear, kMaxYear].
CalendarDate ShiftDate(const CalendarDate &date, const DateShift &shift);

// True when ShiftDate(date, shift) had to clamp the day of month.
bool ShiftClamps(const CalendarDate &date, const DateShift &shift);

// Days since 1970-01-01 (negative before).
int64_t DaysFromCivil(const CalendarDate &date);
CalendarDate CivilFromDays(int64_t days);

// The six perturbations used by the sensitivity analysis, in fixed order:
// m+1, m-1, m+6, m-6, y+1, y-1.
std::vector<LabeledShift> StandardPerturbations();

}  // namespace tap

#endif  // TAP_TEMPORAL_H_
