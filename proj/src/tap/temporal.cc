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

#include "tap/temporal.h"

#include <array>
#include <charconv>
#include <cstdio>

#include "tap/error.h"

namespace tap {

namespace {

constexpr std::array<std::string_view, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

int ParseDigits(std::string_view text, size_t pos, size_t len,
                const char *field) {
  int value = 0;
  for (size_t i = pos; i < pos + len; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') {
      throw ParseError("malformed date \"" + std::string(text) + "\": " +
                       field + " is not numeric");
    }
    value = value * 10 + (c - '0');
  }
  return value;
}

// Carries year/month arithmetic and clamps the day; no day offset.
CalendarDate ShiftMonths(const CalendarDate &date, int years, int months,
                         bool *clamped) {
  int64_t total = static_cast<int64_t>(date.year + years) * 12 +
                  (date.month - 1) + months;
  int64_t year = total >= 0 ? total / 12 : -((-total + 11) / 12);
  int month = static_cast<int>(total - year * 12) + 1;
  if (year < kMinYear || year > kMaxYear) {
    throw InvalidArgument("shifted year " + std::to_string(year) +
                          " outside [1, 9999]");
  }
  const int limit = DaysInMonth(static_cast<int>(year), month);
  if (clamped) *clamped = date.day > limit;
  return {static_cast<int>(year), month, std::min(date.day, limit)};
}

}  // namespace

bool IsLeapYear(int year) {
  return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int DaysInMonth(int year, int month) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                31, 31, 30, 31, 30, 31};
  if (month == 2 && IsLeapYear(year)) return 29;
  return kDays[month - 1];
}

bool IsValidDate(const CalendarDate &date) {
  return date.year >= kMinYear && date.year <= kMaxYear && date.month >= 1 &&
         date.month <= 12 && date.day >= 1 &&
         date.day <= DaysInMonth(date.year, date.month);
}

CalendarDate MakeDate(int year, int month, int day) {
  if (year < kMinYear || year > kMaxYear) {
    throw InvalidArgument("year " + std::to_string(year) +
                          " out of range [1, 9999]");
  }
  if (month < 1 || month > 12) {
    throw InvalidArgument("month " + std::to_string(month) +
                          " out of range [1, 12]");
  }
  if (day < 1 || day > DaysInMonth(year, month)) {
    throw InvalidArgument("day " + std::to_string(day) + " out of range for " +
                          std::to_string(year) + "-" + std::to_string(month));
  }
  return {year, month, day};
}

CalendarDate ParseDate(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ParseError("malformed date \"" + std::string(text) +
                     "\": expected YYYY-MM-DD");
  }
  const int year = ParseDigits(text, 0, 4, "year");
  const int month = ParseDigits(text, 5, 2, "month");
  const int day = ParseDigits(text, 8, 2, "day");
  if (year < kMinYear) {
    throw ParseError("date \"" + std::string(text) + "\": year out of range");
  }
  if (month < 1 || month > 12) {
    throw ParseError("date \"" + std::string(text) + "\": month out of range");
  }
  if (day < 1 || day > DaysInMonth(year, month)) {
    throw ParseError("date \"" + std::string(text) + "\": day out of range");
  }
  return {year, month, day};
}

std::string FormatIsoDate(const CalendarDate &date) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02d-%02d", date.year,
                date.month, date.day);
  return buffer;
}

std::string_view MonthName(int month) { return kMonthNames.at(month - 1); }

int MonthFromName(std::string_view name) {
  for (size_t i = 0; i < kMonthNames.size(); ++i) {
    if (kMonthNames[i] == name) return static_cast<int>(i) + 1;
  }
  return 0;
}

std::string FormatLongDate(const CalendarDate &date) {
  std::string out = std::to_string(date.day);
  out += ' ';
  out += MonthName(date.month);
  out += ' ';
  out += std::to_string(date.year);
  return out;
}

CalendarDate ShiftDate(const CalendarDate &date, const DateShift &shift) {
  CalendarDate shifted = ShiftMonths(date, shift.years, 0, nullptr);
  shifted = ShiftMonths(shifted, 0, shift.months, nullptr);
  if (shift.days == 0) return shifted;
  shifted = CivilFromDays(DaysFromCivil(shifted) + shift.days);
  if (shifted.year < kMinYear || shifted.year > kMaxYear) {
    throw InvalidArgument("shifted date outside [1, 9999]");
  }
  return shifted;
}

bool ShiftClamps(const CalendarDate &date, const DateShift &shift) {
  bool by_years = false, by_months = false;
  const CalendarDate mid = ShiftMonths(date, shift.years, 0, &by_years);
  ShiftMonths(mid, 0, shift.months, &by_months);
  return by_years || by_months;
}

// Howard Hinnant's days_from_civil / civil_from_days.
int64_t DaysFromCivil(const CalendarDate &date) {
  const int64_t y = date.year - (date.month <= 2 ? 1 : 0);
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int64_t yoe = y - era * 400;
  const int64_t m = date.month;
  const int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + date.day - 1;
  const int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

CalendarDate CivilFromDays(int64_t days) {
  days += 719468;
  const int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const int64_t doe = days - era * 146097;
  const int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int64_t mp = (5 * doy + 2) / 153;
  const int day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  const int month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  const int64_t year = yoe + era * 400 + (month <= 2 ? 1 : 0);
  return {static_cast<int>(year), month, day};
}

std::vector<LabeledShift> StandardPerturbations() {
  return {
      {"m+1", {0, 1, 0}}, {"m-1", {0, -1, 0}},  {"m+6", {0, 6, 0}},
      {"m-6", {0, -6, 0}}, {"y+1", {1, 0, 0}}, {"y-1", {-1, 0, 0}},
  };
}

}  // namespace tap
