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

#ifndef TAP_RECORDS_H_
#define TAP_RECORDS_H_

#include <string>
#include <vector>

#include "tap/temporal.h"

namespace tap {

// One line of the shared corpus format (JSON Lines):
//   {"id": "...", "timestamp": "YYYY-MM-DD", "source": "...", "target": "..."}
// "id" is optional on input.
struct CorpusRecord {
  std::string id;
  CalendarDate timestamp;
  std::string source;
  std::string target;

  friend bool operator==(const CorpusRecord &, const CorpusRecord &) = default;
};

std::vector<CorpusRecord> ReadCorpus(const std::string &path);
void WriteCorpus(const std::string &path, const std::vector<CorpusRecord> &records);

// Whole-file helpers shared by the writers; they throw IoError.
std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, const std::string &contents);

}  // namespace tap

#endif  // TAP_RECORDS_H_
