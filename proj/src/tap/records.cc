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

#include "tap/records.h"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tap/error.h"

namespace tap {

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string &path, const std::string &contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << contents;
  if (!out) throw IoError("failed writing " + path);
}

std::vector<CorpusRecord> ReadCorpus(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + path);
  std::vector<CorpusRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("timestamp") || !j.contains("source") ||
        !j.contains("target")) {
      throw ParseError(where + ": record needs timestamp, source and target");
    }
    CorpusRecord r;
    try {
      r.timestamp = ParseDate(j.at("timestamp").get<std::string>());
      r.source = j.at("source").get<std::string>();
      r.target = j.at("target").get<std::string>();
      if (j.contains("id")) r.id = j.at("id").get<std::string>();
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(where + ": " + e.what());
    } catch (const Error &e) {
      throw ParseError(where + ": " + e.what());
    }
    records.push_back(std::move(r));
  }
  return records;
}

void WriteCorpus(const std::string &path, const std::vector<CorpusRecord> &records) {
  std::string out;
  for (const CorpusRecord &r : records) {
    nlohmann::ordered_json j;
    if (!r.id.empty()) j["id"] = r.id;
    j["timestamp"] = FormatIsoDate(r.timestamp);
    j["source"] = r.source;
    j["target"] = r.target;
    out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  WriteFile(path, out);
}

}  // namespace tap
