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

#include "tap/tokenizer.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "tap/error.h"
#include "tap/random.h"

namespace tap {

namespace {

const std::vector<std::string> &ReservedTokens() {
  static const std::vector<std::string> kReserved = {"<pad>", "<bos>", "<eos>",
                                                     "<unk>", "<sep>"};
  return kReserved;
}

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

std::vector<std::string> SplitWhitespace(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

Vocabulary::Vocabulary() : Vocabulary(ReservedTokens()) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw InvalidArgument("duplicate vocabulary token \"" + tokens_[i] + "\"");
    }
  }
}

Vocabulary Vocabulary::Build(const std::vector<std::string> &corpus,
                             int min_count) {
  if (corpus.empty()) throw InvalidArgument("cannot build vocabulary from an empty corpus");
  std::map<std::string, int64_t> counts;
  for (const std::string &line : corpus) {
    for (std::string &token : SplitWhitespace(line)) ++counts[std::move(token)];
  }
  std::vector<std::pair<std::string, int64_t>> ranked;
  for (auto &[token, count] : counts) {
    if (count < min_count) continue;
    if (std::find(ReservedTokens().begin(), ReservedTokens().end(), token) !=
        ReservedTokens().end()) {
      continue;
    }
    ranked.emplace_back(token, count);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens = ReservedTokens();
  for (auto &entry : ranked) tokens.push_back(std::move(entry.first));
  return Vocabulary(std::move(tokens));
}

std::string Vocabulary::Serialize() const {
  std::string out;
  for (size_t i = 0; i < tokens_.size(); ++i) {
    out += tokens_[i];
    out += '\t';
    out += std::to_string(i);
    out += '\n';
  }
  return out;
}

Vocabulary Vocabulary::Deserialize(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError("vocabulary line " + std::to_string(line_no) +
                       ": expected token<TAB>id");
    }
    const std::string id_text = line.substr(tab + 1);
    if (id_text != std::to_string(tokens.size())) {
      throw ParseError("vocabulary line " + std::to_string(line_no) +
                       ": ids must be contiguous from 0");
    }
    tokens.push_back(line.substr(0, tab));
  }
  if (tokens.size() < kNumReserved ||
      !std::equal(ReservedTokens().begin(), ReservedTokens().end(),
                  tokens.begin())) {
    throw ParseError("vocabulary must start with the five reserved tokens");
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Deserialize(buffer.str());
}

void Vocabulary::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file " + path);
  out << Serialize();
  if (!out) throw IoError("failed writing vocabulary file " + path);
}

bool Vocabulary::Contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

TokenId Vocabulary::Id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string &Vocabulary::Token(TokenId id) const {
  if (id < 0 || id >= size()) {
    throw InvalidArgument("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[id];
}

std::vector<TokenId> Vocabulary::Encode(std::string_view text) const {
  return EncodeTokens(SplitWhitespace(text));
}

std::vector<TokenId> Vocabulary::EncodeTokens(
    const std::vector<std::string> &tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const std::string &token : tokens) ids.push_back(Id(token));
  return ids;
}

std::string Vocabulary::Decode(const std::vector<TokenId> &ids) const {
  std::string out;
  for (TokenId id : ids) {
    const std::string &token = Token(id);
    if (id == kPadId || id == kBosId || id == kEosId || id == kSepId) continue;
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

uint64_t Vocabulary::Fingerprint() const { return Fnv1a(Serialize()); }

}  // namespace tap
