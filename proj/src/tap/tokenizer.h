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

#ifndef TAP_TOKENIZER_H_
#define TAP_TOKENIZER_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tap {

using TokenId = int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kBosId = 1;
inline constexpr TokenId kEosId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr TokenId kSepId = 4;
inline constexpr int kNumReserved = 5;

// Splits on ASCII whitespace.
std::vector<std::string> SplitWhitespace(std::string_view text);

// Token <-> id bijection. Ids are contiguous from 0; the first five are the
// reserved specials <pad> <bos> <eos> <unk> <sep>. Immutable once built.
class Vocabulary {
 public:
  // Only the reserved tokens.
  Vocabulary();

  // Tokens with frequency >= min_count, ordered by descending frequency,
  // then lexicographically. Throws InvalidArgument on an empty corpus.
  static Vocabulary Build(const std::vector<std::string> &corpus,
                          int min_count);

  // Line format "token<TAB>id", ids in ascending order.
  static Vocabulary Load(const std::string &path);
  void Save(const std::string &path) const;
  std::string Serialize() const;
  static Vocabulary Deserialize(std::string_view text);

  int size() const { return static_cast<int>(tokens_.size()); }
  bool Contains(std::string_view token) const;
  TokenId Id(std::string_view token) const;  // kUnkId when absent
  const std::string &Token(TokenId id) const;

  std::vector<TokenId> Encode(std::string_view text) const;
  std::vector<TokenId> EncodeTokens(const std::vector<std::string> &tokens) const;

  // Joins tokens with single spaces, dropping PAD/BOS/EOS/SEP. Throws
  // InvalidArgument for out-of-range ids.
  std::string Decode(const std::vector<TokenId> &ids) const;

  // Stable fingerprint of the token list, stored in checkpoints.
  uint64_t Fingerprint() const;

  friend bool operator==(const Vocabulary &a, const Vocabulary &b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  explicit Vocabulary(std::vector<std::string> tokens);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace tap

#endif  // TAP_TOKENIZER_H_
