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

#ifndef TAP_METRICS_H_
#define TAP_METRICS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace tap {

// Word-level, case-sensitive metrics. "<pad>" tokens are ignored everywhere.
using Tokens = std::vector<std::string>;

// A corpus-level value with optional per-sample values. For mean-aggregated
// metrics the corpus value is the mean of the per-sample values; BLEU-4 and
// TER aggregate sufficient statistics instead (see each function).
struct ScoreReport {
  std::string metric;
  double value = 0.0;
  std::vector<double> per_sample;
};

// Corpus BLEU-4 on a 0-100 scale: clipped n-gram precisions for n = 1..4,
// geometric mean, brevity penalty exp(1 - r/c) when c < r. No smoothing, so
// any n with zero matches yields 0. Throws on a count mismatch.
double Bleu4Corpus(const std::vector<Tokens> &hypotheses,
                   const std::vector<Tokens> &references);

// ROUGE-N F1 in [0, 1] with clipped n-gram counts.
double RougeN(const Tokens &hypothesis, const Tokens &reference, int n);

// LCS-based ROUGE-L F1 in [0, 1].
double RougeL(const Tokens &hypothesis, const Tokens &reference);
int64_t LongestCommonSubsequence(const Tokens &a, const Tokens &b);

// Word-level Levenshtein distance, unit costs.
int64_t TokenEditDistance(const Tokens &a, const Tokens &b);

// Number of edits (insertions, deletions, substitutions and block shifts)
// found by the greedy shift search. See Ter().
int64_t TerEdits(const Tokens &hypothesis, const Tokens &reference);

// TER = TerEdits / |reference|. The shift search repeatedly applies the one
// block move of the hypothesis with the largest net gain (edit distance
// reduction minus the one edit the shift costs) until no move has positive
// gain. Blocks are at most 10 tokens and move at most 50 positions. Ties prefer the earliest source, the shortest block and then the
// leftmost destination. Throws InvalidArgument on an empty reference.
double Ter(const Tokens &hypothesis, const Tokens &reference);

// Corpus TER: total edits over total reference length.
double TerCorpus(const std::vector<Tokens> &hypotheses,
                 const std::vector<Tokens> &references);

// Paired approximate randomization test, two-sided on |mean(a) - mean(b)|.
// Each iteration swaps every pair independently with probability 1/2;
// p = (hits + 1) / (iterations + 1). Deterministic per seed.
double ApproxRandomizationTest(const std::vector<double> &scores_a,
                               const std::vector<double> &scores_b,
                               int64_t iterations, uint64_t seed);

// Convenience reports.
ScoreReport RougeReport(const std::vector<Tokens> &hypotheses,
                        const std::vector<Tokens> &references, int n);
ScoreReport RougeLReport(const std::vector<Tokens> &hypotheses,
                         const std::vector<Tokens> &references);
ScoreReport ExactMatchReport(const std::vector<Tokens> &hypotheses,
                             const std::vector<Tokens> &references);

}  // namespace tap

#endif  // TAP_METRICS_H_
