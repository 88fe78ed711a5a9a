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

#include "tap/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "tap/error.h"
#include "tap/random.h"

namespace tap {

namespace {

using NgramCounts = std::map<Tokens, int64_t>;

NgramCounts CountNgrams(const Tokens &tokens, int n) {
  NgramCounts counts;
  if (n <= 0 || static_cast<int>(tokens.size()) < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Tokens(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

int64_t ClippedMatches(const NgramCounts &hyp, const NgramCounts &ref) {
  int64_t matches = 0;
  for (const auto &[gram, count] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(count, it->second);
  }
  return matches;
}

double F1(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

void CheckSameCount(size_t a, size_t b) {
  if (a != b) {
    throw InvalidArgument("hypothesis count " + std::to_string(a) +
                          " != reference count " + std::to_string(b));
  }
}

// Block-move limits of the reference TER tooling; they only bind on
// sequences longer than ten tokens.
constexpr size_t kMaxShiftLength = 10;
constexpr size_t kMaxShiftDistance = 50;

// Greedy shift search state.
struct Shift {
  size_t start;
  size_t length;
  size_t dest;  // insertion index in the sequence with the block removed
};

Tokens ApplyShift(const Tokens &tokens, const Shift &shift) {
  Tokens rest;
  rest.reserve(tokens.size());
  rest.insert(rest.end(), tokens.begin(), tokens.begin() + shift.start);
  rest.insert(rest.end(), tokens.begin() + shift.start + shift.length,
              tokens.end());
  Tokens out(rest.begin(), rest.begin() + shift.dest);
  out.insert(out.end(), tokens.begin() + shift.start,
             tokens.begin() + shift.start + shift.length);
  out.insert(out.end(), rest.begin() + shift.dest, rest.end());
  return out;
}

// "<pad>" tokens carry no content; every metric ignores them.
Tokens StripPad(const Tokens &tokens) {
  Tokens out;
  out.reserve(tokens.size());
  for (const std::string &t : tokens) {
    if (t != "<pad>") out.push_back(t);
  }
  return out;
}

std::vector<Tokens> StripPad(const std::vector<Tokens> &batch) {
  std::vector<Tokens> out;
  out.reserve(batch.size());
  for (const Tokens &t : batch) out.push_back(StripPad(t));
  return out;
}

int64_t EditDistance(const Tokens &a, const Tokens &b) {
  std::vector<int64_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      const int64_t substitution = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({substitution, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

int64_t Lcs(const Tokens &a, const Tokens &b) {
  std::vector<int64_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

int64_t GreedyTerEdits(const Tokens &hypothesis, const Tokens &reference) {
  Tokens current = hypothesis;
  int64_t shifts = 0;
  int64_t distance = EditDistance(current, reference);
  const size_t n = current.size();
  while (distance > 0) {
    int64_t best_gain = 0;
    Tokens best;
    for (size_t start = 0; start < n; ++start) {
      for (size_t length = 1; length <= kMaxShiftLength && start + length <= n;
           ++length) {
        for (size_t dest = 0; dest <= n - length; ++dest) {
          if (dest == start) continue;  // identity move
          const size_t travel = dest > start ? dest - start : start - dest;
          if (travel > kMaxShiftDistance) continue;
          Tokens moved = ApplyShift(current, {start, length, dest});
          const int64_t gain = distance - EditDistance(moved, reference) - 1;
          if (gain > best_gain) {
            best_gain = gain;
            best = std::move(moved);
          }
        }
      }
    }
    if (best_gain <= 0) break;
    current = std::move(best);
    distance -= best_gain + 1;
    ++shifts;
  }
  return shifts + distance;
}

}  // namespace

double Bleu4Corpus(const std::vector<Tokens> &hypotheses_in,
                   const std::vector<Tokens> &references_in) {
  const std::vector<Tokens> hypotheses = StripPad(hypotheses_in);
  const std::vector<Tokens> references = StripPad(references_in);
  CheckSameCount(hypotheses.size(), references.size());
  if (references.empty()) throw InvalidArgument("BLEU needs at least one reference");
  int64_t matches[4] = {0, 0, 0, 0};
  int64_t totals[4] = {0, 0, 0, 0};
  int64_t hyp_length = 0;
  int64_t ref_length = 0;
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    hyp_length += static_cast<int64_t>(hypotheses[i].size());
    ref_length += static_cast<int64_t>(references[i].size());
    for (int n = 1; n <= 4; ++n) {
      matches[n - 1] += ClippedMatches(CountNgrams(hypotheses[i], n),
                                       CountNgrams(references[i], n));
      totals[n - 1] += std::max<int64_t>(
          0, static_cast<int64_t>(hypotheses[i].size()) - n + 1);
    }
  }
  if (hyp_length == 0) return 0.0;
  double log_precision = 0.0;
  for (int n = 0; n < 4; ++n) {
    if (matches[n] == 0 || totals[n] == 0) return 0.0;
    log_precision += std::log(static_cast<double>(matches[n]) / totals[n]);
  }
  log_precision /= 4.0;
  double log_bp = 0.0;
  if (hyp_length < ref_length) {
    log_bp = 1.0 - static_cast<double>(ref_length) / hyp_length;
  }
  return 100.0 * std::exp(log_bp + log_precision);
}

double RougeN(const Tokens &hypothesis_in, const Tokens &reference_in, int n) {
  const Tokens hypothesis = StripPad(hypothesis_in), reference = StripPad(reference_in);
  if (n < 1) throw InvalidArgument("ROUGE-N requires n >= 1");
  const NgramCounts hyp = CountNgrams(hypothesis, n);
  const NgramCounts ref = CountNgrams(reference, n);
  const int64_t hyp_total = std::max<int64_t>(0, static_cast<int64_t>(hypothesis.size()) - n + 1);
  const int64_t ref_total = std::max<int64_t>(0, static_cast<int64_t>(reference.size()) - n + 1);
  if (hyp_total == 0 || ref_total == 0) return 0.0;
  const double overlap = static_cast<double>(ClippedMatches(hyp, ref));
  return F1(overlap / hyp_total, overlap / ref_total);
}

int64_t LongestCommonSubsequence(const Tokens &a, const Tokens &b) {
  return Lcs(StripPad(a), StripPad(b));
}

double RougeL(const Tokens &hypothesis_in, const Tokens &reference_in) {
  const Tokens hypothesis = StripPad(hypothesis_in), reference = StripPad(reference_in);
  if (hypothesis.empty() || reference.empty()) return 0.0;
  const double lcs = static_cast<double>(Lcs(hypothesis, reference));
  return F1(lcs / hypothesis.size(), lcs / reference.size());
}

int64_t TokenEditDistance(const Tokens &a, const Tokens &b) {
  return EditDistance(StripPad(a), StripPad(b));
}

int64_t TerEdits(const Tokens &hypothesis, const Tokens &reference) {
  return GreedyTerEdits(StripPad(hypothesis), StripPad(reference));
}

double Ter(const Tokens &hypothesis, const Tokens &reference_in) {
  const Tokens reference = StripPad(reference_in);
  if (reference.empty()) throw InvalidArgument("TER is undefined for an empty reference");
  return static_cast<double>(GreedyTerEdits(StripPad(hypothesis), reference)) / reference.size();
}

double TerCorpus(const std::vector<Tokens> &hypotheses,
                 const std::vector<Tokens> &references) {
  CheckSameCount(hypotheses.size(), references.size());
  int64_t edits = 0;
  int64_t length = 0;
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    edits += TerEdits(hypotheses[i], references[i]);
    length += static_cast<int64_t>(StripPad(references[i]).size());
  }
  if (length == 0) throw InvalidArgument("TER is undefined for empty references");
  return static_cast<double>(edits) / length;
}

double ApproxRandomizationTest(const std::vector<double> &scores_a,
                               const std::vector<double> &scores_b,
                               int64_t iterations, uint64_t seed) {
  CheckSameCount(scores_a.size(), scores_b.size());
  if (scores_a.empty()) throw InvalidArgument("randomization test needs >= 1 pair");
  if (iterations < 1) throw InvalidArgument("randomization test needs >= 1 iteration");
  const size_t n = scores_a.size();
  std::vector<double> diffs(n);
  double scale = 0.0;
  for (size_t i = 0; i < n; ++i) {
    diffs[i] = scores_a[i] - scores_b[i];
    scale = std::max({scale, std::fabs(scores_a[i]), std::fabs(scores_b[i])});
  }
  auto statistic = [&](const std::vector<double> &d) {
    double sum = 0.0;
    for (double x : d) sum += x;
    return std::fabs(sum) / static_cast<double>(n);
  };
  const double observed = statistic(diffs);
  // Rounding in a - b differs by a few ulps of the operands; treat pseudo
  // statistics within that band as ties so the p-value is stable under a
  // common shift of both score lists.
  const double tolerance = 1e-9 * std::max(1.0, scale);
  Rng rng(seed);
  int64_t hits = 0;
  std::vector<double> swapped(n);
  for (int64_t it = 0; it < iterations; ++it) {
    for (size_t i = 0; i < n; ++i) {
      swapped[i] = (rng.Next() >> 63) ? -diffs[i] : diffs[i];
    }
    if (statistic(swapped) >= observed - tolerance) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(iterations + 1);
}

ScoreReport RougeReport(const std::vector<Tokens> &hypotheses,
                        const std::vector<Tokens> &references, int n) {
  CheckSameCount(hypotheses.size(), references.size());
  ScoreReport report{"rouge" + std::to_string(n), 0.0, {}};
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    report.per_sample.push_back(RougeN(hypotheses[i], references[i], n));
  }
  for (double v : report.per_sample) report.value += v;
  if (!hypotheses.empty()) report.value /= hypotheses.size();
  return report;
}

ScoreReport RougeLReport(const std::vector<Tokens> &hypotheses,
                         const std::vector<Tokens> &references) {
  CheckSameCount(hypotheses.size(), references.size());
  ScoreReport report{"rougeL", 0.0, {}};
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    report.per_sample.push_back(RougeL(hypotheses[i], references[i]));
  }
  for (double v : report.per_sample) report.value += v;
  if (!hypotheses.empty()) report.value /= hypotheses.size();
  return report;
}

ScoreReport ExactMatchReport(const std::vector<Tokens> &hypotheses,
                             const std::vector<Tokens> &references) {
  CheckSameCount(hypotheses.size(), references.size());
  ScoreReport report{"exact_match", 0.0, {}};
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    report.per_sample.push_back(StripPad(hypotheses[i]) == StripPad(references[i]) ? 1.0 : 0.0);
  }
  for (double v : report.per_sample) report.value += v;
  if (!hypotheses.empty()) report.value /= hypotheses.size();
  return report;
}

}  // namespace tap
