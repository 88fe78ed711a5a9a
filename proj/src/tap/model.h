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

#ifndef TAP_MODEL_H_
#define TAP_MODEL_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tap/linalg.h"
#include "tap/prompts.h"
#include "tap/temporal.h"
#include "tap/tokenizer.h"

namespace tap {

// Where (and whether) the timestamp is injected.
enum class PromptKind {
  kNone = 0,
  kEncText = 1,
  kEncLinear = 2,
  kDecText = 3,
  kDecLinear = 4,
};

struct PromptVariant {
  PromptKind kind = PromptKind::kNone;
  int template_id = kDefaultTemplateId;  // used by the *_TEXT kinds

  bool is_text() const {
    return kind == PromptKind::kEncText || kind == PromptKind::kDecText;
  }
  bool is_linear() const {
    return kind == PromptKind::kEncLinear || kind == PromptKind::kDecLinear;
  }
  bool on_decoder() const {
    return kind == PromptKind::kDecText || kind == PromptKind::kDecLinear;
  }
};

// "NONE", "ENC_TEXT", "ENC_LINEAR", "DEC_TEXT", "DEC_LINEAR".
std::string_view PromptKindName(PromptKind kind);
PromptKind ParsePromptKind(std::string_view name);
const std::vector<PromptKind> &AllPromptKinds();

struct ModelConfig {
  int vocab_size = 0;
  int d_model = 64;
  int n_heads = 4;
  int n_enc_layers = 2;
  int n_dec_layers = 2;
  int d_ff = 128;
  int max_len = 64;
  double dropout = 0.1;
  uint64_t seed = 0;

  // Throws InvalidArgument on inconsistent sizes.
  void Validate() const;
};

struct TimedSample {
  std::vector<TokenId> source;
  std::vector<TokenId> target;
  CalendarDate timestamp;
};

struct LayerNormParams {
  RowVector gain;
  RowVector bias;
};

struct AttentionParams {
  Matrix wq, wk, wv, wo;
  RowVector bq, bk, bv, bo;
};

struct FeedForwardParams {
  Matrix w1;
  RowVector b1;
  Matrix w2;
  RowVector b2;
};

struct EncoderLayerParams {
  LayerNormParams ln_attn;
  AttentionParams attn;
  LayerNormParams ln_ffn;
  FeedForwardParams ffn;
};

struct DecoderLayerParams {
  LayerNormParams ln_self;
  AttentionParams self_attn;
  LayerNormParams ln_cross;
  AttentionParams cross_attn;
  LayerNormParams ln_ffn;
  FeedForwardParams ffn;
};

// Pre-layer-norm encoder-decoder with tied input/output embeddings and
// learned positions. linear_prompt is present iff the variant is *_LINEAR.
struct ModelParameters {
  Matrix token_embedding;  // vocab_size x d_model
  Matrix enc_position;     // max_len x d_model
  Matrix dec_position;     // max_len x d_model
  std::vector<EncoderLayerParams> encoder;
  LayerNormParams enc_final;
  std::vector<DecoderLayerParams> decoder;
  LayerNormParams dec_final;
  std::optional<LinearPromptParams> linear_prompt;
};

// A named, contiguous view of one parameter array.
struct ParamView {
  std::string name;
  double *data;
  int64_t rows;
  int64_t cols;

  int64_t size() const { return rows * cols; }
};

// Every array in a fixed order with stable names ("encoder.0.attn.wq", ...).
std::vector<ParamView> ParameterViews(ModelParameters &params);
int64_t ParameterCount(const ModelParameters &params);

ModelParameters InitParameters(const ModelConfig &config,
                               const PromptVariant &variant);
// Same shapes, all zeros (gradient / optimizer state buffers).
ModelParameters ZerosLike(const ModelParameters &params);
bool AllFinite(const ModelParameters &params);

// One position of an encoder or decoder stream: a token, or one of the three
// linear prompt vectors (slot 0 = year, 1 = month, 2 = day).
struct StreamEntry {
  TokenId token = kPadId;
  int prompt_slot = -1;

  bool is_prompt() const { return prompt_slot >= 0; }
  friend bool operator==(const StreamEntry &, const StreamEntry &) = default;
};

struct AssembledInputs {
  std::vector<StreamEntry> encoder;
  std::vector<StreamEntry> decoder;
  // labels[i] is the token predicted at decoder position i.
  std::vector<TokenId> labels;
  std::vector<double> loss_mask;
  DateScalars scalars{0.0, 0.0, 0.0};
  // Decoder positions up to and including BOS; force-fed at inference.
  int decoder_prefix = 0;
};

// Lays out the encoder and decoder streams for one sample under a variant.
// Throws InvalidArgument when either stream exceeds max_len or the variant
// disagrees with the parameters.
AssembledInputs AssembleInputs(const TimedSample &sample,
                               const PromptVariant &variant,
                               const Vocabulary &vocab,
                               const ModelParameters &params,
                               const ModelConfig &config);

// Inference layout: the decoder holds only the forced prefix.
AssembledInputs AssemblePrefix(const std::vector<TokenId> &source,
                               const CalendarDate &timestamp,
                               const PromptVariant &variant,
                               const Vocabulary &vocab,
                               const ModelParameters &params,
                               const ModelConfig &config);

// Logits (decoder positions x vocab_size) for one sample; dropout off.
Matrix Forward(const ModelParameters &params, const ModelConfig &config,
               const AssembledInputs &inputs);

// Masked mean token cross-entropy. PAD labels never count. Throws
// InvalidArgument when no position is counted.
double Loss(const Matrix &logits, const std::vector<TokenId> &labels,
            const std::vector<double> &loss_mask);

// Batch loss and its gradient with respect to every parameter. Pass an rng
// to enable dropout.
struct LossAndGradient {
  double loss = 0.0;
  ModelParameters gradient;
};
LossAndGradient ComputeLossAndGradient(const ModelParameters &params,
                                       const ModelConfig &config,
                                       const std::vector<AssembledInputs> &batch,
                                       class Rng *dropout_rng);
double BatchLoss(const ModelParameters &params, const ModelConfig &config,
                 const std::vector<AssembledInputs> &batch);

struct GradCheckOptions {
  double epsilon = 1e-4;
  // Lower bound of the relative-error denominator. Central differences of an
  // O(1) loss carry about 1e-11 of rounding noise, so gradients much smaller
  // than this cannot be resolved.
  double floor = 1e-6;
  // Coordinates sampled in addition to every linear prompt coordinate.
  int coordinates = 256;
  uint64_t seed = 0;
  // Fault-injection hook applied to analytic gradients before comparison.
  std::function<void(ModelParameters &)> tamper;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  int64_t checked = 0;
  std::string worst_parameter;
};

// Central finite differences against the analytic gradient, dropout off.
// Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckResult GradCheck(const ModelParameters &params,
                          const ModelConfig &config,
                          const std::vector<AssembledInputs> &batch,
                          const GradCheckOptions &options = {});

struct TrainHyper {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int steps = 1000;
  uint64_t seed = 0;
};

struct TrainResult {
  ModelParameters params;
  std::vector<double> losses;  // one per step
};

// Adam (0.9, 0.999, 1e-8) at a fixed learning rate over seeded shuffled
// batches; the parameter initialization uses config.seed. Throws
// Error(kDiverged) naming the step when the loss becomes non-finite.
TrainResult Train(const ModelConfig &config, const PromptVariant &variant,
                  const Vocabulary &vocab, const std::vector<TimedSample> &data,
                  const TrainHyper &hyper,
                  const std::function<void(int, double)> &on_step = {});

// Everything needed to run a trained model.
struct Model {
  ModelConfig config;
  PromptVariant variant;
  ModelParameters params;
  Vocabulary vocab;
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // without the forced prefix or EOS
  double log_prob = 0.0;
  bool finished = false;
};

// Argmax continuation of the forced prefix until EOS or max_len generated
// tokens; PAD and BOS are never produced; ties go to the lower token id.
Hypothesis DecodeGreedy(const Model &model, const std::vector<TokenId> &source,
                        const CalendarDate &timestamp, int max_len);

// Length-unnormalized beam search. Finished hypotheses stay in the beam and
// compete with live ones; ranking ties go to the lexicographically smaller
// token sequence.
Hypothesis DecodeBeam(const Model &model, const std::vector<TokenId> &source,
                      const CalendarDate &timestamp, int beam_size,
                      int max_len);

// Log-probability of a continuation (tokens, then EOS if finished) under
// the model.
double SequenceLogProb(const Model &model, const std::vector<TokenId> &source,
                       const CalendarDate &timestamp,
                       const std::vector<TokenId> &tokens, bool finished);

std::string Generate(const Model &model, std::string_view source,
                     const CalendarDate &timestamp, int beam_size, int max_len);

// Binary checkpoint; layout in docs/checkpoint.md. The vocabulary is
// referenced by path (relative to the checkpoint) and fingerprint.
void SaveCheckpoint(const Model &model, const std::string &path,
                    const std::string &vocab_reference);
// Loads vocab from vocab_path when given, else from the stored reference.
Model LoadCheckpoint(const std::string &path,
                     const std::string &vocab_path = "");

}  // namespace tap

#endif  // TAP_MODEL_H_
