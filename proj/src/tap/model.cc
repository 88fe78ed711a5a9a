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

#include "tap/model.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "tap/error.h"
#include "tap/random.h"

namespace tap {

namespace {

constexpr double kInitStddev = 0.02;
constexpr double kLayerNormEps = 1e-5;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Packed batches. Sequences of a batch are stacked row-wise; spans delimit
// them and attention is computed per span.

struct Span {
  int start = 0;
  int length = 0;
};

struct SegmentPairs {
  std::vector<Span> q;
  std::vector<Span> kv;
};

struct PackedSide {
  std::vector<StreamEntry> entries;
  std::vector<int> positions;
  std::vector<double> scalars;  // scalar multiplying the prompt vector
  std::vector<Span> spans;

  int rows() const { return static_cast<int>(entries.size()); }

  void Append(const std::vector<StreamEntry> &stream, const DateScalars &s) {
    spans.push_back({rows(), static_cast<int>(stream.size())});
    for (size_t i = 0; i < stream.size(); ++i) {
      entries.push_back(stream[i]);
      positions.push_back(static_cast<int>(i));
      scalars.push_back(stream[i].is_prompt() ? s[stream[i].prompt_slot] : 0.0);
    }
  }
};

struct Packed {
  PackedSide enc;
  PackedSide dec;
  std::vector<int> dec_to_enc;  // encoder span attended by each decoder span
  std::vector<TokenId> labels;
  std::vector<double> mask;

  SegmentPairs EncoderSelf() const { return {enc.spans, enc.spans}; }
  SegmentPairs DecoderSelf() const { return {dec.spans, dec.spans}; }
  SegmentPairs Cross() const {
    SegmentPairs pairs{dec.spans, {}};
    for (int e : dec_to_enc) pairs.kv.push_back(enc.spans[e]);
    return pairs;
  }
};

Packed PackBatch(const std::vector<AssembledInputs> &batch) {
  Packed packed;
  for (size_t b = 0; b < batch.size(); ++b) {
    const AssembledInputs &in = batch[b];
    packed.enc.Append(in.encoder, in.scalars);
    packed.dec.Append(in.decoder, in.scalars);
    packed.dec_to_enc.push_back(static_cast<int>(b));
    packed.labels.insert(packed.labels.end(), in.labels.begin(), in.labels.end());
    packed.mask.insert(packed.mask.end(), in.loss_mask.begin(), in.loss_mask.end());
  }
  return packed;
}

// ---------------------------------------------------------------------------
// Layers.

struct DropoutMask {
  Matrix scale;
  bool active = false;
};

void ApplyDropout(Matrix &x, double rate, Rng *rng, DropoutMask *mask) {
  mask->active = rng != nullptr && rate > 0.0;
  if (!mask->active) return;
  mask->scale.resize(x.rows(), x.cols());
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    mask->scale.data()[i] = rng->Uniform() < rate ? 0.0 : keep;
  }
  x.array() *= mask->scale.array();
}

void DropoutBackward(Matrix &grad, const DropoutMask &mask) {
  if (mask.active) grad.array() *= mask.scale.array();
}

struct LayerNormCache {
  Matrix normalized;
  Eigen::VectorXd inv_std;
};

Matrix LayerNormForward(const LayerNormParams &p, const Matrix &x,
                        LayerNormCache *cache) {
  const Eigen::Index cols = x.cols();
  cache->normalized.resize(x.rows(), cols);
  cache->inv_std.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / cols;
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
    cache->inv_std[r] = inv_std;
    cache->normalized.row(r) = (x.row(r).array() - mean) * inv_std;
  }
  Matrix y = cache->normalized.array().rowwise() * p.gain.array();
  y.rowwise() += p.bias;
  return y;
}

Matrix LayerNormBackward(const LayerNormParams &p, const LayerNormCache &cache,
                         const Matrix &dy, LayerNormParams &grad) {
  grad.gain += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  grad.bias += dy.colwise().sum();
  Matrix dnorm = dy.array().rowwise() * p.gain.array();
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dnorm.row(r).mean();
    const double mean_dn = dnorm.row(r).dot(cache.normalized.row(r)) / dy.cols();
    dx.row(r) = cache.inv_std[r] *
                (dnorm.row(r).array() - mean_d -
                 cache.normalized.row(r).array() * mean_dn);
  }
  return dx;
}

struct AttentionCache {
  Matrix xq, xkv, q, k, v, context;
  std::vector<Matrix> probs;  // span-major, head-minor
};

Matrix AttentionForward(const AttentionParams &p, int heads, const Matrix &xq,
                        const Matrix &xkv, const SegmentPairs &segs,
                        bool causal, AttentionCache *c) {
  const int d = static_cast<int>(p.wq.cols());
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  c->xq = xq;
  c->xkv = xkv;
  c->q.noalias() = xq * p.wq;
  c->q.rowwise() += p.bq;
  c->k.noalias() = xkv * p.wk;
  c->k.rowwise() += p.bk;
  c->v.noalias() = xkv * p.wv;
  c->v.rowwise() += p.bv;
  c->context.setZero(xq.rows(), d);
  c->probs.assign(segs.q.size() * heads, Matrix());
  for (size_t s = 0; s < segs.q.size(); ++s) {
    const Span qs = segs.q[s];
    const Span ks = segs.kv[s];
    for (int h = 0; h < heads; ++h) {
      Matrix scores = c->q.block(qs.start, h * dh, qs.length, dh) *
                      c->k.block(ks.start, h * dh, ks.length, dh).transpose() *
                      scale;
      if (causal) {
        for (int i = 0; i < qs.length; ++i) {
          for (int j = i + 1; j < ks.length; ++j) scores(i, j) = kNegInf;
        }
      }
      for (int i = 0; i < qs.length; ++i) {
        const double peak = scores.row(i).maxCoeff();
        scores.row(i) = (scores.row(i).array() - peak).exp();
        scores.row(i) /= scores.row(i).sum();
      }
      c->context.block(qs.start, h * dh, qs.length, dh).noalias() =
          scores * c->v.block(ks.start, h * dh, ks.length, dh);
      c->probs[s * heads + h] = std::move(scores);
    }
  }
  Matrix y = c->context * p.wo;
  y.rowwise() += p.bo;
  return y;
}

void AttentionBackward(const AttentionParams &p, int heads,
                       const SegmentPairs &segs, const AttentionCache &c,
                       const Matrix &dy, AttentionParams &g, Matrix *dxq,
                       Matrix *dxkv) {
  const int d = static_cast<int>(p.wq.cols());
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  g.wo.noalias() += c.context.transpose() * dy;
  g.bo += dy.colwise().sum();
  const Matrix dcontext = dy * p.wo.transpose();
  Matrix dq = Matrix::Zero(c.q.rows(), d);
  Matrix dk = Matrix::Zero(c.k.rows(), d);
  Matrix dv = Matrix::Zero(c.v.rows(), d);
  for (size_t s = 0; s < segs.q.size(); ++s) {
    const Span qs = segs.q[s];
    const Span ks = segs.kv[s];
    for (int h = 0; h < heads; ++h) {
      const Matrix &probs = c.probs[s * heads + h];
      const auto dctx = dcontext.block(qs.start, h * dh, qs.length, dh);
      const auto vblk = c.v.block(ks.start, h * dh, ks.length, dh);
      dv.block(ks.start, h * dh, ks.length, dh).noalias() += probs.transpose() * dctx;
      Matrix dprobs = dctx * vblk.transpose();
      Matrix dscores(qs.length, ks.length);
      for (int i = 0; i < qs.length; ++i) {
        const double dot = dprobs.row(i).dot(probs.row(i));
        dscores.row(i) = probs.row(i).array() * (dprobs.row(i).array() - dot) * scale;
      }
      dq.block(qs.start, h * dh, qs.length, dh).noalias() +=
          dscores * c.k.block(ks.start, h * dh, ks.length, dh);
      dk.block(ks.start, h * dh, ks.length, dh).noalias() +=
          dscores.transpose() * c.q.block(qs.start, h * dh, qs.length, dh);
    }
  }
  g.wq.noalias() += c.xq.transpose() * dq;
  g.bq += dq.colwise().sum();
  g.wk.noalias() += c.xkv.transpose() * dk;
  g.bk += dk.colwise().sum();
  g.wv.noalias() += c.xkv.transpose() * dv;
  g.bv += dv.colwise().sum();
  *dxq = dq * p.wq.transpose();
  *dxkv = dk * p.wk.transpose();
  dxkv->noalias() += dv * p.wv.transpose();
}

// tanh approximation of GELU.
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

struct FeedForwardCache {
  Matrix x, pre, act;
};

Matrix FeedForwardForward(const FeedForwardParams &p, const Matrix &x,
                          FeedForwardCache *c) {
  c->x = x;
  c->pre.noalias() = x * p.w1;
  c->pre.rowwise() += p.b1;
  c->act = c->pre.unaryExpr([](double u) {
    return 0.5 * u * (1.0 + std::tanh(kGeluC * (u + kGeluA * u * u * u)));
  });
  Matrix y = c->act * p.w2;
  y.rowwise() += p.b2;
  return y;
}

Matrix FeedForwardBackward(const FeedForwardParams &p, const FeedForwardCache &c,
                           const Matrix &dy, FeedForwardParams &g) {
  g.w2.noalias() += c.act.transpose() * dy;
  g.b2 += dy.colwise().sum();
  Matrix dact = dy * p.w2.transpose();
  const Matrix slope = c.pre.unaryExpr([](double u) {
    const double t = std::tanh(kGeluC * (u + kGeluA * u * u * u));
    return 0.5 * (1.0 + t) +
           0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * u * u);
  });
  dact.array() *= slope.array();
  g.w1.noalias() += c.x.transpose() * dact;
  g.b1 += dact.colwise().sum();
  return dact * p.w1.transpose();
}

struct EncoderLayerCache {
  LayerNormCache ln_attn;
  AttentionCache attn;
  DropoutMask drop_attn;
  LayerNormCache ln_ffn;
  FeedForwardCache ffn;
  DropoutMask drop_ffn;
};

struct DecoderLayerCache {
  LayerNormCache ln_self;
  AttentionCache self_attn;
  DropoutMask drop_self;
  LayerNormCache ln_cross;
  AttentionCache cross_attn;
  DropoutMask drop_cross;
  LayerNormCache ln_ffn;
  FeedForwardCache ffn;
  DropoutMask drop_ffn;
};

struct ForwardState {
  Packed packed;
  DropoutMask enc_embed_drop;
  std::vector<EncoderLayerCache> enc_layers;
  LayerNormCache enc_final;
  Matrix enc_out;
  DropoutMask dec_embed_drop;
  std::vector<DecoderLayerCache> dec_layers;
  LayerNormCache dec_final;
  Matrix dec_hidden;
  Matrix logits;
};

Matrix Embed(const ModelParameters &params, const PackedSide &side,
             const Matrix &positions) {
  Matrix x(side.rows(), params.token_embedding.cols());
  for (int r = 0; r < side.rows(); ++r) {
    const StreamEntry &e = side.entries[r];
    if (e.is_prompt()) {
      const LinearPromptParams &lp = *params.linear_prompt;
      const RowVector &w = e.prompt_slot == 0   ? lp.w_year
                           : e.prompt_slot == 1 ? lp.w_month
                                                : lp.w_day;
      x.row(r) = side.scalars[r] * w;
    } else {
      x.row(r) = params.token_embedding.row(e.token);
    }
    x.row(r) += positions.row(side.positions[r]);
  }
  return x;
}

void EmbedBackward(const PackedSide &side, const Matrix &dx,
                   ModelParameters &grad, Matrix &position_grad) {
  for (int r = 0; r < side.rows(); ++r) {
    const StreamEntry &e = side.entries[r];
    if (e.is_prompt()) {
      LinearPromptParams &lp = *grad.linear_prompt;
      RowVector &w = e.prompt_slot == 0   ? lp.w_year
                     : e.prompt_slot == 1 ? lp.w_month
                                          : lp.w_day;
      w += side.scalars[r] * dx.row(r);
    } else {
      grad.token_embedding.row(e.token) += dx.row(r);
    }
    position_grad.row(side.positions[r]) += dx.row(r);
  }
}

void CheckStreamAgainstParams(const PackedSide &side, const ModelParameters &params,
                              const ModelConfig &config) {
  for (const Span &s : side.spans) {
    if (s.length > config.max_len) {
      throw InvalidArgument("stream length " + std::to_string(s.length) +
                            " exceeds max_len " + std::to_string(config.max_len));
    }
    if (s.length == 0) throw InvalidArgument("empty stream");
  }
  for (const StreamEntry &e : side.entries) {
    if (e.is_prompt() && !params.linear_prompt) {
      throw InvalidArgument("linear prompt position without linear prompt parameters");
    }
    if (!e.is_prompt() && (e.token < 0 || e.token >= config.vocab_size)) {
      throw InvalidArgument("token id " + std::to_string(e.token) + " out of range");
    }
  }
}

void EncoderForward(const ModelParameters &params, const ModelConfig &config,
                    Rng *rng, ForwardState &st) {
  CheckStreamAgainstParams(st.packed.enc, params, config);
  const SegmentPairs segs = st.packed.EncoderSelf();
  Matrix x = Embed(params, st.packed.enc, params.enc_position);
  ApplyDropout(x, config.dropout, rng, &st.enc_embed_drop);
  st.enc_layers.resize(params.encoder.size());
  for (size_t l = 0; l < params.encoder.size(); ++l) {
    const EncoderLayerParams &p = params.encoder[l];
    EncoderLayerCache &c = st.enc_layers[l];
    Matrix h = LayerNormForward(p.ln_attn, x, &c.ln_attn);
    Matrix a = AttentionForward(p.attn, config.n_heads, h, h, segs, false, &c.attn);
    ApplyDropout(a, config.dropout, rng, &c.drop_attn);
    x += a;
    h = LayerNormForward(p.ln_ffn, x, &c.ln_ffn);
    Matrix f = FeedForwardForward(p.ffn, h, &c.ffn);
    ApplyDropout(f, config.dropout, rng, &c.drop_ffn);
    x += f;
  }
  st.enc_out = LayerNormForward(params.enc_final, x, &st.enc_final);
}

void DecoderForward(const ModelParameters &params, const ModelConfig &config,
                    Rng *rng, ForwardState &st) {
  CheckStreamAgainstParams(st.packed.dec, params, config);
  const SegmentPairs self = st.packed.DecoderSelf();
  const SegmentPairs cross = st.packed.Cross();
  Matrix y = Embed(params, st.packed.dec, params.dec_position);
  ApplyDropout(y, config.dropout, rng, &st.dec_embed_drop);
  st.dec_layers.resize(params.decoder.size());
  for (size_t l = 0; l < params.decoder.size(); ++l) {
    const DecoderLayerParams &p = params.decoder[l];
    DecoderLayerCache &c = st.dec_layers[l];
    Matrix h = LayerNormForward(p.ln_self, y, &c.ln_self);
    Matrix a = AttentionForward(p.self_attn, config.n_heads, h, h, self, true,
                                &c.self_attn);
    ApplyDropout(a, config.dropout, rng, &c.drop_self);
    y += a;
    h = LayerNormForward(p.ln_cross, y, &c.ln_cross);
    a = AttentionForward(p.cross_attn, config.n_heads, h, st.enc_out, cross,
                         false, &c.cross_attn);
    ApplyDropout(a, config.dropout, rng, &c.drop_cross);
    y += a;
    h = LayerNormForward(p.ln_ffn, y, &c.ln_ffn);
    Matrix f = FeedForwardForward(p.ffn, h, &c.ffn);
    ApplyDropout(f, config.dropout, rng, &c.drop_ffn);
    y += f;
  }
  st.dec_hidden = LayerNormForward(params.dec_final, y, &st.dec_final);
  st.logits.noalias() = st.dec_hidden * params.token_embedding.transpose();
}

ModelParameters Backward(const ModelParameters &params, const ModelConfig &config,
                         const ForwardState &st, const Matrix &dlogits) {
  ModelParameters g = ZerosLike(params);
  g.token_embedding.noalias() += dlogits.transpose() * st.dec_hidden;
  Matrix dy = dlogits * params.token_embedding;
  dy = LayerNormBackward(params.dec_final, st.dec_final, dy, g.dec_final);
  const SegmentPairs self = st.packed.DecoderSelf();
  const SegmentPairs cross = st.packed.Cross();
  Matrix denc = Matrix::Zero(st.enc_out.rows(), st.enc_out.cols());
  Matrix dq, dkv;
  for (size_t li = params.decoder.size(); li-- > 0;) {
    const DecoderLayerParams &p = params.decoder[li];
    const DecoderLayerCache &c = st.dec_layers[li];
    DecoderLayerParams &gl = g.decoder[li];

    Matrix df = dy;
    DropoutBackward(df, c.drop_ffn);
    Matrix dh = FeedForwardBackward(p.ffn, c.ffn, df, gl.ffn);
    dy += LayerNormBackward(p.ln_ffn, c.ln_ffn, dh, gl.ln_ffn);

    Matrix da = dy;
    DropoutBackward(da, c.drop_cross);
    AttentionBackward(p.cross_attn, config.n_heads, cross, c.cross_attn, da,
                      gl.cross_attn, &dq, &dkv);
    denc += dkv;
    dy += LayerNormBackward(p.ln_cross, c.ln_cross, dq, gl.ln_cross);

    da = dy;
    DropoutBackward(da, c.drop_self);
    AttentionBackward(p.self_attn, config.n_heads, self, c.self_attn, da,
                      gl.self_attn, &dq, &dkv);
    dq += dkv;
    dy += LayerNormBackward(p.ln_self, c.ln_self, dq, gl.ln_self);
  }
  DropoutBackward(dy, st.dec_embed_drop);
  EmbedBackward(st.packed.dec, dy, g, g.dec_position);

  const SegmentPairs enc_self = st.packed.EncoderSelf();
  Matrix dx = LayerNormBackward(params.enc_final, st.enc_final, denc, g.enc_final);
  for (size_t li = params.encoder.size(); li-- > 0;) {
    const EncoderLayerParams &p = params.encoder[li];
    const EncoderLayerCache &c = st.enc_layers[li];
    EncoderLayerParams &gl = g.encoder[li];

    Matrix df = dx;
    DropoutBackward(df, c.drop_ffn);
    Matrix dh = FeedForwardBackward(p.ffn, c.ffn, df, gl.ffn);
    dx += LayerNormBackward(p.ln_ffn, c.ln_ffn, dh, gl.ln_ffn);

    Matrix da = dx;
    DropoutBackward(da, c.drop_attn);
    AttentionBackward(p.attn, config.n_heads, enc_self, c.attn, da, gl.attn, &dq,
                      &dkv);
    dq += dkv;
    dx += LayerNormBackward(p.ln_attn, c.ln_attn, dq, gl.ln_attn);
  }
  DropoutBackward(dx, st.enc_embed_drop);
  EmbedBackward(st.packed.enc, dx, g, g.enc_position);
  return g;
}

// Masked cross-entropy; fills dlogits (same shape) when non-null.
double CrossEntropy(const Matrix &logits, const std::vector<TokenId> &labels,
                    const std::vector<double> &mask, Matrix *dlogits) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows() ||
      labels.size() != mask.size()) {
    throw InvalidArgument("logits, labels and loss mask disagree in length");
  }
  double weight = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kPadId) weight += mask[i];
  }
  if (weight <= 0.0) throw InvalidArgument("loss mask selects no positions");
  if (dlogits) dlogits->setZero(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double w = labels[r] == kPadId ? 0.0 : mask[r];
    if (w == 0.0) continue;
    if (labels[r] < 0 || labels[r] >= logits.cols()) {
      throw InvalidArgument("label id out of range");
    }
    const double peak = logits.row(r).maxCoeff();
    const RowVector shifted = logits.row(r).array() - peak;
    const double log_z = std::log(shifted.array().exp().sum());
    total += w * (log_z - shifted[labels[r]]);
    if (dlogits) {
      dlogits->row(r) = (shifted.array() - log_z).exp() * (w / weight);
      (*dlogits)(r, labels[r]) -= w / weight;
    }
  }
  return total / weight;
}

void FillGaussian(Matrix &m, Eigen::Index rows, Eigen::Index cols, Rng &rng) {
  m.resize(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = kInitStddev * rng.Gaussian();
}

void InitAttention(AttentionParams &a, int d, Rng &rng) {
  FillGaussian(a.wq, d, d, rng);
  FillGaussian(a.wk, d, d, rng);
  FillGaussian(a.wv, d, d, rng);
  FillGaussian(a.wo, d, d, rng);
  a.bq = RowVector::Zero(d);
  a.bk = RowVector::Zero(d);
  a.bv = RowVector::Zero(d);
  a.bo = RowVector::Zero(d);
}

void InitFeedForward(FeedForwardParams &f, int d, int d_ff, Rng &rng) {
  FillGaussian(f.w1, d, d_ff, rng);
  f.b1 = RowVector::Zero(d_ff);
  FillGaussian(f.w2, d_ff, d, rng);
  f.b2 = RowVector::Zero(d);
}

LayerNormParams InitLayerNorm(int d) {
  return {RowVector::Ones(d), RowVector::Zero(d)};
}

template <typename Params, typename Fn>
void VisitArrays(Params &p, Fn &&fn) {
  fn("token_embedding", p.token_embedding);
  fn("enc_position", p.enc_position);
  fn("dec_position", p.dec_position);
  auto ln = [&](const std::string &prefix, auto &n) {
    fn(prefix + ".gain", n.gain);
    fn(prefix + ".bias", n.bias);
  };
  auto attn = [&](const std::string &prefix, auto &a) {
    fn(prefix + ".wq", a.wq);
    fn(prefix + ".bq", a.bq);
    fn(prefix + ".wk", a.wk);
    fn(prefix + ".bk", a.bk);
    fn(prefix + ".wv", a.wv);
    fn(prefix + ".bv", a.bv);
    fn(prefix + ".wo", a.wo);
    fn(prefix + ".bo", a.bo);
  };
  auto ffn = [&](const std::string &prefix, auto &f) {
    fn(prefix + ".w1", f.w1);
    fn(prefix + ".b1", f.b1);
    fn(prefix + ".w2", f.w2);
    fn(prefix + ".b2", f.b2);
  };
  for (size_t l = 0; l < p.encoder.size(); ++l) {
    const std::string prefix = "encoder." + std::to_string(l);
    ln(prefix + ".ln_attn", p.encoder[l].ln_attn);
    attn(prefix + ".attn", p.encoder[l].attn);
    ln(prefix + ".ln_ffn", p.encoder[l].ln_ffn);
    ffn(prefix + ".ffn", p.encoder[l].ffn);
  }
  ln("enc_final", p.enc_final);
  for (size_t l = 0; l < p.decoder.size(); ++l) {
    const std::string prefix = "decoder." + std::to_string(l);
    ln(prefix + ".ln_self", p.decoder[l].ln_self);
    attn(prefix + ".self_attn", p.decoder[l].self_attn);
    ln(prefix + ".ln_cross", p.decoder[l].ln_cross);
    attn(prefix + ".cross_attn", p.decoder[l].cross_attn);
    ln(prefix + ".ln_ffn", p.decoder[l].ln_ffn);
    ffn(prefix + ".ffn", p.decoder[l].ffn);
  }
  ln("dec_final", p.dec_final);
  if (p.linear_prompt) {
    fn("linear_prompt.w_year", p.linear_prompt->w_year);
    fn("linear_prompt.w_month", p.linear_prompt->w_month);
    fn("linear_prompt.w_day", p.linear_prompt->w_day);
  }
}

// Pushes the prompt for one side.
void AppendTextPrompt(std::vector<StreamEntry> &stream, const CalendarDate &date,
                      int template_id, const Vocabulary &vocab) {
  for (const std::string &token : TextualPromptTokens(date, template_id)) {
    stream.push_back({vocab.Id(token), -1});
  }
}

void AppendLinearPrompt(std::vector<StreamEntry> &stream) {
  for (int slot = 0; slot < 3; ++slot) stream.push_back({kPadId, slot});
}

AssembledInputs AssembleImpl(const std::vector<TokenId> &source,
                             const std::vector<TokenId> *target,
                             const CalendarDate &timestamp,
                             const PromptVariant &variant,
                             const Vocabulary &vocab,
                             const ModelParameters &params,
                             const ModelConfig &config) {
  if (variant.is_linear() != params.linear_prompt.has_value()) {
    throw InvalidArgument(std::string("variant ") +
                          std::string(PromptKindName(variant.kind)) +
                          " does not match the model parameters");
  }
  AssembledInputs in;
  if (params.linear_prompt) {
    in.scalars = NormalizeDateScalars(timestamp, *params.linear_prompt);
  }
  switch (variant.kind) {
    case PromptKind::kEncText:
      AppendTextPrompt(in.encoder, timestamp, variant.template_id, vocab);
      in.encoder.push_back({kSepId, -1});
      break;
    case PromptKind::kEncLinear:
      AppendLinearPrompt(in.encoder);
      break;
    case PromptKind::kDecText:
      AppendTextPrompt(in.decoder, timestamp, variant.template_id, vocab);
      break;
    case PromptKind::kDecLinear:
      AppendLinearPrompt(in.decoder);
      break;
    case PromptKind::kNone:
      break;
  }
  for (TokenId id : source) in.encoder.push_back({id, -1});
  in.encoder.push_back({kEosId, -1});
  const size_t prompt_len = in.decoder.size();
  in.decoder.push_back({kBosId, -1});
  in.decoder_prefix = static_cast<int>(in.decoder.size());
  if (target) {
    for (TokenId id : *target) in.decoder.push_back({id, -1});
    for (size_t i = 1; i < in.decoder.size(); ++i) {
      in.labels.push_back(in.decoder[i].is_prompt() ? kPadId : in.decoder[i].token);
    }
    in.labels.push_back(kEosId);
    in.loss_mask.assign(in.decoder.size(), 1.0);
    for (size_t i = 0; i < prompt_len; ++i) in.loss_mask[i] = 0.0;
  }
  const int limit = config.max_len;
  if (static_cast<int>(in.encoder.size()) > limit ||
      static_cast<int>(in.decoder.size()) > limit) {
    throw InvalidArgument("assembled stream (encoder " +
                          std::to_string(in.encoder.size()) + ", decoder " +
                          std::to_string(in.decoder.size()) + ") exceeds max_len " +
                          std::to_string(limit));
  }
  return in;
}

// Log-softmax of the last row of each decoder span.
class DecodeSession {
 public:
  DecodeSession(const Model &model, const AssembledInputs &prefix)
      : model_(model), prefix_(prefix) {
    state_.packed.enc.Append(prefix.encoder, prefix.scalars);
    EncoderForward(model.params, model.config, nullptr, state_);
  }

  std::vector<RowVector> NextLogProbs(
      const std::vector<std::vector<TokenId>> &continuations) {
    state_.packed.dec = PackedSide();
    state_.packed.dec_to_enc.assign(continuations.size(), 0);
    for (const auto &cont : continuations) {
      std::vector<StreamEntry> stream = prefix_.decoder;
      for (TokenId id : cont) stream.push_back({id, -1});
      state_.packed.dec.Append(stream, prefix_.scalars);
    }
    DecoderForward(model_.params, model_.config, nullptr, state_);
    std::vector<RowVector> out;
    for (const Span &s : state_.packed.dec.spans) {
      RowVector row = state_.logits.row(s.start + s.length - 1);
      const double peak = row.maxCoeff();
      row.array() -= peak;
      row.array() -= std::log(row.array().exp().sum());
      out.push_back(std::move(row));
    }
    return out;
  }

  int MaxSteps(int max_len) const {
    return std::max(0, std::min(max_len, model_.config.max_len -
                                             static_cast<int>(prefix_.decoder.size()) + 1));
  }

 private:
  const Model &model_;
  const AssembledInputs &prefix_;
  ForwardState state_;
};

bool Selectable(TokenId id) { return id != kPadId && id != kBosId; }

bool RanksBefore(const Hypothesis &a, const Hypothesis &b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.tokens < b.tokens;
}

// --- checkpoint IO ---

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

constexpr char kMagic[8] = {'T', 'A', 'P', 'M', 'O', 'D', 'E', 'L'};
constexpr uint32_t kCheckpointVersion = 1;

class Writer {
 public:
  template <typename T>
  void Put(T value) {
    const char *p = reinterpret_cast<const char *>(&value);
    bytes_.append(p, sizeof(T));
  }
  void PutString(const std::string &s) {
    Put<uint32_t>(static_cast<uint32_t>(s.size()));
    bytes_ += s;
  }
  void PutDoubles(const double *data, int64_t n) {
    bytes_.append(reinterpret_cast<const char *>(data), n * sizeof(double));
  }
  std::string &bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  template <typename T>
  T Get() {
    Need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string GetString() {
    const uint32_t n = Get<uint32_t>();
    Need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void GetDoubles(double *out, int64_t n) {
    Need(n * sizeof(double));
    std::memcpy(out, bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  size_t pos() const { return pos_; }

 private:
  void Need(size_t n) {
    if (pos_ + n > bytes_.size()) throw ParseError("checkpoint truncated");
  }
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------

std::string_view PromptKindName(PromptKind kind) {
  switch (kind) {
    case PromptKind::kNone: return "NONE";
    case PromptKind::kEncText: return "ENC_TEXT";
    case PromptKind::kEncLinear: return "ENC_LINEAR";
    case PromptKind::kDecText: return "DEC_TEXT";
    case PromptKind::kDecLinear: return "DEC_LINEAR";
  }
  return "NONE";
}

PromptKind ParsePromptKind(std::string_view name) {
  for (PromptKind kind : AllPromptKinds()) {
    if (PromptKindName(kind) == name) return kind;
  }
  throw InvalidArgument("unknown prompt variant \"" + std::string(name) + "\"");
}

const std::vector<PromptKind> &AllPromptKinds() {
  static const std::vector<PromptKind> kKinds = {
      PromptKind::kNone, PromptKind::kEncText, PromptKind::kEncLinear,
      PromptKind::kDecText, PromptKind::kDecLinear};
  return kKinds;
}

void ModelConfig::Validate() const {
  if (vocab_size <= kNumReserved) throw InvalidArgument("vocab_size must exceed the reserved tokens");
  if (d_model < 1 || n_heads < 1) throw InvalidArgument("d_model and n_heads must be positive");
  if (d_model % n_heads != 0) throw InvalidArgument("d_model must be divisible by n_heads");
  if (n_enc_layers < 0 || n_dec_layers < 1) throw InvalidArgument("need >= 0 encoder and >= 1 decoder layers");
  if (d_ff < 1) throw InvalidArgument("d_ff must be positive");
  if (max_len < 2) throw InvalidArgument("max_len must be >= 2");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout must lie in [0, 1)");
}

std::vector<ParamView> ParameterViews(ModelParameters &params) {
  std::vector<ParamView> views;
  VisitArrays(params, [&](const std::string &name, auto &array) {
    views.push_back({name, array.data(), static_cast<int64_t>(array.rows()),
                     static_cast<int64_t>(array.cols())});
  });
  return views;
}

int64_t ParameterCount(const ModelParameters &params) {
  int64_t count = 0;
  VisitArrays(params, [&](const std::string &, const auto &array) {
    count += static_cast<int64_t>(array.size());
  });
  return count;
}

ModelParameters InitParameters(const ModelConfig &config,
                               const PromptVariant &variant) {
  config.Validate();
  Rng rng(DeriveSeed(config.seed, "init"));
  const int d = config.d_model;
  ModelParameters p;
  FillGaussian(p.token_embedding, config.vocab_size, d, rng);
  FillGaussian(p.enc_position, config.max_len, d, rng);
  FillGaussian(p.dec_position, config.max_len, d, rng);
  p.encoder.resize(config.n_enc_layers);
  for (EncoderLayerParams &layer : p.encoder) {
    layer.ln_attn = InitLayerNorm(d);
    InitAttention(layer.attn, d, rng);
    layer.ln_ffn = InitLayerNorm(d);
    InitFeedForward(layer.ffn, d, config.d_ff, rng);
  }
  p.enc_final = InitLayerNorm(d);
  p.decoder.resize(config.n_dec_layers);
  for (DecoderLayerParams &layer : p.decoder) {
    layer.ln_self = InitLayerNorm(d);
    InitAttention(layer.self_attn, d, rng);
    layer.ln_cross = InitLayerNorm(d);
    InitAttention(layer.cross_attn, d, rng);
    layer.ln_ffn = InitLayerNorm(d);
    InitFeedForward(layer.ffn, d, config.d_ff, rng);
  }
  p.dec_final = InitLayerNorm(d);
  if (variant.is_linear()) {
    p.linear_prompt = InitLinearPromptParams(d, DeriveSeed(config.seed, "init/linear_prompt"));
  }
  return p;
}

ModelParameters ZerosLike(const ModelParameters &params) {
  ModelParameters zeros = params;
  VisitArrays(zeros, [](const std::string &, auto &array) { array.setZero(); });
  return zeros;
}

bool AllFinite(const ModelParameters &params) {
  bool finite = true;
  VisitArrays(params, [&](const std::string &, const auto &array) {
    finite = finite && array.allFinite();
  });
  return finite;
}

AssembledInputs AssembleInputs(const TimedSample &sample,
                               const PromptVariant &variant,
                               const Vocabulary &vocab,
                               const ModelParameters &params,
                               const ModelConfig &config) {
  return AssembleImpl(sample.source, &sample.target, sample.timestamp, variant,
                      vocab, params, config);
}

AssembledInputs AssemblePrefix(const std::vector<TokenId> &source,
                               const CalendarDate &timestamp,
                               const PromptVariant &variant,
                               const Vocabulary &vocab,
                               const ModelParameters &params,
                               const ModelConfig &config) {
  return AssembleImpl(source, nullptr, timestamp, variant, vocab, params, config);
}

Matrix Forward(const ModelParameters &params, const ModelConfig &config,
               const AssembledInputs &inputs) {
  ForwardState st;
  st.packed = PackBatch({inputs});
  EncoderForward(params, config, nullptr, st);
  DecoderForward(params, config, nullptr, st);
  return st.logits;
}

double Loss(const Matrix &logits, const std::vector<TokenId> &labels,
            const std::vector<double> &loss_mask) {
  return CrossEntropy(logits, labels, loss_mask, nullptr);
}

LossAndGradient ComputeLossAndGradient(const ModelParameters &params,
                                       const ModelConfig &config,
                                       const std::vector<AssembledInputs> &batch,
                                       Rng *dropout_rng) {
  ForwardState st;
  st.packed = PackBatch(batch);
  EncoderForward(params, config, dropout_rng, st);
  DecoderForward(params, config, dropout_rng, st);
  Matrix dlogits;
  LossAndGradient out;
  out.loss = CrossEntropy(st.logits, st.packed.labels, st.packed.mask, &dlogits);
  out.gradient = Backward(params, config, st, dlogits);
  return out;
}

double BatchLoss(const ModelParameters &params, const ModelConfig &config,
                 const std::vector<AssembledInputs> &batch) {
  ForwardState st;
  st.packed = PackBatch(batch);
  EncoderForward(params, config, nullptr, st);
  DecoderForward(params, config, nullptr, st);
  return CrossEntropy(st.logits, st.packed.labels, st.packed.mask, nullptr);
}

GradCheckResult GradCheck(const ModelParameters &params,
                          const ModelConfig &config,
                          const std::vector<AssembledInputs> &batch,
                          const GradCheckOptions &options) {
  LossAndGradient analytic = ComputeLossAndGradient(params, config, batch, nullptr);
  if (!std::isfinite(analytic.loss)) throw Error(ErrorCode::kDiverged, "non-finite loss in grad check");
  if (options.tamper) options.tamper(analytic.gradient);

  ModelParameters work = params;
  std::vector<ParamView> values = ParameterViews(work);
  std::vector<ParamView> grads = ParameterViews(analytic.gradient);

  std::vector<std::pair<size_t, int64_t>> coords;
  Rng rng(options.seed);
  for (int k = 0; k < options.coordinates; ++k) {
    const size_t array = static_cast<size_t>(k) % values.size();
    coords.emplace_back(array, rng.UniformInt(0, values[array].size() - 1));
  }
  for (size_t a = 0; a < values.size(); ++a) {
    if (values[a].name.rfind("linear_prompt.", 0) != 0) continue;
    for (int64_t i = 0; i < values[a].size(); ++i) coords.emplace_back(a, i);
  }

  GradCheckResult result;
  for (const auto &[array, index] : coords) {
    double &value = values[array].data[index];
    const double saved = value;
    value = saved + options.epsilon;
    const double plus = BatchLoss(work, config, batch);
    value = saved - options.epsilon;
    const double minus = BatchLoss(work, config, batch);
    value = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw Error(ErrorCode::kDiverged, "non-finite loss in grad check");
    }
    const double numeric = (plus - minus) / (2.0 * options.epsilon);
    const double exact = grads[array].data[index];
    const double denom = std::max({std::fabs(exact), std::fabs(numeric), options.floor});
    const double rel = std::fabs(exact - numeric) / denom;
    ++result.checked;
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_parameter = values[array].name + "[" + std::to_string(index) + "]";
    }
  }
  return result;
}

TrainResult Train(const ModelConfig &config, const PromptVariant &variant,
                  const Vocabulary &vocab, const std::vector<TimedSample> &data,
                  const TrainHyper &hyper,
                  const std::function<void(int, double)> &on_step) {
  if (data.empty()) throw InvalidArgument("training data is empty");
  if (hyper.batch_size < 1 || hyper.steps < 0) throw InvalidArgument("invalid batch size or step count");
  if (!(hyper.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  TrainResult result;
  result.params = InitParameters(config, variant);
  std::vector<AssembledInputs> assembled;
  assembled.reserve(data.size());
  for (const TimedSample &sample : data) {
    assembled.push_back(AssembleInputs(sample, variant, vocab, result.params, config));
  }

  ModelParameters m = ZerosLike(result.params);
  ModelParameters v = ZerosLike(result.params);
  std::vector<ParamView> pv = ParameterViews(result.params);
  std::vector<ParamView> mv = ParameterViews(m);
  std::vector<ParamView> vv = ParameterViews(v);

  Rng shuffle_rng(DeriveSeed(hyper.seed, "train/shuffle"));
  Rng dropout_rng(DeriveSeed(hyper.seed, "train/dropout"));
  std::vector<size_t> order(assembled.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  size_t cursor = order.size();

  std::vector<AssembledInputs> batch;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  for (int step = 0; step < hyper.steps; ++step) {
    batch.clear();
    for (int b = 0; b < hyper.batch_size; ++b) {
      if (cursor == order.size()) {
        shuffle_rng.Shuffle(order);
        cursor = 0;
      }
      batch.push_back(assembled[order[cursor++]]);
    }
    LossAndGradient lg = ComputeLossAndGradient(result.params, config, batch, &dropout_rng);
    if (!std::isfinite(lg.loss) || !AllFinite(lg.gradient)) {
      throw Error(ErrorCode::kDiverged,
                  "training diverged (non-finite loss) at step " + std::to_string(step));
    }
    result.losses.push_back(lg.loss);
    if (on_step) on_step(step, lg.loss);

    beta1_pow *= kAdamBeta1;
    beta2_pow *= kAdamBeta2;
    const double lr_t = hyper.learning_rate * std::sqrt(1.0 - beta2_pow) / (1.0 - beta1_pow);
    std::vector<ParamView> gv = ParameterViews(lg.gradient);
    for (size_t a = 0; a < pv.size(); ++a) {
      double *w = pv[a].data;
      double *mm = mv[a].data;
      double *vvv = vv[a].data;
      const double *g = gv[a].data;
      for (int64_t i = 0; i < pv[a].size(); ++i) {
        mm[i] = kAdamBeta1 * mm[i] + (1.0 - kAdamBeta1) * g[i];
        vvv[i] = kAdamBeta2 * vvv[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
        w[i] -= lr_t * mm[i] / (std::sqrt(vvv[i]) + kAdamEps);
      }
    }
  }
  return result;
}

Hypothesis DecodeGreedy(const Model &model, const std::vector<TokenId> &source,
                        const CalendarDate &timestamp, int max_len) {
  const AssembledInputs prefix = AssemblePrefix(source, timestamp, model.variant,
                                                model.vocab, model.params, model.config);
  DecodeSession session(model, prefix);
  Hypothesis hyp;
  const int steps = session.MaxSteps(max_len);
  for (int step = 0; step < steps; ++step) {
    const RowVector logp = session.NextLogProbs({hyp.tokens})[0];
    TokenId best = -1;
    for (TokenId id = 0; id < logp.size(); ++id) {
      if (!Selectable(id)) continue;
      if (best < 0 || logp[id] > logp[best]) best = id;
    }
    hyp.log_prob += logp[best];
    if (best == kEosId) {
      hyp.finished = true;
      break;
    }
    hyp.tokens.push_back(best);
  }
  return hyp;
}

Hypothesis DecodeBeam(const Model &model, const std::vector<TokenId> &source,
                      const CalendarDate &timestamp, int beam_size, int max_len) {
  if (beam_size < 1) throw InvalidArgument("beam size must be >= 1");
  const AssembledInputs prefix = AssemblePrefix(source, timestamp, model.variant,
                                                model.vocab, model.params, model.config);
  DecodeSession session(model, prefix);
  std::vector<Hypothesis> beam(1);
  const int steps = session.MaxSteps(max_len);
  for (int step = 0; step < steps; ++step) {
    std::vector<std::vector<TokenId>> live;
    std::vector<const Hypothesis *> live_hyps;
    std::vector<Hypothesis> candidates;
    for (const Hypothesis &h : beam) {
      if (h.finished) {
        candidates.push_back(h);
      } else {
        live.push_back(h.tokens);
        live_hyps.push_back(&h);
      }
    }
    if (live.empty()) break;
    const std::vector<RowVector> logps = session.NextLogProbs(live);
    for (size_t b = 0; b < live.size(); ++b) {
      for (TokenId id = 0; id < logps[b].size(); ++id) {
        if (!Selectable(id)) continue;
        Hypothesis next;
        next.log_prob = live_hyps[b]->log_prob + logps[b][id];
        next.tokens = live_hyps[b]->tokens;
        if (id == kEosId) {
          next.finished = true;
        } else {
          next.tokens.push_back(id);
        }
        candidates.push_back(std::move(next));
      }
    }
    const size_t keep = std::min(candidates.size(), static_cast<size_t>(beam_size));
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                      RanksBefore);
    candidates.resize(keep);
    beam = std::move(candidates);
  }
  return *std::min_element(beam.begin(), beam.end(), RanksBefore);
}

double SequenceLogProb(const Model &model, const std::vector<TokenId> &source,
                       const CalendarDate &timestamp,
                       const std::vector<TokenId> &tokens, bool finished) {
  AssembledInputs in = AssemblePrefix(source, timestamp, model.variant, model.vocab,
                                      model.params, model.config);
  for (TokenId id : tokens) in.decoder.push_back({id, -1});
  const Matrix logits = Forward(model.params, model.config, in);
  double total = 0.0;
  const size_t first = in.decoder_prefix - 1;
  const size_t count = tokens.size() + (finished ? 1 : 0);
  for (size_t i = 0; i < count; ++i) {
    const RowVector row = logits.row(first + i);
    const double peak = row.maxCoeff();
    const double log_z = peak + std::log((row.array() - peak).exp().sum());
    const TokenId next = i < tokens.size() ? tokens[i] : kEosId;
    total += row[next] - log_z;
  }
  return total;
}

std::string Generate(const Model &model, std::string_view source,
                     const CalendarDate &timestamp, int beam_size, int max_len) {
  const std::vector<TokenId> ids = model.vocab.Encode(source);
  const Hypothesis hyp = beam_size <= 1 ? DecodeGreedy(model, ids, timestamp, max_len)
                                        : DecodeBeam(model, ids, timestamp, beam_size, max_len);
  return model.vocab.Decode(hyp.tokens);
}

void SaveCheckpoint(const Model &model, const std::string &path,
                    const std::string &vocab_reference) {
  Writer w;
  w.bytes().append(kMagic, sizeof(kMagic));
  w.Put<uint32_t>(kCheckpointVersion);
  const ModelConfig &c = model.config;
  w.Put<int32_t>(c.vocab_size);
  w.Put<int32_t>(c.d_model);
  w.Put<int32_t>(c.n_heads);
  w.Put<int32_t>(c.n_enc_layers);
  w.Put<int32_t>(c.n_dec_layers);
  w.Put<int32_t>(c.d_ff);
  w.Put<int32_t>(c.max_len);
  w.Put<double>(c.dropout);
  w.Put<uint64_t>(c.seed);
  w.Put<int32_t>(static_cast<int32_t>(model.variant.kind));
  w.Put<int32_t>(model.variant.template_id);
  const LinearPromptParams defaults;
  const LinearPromptParams &lp = model.params.linear_prompt ? *model.params.linear_prompt : defaults;
  w.Put<double>(lp.year_center);
  w.Put<double>(lp.year_scale);
  w.Put<double>(lp.month_scale);
  w.Put<double>(lp.day_scale);
  w.PutString(vocab_reference);
  w.Put<uint64_t>(model.vocab.Fingerprint());
  w.Put<int32_t>(model.vocab.size());
  ModelParameters params = model.params;
  const std::vector<ParamView> views = ParameterViews(params);
  w.Put<uint32_t>(static_cast<uint32_t>(views.size()));
  for (const ParamView &view : views) {
    w.PutString(view.name);
    w.Put<uint32_t>(static_cast<uint32_t>(view.rows));
    w.Put<uint32_t>(static_cast<uint32_t>(view.cols));
    w.PutDoubles(view.data, view.size());
  }
  w.Put<uint64_t>(Fnv1a(w.bytes()));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw IoError("failed writing checkpoint " + path);
}

Model LoadCheckpoint(const std::string &path, const std::string &vocab_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  if (bytes.size() < sizeof(kMagic) + 12 ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path + " is not a checkpoint");
  }
  uint64_t stored_sum;
  std::memcpy(&stored_sum, bytes.data() + bytes.size() - 8, 8);
  if (Fnv1a(std::string_view(bytes).substr(0, bytes.size() - 8)) != stored_sum) {
    throw ParseError("checkpoint checksum mismatch in " + path);
  }
  Reader r(std::string_view(bytes).substr(sizeof(kMagic)));
  const uint32_t version = r.Get<uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  Model model;
  ModelConfig &c = model.config;
  c.vocab_size = r.Get<int32_t>();
  c.d_model = r.Get<int32_t>();
  c.n_heads = r.Get<int32_t>();
  c.n_enc_layers = r.Get<int32_t>();
  c.n_dec_layers = r.Get<int32_t>();
  c.d_ff = r.Get<int32_t>();
  c.max_len = r.Get<int32_t>();
  c.dropout = r.Get<double>();
  c.seed = r.Get<uint64_t>();
  const int32_t kind = r.Get<int32_t>();
  if (kind < 0 || kind > 4) throw ParseError("bad prompt variant in checkpoint");
  model.variant.kind = static_cast<PromptKind>(kind);
  model.variant.template_id = r.Get<int32_t>();
  LinearPromptParams constants;
  constants.year_center = r.Get<double>();
  constants.year_scale = r.Get<double>();
  constants.month_scale = r.Get<double>();
  constants.day_scale = r.Get<double>();
  const std::string vocab_reference = r.GetString();
  const uint64_t fingerprint = r.Get<uint64_t>();
  const int32_t vocab_size = r.Get<int32_t>();
  c.Validate();

  std::string resolved = vocab_path;
  if (resolved.empty()) {
    std::filesystem::path ref(vocab_reference);
    if (ref.is_relative()) ref = std::filesystem::path(path).parent_path() / ref;
    resolved = ref.string();
  }
  model.vocab = Vocabulary::Load(resolved);
  if (model.vocab.size() != vocab_size || model.vocab.Fingerprint() != fingerprint) {
    throw ParseError("vocabulary " + resolved + " does not match checkpoint " + path);
  }

  model.params = InitParameters(c, model.variant);
  if (model.params.linear_prompt) {
    model.params.linear_prompt->year_center = constants.year_center;
    model.params.linear_prompt->year_scale = constants.year_scale;
    model.params.linear_prompt->month_scale = constants.month_scale;
    model.params.linear_prompt->day_scale = constants.day_scale;
  }
  std::vector<ParamView> views = ParameterViews(model.params);
  const uint32_t count = r.Get<uint32_t>();
  if (count != views.size()) throw ParseError("checkpoint array count mismatch");
  for (ParamView &view : views) {
    const std::string name = r.GetString();
    const uint32_t rows = r.Get<uint32_t>();
    const uint32_t cols = r.Get<uint32_t>();
    if (name != view.name || rows != view.rows || cols != view.cols) {
      throw ParseError("checkpoint array " + name + " does not match " + view.name);
    }
    r.GetDoubles(view.data, view.size());
  }
  return model;
}

}  // namespace tap
