#pragma once

#include <atomic>
#include <map>
#include <string_view>
#include <utility>

#include "holo/encoders/encoders.hpp"

namespace holo {

struct UMIPConfig {
  std::size_t L = 2;                                // block count
  std::map<ModalityKind, std::size_t> n_queries;    // n'_m per modality
  std::size_t d_m = 64;
  std::size_t d_llm = 128;
  std::size_t heads = 4;
  std::size_t ffn_mult = 4;                         // block FFN hidden = ffn_mult * d_m
  bool shared_projection = true;                    // one final MLP for all modalities

  std::size_t queries_for(ModalityKind kind) const;
  void validate() const;
};

/// Full-scale preset: L=8, d_m=1024, d_llm=4096, 16 heads, 64 queries for the
/// image-like modalities and mmWave, 256 for LiDAR, and WiFi at 256 ("xrf55") or
/// 16 ("mmfi"); RFID 16.
UMIPConfig umip_full_preset(std::string_view dataset);

/// Desk-scale preset sized against desk_geometry token counts.
UMIPConfig umip_desk_preset(std::size_t d_m = 64, std::size_t d_llm = 128);

struct QFormerConfig {
  std::size_t n_learnable = 30;
  std::size_t d_m = 64;
  std::size_t d_llm = 128;
  std::size_t L = 2;
  std::size_t heads = 4;
  std::size_t ffn_mult = 4;
};

QFormerConfig qformer_full_preset();

/// Coarse queries: adaptive average pooling of Y_clip along the token axis.
/// Throws PoolingError when n_out exceeds the sequence length.
template <typename T>
Var<T> form_queries(const EmbeddingSequence<T>& y_clip, std::size_t n_out);

/// Q <- Q + SelfAtt(LN(Q)); Q <- Q + CrossAtt(LN(Q), K, V); Q <- Q + FFN(LN(Q)).
template <typename T>
class QueryBlock {
 public:
  QueryBlock() = default;
  QueryBlock(ParamStore<T>& store, const std::string& name, std::size_t width, std::size_t heads,
             std::size_t ffn_hidden, Rng& rng);

  Var<T> forward(const Var<T>& q, const Var<T>& k, const Var<T>& v, Tensor<T>* cross_weights = nullptr) const;

 private:
  nn::LayerNorm<T> ln_self_, ln_cross_, ln_ffn_;
  nn::MultiHeadAttention<T> self_, cross_;
  nn::FeedForward<T> ffn_;
  std::size_t width_ = 0;
};

/// Universal Modality-Injection Projector. Parameters live under "umip.":
/// "umip.kv.k"/"umip.kv.v", "umip.block<l>.*" and "umip.proj" (or
/// "umip.proj.<kind>" when projections are per modality).
template <typename T>
class UMIP {
 public:
  UMIP(ParamStore<T>& store, const UMIPConfig& cfg, Rng& rng);

  /// Y_t[h, w, d_m] flattened row-major to K, V[h*w, d_m].
  std::pair<Var<T>, Var<T>> kv_from_features(const FeatureMap<T>& y_t) const;

  Var<T> block(std::size_t l, const Var<T>& q, const Var<T>& k, const Var<T>& v) const;

  /// Z[n'_m, d_llm]
  Var<T> forward(ModalityKind kind, const EmbeddingSequence<T>& y_clip, const FeatureMap<T>& y_t) const;

  /// The final MLP alone: [n, d_m] -> [n, d_llm].
  Var<T> project(ModalityKind kind, const Var<T>& x) const { return projection(kind).forward(x); }

  const UMIPConfig& config() const { return cfg_; }
  std::size_t kv_calls() const { return kv_calls_.load(); }
  void reset_kv_calls() { kv_calls_ = 0; }

 private:
  const nn::FeedForward<T>& projection(ModalityKind kind) const;

  UMIPConfig cfg_;
  nn::Linear<T> k_map_, v_map_;
  std::vector<QueryBlock<T>> blocks_;
  std::map<ModalityKind, nn::FeedForward<T>> proj_;
  mutable std::atomic<std::size_t> kv_calls_{0};
};

/// Learnable-query projector used as the ablation baseline. Parameters live
/// under "qformer.": "qformer.queries.<kind>" [n_learnable, d_m], blocks and
/// the final projection.
template <typename T>
class QFormer {
 public:
  QFormer(ParamStore<T>& store, const QFormerConfig& cfg, const std::vector<ModalityKind>& kinds, Rng& rng);

  /// Queries cross-attend to `memory` [n, d_m] (Y_clip, or a flattened Y_t):
  /// Z[n_learnable, d_llm].
  Var<T> forward(ModalityKind kind, const Var<T>& memory) const;
  Var<T> forward(ModalityKind kind, const EmbeddingSequence<T>& y_clip) const { return forward(kind, y_clip.tokens); }

  /// The final MLP alone: [n, d_m] -> [n, d_llm].
  Var<T> project(const Var<T>& x) const { return proj_.forward(x); }

  const Parameter<T>& queries(ModalityKind kind) const;
  const QFormerConfig& config() const { return cfg_; }

 private:
  QFormerConfig cfg_;
  std::map<ModalityKind, Parameter<T>*> queries_;
  std::vector<QueryBlock<T>> blocks_;
  nn::FeedForward<T> proj_;
};

/// [h, w, d] -> [h*w, d]
template <typename T>
Var<T> flatten_grid(const FeatureMap<T>& y_t);

}  // namespace holo
