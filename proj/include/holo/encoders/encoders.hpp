#pragma once

#include <map>
#include <memory>

#include "holo/encoders/tokenizer.hpp"

namespace holo {

struct EncoderConfig {
  std::size_t universal_width = 64;   // d_m
  std::size_t universal_layers = 2;
  std::size_t heads = 4;
  std::size_t max_tokens = 512;
  std::size_t backbone_width = 32;    // channel width of the tailored backbones
  std::size_t grid_h = 4, grid_w = 4; // h_m x w_m of the tailored feature map
  TokenizerConfig tokenizer;
};

/// Initial embeddings Y_clip: [n_m, d_m].
template <typename T>
struct EmbeddingSequence {
  Var<T> tokens;
};

/// Tailored features Y_t: [h_m, w_m, d].
template <typename T>
struct FeatureMap {
  Var<T> grid;
};

/// Frozen transformer shared by every modality, standing in for a pretrained
/// vision-language encoder. Its parameters live under "universal." and are frozen
/// at construction; nothing can unfreeze them through this class.
template <typename T>
class UniversalEncoder {
 public:
  UniversalEncoder() = default;
  UniversalEncoder(ParamStore<T>& store, const EncoderConfig& cfg, Rng& rng);

  /// tokens[n, d_m] (already embedded by a ModalityTokenizer) -> Y_clip[n, d_m]
  EmbeddingSequence<T> encode(const Var<T>& tokens) const;

  std::size_t width() const { return width_; }

 private:
  std::vector<nn::TransformerLayer<T>> layers_;
  nn::LayerNorm<T> final_norm_;
  Tensor<T> positions_;
  std::size_t width_ = 0;
};

/// Family backbone E_T: raw payload -> [h, w, backbone_width].
template <typename T>
class Backbone {
 public:
  virtual ~Backbone() = default;
  virtual Var<T> forward(const ModalitySample& sample) const = 0;
};

/// Tailored encoder for one modality: backbone E_T ("tailored.<kind>.backbone"),
/// the width-aligning MLP^m ("tailored.<kind>.mlp") and the stage-1 action
/// classifier ("tailored.<kind>.classifier").
template <typename T>
class TailoredEncoder {
 public:
  TailoredEncoder(ParamStore<T>& store, ModalityKind kind, const ModalityGeometry& geom,
                  const EncoderConfig& cfg, std::size_t num_classes, Rng& rng);

  /// E_T(X): [h, w, backbone_width]
  FeatureMap<T> backbone(const ModalitySample& sample) const;
  /// MLP^m applied per cell: [h, w, backbone_width] -> [h, w, d_m]
  FeatureMap<T> align(const FeatureMap<T>& features) const;
  /// align(backbone(sample))
  FeatureMap<T> encode(const ModalitySample& sample) const;
  /// Global-average-pool the grid then a linear head: [C] logits.
  Var<T> classify(const FeatureMap<T>& features) const;

  ModalityKind kind() const { return kind_; }
  std::string backbone_prefix() const;
  std::string mlp_prefix() const;
  std::string classifier_prefix() const;

 private:
  ModalityKind kind_;
  std::unique_ptr<Backbone<T>> backbone_;
  nn::FeedForward<T> mlp_;
  nn::Linear<T> classifier_;
  std::size_t grid_h_, grid_w_, backbone_width_;
};

template <typename T>
std::unique_ptr<Backbone<T>> make_backbone(ParamStore<T>& store, const std::string& prefix, ModalityKind kind,
                                           const ModalityGeometry& geom, const EncoderConfig& cfg, Rng& rng);

/// 2-D adaptive average pooling of an [H, W, C] map to [h, w, C].
template <typename T>
Var<T> adaptive_avg_pool_2d(const Var<T>& x, std::size_t h, std::size_t w);

/// Registry of per-modality tokenizers and tailored encoders; lookups for an
/// unregistered modality throw ConfigError.
template <typename T>
class EncoderBank {
 public:
  EncoderBank(ParamStore<T>& store, const EncoderConfig& cfg, std::size_t num_classes, std::uint64_t seed);

  void add(ModalityKind kind, const ModalityGeometry& geom);
  bool has(ModalityKind kind) const { return tailored_.count(kind) > 0; }

  const ModalityTokenizer<T>& tokenizer(ModalityKind kind) const;
  const TailoredEncoder<T>& tailored(ModalityKind kind) const;
  const UniversalEncoder<T>& universal() const { return universal_; }
  const EncoderConfig& config() const { return cfg_; }

  /// tokenize -> modality tokenizer -> frozen universal encoder: Y_clip
  EmbeddingSequence<T> universal_encode(const ModalitySample& sample) const;
  /// Y_t at width d_m
  FeatureMap<T> tailored_encode(const ModalitySample& sample) const;

 private:
  ParamStore<T>* store_;
  EncoderConfig cfg_;
  std::size_t num_classes_;
  std::uint64_t seed_;
  UniversalEncoder<T> universal_;
  std::map<ModalityKind, ModalityTokenizer<T>> tokenizers_;
  std::map<ModalityKind, std::unique_ptr<TailoredEncoder<T>>> tailored_;
};

}  // namespace holo
