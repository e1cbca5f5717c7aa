#pragma once

#include <string>

#include "holo/numerics/ops.hpp"
#include "holo/numerics/params.hpp"
#include "holo/numerics/rng.hpp"

// Parameterised building blocks. Each module registers its tensors in a
// ParamStore under a dotted name prefix and keeps pointers to them; forward()
// builds graph nodes against the current parameter values.
namespace holo::nn {

template <typename T>
Tensor<T> normal_tensor(Shape shape, double stddev, Rng& rng) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<T>(rng.normal(0.0, stddev));
  return t;
}

template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(ParamStore<T>& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
         bool bias = true);

  /// x[..., in] -> [..., out]
  Var<T> forward(const Var<T>& x) const;

  Parameter<T>& weight() const { return *weight_; }
  Parameter<T>* bias() const { return bias_; }
  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }

 private:
  Parameter<T>* weight_ = nullptr;  // [in, out]
  Parameter<T>* bias_ = nullptr;    // [out]
  std::size_t in_ = 0, out_ = 0;
};

template <typename T>
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParamStore<T>& store, const std::string& name, std::size_t width);
  Var<T> forward(const Var<T>& x) const;

 private:
  Parameter<T>* gamma_ = nullptr;
  Parameter<T>* beta_ = nullptr;
};

/// linear -> GELU -> linear
template <typename T>
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParamStore<T>& store, const std::string& name, std::size_t width, std::size_t hidden,
              Rng& rng, std::size_t out_width = 0);
  Var<T> forward(const Var<T>& x) const;

  const Linear<T>& up() const { return up_; }
  const Linear<T>& down() const { return down_; }

 private:
  Linear<T> up_, down_;
};

/// Multi-head scaled dot-product attention with q/k/v/output projections.
template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore<T>& store, const std::string& name, std::size_t width, std::size_t heads,
                     Rng& rng);

  /// query[q,d], key[k,d], value[k,d] -> [q,d]. `mask` is an optional additive
  /// [q,k] constant (e.g. -inf above the causal diagonal). When `weights_out` is
  /// set it receives the post-softmax [heads,q,k] attention weights.
  Var<T> forward(const Var<T>& query, const Var<T>& key, const Var<T>& value, const Var<T>& mask = {},
                 Tensor<T>* weights_out = nullptr) const;

  std::size_t heads() const { return heads_; }
  const Linear<T>& q_proj() const { return q_; }
  const Linear<T>& k_proj() const { return k_; }
  const Linear<T>& v_proj() const { return v_; }
  const Linear<T>& out_proj() const { return o_; }

 private:
  Linear<T> q_, k_, v_, o_;
  std::size_t width_ = 0, heads_ = 0;
};

/// Pre-norm transformer layer: x += SelfAtt(LN(x)); x += FFN(LN(x)).
template <typename T>
class TransformerLayer {
 public:
  TransformerLayer() = default;
  TransformerLayer(ParamStore<T>& store, const std::string& name, std::size_t width, std::size_t heads,
                   Rng& rng);
  Var<T> forward(const Var<T>& x, const Var<T>& mask = {}) const;

 private:
  LayerNorm<T> ln1_, ln2_;
  MultiHeadAttention<T> attn_;
  FeedForward<T> ffn_;
};

/// 3x3 (or k x k) convolution over an [H, W, C] map with zero padding k/2.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParamStore<T>& store, const std::string& name, std::size_t in_ch, std::size_t out_ch,
         std::size_t kernel, std::size_t stride, Rng& rng);
  Var<T> forward(const Var<T>& x) const;

 private:
  Linear<T> proj_;
  std::size_t in_ch_ = 0, kernel_ = 3, stride_ = 1;
};

/// k-tap convolution over an [L, C] sequence with zero padding k/2.
template <typename T>
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(ParamStore<T>& store, const std::string& name, std::size_t in_ch, std::size_t out_ch,
         std::size_t kernel, std::size_t stride, Rng& rng);
  Var<T> forward(const Var<T>& x) const;

 private:
  Linear<T> proj_;
  std::size_t in_ch_ = 0, kernel_ = 3, stride_ = 1;
};

/// Fixed sinusoidal position table [n, d].
template <typename T>
Tensor<T> sinusoidal_positions(std::size_t n, std::size_t d);

/// Additive [n, n] mask: position i may attend to j iff j <= i or both lie in
/// the first `prefix` positions (mutually visible prefix).
template <typename T>
Tensor<T> prefix_causal_mask(std::size_t n, std::size_t prefix);

}  // namespace holo::nn
