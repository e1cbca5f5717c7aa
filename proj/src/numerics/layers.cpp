#include "holo/numerics/layers.hpp"

#include <cmath>
#include <limits>

namespace holo::nn {

template <typename T>
Linear<T>::Linear(ParamStore<T>& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
                  bool bias)
    : in_(in), out_(out) {
  weight_ = &store.add(name + ".weight", normal_tensor<T>({in, out}, 1.0 / std::sqrt(double(in)), rng));
  if (bias) bias_ = &store.add(name + ".bias", Tensor<T>({out}));
}

template <typename T>
Var<T> Linear<T>::forward(const Var<T>& x) const {
  if (x.shape().empty() || x.shape().back() != in_) {
    throw DimensionError("linear expects trailing width " + std::to_string(in_) + ", got " +
                         shape_str(x.shape()));
  }
  Var<T> in = x;
  const bool flat = x.shape().size() == 1;
  if (flat) in = ops::reshape(x, {1, in_});
  Var<T> y = ops::matmul(in, weight_->var);
  if (bias_) y = ops::add(y, bias_->var);
  if (flat) y = ops::reshape(y, {out_});
  return y;
}

template <typename T>
LayerNorm<T>::LayerNorm(ParamStore<T>& store, const std::string& name, std::size_t width) {
  gamma_ = &store.add(name + ".gamma", Tensor<T>({width}, T(1)));
  beta_ = &store.add(name + ".beta", Tensor<T>({width}));
}

template <typename T>
Var<T> LayerNorm<T>::forward(const Var<T>& x) const {
  return ops::layer_norm(x, gamma_->var, beta_->var);
}

template <typename T>
FeedForward<T>::FeedForward(ParamStore<T>& store, const std::string& name, std::size_t width,
                            std::size_t hidden, Rng& rng, std::size_t out_width)
    : up_(store, name + ".up", width, hidden, rng),
      down_(store, name + ".down", hidden, out_width ? out_width : width, rng) {}

template <typename T>
Var<T> FeedForward<T>::forward(const Var<T>& x) const {
  return down_.forward(ops::gelu(up_.forward(x)));
}

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(ParamStore<T>& store, const std::string& name, std::size_t width,
                                          std::size_t heads, Rng& rng)
    : width_(width), heads_(heads) {
  if (heads == 0 || width % heads != 0) {
    throw ConfigError("attention width " + std::to_string(width) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  q_ = Linear<T>(store, name + ".q", width, width, rng);
  k_ = Linear<T>(store, name + ".k", width, width, rng);
  v_ = Linear<T>(store, name + ".v", width, width, rng);
  o_ = Linear<T>(store, name + ".o", width, width, rng);
}

template <typename T>
Var<T> MultiHeadAttention<T>::forward(const Var<T>& query, const Var<T>& key, const Var<T>& value,
                                      const Var<T>& mask, Tensor<T>* weights_out) const {
  if (query.shape().size() != 2 || key.shape().size() != 2 || value.shape().size() != 2 ||
      query.dim(1) != width_ || key.dim(1) != width_ || value.dim(1) != width_ ||
      key.dim(0) != value.dim(0)) {
    throw DimensionError("attention expects Q[q," + std::to_string(width_) + "], K/V[k," +
                         std::to_string(width_) + "]; got " + shape_str(query.shape()) + ", " +
                         shape_str(key.shape()) + ", " + shape_str(value.shape()));
  }
  const std::size_t nq = query.dim(0), nk = key.dim(0), dh = width_ / heads_;
  auto split = [&](const Var<T>& x, std::size_t n) {
    return ops::permute(ops::reshape(x, {n, heads_, dh}), {1, 0, 2});  // [h, n, dh]
  };
  Var<T> qh = split(q_.forward(query), nq);
  Var<T> kh = split(k_.forward(key), nk);
  Var<T> vh = split(v_.forward(value), nk);
  Var<T> scores = ops::scale(ops::matmul(qh, ops::transpose(kh)), T(1) / std::sqrt(T(dh)));
  if (mask) scores = ops::add(scores, mask);
  Var<T> weights = ops::softmax(scores, 2);
  if (weights_out) *weights_out = weights.value();
  Var<T> ctx = ops::matmul(weights, vh);                                       // [h, q, dh]
  Var<T> merged = ops::reshape(ops::permute(ctx, {1, 0, 2}), {nq, width_});  // [q, d]
  return o_.forward(merged);
}

template <typename T>
TransformerLayer<T>::TransformerLayer(ParamStore<T>& store, const std::string& name, std::size_t width,
                                      std::size_t heads, Rng& rng)
    : ln1_(store, name + ".ln1", width),
      ln2_(store, name + ".ln2", width),
      attn_(store, name + ".attn", width, heads, rng),
      ffn_(store, name + ".ffn", width, 4 * width, rng) {}

template <typename T>
Var<T> TransformerLayer<T>::forward(const Var<T>& x, const Var<T>& mask) const {
  Var<T> h = ln1_.forward(x);
  Var<T> y = ops::add(x, attn_.forward(h, h, h, mask));
  return ops::add(y, ffn_.forward(ln2_.forward(y)));
}

template <typename T>
Conv2d<T>::Conv2d(ParamStore<T>& store, const std::string& name, std::size_t in_ch, std::size_t out_ch,
                  std::size_t kernel, std::size_t stride, Rng& rng)
    : proj_(store, name, kernel * kernel * in_ch, out_ch, rng), in_ch_(in_ch), kernel_(kernel), stride_(stride) {}

template <typename T>
Var<T> Conv2d<T>::forward(const Var<T>& x) const {
  if (x.shape().size() != 3 || x.dim(2) != in_ch_) {
    throw DimensionError("conv2d expects [H,W," + std::to_string(in_ch_) + "], got " + shape_str(x.shape()));
  }
  const auto H = static_cast<std::int64_t>(x.dim(0)), W = static_cast<std::int64_t>(x.dim(1));
  const auto C = static_cast<std::int64_t>(in_ch_), K = static_cast<std::int64_t>(kernel_);
  const auto S = static_cast<std::int64_t>(stride_), pad = K / 2;
  const std::int64_t Ho = (H + 2 * pad - K) / S + 1, Wo = (W + 2 * pad - K) / S + 1;
  std::vector<std::int64_t> index;
  index.reserve(static_cast<std::size_t>(Ho * Wo * K * K * C));
  for (std::int64_t oy = 0; oy < Ho; ++oy)
    for (std::int64_t ox = 0; ox < Wo; ++ox)
      for (std::int64_t ky = 0; ky < K; ++ky)
        for (std::int64_t kx = 0; kx < K; ++kx) {
          const std::int64_t iy = oy * S + ky - pad, ix = ox * S + kx - pad;
          const bool inside = iy >= 0 && iy < H && ix >= 0 && ix < W;
          for (std::int64_t c = 0; c < C; ++c) index.push_back(inside ? (iy * W + ix) * C + c : -1);
        }
  const auto cols = static_cast<std::size_t>(K * K * C);
  Var<T> patches = ops::gather(x, {static_cast<std::size_t>(Ho * Wo), cols}, index);
  Var<T> y = proj_.forward(patches);
  return ops::reshape(y, {static_cast<std::size_t>(Ho), static_cast<std::size_t>(Wo), proj_.out_features()});
}

template <typename T>
Conv1d<T>::Conv1d(ParamStore<T>& store, const std::string& name, std::size_t in_ch, std::size_t out_ch,
                  std::size_t kernel, std::size_t stride, Rng& rng)
    : proj_(store, name, kernel * in_ch, out_ch, rng), in_ch_(in_ch), kernel_(kernel), stride_(stride) {}

template <typename T>
Var<T> Conv1d<T>::forward(const Var<T>& x) const {
  if (x.shape().size() != 2 || x.dim(1) != in_ch_) {
    throw DimensionError("conv1d expects [L," + std::to_string(in_ch_) + "], got " + shape_str(x.shape()));
  }
  const auto L = static_cast<std::int64_t>(x.dim(0)), C = static_cast<std::int64_t>(in_ch_);
  const auto K = static_cast<std::int64_t>(kernel_), S = static_cast<std::int64_t>(stride_), pad = K / 2;
  const std::int64_t Lo = (L + 2 * pad - K) / S + 1;
  std::vector<std::int64_t> index;
  index.reserve(static_cast<std::size_t>(Lo * K * C));
  for (std::int64_t o = 0; o < Lo; ++o)
    for (std::int64_t k = 0; k < K; ++k) {
      const std::int64_t i = o * S + k - pad;
      for (std::int64_t c = 0; c < C; ++c) index.push_back(i >= 0 && i < L ? i * C + c : -1);
    }
  Var<T> patches = ops::gather(x, {static_cast<std::size_t>(Lo), static_cast<std::size_t>(K * C)}, index);
  return proj_.forward(patches);
}

template <typename T>
Tensor<T> sinusoidal_positions(std::size_t n, std::size_t d) {
  Tensor<T> t({n, d});
  for (std::size_t pos = 0; pos < n; ++pos) {
    for (std::size_t i = 0; i < d; ++i) {
      const double freq = std::pow(10000.0, -double(2 * (i / 2)) / double(d));
      const double angle = double(pos) * freq;
      t[pos * d + i] = static_cast<T>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return t;
}

template <typename T>
Tensor<T> prefix_causal_mask(std::size_t n, std::size_t prefix) {
  Tensor<T> m({n, n});
  const T blocked = -std::numeric_limits<T>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const bool visible = j <= i || (i < prefix && j < prefix);
      m[i * n + j] = visible ? T(0) : blocked;
    }
  return m;
}

#define HOLO_INSTANTIATE_LAYERS(T)                                         \
  template class Linear<T>;                                                \
  template class LayerNorm<T>;                                             \
  template class FeedForward<T>;                                           \
  template class MultiHeadAttention<T>;                                    \
  template class TransformerLayer<T>;                                      \
  template class Conv2d<T>;                                                \
  template class Conv1d<T>;                                                \
  template Tensor<T> sinusoidal_positions<T>(std::size_t, std::size_t);    \
  template Tensor<T> prefix_causal_mask<T>(std::size_t, std::size_t);

HOLO_INSTANTIATE_LAYERS(float)
HOLO_INSTANTIATE_LAYERS(double)

}  // namespace holo::nn
