#include "holo/encoders/encoders.hpp"

#include <algorithm>
#include <cmath>

namespace holo {

template <typename T>
UniversalEncoder<T>::UniversalEncoder(ParamStore<T>& store, const EncoderConfig& cfg, Rng& rng)
    : positions_(nn::sinusoidal_positions<T>(cfg.max_tokens, cfg.universal_width)), width_(cfg.universal_width) {
  for (std::size_t i = 0; i < cfg.universal_layers; ++i) {
    layers_.emplace_back(store, "universal.layer" + std::to_string(i), cfg.universal_width, cfg.heads, rng);
  }
  final_norm_ = nn::LayerNorm<T>(store, "universal.norm", cfg.universal_width);
  store.set_frozen("universal.", true);
}

template <typename T>
EmbeddingSequence<T> UniversalEncoder<T>::encode(const Var<T>& tokens) const {
  if (tokens.shape().size() != 2 || tokens.dim(1) != width_) {
    throw DimensionError("universal encoder expects [n," + std::to_string(width_) + "] tokens, got " +
                         shape_str(tokens.shape()));
  }
  const std::size_t n = tokens.dim(0);
  if (n > positions_.dim(0)) {
    throw DimensionError("universal encoder supports at most " + std::to_string(positions_.dim(0)) +
                         " tokens, got " + std::to_string(n));
  }
  std::vector<T> pos(positions_.data().begin(), positions_.data().begin() + static_cast<std::ptrdiff_t>(n * width_));
  Var<T> x = ops::add(tokens, Var<T>::constant(Tensor<T>({n, width_}, std::move(pos))));
  for (const auto& layer : layers_) x = layer.forward(x);
  return {final_norm_.forward(x)};
}

template <typename T>
Var<T> adaptive_avg_pool_2d(const Var<T>& x, std::size_t h, std::size_t w) {
  if (x.shape().size() != 3) throw DimensionError("adaptive_avg_pool_2d expects [H,W,C], got " + shape_str(x.shape()));
  const std::size_t H = x.dim(0), W = x.dim(1), C = x.dim(2);
  if (H == h && W == w) return x;
  Var<T> rows = ops::adaptive_avg_pool_1d(ops::reshape(x, {H, W * C}), h);          // [h, W*C]
  Var<T> cols = ops::permute(ops::reshape(rows, {h, W, C}), {1, 0, 2});              // [W, h, C]
  Var<T> pooled = ops::adaptive_avg_pool_1d(ops::reshape(cols, {W, h * C}), w);       // [w, h*C]
  return ops::permute(ops::reshape(pooled, {w, h, C}), {1, 0, 2});                    // [h, w, C]
}

namespace {

template <typename T>
Tensor<T> to_tensor(const RawArray& a, Shape shape) {
  std::vector<T> data(a.values.size());
  std::transform(a.values.begin(), a.values.end(), data.begin(), [](float v) { return static_cast<T>(v); });
  return Tensor<T>(std::move(shape), std::move(data));
}

// Frames stacked as channels, then stem(stride 2) -> residual -> down(stride 2) -> residual.
template <typename T>
class ImageBackbone final : public Backbone<T> {
 public:
  ImageBackbone(ParamStore<T>& store, const std::string& prefix, const ModalityGeometry& g, const EncoderConfig& cfg,
                Rng& rng)
      : in_ch_(g.frames * g.channels), h_(cfg.grid_h), w_(cfg.grid_w) {
    const std::size_t c = cfg.backbone_width;
    stem_ = nn::Conv2d<T>(store, prefix + ".conv0", in_ch_, c, 3, 2, rng);
    res1_ = nn::Conv2d<T>(store, prefix + ".conv1", c, c, 3, 1, rng);
    down_ = nn::Conv2d<T>(store, prefix + ".conv2", c, c, 3, 2, rng);
    res2_ = nn::Conv2d<T>(store, prefix + ".conv3", c, c, 3, 1, rng);
    norm_ = nn::LayerNorm<T>(store, prefix + ".norm", c);
    if ((g.height + 3) / 4 < h_ || (g.width + 3) / 4 < w_) {
      throw ConfigError("image " + std::to_string(g.height) + "x" + std::to_string(g.width) +
                        " too small for a " + std::to_string(h_) + "x" + std::to_string(w_) + " feature grid");
    }
  }

  Var<T> forward(const ModalitySample& s) const override {
    const auto& sh = s.payload.shape;
    const std::size_t F = sh[0], H = sh[1], W = sh[2], C = sh[3];
    if (F * C != in_ch_) throw DimensionError("image backbone expects " + std::to_string(in_ch_) + " stacked channels");
    // [F,H,W,C] -> [H,W,F*C]
    Tensor<T> x({H, W, F * C});
    for (std::size_t f = 0; f < F; ++f)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t xx = 0; xx < W; ++xx)
          for (std::size_t c = 0; c < C; ++c)
            x[(y * W + xx) * F * C + f * C + c] = static_cast<T>(s.payload.values[((f * H + y) * W + xx) * C + c]);
    Var<T> h = ops::gelu(stem_.forward(Var<T>::constant(std::move(x))));
    h = ops::add(h, ops::gelu(res1_.forward(h)));
    h = ops::gelu(down_.forward(h));
    h = ops::add(h, ops::gelu(res2_.forward(h)));
    return adaptive_avg_pool_2d(norm_.forward(h), h_, w_);
  }

 private:
  nn::Conv2d<T> stem_, res1_, down_, res2_;
  nn::LayerNorm<T> norm_;
  std::size_t in_ch_, h_, w_;
};

// Shared per-point MLP, then max-pool within each cell of an h x w grid over (x, y).
// Max-pooling makes the encoding exactly invariant to point order.
template <typename T>
class PointSetBackbone final : public Backbone<T> {
 public:
  PointSetBackbone(ParamStore<T>& store, const std::string& prefix, const ModalityGeometry& g,
                   const EncoderConfig& cfg, Rng& rng)
      : features_(g.features), h_(cfg.grid_h), w_(cfg.grid_w), width_(cfg.backbone_width) {
    l0_ = nn::Linear<T>(store, prefix + ".mlp0", g.features + 1, width_, rng);
    l1_ = nn::Linear<T>(store, prefix + ".mlp1", width_, width_, rng);
    l2_ = nn::Linear<T>(store, prefix + ".mlp2", width_, width_, rng);
    norm_ = nn::LayerNorm<T>(store, prefix + ".norm", width_);
  }

  Var<T> forward(const ModalitySample& s) const override {
    const std::size_t F = s.payload.shape[0], P = s.payload.shape[1], D = s.payload.shape[2];
    if (D != features_) throw DimensionError("point backbone expects " + std::to_string(features_) + " features");
    if (P == 0) return Var<T>::constant(Tensor<T>({h_, w_, width_}));
    const std::size_t n = F * P;
    Tensor<T> pts({n, D + 1});
    std::vector<std::int64_t> cell(n);
    auto clamp_cell = [](float v, std::size_t cells) {
      const auto i = static_cast<std::int64_t>(std::floor((double(v) + 1.0) * 0.5 * double(cells)));
      return std::clamp<std::int64_t>(i, 0, static_cast<std::int64_t>(cells) - 1);
    };
    for (std::size_t f = 0; f < F; ++f)
      for (std::size_t i = 0; i < P; ++i) {
        const std::size_t r = f * P + i;
        const float* src = s.payload.values.data() + r * D;
        for (std::size_t d = 0; d < D; ++d) pts[r * (D + 1) + d] = static_cast<T>(src[d]);
        pts[r * (D + 1) + D] = F > 1 ? static_cast<T>(f) / static_cast<T>(F - 1) : T(0);
        cell[r] = clamp_cell(src[1], h_) * static_cast<std::int64_t>(w_) + clamp_cell(src[0], w_);
      }
    Var<T> h = ops::gelu(l0_.forward(Var<T>::constant(std::move(pts))));
    h = ops::gelu(l1_.forward(h));
    h = norm_.forward(l2_.forward(h));
    return ops::reshape(ops::segment_max(h, cell, h_ * w_), {h_, w_, width_});
  }

 private:
  nn::Linear<T> l0_, l1_, l2_;
  nn::LayerNorm<T> norm_;
  std::size_t features_, h_, w_, width_;
};

// 1-D temporal conv stack over [length, subcarriers], pooled to h*w time cells.
template <typename T>
class TemporalBackbone final : public Backbone<T> {
 public:
  TemporalBackbone(ParamStore<T>& store, const std::string& prefix, const ModalityGeometry& g,
                   const EncoderConfig& cfg, Rng& rng)
      : subcarriers_(g.subcarriers), h_(cfg.grid_h), w_(cfg.grid_w), width_(cfg.backbone_width) {
    stem_ = nn::Conv1d<T>(store, prefix + ".conv0", g.subcarriers, width_, 5, 2, rng);
    res1_ = nn::Conv1d<T>(store, prefix + ".conv1", width_, width_, 3, 1, rng);
    down_ = nn::Conv1d<T>(store, prefix + ".conv2", width_, width_, 3, 2, rng);
    res2_ = nn::Conv1d<T>(store, prefix + ".conv3", width_, width_, 3, 1, rng);
    norm_ = nn::LayerNorm<T>(store, prefix + ".norm", width_);
    const std::size_t after = ((g.length - 1) / 2 + 1 - 1) / 2 + 1;
    if (after < h_ * w_) {
      throw ConfigError("sequence length " + std::to_string(g.length) + " too short for " +
                        std::to_string(h_ * w_) + " temporal cells");
    }
  }

  Var<T> forward(const ModalitySample& s) const override {
    const std::size_t L = s.payload.shape[0], S = s.payload.shape[1];
    if (S != subcarriers_) throw DimensionError("temporal backbone expects " + std::to_string(subcarriers_) + " channels");
    Var<T> h = ops::gelu(stem_.forward(Var<T>::constant(to_tensor<T>(s.payload, {L, S}))));
    h = ops::add(h, ops::gelu(res1_.forward(h)));
    h = ops::gelu(down_.forward(h));
    h = ops::add(h, ops::gelu(res2_.forward(h)));
    h = ops::adaptive_avg_pool_1d(norm_.forward(h), h_ * w_);
    return ops::reshape(h, {h_, w_, width_});
  }

 private:
  nn::Conv1d<T> stem_, res1_, down_, res2_;
  nn::LayerNorm<T> norm_;
  std::size_t subcarriers_, h_, w_, width_;
};

}  // namespace

template <typename T>
std::unique_ptr<Backbone<T>> make_backbone(ParamStore<T>& store, const std::string& prefix, ModalityKind kind,
                                           const ModalityGeometry& geom, const EncoderConfig& cfg, Rng& rng) {
  switch (family_of(kind)) {
    case ModalityFamily::Image: return std::make_unique<ImageBackbone<T>>(store, prefix, geom, cfg, rng);
    case ModalityFamily::PointSet: return std::make_unique<PointSetBackbone<T>>(store, prefix, geom, cfg, rng);
    case ModalityFamily::Temporal: return std::make_unique<TemporalBackbone<T>>(store, prefix, geom, cfg, rng);
  }
  throw ConfigError("no backbone family for modality");
}

template <typename T>
TailoredEncoder<T>::TailoredEncoder(ParamStore<T>& store, ModalityKind kind, const ModalityGeometry& geom,
                                    const EncoderConfig& cfg, std::size_t num_classes, Rng& rng)
    : kind_(kind), grid_h_(cfg.grid_h), grid_w_(cfg.grid_w), backbone_width_(cfg.backbone_width) {
  if (num_classes < 2) throw ConfigError("classifier needs at least 2 classes");
  backbone_ = make_backbone<T>(store, backbone_prefix(), kind, geom, cfg, rng);
  mlp_ = nn::FeedForward<T>(store, "tailored." + std::string(to_string(kind)) + ".mlp", cfg.backbone_width,
                            cfg.universal_width, rng, cfg.universal_width);
  classifier_ = nn::Linear<T>(store, "tailored." + std::string(to_string(kind)) + ".classifier",
                              cfg.backbone_width, num_classes, rng);
}

template <typename T>
std::string TailoredEncoder<T>::backbone_prefix() const {
  return "tailored." + std::string(to_string(kind_)) + ".backbone";
}
template <typename T>
std::string TailoredEncoder<T>::mlp_prefix() const {
  return "tailored." + std::string(to_string(kind_)) + ".mlp";
}
template <typename T>
std::string TailoredEncoder<T>::classifier_prefix() const {
  return "tailored." + std::string(to_string(kind_)) + ".classifier";
}

template <typename T>
FeatureMap<T> TailoredEncoder<T>::backbone(const ModalitySample& sample) const {
  if (sample.kind != kind_) {
    throw ConfigError("tailored encoder for " + std::string(to_string(kind_)) + " given a " +
                      std::string(to_string(sample.kind)) + " sample");
  }
  validate_payload(sample.kind, sample.payload);
  return {backbone_->forward(sample)};
}

template <typename T>
FeatureMap<T> TailoredEncoder<T>::align(const FeatureMap<T>& features) const {
  const auto& s = features.grid.shape();
  Var<T> flat = ops::reshape(features.grid, {s[0] * s[1], s[2]});
  Var<T> y = mlp_.forward(flat);
  return {ops::reshape(y, {s[0], s[1], y.dim(1)})};
}

template <typename T>
FeatureMap<T> TailoredEncoder<T>::encode(const ModalitySample& sample) const {
  return align(backbone(sample));
}

template <typename T>
Var<T> TailoredEncoder<T>::classify(const FeatureMap<T>& features) const {
  const auto& s = features.grid.shape();
  if (s.size() != 3) throw DimensionError("classify expects an [h,w,d] feature map, got " + shape_str(s));
  Var<T> pooled = ops::mean_rows(ops::reshape(features.grid, {s[0] * s[1], s[2]}));
  return classifier_.forward(pooled);
}

template <typename T>
EncoderBank<T>::EncoderBank(ParamStore<T>& store, const EncoderConfig& cfg, std::size_t num_classes,
                            std::uint64_t seed)
    : store_(&store), cfg_(cfg), num_classes_(num_classes), seed_(seed) {
  Rng rng(derive_seed(seed, "universal"));
  universal_ = UniversalEncoder<T>(store, cfg, rng);
}

template <typename T>
void EncoderBank<T>::add(ModalityKind kind, const ModalityGeometry& geom) {
  if (has(kind)) return;
  const std::string name(to_string(kind));
  Rng tok_rng(derive_seed(seed_, "tokenizer." + name));
  tokenizers_.emplace(kind, ModalityTokenizer<T>(*store_, kind, geom, cfg_.tokenizer, cfg_.universal_width, tok_rng));
  Rng tail_rng(derive_seed(seed_, "tailored." + name));
  tailored_.emplace(kind, std::make_unique<TailoredEncoder<T>>(*store_, kind, geom, cfg_, num_classes_, tail_rng));
}

template <typename T>
const ModalityTokenizer<T>& EncoderBank<T>::tokenizer(ModalityKind kind) const {
  auto it = tokenizers_.find(kind);
  if (it == tokenizers_.end()) throw ConfigError("no tokenizer registered for " + std::string(to_string(kind)));
  return it->second;
}

template <typename T>
const TailoredEncoder<T>& EncoderBank<T>::tailored(ModalityKind kind) const {
  auto it = tailored_.find(kind);
  if (it == tailored_.end()) throw ConfigError("no tailored encoder registered for " + std::string(to_string(kind)));
  return *it->second;
}

template <typename T>
EmbeddingSequence<T> EncoderBank<T>::universal_encode(const ModalitySample& sample) const {
  const auto& tok = tokenizer(sample.kind);
  return universal_.encode(tok.embed(tokenize(sample, cfg_.tokenizer)));
}

template <typename T>
FeatureMap<T> EncoderBank<T>::tailored_encode(const ModalitySample& sample) const {
  return tailored(sample.kind).encode(sample);
}

template class UniversalEncoder<float>;
template class UniversalEncoder<double>;
template class TailoredEncoder<float>;
template class TailoredEncoder<double>;
template class EncoderBank<float>;
template class EncoderBank<double>;
template Var<float> adaptive_avg_pool_2d(const Var<float>&, std::size_t, std::size_t);
template Var<double> adaptive_avg_pool_2d(const Var<double>&, std::size_t, std::size_t);
template std::unique_ptr<Backbone<float>> make_backbone(ParamStore<float>&, const std::string&, ModalityKind,
                                                        const ModalityGeometry&, const EncoderConfig&, Rng&);
template std::unique_ptr<Backbone<double>> make_backbone(ParamStore<double>&, const std::string&, ModalityKind,
                                                         const ModalityGeometry&, const EncoderConfig&, Rng&);

}  // namespace holo
