#include "holo/encoders/tokenizer.hpp"

#include <algorithm>
#include <cmath>

namespace holo {
namespace {

std::size_t voxel_of(float coord, std::size_t cells) {
  const double pos = (static_cast<double>(coord) + 1.0) * 0.5 * static_cast<double>(cells);
  const auto idx = static_cast<std::int64_t>(std::floor(pos));
  return static_cast<std::size_t>(std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(cells) - 1));
}

TokenGrid tokenize_image(const RawArray& p, std::size_t patch) {
  const std::size_t T = p.shape[0], H = p.shape[1], W = p.shape[2], C = p.shape[3];
  if (patch == 0 || H % patch != 0 || W % patch != 0) {
    throw DimensionError("image " + shape_str(p.shape) + " is not divisible into " + std::to_string(patch) +
                         "x" + std::to_string(patch) + " patches");
  }
  const std::size_t ph = H / patch, pw = W / patch, dim = patch * patch * C;
  Tensor<float> tokens({T * ph * pw, dim});
  std::size_t row = 0;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t by = 0; by < ph; ++by)
      for (std::size_t bx = 0; bx < pw; ++bx, ++row) {
        std::size_t col = 0;
        for (std::size_t y = 0; y < patch; ++y)
          for (std::size_t x = 0; x < patch; ++x)
            for (std::size_t c = 0; c < C; ++c, ++col) {
              const std::size_t iy = by * patch + y, ix = bx * patch + x;
              tokens[row * dim + col] = p.values[((t * H + iy) * W + ix) * C + c];
            }
      }
  return {std::move(tokens), false};
}

TokenGrid tokenize_points(const RawArray& p, std::size_t grid) {
  const std::size_t T = p.shape[0], P = p.shape[1], F = p.shape[2];
  const std::size_t dim = F + 1;
  if (P == 0) return {Tensor<float>({1, dim}), true};
  const std::size_t per_frame = grid * grid * grid;
  Tensor<float> tokens({T * per_frame, dim});
  std::vector<std::size_t> counts(T * per_frame, 0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < P; ++i) {
      const float* pt = p.values.data() + (t * P + i) * F;
      const std::size_t v =
          (voxel_of(pt[0], grid) * grid + voxel_of(pt[1], grid)) * grid + voxel_of(pt[2], grid);
      const std::size_t row = t * per_frame + v;
      for (std::size_t f = 0; f < F; ++f) tokens[row * dim + f] += pt[f];
      ++counts[row];
    }
  }
  for (std::size_t row = 0; row < counts.size(); ++row) {
    if (counts[row] > 0) {
      for (std::size_t f = 0; f < F; ++f) tokens[row * dim + f] /= static_cast<float>(counts[row]);
    }
    tokens[row * dim + F] = static_cast<float>(counts[row]) / static_cast<float>(P);
  }
  return {std::move(tokens), false};
}

TokenGrid tokenize_temporal(const RawArray& p, std::size_t window) {
  const std::size_t L = p.shape[0], S = p.shape[1];
  if (window == 0 || L < window) {
    throw DimensionError("sequence of length " + std::to_string(L) + " is shorter than one " +
                         std::to_string(window) + "-step window");
  }
  const std::size_t n = L / window, dim = window * S;
  Tensor<float> tokens({n, dim});
  std::copy(p.values.begin(), p.values.begin() + static_cast<std::ptrdiff_t>(n * dim), tokens.data().begin());
  return {std::move(tokens), false};
}

}  // namespace

TokenGrid tokenize(const ModalitySample& sample, const TokenizerConfig& cfg) {
  validate_payload(sample.kind, sample.payload);
  switch (family_of(sample.kind)) {
    case ModalityFamily::Image: return tokenize_image(sample.payload, cfg.patch);
    case ModalityFamily::PointSet: return tokenize_points(sample.payload, cfg.voxel_grid);
    case ModalityFamily::Temporal: return tokenize_temporal(sample.payload, cfg.window);
  }
  throw ConfigError("unknown modality family");
}

std::size_t token_count(ModalityKind kind, const ModalityGeometry& g, const TokenizerConfig& cfg) {
  switch (family_of(kind)) {
    case ModalityFamily::Image: return g.frames * (g.height / cfg.patch) * (g.width / cfg.patch);
    case ModalityFamily::PointSet: return g.frames * cfg.voxel_grid * cfg.voxel_grid * cfg.voxel_grid;
    case ModalityFamily::Temporal: return g.length / cfg.window;
  }
  return 0;
}

std::size_t token_dim(ModalityKind kind, const ModalityGeometry& g, const TokenizerConfig& cfg) {
  switch (family_of(kind)) {
    case ModalityFamily::Image: return cfg.patch * cfg.patch * g.channels;
    case ModalityFamily::PointSet: return g.features + 1;
    case ModalityFamily::Temporal: return cfg.window * g.subcarriers;
  }
  return 0;
}

template <typename T>
ModalityTokenizer<T>::ModalityTokenizer(ParamStore<T>& store, ModalityKind kind, const ModalityGeometry& geom,
                                        const TokenizerConfig& cfg, std::size_t width, Rng& rng)
    : kind_(kind),
      proj_(store, "tokenizer." + std::string(to_string(kind)), token_dim(kind, geom, cfg), width, rng) {}

template <typename T>
Var<T> ModalityTokenizer<T>::embed(const TokenGrid& grid) const {
  return proj_.forward(Var<T>::constant(grid.tokens.template cast<T>()));
}

template class ModalityTokenizer<float>;
template class ModalityTokenizer<double>;

}  // namespace holo
