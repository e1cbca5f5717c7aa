#pragma once

#include "holo/encoders/modality.hpp"
#include "holo/numerics/layers.hpp"

namespace holo {

struct TokenizerConfig {
  std::size_t patch = 8;       // image patch edge
  std::size_t voxel_grid = 2;  // voxels per axis per point-cloud frame
  std::size_t window = 10;     // time steps per CSI/RFID token
};

/// Fixed, parameter-free token grid for one sample.
struct TokenGrid {
  Tensor<float> tokens;  // [n, token_dim]
  bool sentinel = false; // true when the payload was empty and a zero token stands in
};

/// Image-like payloads split into non-overlapping patches (frame-major, then
/// row-major); point sets pooled into a voxel grid per frame (mean features
/// plus occupancy fraction per voxel); CSI/RFID cut into fixed time windows.
TokenGrid tokenize(const ModalitySample& sample, const TokenizerConfig& cfg);

std::size_t token_count(ModalityKind kind, const ModalityGeometry& geom, const TokenizerConfig& cfg);
std::size_t token_dim(ModalityKind kind, const ModalityGeometry& geom, const TokenizerConfig& cfg);

/// Trainable per-modality linear embedding of a token grid to the universal width.
template <typename T>
class ModalityTokenizer {
 public:
  ModalityTokenizer() = default;
  ModalityTokenizer(ParamStore<T>& store, ModalityKind kind, const ModalityGeometry& geom,
                    const TokenizerConfig& cfg, std::size_t width, Rng& rng);

  Var<T> embed(const TokenGrid& grid) const;
  ModalityKind kind() const { return kind_; }

 private:
  ModalityKind kind_ = ModalityKind::Video;
  nn::Linear<T> proj_;
};

}  // namespace holo
