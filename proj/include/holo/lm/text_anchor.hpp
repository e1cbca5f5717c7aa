#pragma once

#include <cstdint>
#include <string_view>

#include "holo/numerics/tensor.hpp"

namespace holo {

struct TextAnchor {
  Tensor<double> vector;  // [d_m]
  bool empty = false;     // caption had no words; vector is zero
};

/// Frozen text-side embedding space standing in for a pretrained text encoder.
/// Each word maps to a fixed pseudo-random unit-variance vector derived from
/// (seed, word); a caption anchors at the mean of its word vectors.
class TextAnchorSpace {
 public:
  TextAnchorSpace(std::size_t width, std::uint64_t seed) : width_(width), seed_(seed) {}

  Tensor<double> word_vector(std::string_view word) const;
  TextAnchor embed(std::string_view caption) const;

  std::size_t width() const { return width_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t width_;
  std::uint64_t seed_;
};

}  // namespace holo
