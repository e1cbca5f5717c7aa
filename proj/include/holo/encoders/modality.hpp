#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "holo/numerics/tensor.hpp"

namespace holo {

enum class ModalityKind : std::uint8_t { Video, Depth, Infrared, LiDAR, MmWave, WiFiCSI, RFID };

inline constexpr std::array<ModalityKind, 7> kAllModalities{
    ModalityKind::Video, ModalityKind::Depth,   ModalityKind::Infrared, ModalityKind::LiDAR,
    ModalityKind::MmWave, ModalityKind::WiFiCSI, ModalityKind::RFID};

/// Which tokenizer and tailored backbone a modality uses.
enum class ModalityFamily : std::uint8_t { Image, PointSet, Temporal };

ModalityFamily family_of(ModalityKind kind);
std::string_view to_string(ModalityKind kind);
/// Accepts the names produced by to_string ("video", "wifi", ...). Throws ConfigError.
ModalityKind modality_from_string(std::string_view name);

/// Raw sensor array. Unlike Tensor, extents may be zero (an empty point cloud).
struct RawArray {
  Shape shape;
  std::vector<float> values;

  std::size_t numel() const { return shape_numel(shape); }
  bool operator==(const RawArray&) const = default;
};

/// Expected payload layout per modality:
///   image-like  [frames, height, width, channels]
///   point sets  [frames, points, features]   (features >= 3, xyz first, in [-1, 1])
///   temporal    [length, subcarriers]
struct ModalityGeometry {
  std::size_t frames = 1;
  std::size_t height = 0, width = 0, channels = 1;
  std::size_t points = 0, features = 3;
  std::size_t length = 0, subcarriers = 0;

  Shape payload_shape(ModalityKind kind) const;
  bool operator==(const ModalityGeometry&) const = default;
};

/// Desk-scale payload geometry for a modality with `frames` frames per sample.
ModalityGeometry desk_geometry(ModalityKind kind, std::size_t frames = 5);

struct ModalitySample {
  ModalityKind kind = ModalityKind::Video;
  RawArray payload;
  std::size_t action_id = 0;
  std::size_t subject_id = 0;
  std::size_t environment_id = 0;
};

/// Throws DimensionError unless `payload` is a well-formed array for `kind`.
void validate_payload(ModalityKind kind, const RawArray& payload);

}  // namespace holo
