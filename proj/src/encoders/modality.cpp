#include "holo/encoders/modality.hpp"

#include <cmath>

namespace holo {

ModalityFamily family_of(ModalityKind kind) {
  switch (kind) {
    case ModalityKind::Video:
    case ModalityKind::Depth:
    case ModalityKind::Infrared:
      return ModalityFamily::Image;
    case ModalityKind::LiDAR:
    case ModalityKind::MmWave:
      return ModalityFamily::PointSet;
    case ModalityKind::WiFiCSI:
    case ModalityKind::RFID:
      return ModalityFamily::Temporal;
  }
  throw ConfigError("unknown modality kind");
}

std::string_view to_string(ModalityKind kind) {
  switch (kind) {
    case ModalityKind::Video: return "video";
    case ModalityKind::Depth: return "depth";
    case ModalityKind::Infrared: return "infrared";
    case ModalityKind::LiDAR: return "lidar";
    case ModalityKind::MmWave: return "mmwave";
    case ModalityKind::WiFiCSI: return "wifi";
    case ModalityKind::RFID: return "rfid";
  }
  throw ConfigError("unknown modality kind");
}

ModalityKind modality_from_string(std::string_view name) {
  for (auto kind : kAllModalities) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown modality '" + std::string(name) +
                    "' (expected video, depth, infrared, lidar, mmwave, wifi or rfid)");
}

Shape ModalityGeometry::payload_shape(ModalityKind kind) const {
  switch (family_of(kind)) {
    case ModalityFamily::Image: return {frames, height, width, channels};
    case ModalityFamily::PointSet: return {frames, points, features};
    case ModalityFamily::Temporal: return {length, subcarriers};
  }
  return {};
}

ModalityGeometry desk_geometry(ModalityKind kind, std::size_t frames) {
  ModalityGeometry g;
  g.frames = frames;
  switch (kind) {
    case ModalityKind::Video: g.height = g.width = 32; g.channels = 3; break;
    case ModalityKind::Depth:
    case ModalityKind::Infrared: g.height = g.width = 32; g.channels = 1; break;
    case ModalityKind::LiDAR: g.points = 64; g.features = 3; break;
    case ModalityKind::MmWave: g.points = 32; g.features = 5; break;  // xyz, doppler, intensity
    case ModalityKind::WiFiCSI: g.length = 20 * frames; g.subcarriers = 30; break;
    case ModalityKind::RFID: g.length = 20 * frames; g.subcarriers = 12; break;
  }
  return g;
}

void validate_payload(ModalityKind kind, const RawArray& payload) {
  const auto& s = payload.shape;
  if (payload.values.size() != payload.numel()) {
    throw DimensionError("payload holds " + std::to_string(payload.values.size()) + " values for shape " +
                         shape_str(s));
  }
  const std::string who(to_string(kind));
  switch (family_of(kind)) {
    case ModalityFamily::Image:
      if (s.size() != 4 || s[0] == 0 || s[1] == 0 || s[2] == 0 || s[3] == 0)
        throw DimensionError(who + " payload must be [frames,height,width,channels], got " + shape_str(s));
      break;
    case ModalityFamily::PointSet:
      if (s.size() != 3 || s[0] == 0 || s[2] < 3)
        throw DimensionError(who + " payload must be [frames,points,features>=3], got " + shape_str(s));
      break;
    case ModalityFamily::Temporal:
      if (s.size() != 2 || s[0] == 0 || s[1] == 0)
        throw DimensionError(who + " payload must be [length,subcarriers], got " + shape_str(s));
      break;
  }
  for (float v : payload.values) {
    if (!std::isfinite(v)) throw NumericError(who + " payload contains a non-finite value");
  }
}

}  // namespace holo
