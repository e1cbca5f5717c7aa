#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "holo/numerics/params.hpp"

// Named-tensor container:
//
//   bytes 0..7    magic "HOLOCKPT"
//   bytes 8..11   uint32 LE format version (1)
//   bytes 12..19  uint64 LE header length H
//   next H bytes  UTF-8 JSON header:
//                   {"tensors":[{"name","shape","dtype","offset","nbytes","frozen"}...],
//                    "meta":{...}}
//   remainder     tensor payloads, little-endian, offsets relative to the
//                 first byte after the header
namespace holo {

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void save_checkpoint(const ParamStore<T>& store, const std::filesystem::path& path,
                     const nlohmann::json& meta = nlohmann::json::object(), std::string_view prefix = "");

/// Loads every tensor of the file into the same-named parameter of `store`
/// (shapes must agree; f32/f64 payloads are converted). With `strict`, every
/// parameter under `prefix` must be present in the file. Returns the meta block.
template <typename T>
nlohmann::json load_checkpoint(ParamStore<T>& store, const std::filesystem::path& path, bool strict = true,
                               std::string_view prefix = "");

/// FNV-1a over names, shapes and raw bytes of parameters under `prefix`, as hex.
template <typename T>
std::string params_hash(const ParamStore<T>& store, std::string_view prefix = "");

std::string hex64(std::uint64_t v);

}  // namespace holo
