#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "holo/datakit/dataset.hpp"

namespace holo {

enum class SplitSetting : std::uint8_t { Random, CrossSub, CrossEnv };

std::string_view to_string(SplitSetting s);
/// Accepts "random", "cross-sub", "cross-env". Throws ConfigError.
SplitSetting split_setting_from_string(std::string_view s);

struct SplitAssignment {
  SplitSetting setting = SplitSetting::Random;
  std::uint64_t seed = 0;
  std::vector<std::string> train;  // ids in manifest order
  std::vector<std::string> test;

  /// FNV-1a over the setting and both id lists, as hex.
  std::string hash() const;
  bool operator==(const SplitAssignment&) const = default;
};

/// Random: ceil(3n/4) sequences to train, chosen by a seeded shuffle.
/// CrossSub / CrossEnv: the spec's held-out subjects / environments form the
/// test side. Throws SplitError if either side would be empty.
SplitAssignment split(const Manifest& manifest, SplitSetting setting, std::uint64_t seed);

/// Seeded hold-out of `fraction` of `ids` (at least one, fewer than all) for
/// validation; both halves keep the input order.
std::pair<std::vector<std::string>, std::vector<std::string>> validation_split(const std::vector<std::string>& ids,
                                                                               double fraction, std::uint64_t seed);

}  // namespace holo
