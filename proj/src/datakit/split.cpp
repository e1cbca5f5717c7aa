#include "holo/datakit/split.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "holo/errors.hpp"
#include "holo/numerics/checkpoint.hpp"
#include "holo/numerics/rng.hpp"

namespace holo {

std::string_view to_string(SplitSetting s) {
  switch (s) {
    case SplitSetting::Random: return "random";
    case SplitSetting::CrossSub: return "cross-sub";
    case SplitSetting::CrossEnv: return "cross-env";
  }
  return "?";
}

SplitSetting split_setting_from_string(std::string_view s) {
  if (s == "random") return SplitSetting::Random;
  if (s == "cross-sub") return SplitSetting::CrossSub;
  if (s == "cross-env") return SplitSetting::CrossEnv;
  throw ConfigError("unknown split setting '" + std::string(s) + "' (expected random, cross-sub or cross-env)");
}

std::string SplitAssignment::hash() const {
  std::string buf(to_string(setting));
  buf += "|train";
  for (const auto& id : train) buf += "|" + id;
  buf += "|test";
  for (const auto& id : test) buf += "|" + id;
  return hex64(fnv1a64(buf));
}

SplitAssignment split(const Manifest& manifest, SplitSetting setting, std::uint64_t seed) {
  const auto& recs = manifest.records;
  const std::size_t n = recs.size();
  std::vector<bool> is_test(n, false);
  if (setting == SplitSetting::Random) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "split/random"));
    // Fisher-Yates with our own index draws so the permutation does not depend
    // on the standard library's shuffle implementation.
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    const std::size_t n_train = (3 * n + 3) / 4;
    for (std::size_t i = n_train; i < n; ++i) is_test[order[i]] = true;
  } else {
    const auto& held = setting == SplitSetting::CrossSub ? manifest.spec.holdout_subjects : manifest.spec.holdout_envs;
    const std::set<std::size_t> groups(held.begin(), held.end());
    for (std::size_t i = 0; i < n; ++i) {
      is_test[i] = groups.count(setting == SplitSetting::CrossSub ? recs[i].subject : recs[i].env) > 0;
    }
  }
  SplitAssignment out;
  out.setting = setting;
  out.seed = seed;
  for (std::size_t i = 0; i < n; ++i) (is_test[i] ? out.test : out.train).push_back(recs[i].id);
  if (out.train.empty() || out.test.empty()) {
    throw SplitError(std::string(to_string(setting)) + " split of '" + manifest.spec.name + "' leaves the " +
                     (out.test.empty() ? "test" : "train") + " side empty; check the held-out groups");
  }
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> validation_split(const std::vector<std::string>& ids,
                                                                               double fraction, std::uint64_t seed) {
  if (ids.size() < 2) throw SplitError("validation split needs at least two sequences");
  std::size_t n_val = static_cast<std::size_t>(std::llround(fraction * double(ids.size())));
  n_val = std::clamp<std::size_t>(n_val, 1, ids.size() - 1);
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "split/validation"));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  std::vector<bool> is_val(ids.size(), false);
  for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = true;
  std::pair<std::vector<std::string>, std::vector<std::string>> out;
  for (std::size_t i = 0; i < ids.size(); ++i) (is_val[i] ? out.second : out.first).push_back(ids[i]);
  return out;
}

}  // namespace holo
