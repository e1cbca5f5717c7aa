#include "holo/lm/text_anchor.hpp"

#include <string>

#include "holo/lm/vocab.hpp"
#include "holo/numerics/rng.hpp"

namespace holo {

Tensor<double> TextAnchorSpace::word_vector(std::string_view word) const {
  Rng rng(derive_seed(seed_, "anchor/" + std::string(word)));
  Tensor<double> v({width_});
  for (auto& x : v.data()) x = rng.normal(0.0, 1.0);
  return v;
}

TextAnchor TextAnchorSpace::embed(std::string_view caption) const {
  TextAnchor out{Tensor<double>({width_}), false};
  const auto words = Vocab::split_words(caption);
  if (words.empty()) {
    out.empty = true;
    return out;
  }
  for (const auto& w : words) {
    auto v = word_vector(w);
    for (std::size_t i = 0; i < width_; ++i) out.vector[i] += v[i];
  }
  for (auto& x : out.vector.data()) x /= double(words.size());
  return out;
}

}  // namespace holo
