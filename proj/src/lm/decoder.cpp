#include "holo/lm/decoder.hpp"

#include <spdlog/spdlog.h>

namespace holo {

template <typename T>
Decoder<T>::Decoder(ParamStore<T>& store, const DecoderConfig& cfg, Rng& rng)
    : cfg_(cfg), positions_(nn::sinusoidal_positions<T>(cfg.max_len, cfg.width)) {
  if (cfg.vocab_size <= Vocab::kReserved) throw ConfigError("decoder vocabulary holds only reserved tokens");
  if (cfg.num_classes < 2) throw ConfigError("decoder classifier needs at least 2 classes");
  if (cfg.layers < 1) throw ConfigError("decoder needs at least one layer");
  embed_ = &store.add("decoder.embed", nn::normal_tensor<T>({cfg.vocab_size, cfg.width}, 1.0, rng));
  for (std::size_t i = 0; i < cfg.layers; ++i) {
    layers_.emplace_back(store, "decoder.layer" + std::to_string(i), cfg.width, cfg.heads, rng);
  }
  norm_ = nn::LayerNorm<T>(store, "decoder.norm", cfg.width);
  head_ = nn::Linear<T>(store, "decoder.head", cfg.width, cfg.vocab_size, rng);
  classifier_ = nn::Linear<T>(store, "decoder.classifier", cfg.width, cfg.num_classes, rng);
}

template <typename T>
Var<T> Decoder<T>::embed_text(const std::vector<TokenId>& tokens, std::size_t offset) const {
  if (offset + tokens.size() > cfg_.max_len) {
    throw TruncationError("sequence of " + std::to_string(offset + tokens.size()) + " exceeds max length " +
                          std::to_string(cfg_.max_len));
  }
  std::vector<std::size_t> rows;
  rows.reserve(tokens.size());
  for (TokenId t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= cfg_.vocab_size) {
      throw VocabError("token id " + std::to_string(t) + " outside vocabulary of " + std::to_string(cfg_.vocab_size));
    }
    rows.push_back(static_cast<std::size_t>(t));
  }
  const std::size_t d = cfg_.width;
  auto pos_begin = positions_.storage().begin() + static_cast<std::ptrdiff_t>(offset * d);
  Tensor<T> pos({tokens.size(), d}, std::vector<T>(pos_begin, pos_begin + static_cast<std::ptrdiff_t>(tokens.size() * d)));
  return ops::add(ops::gather_rows(embed_->var, rows), Var<T>::constant(std::move(pos)));
}

template <typename T>
DecodeOutput<T> Decoder<T>::decode(const Var<T>& z_m, const std::vector<TokenId>& text,
                                   std::optional<std::size_t> pooled_at) const {
  if (text.empty()) throw DimensionError("decode needs at least one text token");
  const std::size_t d = cfg_.width;
  std::size_t prefix = 0;
  if (z_m) {
    if (z_m.shape().size() != 2 || z_m.dim(1) != d) {
      throw DimensionError("multimodal prefix must be [n," + std::to_string(d) + "], got " + shape_str(z_m.shape()));
    }
    prefix = z_m.dim(0);
  }
  const std::size_t n = prefix + text.size();
  if (n > cfg_.max_len) {
    throw TruncationError("prefix " + std::to_string(prefix) + " + text " + std::to_string(text.size()) +
                          " exceeds max length " + std::to_string(cfg_.max_len));
  }
  const std::size_t pool = pooled_at.value_or(text.size() - 1);
  if (pool >= text.size()) throw DimensionError("pooled position outside the text");

  Var<T> x = embed_text(text, prefix);
  if (prefix > 0) {
    auto pos = positions_.storage().begin();
    Tensor<T> ppos({prefix, d}, std::vector<T>(pos, pos + static_cast<std::ptrdiff_t>(prefix * d)));
    x = ops::concat_rows<T>({ops::add(z_m, Var<T>::constant(std::move(ppos))), x});
  }
  auto mask = Var<T>::constant(nn::prefix_causal_mask<T>(n, prefix));
  for (const auto& layer : layers_) x = layer.forward(x, mask);
  Var<T> h = norm_.forward(prefix > 0 ? ops::slice_rows(x, prefix, n) : x);
  return {head_.forward(h), ops::reshape(ops::slice_rows(h, pool, pool + 1), {d})};
}

template <typename T>
Var<T> Decoder<T>::classify(const Var<T>& pooled) const {
  return classifier_.forward(pooled);
}

template <typename T>
std::vector<TokenId> Decoder<T>::generate(const Var<T>& z_m, const std::vector<TokenId>& prompt,
                                          std::size_t max_new) const {
  if (prompt.empty()) throw ConfigError("generate needs a non-empty prompt");
  std::vector<TokenId> seq = prompt;
  std::vector<TokenId> answer;
  const std::size_t prefix = z_m ? z_m.dim(0) : 0;
  while (answer.size() < max_new && prefix + seq.size() < cfg_.max_len) {
    auto out = decode(z_m, seq);
    const auto& logits = out.logits.value();
    const std::size_t V = cfg_.vocab_size, last = seq.size() - 1;
    std::size_t best = 0;
    for (std::size_t j = 1; j < V; ++j) {
      if (logits[last * V + j] > logits[last * V + best]) best = j;
    }
    const auto tok = static_cast<TokenId>(best);
    if (tok == Vocab::kEos) break;
    answer.push_back(tok);
    seq.push_back(tok);
  }
  return answer;
}

std::size_t count_answer_tokens(const std::vector<TokenId>& answer) {
  std::size_t n = 0;
  for (TokenId t : answer) n += t != Vocab::kPad;
  return n;
}

template <typename T>
Stage2Loss<T> stage2_loss(const Decoder<T>& decoder, const std::vector<Stage2Example<T>>& batch,
                          const Stage2Normalizer& norm) {
  if (batch.empty()) throw DimensionError("stage2_loss on an empty batch");
  std::size_t tokens = 0;
  for (const auto& ex : batch) tokens += count_answer_tokens(ex.answer);
  const double cls_norm = norm.classification > 0 ? norm.classification : double(batch.size());
  const double tok_norm = norm.tokens > 0 ? norm.tokens : double(tokens);

  Stage2Loss<T> out;
  out.answer_tokens = tokens;
  out.all_masked = tokens == 0;
  if (out.all_masked) spdlog::warn("stage-2 batch has no unmasked answer tokens; using the classification term only");

  std::vector<Var<T>> cls_terms, next_terms;
  for (const auto& ex : batch) {
    if (ex.prompt.empty()) throw DimensionError("stage-2 example without a prompt");
    std::vector<TokenId> text = ex.prompt;
    // The last answer token is never an input: nothing is predicted after it.
    if (!ex.answer.empty()) text.insert(text.end(), ex.answer.begin(), ex.answer.end() - 1);
    const std::size_t p = ex.prompt.size();
    auto dec = decoder.decode(ex.z_m, text, p - 1);
    auto logits = ops::reshape(decoder.classify(dec.pooled), {1, decoder.config().num_classes});
    cls_terms.push_back(ops::cross_entropy(logits, {ex.action}, cls_norm));
    if (!out.all_masked) {
      std::vector<std::int64_t> labels(text.size(), -1);
      for (std::size_t i = 0; i < ex.answer.size(); ++i) {
        if (ex.answer[i] != Vocab::kPad) labels[p - 1 + i] = ex.answer[i];
      }
      next_terms.push_back(ops::cross_entropy(dec.logits, labels, tok_norm));
    }
  }
  Var<T> cls = cls_terms[0];
  for (std::size_t i = 1; i < cls_terms.size(); ++i) cls = ops::add(cls, cls_terms[i]);
  out.classification = double(cls.value().item());
  out.total = cls;
  if (!next_terms.empty()) {
    Var<T> next = next_terms[0];
    for (std::size_t i = 1; i < next_terms.size(); ++i) next = ops::add(next, next_terms[i]);
    out.next_token = double(next.value().item());
    out.total = ops::add(cls, next);
  }
  return out;
}

template class Decoder<float>;
template class Decoder<double>;
template Stage2Loss<float> stage2_loss(const Decoder<float>&, const std::vector<Stage2Example<float>>&,
                                       const Stage2Normalizer&);
template Stage2Loss<double> stage2_loss(const Decoder<double>&, const std::vector<Stage2Example<double>>&,
                                        const Stage2Normalizer&);

}  // namespace holo
