#pragma once

#include <optional>

#include "holo/lm/vocab.hpp"
#include "holo/numerics/layers.hpp"

namespace holo {

struct DecoderConfig {
  std::size_t layers = 2;
  std::size_t width = 128;  // d_llm; must equal the projector output width
  std::size_t heads = 4;
  std::size_t max_len = 256;
  std::size_t vocab_size = 0;
  std::size_t num_classes = 0;
};

template <typename T>
struct DecodeOutput {
  Var<T> logits;  // [S, V], one row per text position
  Var<T> pooled;  // [d_llm] hidden state at the pooled position
};

/// Small prefix-LM decoder. The multimodal prefix Z_m is mutually visible;
/// text positions are causal. Parameters live under "decoder.".
template <typename T>
class Decoder {
 public:
  Decoder(ParamStore<T>& store, const DecoderConfig& cfg, Rng& rng);

  /// Learned embedding plus sinusoidal positions offset..offset+S: [S, d_llm].
  /// Throws VocabError on an out-of-range id.
  Var<T> embed_text(const std::vector<TokenId>& tokens, std::size_t offset = 0) const;

  /// Runs [Z_m ; text]. `z_m` may be empty (no prefix). The pooled state is
  /// taken at text position `pooled_at` (default: the last one). Throws
  /// TruncationError when the sequence exceeds max_len.
  DecodeOutput<T> decode(const Var<T>& z_m, const std::vector<TokenId>& text,
                         std::optional<std::size_t> pooled_at = std::nullopt) const;

  /// Action logits [C] from a pooled state.
  Var<T> classify(const Var<T>& pooled) const;

  /// Greedy continuation of `prompt` (argmax, lowest index wins ties) until EOS
  /// or `max_new` tokens; the returned answer excludes EOS.
  std::vector<TokenId> generate(const Var<T>& z_m, const std::vector<TokenId>& prompt, std::size_t max_new) const;

  const DecoderConfig& config() const { return cfg_; }

 private:
  DecoderConfig cfg_;
  Parameter<T>* embed_ = nullptr;
  std::vector<nn::TransformerLayer<T>> layers_;
  nn::LayerNorm<T> norm_;
  nn::Linear<T> head_, classifier_;
  Tensor<T> positions_;
};

/// One stage-2 training example. `prompt` is BOS + instruction + SEP; `answer`
/// is the target continuation (normally ending in EOS). PAD inside `answer` is
/// masked out of the loss.
template <typename T>
struct Stage2Example {
  Var<T> z_m;
  std::vector<TokenId> prompt;
  std::vector<TokenId> answer;
  std::int64_t action = 0;
};

/// Denominators for the two loss terms. Zero means "count within this batch";
/// gradient accumulation passes the counts of the whole effective batch.
struct Stage2Normalizer {
  double classification = 0;
  double tokens = 0;
};

template <typename T>
struct Stage2Loss {
  Var<T> total;
  double classification = 0;   // value of the classification term
  double next_token = 0;       // value of L_next
  std::size_t answer_tokens = 0;
  bool all_masked = false;     // no unmasked answer token: L_next dropped
};

/// CE(classifier(pooled), action) + mean next-token CE over answer positions.
/// The pooled state is read at the last prompt position, before any answer token.
template <typename T>
Stage2Loss<T> stage2_loss(const Decoder<T>& decoder, const std::vector<Stage2Example<T>>& batch,
                          const Stage2Normalizer& norm = {});

/// Number of answer tokens that count towards L_next.
std::size_t count_answer_tokens(const std::vector<TokenId>& answer);

}  // namespace holo
