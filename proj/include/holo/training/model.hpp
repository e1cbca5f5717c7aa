#pragma once

#include <memory>
#include <optional>

#include "holo/lm/decoder.hpp"
#include "holo/training/config.hpp"
#include "holo/umip/umip.hpp"

namespace holo {

/// Encoders, projector and decoder for one arm, all in one parameter store.
/// Every submodule draws its initialisation from its own seed derived from the
/// model seed, so two arms built from the same seed share identical encoders
/// and decoder initialisations.
template <typename T>
class HoloModel {
 public:
  HoloModel(const ModelConfig& cfg, const std::vector<ModalityKind>& kinds, std::size_t frames,
            std::size_t num_classes, Vocab vocab, std::uint64_t seed);

  ParamStore<T>& store() { return store_; }
  const ParamStore<T>& store() const { return store_; }
  const EncoderBank<T>& encoders() const { return *bank_; }
  const Decoder<T>& decoder() const { return *decoder_; }
  const Vocab& vocab() const { return vocab_; }
  Arm arm() const { return arm_; }
  const std::vector<ModalityKind>& kinds() const { return kinds_; }
  const ModelConfig& config() const { return cfg_; }
  const UMIP<T>* umip() const { return umip_.get(); }
  const QFormer<T>* qformer() const { return qformer_.get(); }

  /// Multimodal tokens Z_m [n, d_llm] for one sample.
  Var<T> prefix(const ModalitySample& sample) const;

  /// The projector's final MLP applied to d_m-wide vectors: [n, d_m] -> [n, d_llm].
  Var<T> project(ModalityKind kind, const Var<T>& x) const;

  /// Parameters trained in stage 1 for `kind`: tailored backbone and classifier.
  std::vector<Parameter<T>*> stage1_params(ModalityKind kind) const;

  /// Prefixes that stay fixed from the end of stage 1 onwards: the universal
  /// encoder and each tailored backbone and classifier.
  std::vector<std::string> frozen_prefixes() const;

  /// Parameter prefixes of a stage-2 group ("tokenizer", "mlp", "projector", "decoder").
  std::vector<std::string> group_prefixes(std::string_view group) const;

  /// Freezes everything outside `groups` (and always the frozen prefixes) and
  /// returns the trainable parameters. Throws ConfigError for a frozen or unknown group.
  std::vector<Parameter<T>*> prepare_stage2(const std::vector<std::string>& groups);

 private:
  ModelConfig cfg_;
  Arm arm_;
  std::vector<ModalityKind> kinds_;
  Vocab vocab_;
  ParamStore<T> store_;
  std::unique_ptr<EncoderBank<T>> bank_;
  std::unique_ptr<UMIP<T>> umip_;
  std::unique_ptr<QFormer<T>> qformer_;
  std::unique_ptr<Decoder<T>> decoder_;
};

}  // namespace holo
