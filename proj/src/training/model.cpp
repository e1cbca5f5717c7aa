#include "holo/training/model.hpp"

#include <algorithm>

#include "holo/errors.hpp"

namespace holo {

template <typename T>
HoloModel<T>::HoloModel(const ModelConfig& cfg, const std::vector<ModalityKind>& kinds, std::size_t frames,
                        std::size_t num_classes, Vocab vocab, std::uint64_t seed)
    : cfg_(cfg), arm_(arm_from_string(cfg.arm)), kinds_(kinds), vocab_(std::move(vocab)) {
  EncoderConfig ecfg;
  ecfg.universal_width = cfg.d_m;
  ecfg.universal_layers = cfg.universal_layers;
  ecfg.heads = cfg.heads;
  ecfg.backbone_width = cfg.backbone_width;
  bank_ = std::make_unique<EncoderBank<T>>(store_, ecfg, num_classes, derive_seed(seed, "encoders"));
  for (auto k : kinds_) bank_->add(k, desk_geometry(k, frames));

  if (arm_ == Arm::Umip) {
    UMIPConfig ucfg = cfg.preset == "paper-shapes" ? umip_full_preset("mmfi") : umip_desk_preset(cfg.d_m, cfg.d_llm);
    ucfg.d_m = cfg.d_m;
    ucfg.d_llm = cfg.d_llm;
    ucfg.L = cfg.umip_layers;
    ucfg.heads = cfg.heads;
    ucfg.shared_projection = cfg.shared_projection;
    Rng rng(derive_seed(seed, "projector"));
    umip_ = std::make_unique<UMIP<T>>(store_, ucfg, rng);
  } else {
    QFormerConfig qcfg;
    qcfg.n_learnable = cfg.qformer_queries;
    qcfg.d_m = cfg.d_m;
    qcfg.d_llm = cfg.d_llm;
    qcfg.L = cfg.umip_layers;
    qcfg.heads = cfg.heads;
    Rng rng(derive_seed(seed, "projector"));
    qformer_ = std::make_unique<QFormer<T>>(store_, qcfg, kinds_, rng);
  }

  DecoderConfig dcfg;
  dcfg.layers = cfg.decoder_layers;
  dcfg.width = cfg.d_llm;
  dcfg.heads = cfg.heads;
  dcfg.vocab_size = vocab_.size();
  dcfg.num_classes = num_classes;
  Rng rng(derive_seed(seed, "decoder"));
  decoder_ = std::make_unique<Decoder<T>>(store_, dcfg, rng);
}

template <typename T>
Var<T> HoloModel<T>::prefix(const ModalitySample& sample) const {
  switch (arm_) {
    case Arm::Baseline:
      return qformer_->forward(sample.kind, bank_->universal_encode(sample));
    case Arm::Tailored:
      return qformer_->forward(sample.kind, flatten_grid(bank_->tailored_encode(sample)));
    case Arm::Umip:
      return umip_->forward(sample.kind, bank_->universal_encode(sample), bank_->tailored_encode(sample));
  }
  throw ConfigError("unknown arm");
}

template <typename T>
Var<T> HoloModel<T>::project(ModalityKind kind, const Var<T>& x) const {
  return umip_ ? umip_->project(kind, x) : qformer_->project(x);
}

template <typename T>
std::vector<Parameter<T>*> HoloModel<T>::stage1_params(ModalityKind kind) const {
  const auto& t = bank_->tailored(kind);
  auto out = store_.with_prefix(t.backbone_prefix() + ".");
  for (auto* p : store_.with_prefix(t.classifier_prefix() + ".")) out.push_back(p);
  return out;
}

template <typename T>
std::vector<std::string> HoloModel<T>::frozen_prefixes() const {
  std::vector<std::string> out{"universal."};
  for (auto k : kinds_) {
    out.push_back(bank_->tailored(k).backbone_prefix() + ".");
    out.push_back(bank_->tailored(k).classifier_prefix() + ".");
  }
  return out;
}

template <typename T>
std::vector<std::string> HoloModel<T>::group_prefixes(std::string_view group) const {
  if (group == "tokenizer") return {"tokenizer."};
  if (group == "mlp") {
    std::vector<std::string> out;
    for (auto k : kinds_) out.push_back(bank_->tailored(k).mlp_prefix() + ".");
    return out;
  }
  if (group == "projector") return {umip_ ? "umip." : "qformer."};
  if (group == "decoder") return {"decoder."};
  if (group == "universal" || group == "backbone" || group == "classifier") {
    throw ConfigError("'" + std::string(group) + "' is frozen after stage 1 and cannot be unfrozen");
  }
  throw ConfigError("unknown parameter group '" + std::string(group) + "'");
}

template <typename T>
std::vector<Parameter<T>*> HoloModel<T>::prepare_stage2(const std::vector<std::string>& groups) {
  std::vector<std::string> trainable;
  for (const auto& g : groups)
    for (auto& p : group_prefixes(g)) trainable.push_back(p);
  for (const auto& g : {"tokenizer", "mlp", "projector", "decoder"})
    for (auto& p : group_prefixes(g)) store_.set_frozen(p, true);
  for (const auto& p : trainable) store_.set_frozen(p, false);
  for (const auto& p : frozen_prefixes()) store_.set_frozen(p, true);
  std::vector<Parameter<T>*> out;
  for (auto* p : store_.all())
    if (!p->frozen) out.push_back(p);
  return out;
}

template class HoloModel<float>;
template class HoloModel<double>;

}  // namespace holo
