#include "holo/umip/umip.hpp"

namespace holo {

std::size_t UMIPConfig::queries_for(ModalityKind kind) const {
  auto it = n_queries.find(kind);
  if (it == n_queries.end()) {
    throw ConfigError("no query count configured for modality " + std::string(to_string(kind)));
  }
  return it->second;
}

void UMIPConfig::validate() const {
  if (L < 1) throw ConfigError("UMIP needs at least one block");
  if (d_m == 0 || d_llm == 0) throw ConfigError("UMIP widths must be positive");
  if (heads == 0 || d_m % heads != 0) {
    throw ConfigError("UMIP width " + std::to_string(d_m) + " not divisible by " + std::to_string(heads) + " heads");
  }
  for (const auto& [kind, n] : n_queries) {
    if (n == 0) throw ConfigError("query count for " + std::string(to_string(kind)) + " must be positive");
  }
}

UMIPConfig umip_full_preset(std::string_view dataset) {
  if (dataset != "mmfi" && dataset != "xrf55") throw ConfigError("unknown dataset preset: " + std::string(dataset));
  UMIPConfig cfg;
  cfg.L = 8;
  cfg.d_m = 1024;
  cfg.d_llm = 4096;
  cfg.heads = 16;
  cfg.n_queries = {{ModalityKind::Video, 64},    {ModalityKind::Depth, 64},
                   {ModalityKind::Infrared, 64}, {ModalityKind::MmWave, 64},
                   {ModalityKind::LiDAR, 256},   {ModalityKind::RFID, 16},
                   {ModalityKind::WiFiCSI, dataset == "xrf55" ? 256u : 16u}};
  return cfg;
}

UMIPConfig umip_desk_preset(std::size_t d_m, std::size_t d_llm) {
  UMIPConfig cfg;
  cfg.d_m = d_m;
  cfg.d_llm = d_llm;
  cfg.n_queries = {{ModalityKind::Video, 16},    {ModalityKind::Depth, 16}, {ModalityKind::Infrared, 16},
                   {ModalityKind::MmWave, 16},   {ModalityKind::LiDAR, 32}, {ModalityKind::WiFiCSI, 4},
                   {ModalityKind::RFID, 4}};
  return cfg;
}

QFormerConfig qformer_full_preset() {
  QFormerConfig cfg;
  cfg.n_learnable = 30;
  cfg.d_m = 1024;
  cfg.d_llm = 4096;
  cfg.L = 8;
  cfg.heads = 16;
  return cfg;
}

template <typename T>
Var<T> form_queries(const EmbeddingSequence<T>& y_clip, std::size_t n_out) {
  return ops::adaptive_avg_pool_1d(y_clip.tokens, n_out);
}

template <typename T>
Var<T> flatten_grid(const FeatureMap<T>& y_t) {
  const auto& s = y_t.grid.shape();
  if (s.size() != 3) throw DimensionError("feature map must be [h,w,d], got " + shape_str(s));
  return ops::reshape(y_t.grid, {s[0] * s[1], s[2]});
}

template <typename T>
QueryBlock<T>::QueryBlock(ParamStore<T>& store, const std::string& name, std::size_t width, std::size_t heads,
                          std::size_t ffn_hidden, Rng& rng)
    : ln_self_(store, name + ".ln1", width),
      ln_cross_(store, name + ".ln2", width),
      ln_ffn_(store, name + ".ln3", width),
      self_(store, name + ".self", width, heads, rng),
      cross_(store, name + ".cross", width, heads, rng),
      ffn_(store, name + ".ffn", width, ffn_hidden, rng),
      width_(width) {}

template <typename T>
Var<T> QueryBlock<T>::forward(const Var<T>& q, const Var<T>& k, const Var<T>& v, Tensor<T>* cross_weights) const {
  if (q.shape().size() != 2 || q.dim(1) != width_) {
    throw DimensionError("query block expects Q[n," + std::to_string(width_) + "], got " + shape_str(q.shape()));
  }
  Var<T> h = ln_self_.forward(q);
  Var<T> x = ops::add(q, self_.forward(h, h, h));
  x = ops::add(x, cross_.forward(ln_cross_.forward(x), k, v, {}, cross_weights));
  return ops::add(x, ffn_.forward(ln_ffn_.forward(x)));
}

template <typename T>
UMIP<T>::UMIP(ParamStore<T>& store, const UMIPConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  k_map_ = nn::Linear<T>(store, "umip.kv.k", cfg.d_m, cfg.d_m, rng);
  v_map_ = nn::Linear<T>(store, "umip.kv.v", cfg.d_m, cfg.d_m, rng);
  for (std::size_t l = 0; l < cfg.L; ++l) {
    blocks_.emplace_back(store, "umip.block" + std::to_string(l), cfg.d_m, cfg.heads, cfg.ffn_mult * cfg.d_m, rng);
  }
  if (cfg.shared_projection) {
    proj_.emplace(ModalityKind::Video, nn::FeedForward<T>(store, "umip.proj", cfg.d_m, cfg.d_llm, rng, cfg.d_llm));
  } else {
    for (const auto& [kind, n] : cfg.n_queries) {
      proj_.emplace(kind, nn::FeedForward<T>(store, "umip.proj." + std::string(to_string(kind)), cfg.d_m, cfg.d_llm,
                                             rng, cfg.d_llm));
    }
  }
}

template <typename T>
const nn::FeedForward<T>& UMIP<T>::projection(ModalityKind kind) const {
  if (cfg_.shared_projection) return proj_.begin()->second;
  auto it = proj_.find(kind);
  if (it == proj_.end()) throw ConfigError("no UMIP projection for modality " + std::string(to_string(kind)));
  return it->second;
}

template <typename T>
std::pair<Var<T>, Var<T>> UMIP<T>::kv_from_features(const FeatureMap<T>& y_t) const {
  ++kv_calls_;
  Var<T> flat = flatten_grid(y_t);
  return {k_map_.forward(flat), v_map_.forward(flat)};
}

template <typename T>
Var<T> UMIP<T>::block(std::size_t l, const Var<T>& q, const Var<T>& k, const Var<T>& v) const {
  return blocks_.at(l).forward(q, k, v);
}

template <typename T>
Var<T> UMIP<T>::forward(ModalityKind kind, const EmbeddingSequence<T>& y_clip, const FeatureMap<T>& y_t) const {
  Var<T> q = form_queries(y_clip, cfg_.queries_for(kind));
  auto [k, v] = kv_from_features(y_t);
  for (const auto& b : blocks_) q = b.forward(q, k, v);
  return projection(kind).forward(q);
}

template <typename T>
QFormer<T>::QFormer(ParamStore<T>& store, const QFormerConfig& cfg, const std::vector<ModalityKind>& kinds, Rng& rng)
    : cfg_(cfg) {
  if (cfg.L < 1 || cfg.n_learnable < 1) throw ConfigError("Q-Former needs at least one block and one query");
  for (auto kind : kinds) {
    queries_[kind] = &store.add("qformer.queries." + std::string(to_string(kind)),
                                nn::normal_tensor<T>({cfg.n_learnable, cfg.d_m}, 0.02, rng));
  }
  for (std::size_t l = 0; l < cfg.L; ++l) {
    blocks_.emplace_back(store, "qformer.block" + std::to_string(l), cfg.d_m, cfg.heads, cfg.ffn_mult * cfg.d_m, rng);
  }
  proj_ = nn::FeedForward<T>(store, "qformer.proj", cfg.d_m, cfg.d_llm, rng, cfg.d_llm);
}

template <typename T>
const Parameter<T>& QFormer<T>::queries(ModalityKind kind) const {
  auto it = queries_.find(kind);
  if (it == queries_.end()) throw ConfigError("no learnable queries for modality " + std::string(to_string(kind)));
  return *it->second;
}

template <typename T>
Var<T> QFormer<T>::forward(ModalityKind kind, const Var<T>& memory) const {
  Var<T> q = queries(kind).var;
  for (const auto& b : blocks_) q = b.forward(q, memory, memory);
  return proj_.forward(q);
}

#define HOLO_INSTANTIATE_UMIP(T)                                                 \
  template Var<T> form_queries<T>(const EmbeddingSequence<T>&, std::size_t);     \
  template Var<T> flatten_grid<T>(const FeatureMap<T>&);                         \
  template class QueryBlock<T>;                                                  \
  template class UMIP<T>;                                                        \
  template class QFormer<T>;

HOLO_INSTANTIATE_UMIP(float)
HOLO_INSTANTIATE_UMIP(double)

}  // namespace holo
