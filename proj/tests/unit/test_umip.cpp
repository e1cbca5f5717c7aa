#include <cmath>
#include <numeric>

#include "doctest.h"
#include "holo/numerics/grad_check.hpp"
#include "holo/umip/umip.hpp"
#include "test_util.hpp"

using namespace holo;
using holo::testing::max_abs_diff;
using holo::testing::random_leaf;

namespace {

UMIPConfig tiny_config(std::size_t L, std::size_t d_m = 8, std::size_t d_llm = 12) {
  UMIPConfig cfg;
  cfg.L = L;
  cfg.d_m = d_m;
  cfg.d_llm = d_llm;
  cfg.heads = 2;
  cfg.n_queries = {{ModalityKind::Video, 3}, {ModalityKind::RFID, 2}};
  return cfg;
}

void zero_param(ParamStore<double>& store, const std::string& name) { store.at(name).value().fill(0.0); }

// Zeroes the output projection of every residual branch.
void zero_residual_outputs(ParamStore<double>& store, std::size_t L) {
  for (std::size_t l = 0; l < L; ++l) {
    const std::string b = "umip.block" + std::to_string(l);
    for (const char* branch : {".self.o", ".cross.o", ".ffn.down"}) {
      zero_param(store, b + branch + ".weight");
      zero_param(store, b + branch + ".bias");
    }
  }
}

double gelu_ref(double x) {
  const double c = std::sqrt(2.0 / M_PI);
  return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

// Independent linear -> gelu -> linear over rows of x.
Tensor<double> mlp_ref(const Tensor<double>& x, const ParamStore<double>& store, const std::string& name) {
  const auto& w1 = store.at(name + ".up.weight").value();
  const auto& b1 = store.at(name + ".up.bias").value();
  const auto& w2 = store.at(name + ".down.weight").value();
  const auto& b2 = store.at(name + ".down.bias").value();
  const std::size_t n = x.dim(0), in = w1.dim(0), hid = w1.dim(1), out = w2.dim(1);
  Tensor<double> y({n, out});
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> h(hid);
    for (std::size_t j = 0; j < hid; ++j) {
      double s = b1[j];
      for (std::size_t i = 0; i < in; ++i) s += x[r * in + i] * w1[i * hid + j];
      h[j] = gelu_ref(s);
    }
    for (std::size_t j = 0; j < out; ++j) {
      double s = b2[j];
      for (std::size_t i = 0; i < hid; ++i) s += h[i] * w2[i * out + j];
      y[r * out + j] = s;
    }
  }
  return y;
}

Tensor<double> pool_ref(const Tensor<double>& x, std::size_t n_out) {
  const std::size_t n = x.dim(0), d = x.dim(1);
  Tensor<double> y({n_out, d});
  for (std::size_t i = 0; i < n_out; ++i) {
    const std::size_t b = i * n / n_out, e = ((i + 1) * n + n_out - 1) / n_out;
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0;
      for (std::size_t r = b; r < e; ++r) s += x[r * d + j];
      y[i * d + j] = s / double(e - b);
    }
  }
  return y;
}

}  // namespace

TEST_CASE("form_queries pools along the token axis") {
  Rng rng(1);
  EmbeddingSequence<double> y{random_leaf<double>({128, 16}, rng)};
  CHECK(form_queries(y, 64).shape() == Shape{64, 16});
  CHECK(form_queries(y, 128).value() == y.tokens.value());
  CHECK_THROWS_AS(form_queries(y, 129), PoolingError);

  EmbeddingSequence<double> c{Var<double>::constant(Tensor<double>({10, 4}, 0.75))};
  auto pooled = form_queries(c, 3).value();
  for (double v : pooled.data()) CHECK(v == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("kv_from_features flattens row-major through separate maps") {
  ParamStore<double> store;
  Rng rng(2);
  UMIP<double> umip(store, tiny_config(1), rng);
  FeatureMap<double> zero{Var<double>::constant(Tensor<double>({4, 4, 8}))};
  auto [k0, v0] = umip.kv_from_features(zero);
  CHECK(k0.shape() == Shape{16, 8});
  CHECK(v0.shape() == Shape{16, 8});
  for (double x : k0.value().data()) CHECK(x == 0.0);
  for (double x : v0.value().data()) CHECK(x == 0.0);

  holo::testing::set_identity_projections(store, "umip.kv.k");
  FeatureMap<double> grid{random_leaf<double>({4, 4, 8}, rng)};
  auto [k, v] = umip.kv_from_features(grid);
  for (std::size_t c = 0; c < 8; ++c) CHECK(k.value()[4 * 8 + c] == grid.grid.value()[(1 * 4 + 0) * 8 + c]);
  CHECK(max_abs_diff(k.value(), v.value()) > 1e-3);
}

TEST_CASE("zeroed residual outputs collapse UMIP to projection of pooled queries") {
  for (std::size_t L : {1u, 2u}) {
    ParamStore<double> store;
    Rng rng(3 + L);
    UMIP<double> umip(store, tiny_config(L), rng);
    zero_residual_outputs(store, L);
    EmbeddingSequence<double> y{random_leaf<double>({7, 8}, rng)};
    FeatureMap<double> f{random_leaf<double>({2, 3, 8}, rng)};
    auto z = umip.forward(ModalityKind::Video, y, f).value();
    auto ref = mlp_ref(pool_ref(y.tokens.value(), 3), store, "umip.proj");
    REQUIRE(z.shape() == Shape{3, 12});
    CHECK(max_abs_diff(z, ref) < 1e-12);
  }
}

TEST_CASE("single-key cross-attention injects the projected value row") {
  ParamStore<double> store;
  Rng rng(5);
  UMIP<double> umip(store, tiny_config(1), rng);
  for (const char* branch : {".self.o", ".ffn.down"}) {
    zero_param(store, std::string("umip.block0") + branch + ".weight");
    zero_param(store, std::string("umip.block0") + branch + ".bias");
  }
  auto q = random_leaf<double>({3, 8}, rng);
  auto k = random_leaf<double>({1, 8}, rng);
  auto v = random_leaf<double>({1, 8}, rng);
  auto out = umip.block(0, q, k, v).value();

  const auto& wv = store.at("umip.block0.cross.v.weight").value();
  const auto& bv = store.at("umip.block0.cross.v.bias").value();
  const auto& wo = store.at("umip.block0.cross.o.weight").value();
  const auto& bo = store.at("umip.block0.cross.o.bias").value();
  std::vector<double> vp(8), inj(8);
  for (std::size_t j = 0; j < 8; ++j) {
    vp[j] = bv[j];
    for (std::size_t i = 0; i < 8; ++i) vp[j] += v.value()[i] * wv[i * 8 + j];
  }
  for (std::size_t j = 0; j < 8; ++j) {
    inj[j] = bo[j];
    for (std::size_t i = 0; i < 8; ++i) inj[j] += vp[i] * wo[i * 8 + j];
  }
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t j = 0; j < 8; ++j) CHECK(out[r * 8 + j] == doctest::Approx(q.value()[r * 8 + j] + inj[j]).epsilon(1e-12));
}

TEST_CASE("joint permutation of feature cells leaves Z unchanged") {
  ParamStore<double> store;
  Rng rng(6);
  UMIP<double> umip(store, tiny_config(2), rng);
  EmbeddingSequence<double> y{random_leaf<double>({7, 8}, rng)};
  auto grid = nn::normal_tensor<double>({3, 4, 8}, 1.0, rng);
  std::vector<std::size_t> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  Tensor<double> shuffled({3, 4, 8});
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t c = 0; c < 8; ++c) shuffled[i * 8 + c] = grid[perm[i] * 8 + c];
  auto a = umip.forward(ModalityKind::Video, y, {Var<double>::constant(grid)}).value();
  auto b = umip.forward(ModalityKind::Video, y, {Var<double>::constant(shuffled)}).value();
  CHECK(max_abs_diff(a, b) < 1e-12);
}

TEST_CASE("K,V are computed once per forward regardless of depth") {
  for (std::size_t L : {1u, 3u}) {
    ParamStore<double> store;
    Rng rng(7);
    UMIP<double> umip(store, tiny_config(L), rng);
    EmbeddingSequence<double> y{random_leaf<double>({5, 8}, rng)};
    FeatureMap<double> f{random_leaf<double>({2, 2, 8}, rng)};
    umip.forward(ModalityKind::RFID, y, f);
    CHECK(umip.kv_calls() == 1);
    umip.forward(ModalityKind::Video, y, f);
    CHECK(umip.kv_calls() == 2);
  }
}

TEST_CASE("L=1 equals one block followed by the projection") {
  ParamStore<double> store;
  Rng rng(8);
  UMIP<double> umip(store, tiny_config(1), rng);
  EmbeddingSequence<double> y{random_leaf<double>({6, 8}, rng)};
  FeatureMap<double> f{random_leaf<double>({2, 2, 8}, rng)};
  auto [k, v] = umip.kv_from_features(f);
  auto q = umip.block(0, form_queries(y, 3), k, v);
  auto ref = mlp_ref(q.value(), store, "umip.proj");
  CHECK(max_abs_diff(umip.forward(ModalityKind::Video, y, f).value(), ref) < 1e-12);
}

TEST_CASE("configuration and shape errors") {
  ParamStore<double> store;
  Rng rng(9);
  CHECK_THROWS_AS(UMIP<double>(store, tiny_config(0), rng), ConfigError);
  UMIP<double> umip(store, tiny_config(1), rng);
  EmbeddingSequence<double> y{random_leaf<double>({6, 8}, rng)};
  FeatureMap<double> f{random_leaf<double>({2, 2, 8}, rng)};
  auto [k, v] = umip.kv_from_features(f);
  CHECK_THROWS_AS(umip.block(0, random_leaf<double>({3, 6}, rng), k, v), DimensionError);
  CHECK_THROWS_AS(umip.block(0, form_queries(y, 3), random_leaf<double>({4, 6}, rng), v), DimensionError);
  EmbeddingSequence<double> short_seq{random_leaf<double>({2, 8}, rng)};
  CHECK_THROWS_AS(umip.forward(ModalityKind::Video, short_seq, f), PoolingError);
  CHECK_THROWS_AS(umip.forward(ModalityKind::Depth, y, f), ConfigError);
}

TEST_CASE("per-modality projections are separate parameter sets") {
  ParamStore<double> store;
  Rng rng(10);
  auto cfg = tiny_config(1);
  cfg.shared_projection = false;
  UMIP<double> umip(store, cfg, rng);
  CHECK(store.contains("umip.proj.video.up.weight"));
  CHECK(store.contains("umip.proj.rfid.down.bias"));
  CHECK_FALSE(store.contains("umip.proj.up.weight"));
  EmbeddingSequence<double> y{random_leaf<double>({6, 8}, rng)};
  FeatureMap<double> f{random_leaf<double>({2, 2, 8}, rng)};
  CHECK(umip.forward(ModalityKind::RFID, y, f).shape() == Shape{2, 12});
}

TEST_CASE("full-scale presets") {
  auto mmfi = umip_full_preset("mmfi");
  CHECK(mmfi.L == 8);
  CHECK(mmfi.queries_for(ModalityKind::Video) == 64);
  CHECK(mmfi.queries_for(ModalityKind::Depth) == 64);
  CHECK(mmfi.queries_for(ModalityKind::MmWave) == 64);
  CHECK(mmfi.queries_for(ModalityKind::Infrared) == 64);
  CHECK(mmfi.queries_for(ModalityKind::LiDAR) == 256);
  CHECK(mmfi.queries_for(ModalityKind::WiFiCSI) == 16);
  CHECK(mmfi.queries_for(ModalityKind::RFID) == 16);
  CHECK(umip_full_preset("xrf55").queries_for(ModalityKind::WiFiCSI) == 256);
  CHECK_THROWS_AS(umip_full_preset("kinetics"), ConfigError);
  auto q = qformer_full_preset();
  CHECK(q.n_learnable == 30);
  CHECK(q.d_m == 1024);
}

TEST_CASE("Q-Former baseline shapes and determinism") {
  ParamStore<double> store;
  Rng rng(11);
  QFormerConfig cfg;
  cfg.d_m = 8;
  cfg.d_llm = 12;
  cfg.heads = 2;
  QFormer<double> qf(store, cfg, {ModalityKind::Video, ModalityKind::WiFiCSI}, rng);
  CHECK(qf.queries(ModalityKind::Video).value().shape() == Shape{30, 8});
  EmbeddingSequence<double> y{random_leaf<double>({9, 8}, rng)};
  auto a = qf.forward(ModalityKind::Video, y).value();
  CHECK(a.shape() == Shape{30, 12});
  CHECK(a == qf.forward(ModalityKind::Video, y).value());
  CHECK(max_abs_diff(a, qf.forward(ModalityKind::WiFiCSI, y).value()) > 1e-6);
  CHECK_THROWS_AS(qf.forward(ModalityKind::RFID, y), ConfigError);
}

TEST_CASE("UMIP gradient check reaches MLP^m but not the frozen universal encoder") {
  ParamStore<double> store;
  EncoderConfig ecfg;
  ecfg.universal_width = 8;
  ecfg.heads = 2;
  ecfg.backbone_width = 4;
  ecfg.grid_h = ecfg.grid_w = 2;
  ecfg.tokenizer.window = 20;
  EncoderBank<double> bank(store, ecfg, 3, 12);
  ModalityGeometry g;
  g.length = 40;
  g.subcarriers = 3;
  bank.add(ModalityKind::RFID, g);
  Rng rng(13);
  auto ucfg = tiny_config(2, 8, 6);
  UMIP<double> umip(store, ucfg, rng);

  ModalitySample s;
  s.kind = ModalityKind::RFID;
  s.payload.shape = {40, 3};
  for (std::size_t i = 0; i < 120; ++i) s.payload.values.push_back(static_cast<float>(std::sin(0.37 * double(i))));
  auto f = [&] {
    auto z = umip.forward(ModalityKind::RFID, bank.universal_encode(s), bank.tailored_encode(s));
    return ops::cross_entropy(z, {1, 4});
  };
  // Backbone and classifier take no part in this path; freeze them so the check
  // covers MLP^m, the tokenizer and the projector.
  store.set_frozen("tailored.rfid.backbone", true);
  store.set_frozen("tailored.rfid.classifier", true);
  auto report = grad_check(f, store);
  INFO("worst " << report.worst_name << " rel=" << report.max_rel_error);
  CHECK(report.passed);

  store.zero_grad();
  f().backward();
  double mlp_grad = 0;
  for (auto* p : store.with_prefix("tailored.rfid.mlp")) {
    auto g = p->var.grad();
    for (double x : g.data()) mlp_grad += std::abs(x);
  }
  CHECK(mlp_grad > 0);
  for (auto* p : store.with_prefix("universal.")) CHECK_FALSE(p->var.node().has_grad);
}
