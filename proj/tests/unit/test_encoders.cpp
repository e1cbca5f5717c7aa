#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "holo/encoders/encoders.hpp"
#include "test_util.hpp"

using namespace holo;

namespace {

ModalitySample random_sample(ModalityKind kind, const ModalityGeometry& g, std::uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  ModalitySample s;
  s.kind = kind;
  s.payload.shape = g.payload_shape(kind);
  s.payload.values.resize(shape_numel(s.payload.shape));
  for (auto& v : s.payload.values) v = static_cast<float>(std::clamp(rng.normal(0.0, scale), -1.0, 1.0));
  return s;
}

EncoderConfig small_config() {
  EncoderConfig cfg;
  cfg.universal_width = 16;
  cfg.heads = 4;
  cfg.backbone_width = 8;
  return cfg;
}

}  // namespace

TEST_CASE("tokenize examples") {
  ModalitySample depth;
  depth.kind = ModalityKind::Depth;
  depth.payload = {{5, 32, 32, 1}, std::vector<float>(5 * 32 * 32, 0.25f)};
  TokenizerConfig cfg;
  cfg.patch = 8;
  auto grid = tokenize(depth, cfg);
  CHECK(grid.tokens.shape() == Shape{80, 64});
  CHECK_FALSE(grid.sentinel);

  ModalitySample empty;
  empty.kind = ModalityKind::LiDAR;
  empty.payload = {{5, 0, 3}, {}};
  auto sentinel = tokenize(empty, cfg);
  CHECK(sentinel.sentinel);
  CHECK(sentinel.tokens.shape() == Shape{1, 4});
  for (float v : sentinel.tokens.data()) CHECK(v == 0.0f);

  ModalitySample csi;
  csi.kind = ModalityKind::WiFiCSI;
  csi.payload = {{50, 30}, std::vector<float>(1500, 1.0f)};
  cfg.window = 10;
  CHECK(tokenize(csi, cfg).tokens.shape() == Shape{5, 300});
}

TEST_CASE("image patches are frame-major then row-major") {
  ModalitySample s;
  s.kind = ModalityKind::Infrared;
  s.payload.shape = {2, 4, 4, 1};
  for (int i = 0; i < 32; ++i) s.payload.values.push_back(float(i));
  TokenizerConfig cfg;
  cfg.patch = 2;
  auto grid = tokenize(s, cfg).tokens;
  REQUIRE(grid.shape() == Shape{8, 4});
  // token 1 = frame 0, patch row 0, patch col 1 -> pixels (0,2),(0,3),(1,2),(1,3)
  CHECK(grid[4 + 0] == 2);
  CHECK(grid[4 + 1] == 3);
  CHECK(grid[4 + 2] == 6);
  CHECK(grid[4 + 3] == 7);
  CHECK(grid[4 * 4] == 16);  // token 4 starts frame 1
}

TEST_CASE("voxel tokens carry mean features and occupancy") {
  ModalitySample s;
  s.kind = ModalityKind::MmWave;
  s.payload = {{1, 2, 3}, {-0.9f, -0.9f, -0.9f, -0.5f, -0.7f, -0.1f}};
  TokenizerConfig cfg;
  cfg.voxel_grid = 2;
  auto t = tokenize(s, cfg).tokens;
  REQUIRE(t.shape() == Shape{8, 4});
  CHECK(t[0] == doctest::Approx(-0.7f));
  CHECK(t[2] == doctest::Approx(-0.5f));
  CHECK(t[3] == 1.0f);
  CHECK(t[4 + 3] == 0.0f);
}

TEST_CASE("token counts are deterministic per kind") {
  TokenizerConfig cfg;
  for (auto kind : kAllModalities) {
    auto g = desk_geometry(kind);
    auto grid = tokenize(random_sample(kind, g, 1), cfg);
    CHECK(grid.tokens.dim(0) == token_count(kind, g, cfg));
    CHECK(grid.tokens.dim(1) == token_dim(kind, g, cfg));
  }
}

TEST_CASE("malformed payloads are rejected") {
  ModalitySample s;
  s.kind = ModalityKind::Video;
  s.payload = {{5, 30, 32, 3}, std::vector<float>(5 * 30 * 32 * 3)};
  CHECK_THROWS_AS(tokenize(s, TokenizerConfig{}), DimensionError);
  s.payload = {{5, 32, 32}, std::vector<float>(5 * 32 * 32)};
  CHECK_THROWS_AS(tokenize(s, TokenizerConfig{}), DimensionError);
  s.kind = ModalityKind::WiFiCSI;
  s.payload = {{4, 30}, std::vector<float>(120)};
  CHECK_THROWS_AS(tokenize(s, TokenizerConfig{}), DimensionError);
}

TEST_CASE("universal encoder is frozen, deterministic and shaped n_m x d_m") {
  ParamStore<float> store;
  auto cfg = small_config();
  EncoderBank<float> bank(store, cfg, 6, 42);
  for (auto kind : kAllModalities) bank.add(kind, desk_geometry(kind));
  for (auto* p : store.with_prefix("universal.")) CHECK(p->frozen);

  for (auto kind : kAllModalities) {
    auto g = desk_geometry(kind);
    auto s = random_sample(kind, g, 7);
    auto a = bank.universal_encode(s).tokens.value();
    auto b = bank.universal_encode(s).tokens.value();
    CHECK(a == b);
    CHECK(a.shape() == Shape{token_count(kind, g, cfg.tokenizer), cfg.universal_width});
  }
}

TEST_CASE("distinct payloads give distinct embeddings") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ParamStore<float> store;
    EncoderBank<float> bank(store, small_config(), 6, seed);
    bank.add(ModalityKind::Video, desk_geometry(ModalityKind::Video));
    auto g = desk_geometry(ModalityKind::Video);
    auto a = bank.universal_encode(random_sample(ModalityKind::Video, g, 100 + seed)).tokens.value();
    auto b = bank.universal_encode(random_sample(ModalityKind::Video, g, 200 + seed)).tokens.value();
    CHECK(holo::testing::max_abs_diff(a, b) > 1e-3);
  }
}

TEST_CASE("tailored features end in d_m for every kind and stay finite on zero payloads") {
  ParamStore<float> store;
  auto cfg = small_config();
  EncoderBank<float> bank(store, cfg, 6, 3);
  for (auto kind : kAllModalities) {
    auto g = desk_geometry(kind);
    bank.add(kind, g);
    auto f = bank.tailored_encode(random_sample(kind, g, 5)).grid.value();
    CHECK(f.shape() == Shape{cfg.grid_h, cfg.grid_w, cfg.universal_width});
    auto zero = random_sample(kind, g, 5, 0.0);
    auto z = bank.tailored_encode(zero).grid.value();
    for (float v : z.data()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("point-set tailored encoding is exactly invariant to point order") {
  ParamStore<double> store;
  EncoderBank<double> bank(store, small_config(), 6, 9);
  for (auto kind : {ModalityKind::LiDAR, ModalityKind::MmWave}) {
    auto g = desk_geometry(kind);
    bank.add(kind, g);
    auto s = random_sample(kind, g, 17);
    auto shuffled = s;
    const std::size_t P = g.points, F = g.features;
    std::vector<std::size_t> order(g.frames * P);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(4);
    // shuffle within each frame so frame membership is preserved
    for (std::size_t f = 0; f < g.frames; ++f)
      std::shuffle(order.begin() + static_cast<std::ptrdiff_t>(f * P),
                   order.begin() + static_cast<std::ptrdiff_t>((f + 1) * P), rng.engine());
    for (std::size_t i = 0; i < order.size(); ++i)
      for (std::size_t d = 0; d < F; ++d) shuffled.payload.values[i * F + d] = s.payload.values[order[i] * F + d];
    CHECK(bank.tailored_encode(s).grid.value() == bank.tailored_encode(shuffled).grid.value());
  }
}

TEST_CASE("unregistered modality is a config error") {
  ParamStore<float> store;
  EncoderBank<float> bank(store, small_config(), 6, 1);
  bank.add(ModalityKind::Video, desk_geometry(ModalityKind::Video));
  auto s = random_sample(ModalityKind::RFID, desk_geometry(ModalityKind::RFID), 1);
  CHECK_THROWS_AS(bank.tailored_encode(s), ConfigError);
  CHECK_THROWS_AS(bank.universal_encode(s), ConfigError);
}

TEST_CASE("stage-1 classifier pools the grid then applies a linear head") {
  for (std::size_t classes : {27u, 55u}) {
    ParamStore<double> store;
    Rng rng(2);
    auto cfg = small_config();
    TailoredEncoder<double> enc(store, ModalityKind::Depth, desk_geometry(ModalityKind::Depth), cfg, classes, rng);
    Tensor<double> constant({cfg.grid_h, cfg.grid_w, cfg.backbone_width});
    for (std::size_t i = 0; i < constant.numel(); ++i) constant[i] = 0.1 * double(i % cfg.backbone_width);
    auto logits = enc.classify({Var<double>::constant(constant)}).value();
    REQUIRE(logits.shape() == Shape{classes});
    const auto& w = store.at(enc.classifier_prefix() + ".weight").value();
    const auto& b = store.at(enc.classifier_prefix() + ".bias").value();
    for (std::size_t c = 0; c < classes; ++c) {
      double ref = b[c];
      for (std::size_t j = 0; j < cfg.backbone_width; ++j) ref += 0.1 * double(j) * w[j * classes + c];
      CHECK(logits[c] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
  ParamStore<double> store;
  Rng rng(2);
  CHECK_THROWS_AS(TailoredEncoder<double>(store, ModalityKind::Depth, desk_geometry(ModalityKind::Depth),
                                          small_config(), 1, rng),
                  ConfigError);
}
