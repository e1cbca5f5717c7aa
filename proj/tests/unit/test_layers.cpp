#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace holo;
using holo::testing::random_leaf;
using holo::testing::set_identity_projections;
using holo::testing::tensor_const;

TEST_CASE("attention with a single key returns the value row") {
  ParamStore<double> store;
  Rng rng(1);
  nn::MultiHeadAttention<double> attn(store, "attn", 4, 2, rng);
  set_identity_projections(store, "attn");
  auto q = random_leaf<double>({3, 4}, rng);
  auto kv = tensor_const<double>({1, 4}, {0.5, -1, 2, 3});
  auto out = attn.forward(q, kv, kv).value();
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t j = 0; j < 4; ++j) CHECK(out[r * 4 + j] == doctest::Approx(kv.value()[j]).epsilon(1e-14));
}

TEST_CASE("attention matches a hand-computed convex combination") {
  ParamStore<double> store;
  Rng rng(1);
  nn::MultiHeadAttention<double> attn(store, "attn", 2, 1, rng);
  set_identity_projections(store, "attn");
  auto q = tensor_const<double>({1, 2}, {1, 0});
  auto k = tensor_const<double>({2, 2}, {1, 0, 0, 1});
  auto v = tensor_const<double>({2, 2}, {1, 2, 3, 4});
  Tensor<double> weights;
  auto out = attn.forward(q, k, v, {}, &weights).value();
  // logits are q.k / sqrt(2) = [1/sqrt2, 0]
  const double w0 = 1.0 / (1.0 + std::exp(-1.0 / std::sqrt(2.0)));
  const double w1 = 1.0 - w0;
  CHECK(weights[0] == doctest::Approx(w0).epsilon(1e-14));
  CHECK(out[0] == doctest::Approx(w0 * 1 + w1 * 3).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(w0 * 2 + w1 * 4).epsilon(1e-14));
}

TEST_CASE("attention weights are distributions and invariant to joint K/V permutation") {
  ParamStore<double> store;
  Rng rng(2);
  nn::MultiHeadAttention<double> attn(store, "attn", 8, 4, rng);
  auto q = random_leaf<double>({5, 8}, rng);
  auto k = random_leaf<double>({6, 8}, rng);
  auto v = random_leaf<double>({6, 8}, rng);
  Tensor<double> weights;
  auto out = attn.forward(q, k, v, {}, &weights).value();
  for (std::size_t row = 0; row < 4 * 5; ++row) {
    double total = 0;
    for (std::size_t j = 0; j < 6; ++j) total += weights[row * 6 + j];
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  auto kp = ops::gather_rows(k, perm);
  auto vp = ops::gather_rows(v, perm);
  auto out_p = attn.forward(q, kp, vp).value();
  CHECK(holo::testing::max_abs_diff(out, out_p) < 1e-12);
}

TEST_CASE("attention rejects head counts that do not divide the width") {
  ParamStore<float> store;
  Rng rng(0);
  CHECK_THROWS_AS(nn::MultiHeadAttention<float>(store, "a", 6, 4, rng), ConfigError);
}

TEST_CASE("feed-forward with zero weights propagates only the output bias") {
  ParamStore<double> store;
  Rng rng(4);
  nn::FeedForward<double> ffn(store, "ffn", 3, 12, rng);
  for (auto* p : store.all()) p->value().fill(0.0);
  store.at("ffn.down.bias").value() = Tensor<double>({3}, {0.1, -0.2, 0.3});
  auto y = ffn.forward(random_leaf<double>({2, 3}, rng)).value();
  CHECK(y.shape() == Shape{2, 3});
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(y[r * 3 + 0] == 0.1);
    CHECK(y[r * 3 + 1] == -0.2);
    CHECK(y[r * 3 + 2] == 0.3);
  }
  CHECK(store.at("ffn.up.weight").value().shape() == Shape{3, 12});
}

TEST_CASE("prefix causal mask") {
  auto m = nn::prefix_causal_mask<float>(4, 2);
  auto open = [&](std::size_t i, std::size_t j) { return m[i * 4 + j] == 0.0f; };
  CHECK(open(0, 1));   // prefix rows see each other
  CHECK(!open(1, 2));  // but not the text after them
  CHECK(open(3, 0));
  CHECK(!open(2, 3));
  CHECK(open(3, 3));
}

TEST_CASE("conv output shapes") {
  ParamStore<float> store;
  Rng rng(9);
  nn::Conv2d<float> c2(store, "c2", 3, 8, 3, 2, rng);
  auto y = c2.forward(random_leaf<float>({16, 16, 3}, rng));
  CHECK(y.shape() == Shape{8, 8, 8});
  nn::Conv1d<float> c1(store, "c1", 5, 4, 3, 1, rng);
  CHECK(c1.forward(random_leaf<float>({20, 5}, rng)).shape() == Shape{20, 4});
}

TEST_CASE("conv2d matches direct convolution") {
  ParamStore<double> store;
  Rng rng(10);
  nn::Conv2d<double> conv(store, "c", 2, 3, 3, 1, rng);
  auto x = random_leaf<double>({4, 5, 2}, rng);
  auto y = conv.forward(x).value();
  const auto& w = store.at("c.weight").value();  // [(ky*3+kx)*C + c, out]
  const auto& b = store.at("c.bias").value();
  for (int oy = 0; oy < 4; ++oy)
    for (int ox = 0; ox < 5; ++ox)
      for (int o = 0; o < 3; ++o) {
        double ref = b[o];
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx)
            for (int c = 0; c < 2; ++c) {
              const int iy = oy + ky - 1, ix = ox + kx - 1;
              if (iy < 0 || iy >= 4 || ix < 0 || ix >= 5) continue;
              ref += x.value()[(iy * 5 + ix) * 2 + c] * w[((ky * 3 + kx) * 2 + c) * 3 + o];
            }
        CHECK(y[(oy * 5 + ox) * 3 + o] == doctest::Approx(ref).epsilon(1e-13));
      }
}
