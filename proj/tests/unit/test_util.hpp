#pragma once

#include <cmath>
#include <string>

#include "holo/numerics/layers.hpp"

namespace holo::testing {

template <typename T>
Var<T> random_leaf(Shape shape, Rng& rng, double stddev = 1.0) {
  return Var<T>::leaf(nn::normal_tensor<T>(std::move(shape), stddev, rng), true);
}

template <typename T>
Var<T> tensor_const(Shape shape, std::vector<T> values) {
  return Var<T>::constant(Tensor<T>(std::move(shape), std::move(values)));
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

/// Sets every parameter of `store` under `prefix` whose name ends in `suffix` to
/// the identity (square weights) or zero (everything else).
template <typename T>
void set_identity_projections(ParamStore<T>& store, const std::string& prefix) {
  for (auto* p : store.with_prefix(prefix)) {
    auto& v = p->value();
    v.fill(T(0));
    if (v.rank() == 2 && v.dim(0) == v.dim(1)) {
      for (std::size_t i = 0; i < v.dim(0); ++i) v[i * v.dim(0) + i] = T(1);
    }
  }
}

}  // namespace holo::testing
