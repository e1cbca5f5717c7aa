#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "holo/numerics/autograd.hpp"

namespace holo {

template <typename T>
struct Parameter {
  std::string name;
  Var<T> var;
  bool frozen = false;

  Tensor<T>& value() { return var.node().value; }
  const Tensor<T>& value() const { return var.node().value; }
};

/// Owns named trainable tensors in insertion order. Parameter addresses are
/// stable for the lifetime of the store, so modules hold raw pointers into it.
template <typename T>
class ParamStore {
 public:
  Parameter<T>& add(std::string name, Tensor<T> init) {
    if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
    auto p = std::make_unique<Parameter<T>>();
    p->name = name;
    p->var = Var<T>::leaf(std::move(init), true);
    index_.emplace(name, params_.size());
    params_.push_back(std::move(p));
    return *params_.back();
  }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }

  Parameter<T>& at(std::string_view name) {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw ConfigError("unknown parameter: " + std::string(name));
    return *params_[it->second];
  }
  const Parameter<T>& at(std::string_view name) const {
    return const_cast<ParamStore*>(this)->at(name);
  }

  std::vector<Parameter<T>*> all() const {
    std::vector<Parameter<T>*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
  }

  std::vector<Parameter<T>*> with_prefix(std::string_view prefix) const {
    std::vector<Parameter<T>*> out;
    for (auto& p : params_) {
      if (std::string_view(p->name).substr(0, prefix.size()) == prefix) out.push_back(p.get());
    }
    return out;
  }

  /// Frozen parameters stop requiring gradients, so no graph built afterwards reaches them.
  void set_frozen(std::string_view prefix, bool frozen) {
    for (auto* p : with_prefix(prefix)) {
      p->frozen = frozen;
      p->var.node().requires_grad = !frozen;
      if (frozen) p->var.node().clear_grad();
    }
  }

  void zero_grad() {
    for (auto& p : params_) p->var.node().clear_grad();
  }

  std::size_t size() const { return params_.size(); }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (auto& p : params_) n += p->value().numel();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace holo
