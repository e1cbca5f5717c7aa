#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "holo/numerics/tensor.hpp"

namespace holo {

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;
  bool has_grad = false;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into parents' grads.
  std::function<void(Node&)> backward_fn;

  Tensor<T>& grad_buffer() {
    if (!has_grad) {
      grad = Tensor<T>(value.shape(), T{0});
      has_grad = true;
    }
    return grad;
  }

  void accumulate(std::span<const T> g) {
    auto& buf = grad_buffer();
    auto out = buf.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
  }

  void clear_grad() {
    has_grad = false;
    grad = Tensor<T>();
  }
};

/// Handle to a value in the differentiation graph. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var leaf(Tensor<T> value, bool requires_grad) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return Var(std::move(n));
  }
  static Var constant(Tensor<T> value) { return leaf(std::move(value), false); }

  explicit operator bool() const noexcept { return static_cast<bool>(node_); }

  const Tensor<T>& value() const& { return node_->value; }
  // A temporary handle may hold the last reference to its node: hand out a copy.
  Tensor<T> value() && { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t dim(std::size_t axis) const { return node_->value.dim(axis); }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  /// Gradient accumulated by the last backward pass (zeros if none reached it).
  Tensor<T> grad() const {
    if (node_->has_grad) return node_->grad;
    return Tensor<T>(node_->value.shape(), T{0});
  }

  Node<T>& node() const { return *node_; }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

  /// Reverse-mode sweep from a scalar root, seeding d(root)/d(root) = 1.
  void backward() const;

 private:
  std::shared_ptr<Node<T>> node_;
};

namespace detail {
inline thread_local bool grad_enabled = true;
}

/// While alive, ops on this thread record no graph (inference only).
class NoGradGuard {
 public:
  NoGradGuard() : prev_(detail::grad_enabled) { detail::grad_enabled = false; }
  ~NoGradGuard() { detail::grad_enabled = prev_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

/// Builds an op result. Parents and the backward closure are only retained when
/// some parent requires a gradient, so inference graphs free eagerly.
template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> parents,
                   std::function<void(Node<T>&)> backward_fn) {
  auto n = std::make_shared<Node<T>>();
  n->value = std::move(value);
  bool needs = false;
  if (detail::grad_enabled)
    for (const auto& p : parents) needs = needs || p.requires_grad();
  if (needs) {
    n->requires_grad = true;
    n->parents.reserve(parents.size());
    for (auto& p : parents) n->parents.push_back(p.node_ptr());
    n->backward_fn = std::move(backward_fn);
  }
  return Var<T>(std::move(n));
}

template <typename T>
void Var<T>::backward() const {
  if (node_->value.numel() != 1) {
    throw DimensionError("backward() requires a scalar root, got shape " +
                         shape_str(node_->value.shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; deep decoder graphs would overflow a recursive walk.
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> visited;
  std::vector<std::pair<Node<T>*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node<T>* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->grad_buffer()[0] += T{1};
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward_fn && n->has_grad) n->backward_fn(*n);
  }
  // Interior grads are no longer needed; leaves keep theirs for the optimizer.
  for (Node<T>* n : order) {
    if (n->backward_fn) n->clear_grad();
  }
}

}  // namespace holo
