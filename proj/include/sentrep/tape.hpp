#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sentrep/tensor.hpp"
#include "sentrep/util.hpp"

namespace sentrep {

// Handle to a tensor recorded on a tape. A Var is only meaningful with the
// tape that issued it.
struct Var {
  uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

// Reverse-mode tape. Ops append nodes during the forward pass and register
// backward closures; backward() replays the closures in reverse, accumulating
// (never overwriting) gradients. Leaf nodes either reference external
// parameter tensors (gradients land in Tensor::g) or are gradient-free
// constants. A tape and its tensors belong to one thread.
template <class T>
class Tape {
 public:
  explicit Tape(bool check_finite = false) : check_finite_(check_finite) {}

  // Leaf whose gradient accumulates into t.g.
  Var param(Tensor<T>& t) {
    t.ensure_grad();
    return add_leaf(t.shape, t.v.data(), t.g.data());
  }

  // Leaf referencing external values; no gradient, never mutates t.
  Var const_view(const Tensor<T>& t) {
    return add_leaf(t.shape, t.v.data(), nullptr);
  }

  // Leaf owning a copy of t; no gradient.
  Var input(const Tensor<T>& t) {
    Node nd;
    nd.shape = t.shape;
    nd.store = t.v;
    nd.data = nullptr;
    nd.grad = nullptr;
    nodes_.push_back(std::move(nd));
    return Var{static_cast<uint32_t>(nodes_.size() - 1)};
  }

  // Interior node with owned value and gradient buffers, filled by the op.
  Var make_node(std::vector<size_t> shape) {
    size_t n = Tensor<T>::numel_of(shape);
    Node nd;
    nd.shape = std::move(shape);
    nd.store.assign(n, T(0));
    nd.gstore.assign(n, T(0));
    nd.data = nullptr;
    nd.grad = nullptr;
    nodes_.push_back(std::move(nd));
    return Var{static_cast<uint32_t>(nodes_.size() - 1)};
  }

  const std::vector<size_t>& shape(Var x) const { return at(x).shape; }

  size_t numel(Var x) const {
    const Node& nd = at(x);
    return nd.data ? nd.n : nd.store.size();
  }

  size_t rows(Var x) const {
    const auto& s = shape(x);
    if (s.size() != 2) throw ShapeError("rows() on non-matrix var");
    return s[0];
  }
  size_t cols(Var x) const {
    const auto& s = shape(x);
    if (s.size() != 2) throw ShapeError("cols() on non-matrix var");
    return s[1];
  }

  const T* data(Var x) const {
    const Node& nd = at(x);
    return nd.data ? nd.data : nd.store.data();
  }

  // Mutable value pointer; only the op that created the node writes here.
  T* mutable_data(Var x) {
    Node& nd = at(x);
    if (nd.data) throw ValueError("cannot write values of a leaf node");
    return nd.store.data();
  }

  // Gradient pointer, or null for gradient-free leaves.
  T* grad(Var x) {
    Node& nd = at(x);
    if (nd.grad) return nd.grad;
    return nd.gstore.empty() ? nullptr : nd.gstore.data();
  }

  Tensor<T> value(Var x) const {
    Tensor<T> t(shape(x));
    const T* p = data(x);
    std::copy(p, p + t.numel(), t.v.begin());
    return t;
  }

  T scalar(Var x) const {
    if (numel(x) != 1) throw ShapeError("scalar() on non-scalar var");
    return data(x)[0];
  }

  void push_backward(std::function<void()> fn) {
    back_.push_back(std::move(fn));
  }

  // Post-op sanity check; active only when the tape was built with
  // check_finite.
  void check(Var x, const char* opname) {
    if (!check_finite_) return;
    const T* p = data(x);
    size_t n = numel(x);
    for (size_t i = 0; i < n; ++i) {
      if (!std::isfinite(static_cast<double>(p[i]))) {
        throw NumericError(std::string("non-finite value produced by ") +
                           opname);
      }
    }
  }

  // Seeds d(loss)/d(loss) = 1 and replays backward rules in reverse order.
  void backward(Var loss) {
    if (nodes_.empty()) return;
    if (numel(loss) != 1) throw ShapeError("backward expects a scalar loss");
    T* g = grad(loss);
    if (!g) throw ValueError("loss does not participate in gradients");
    g[0] += T(1);
    for (size_t i = back_.size(); i > 0; --i) back_[i - 1]();
  }

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<size_t> shape;
    std::vector<T> store;   // owned values (empty for referencing leaves)
    std::vector<T> gstore;  // owned gradient (interior nodes)
    const T* data = nullptr;  // external values (referencing leaves)
    T* grad = nullptr;        // external gradient (param leaves)
    size_t n = 0;
  };

  Var add_leaf(const std::vector<size_t>& shape, const T* v, T* g) {
    Node nd;
    nd.shape = shape;
    nd.data = v;
    nd.grad = g;
    nd.n = Tensor<T>::numel_of(shape);
    nodes_.push_back(std::move(nd));
    return Var{static_cast<uint32_t>(nodes_.size() - 1)};
  }

  const Node& at(Var x) const {
    if (!x.valid() || x.id >= nodes_.size()) {
      throw ValueError("var does not belong to this tape");
    }
    return nodes_[x.id];
  }
  Node& at(Var x) {
    if (!x.valid() || x.id >= nodes_.size()) {
      throw ValueError("var does not belong to this tape");
    }
    return nodes_[x.id];
  }

  std::vector<Node> nodes_;
  std::vector<std::function<void()>> back_;
  bool check_finite_;
};

}  // namespace sentrep
