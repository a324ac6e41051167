#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sentrep/util.hpp"

namespace sentrep {

// Dense row-major array. v holds values; g, when non-empty, holds the
// gradient and has the same length as v.
template <class T>
struct Tensor {
  std::vector<size_t> shape;
  std::vector<T> v;
  std::vector<T> g;

  Tensor() = default;

  explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
    v.assign(numel_of(shape), T(0));
  }

  static size_t numel_of(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t e : s) {
      if (e == 0) throw ShapeError("zero extent in tensor shape");
      n *= e;
    }
    return n;
  }

  size_t numel() const { return v.size(); }
  size_t rank() const { return shape.size(); }

  size_t rows() const {
    if (rank() != 2) throw ShapeError("rows() on non-matrix tensor");
    return shape[0];
  }
  size_t cols() const {
    if (rank() != 2) throw ShapeError("cols() on non-matrix tensor");
    return shape[1];
  }

  T& at(size_t i, size_t j) { return v[i * cols() + j]; }
  const T& at(size_t i, size_t j) const { return v[i * cols() + j]; }

  void ensure_grad() {
    if (g.size() != v.size()) g.assign(v.size(), T(0));
  }
  void zero_grad() {
    if (!g.empty()) std::fill(g.begin(), g.end(), T(0));
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool finite() const {
    for (T x : v) {
      if (!std::isfinite(static_cast<double>(x))) return false;
    }
    return true;
  }

  uint64_t checksum() const {
    return fnv1a64(v.data(), v.size() * sizeof(T));
  }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out(shape);
    for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
    return out;
  }
};

inline std::string shape_str(const std::vector<size_t>& s) {
  std::string r = "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) r += ",";
    r += std::to_string(s[i]);
  }
  r += ")";
  return r;
}

}  // namespace sentrep
