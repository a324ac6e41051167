#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sentrep/kernels.hpp"
#include "sentrep/tape.hpp"

// Differentiable operations over tape vars. Sentences are stored time-major:
// row t of a (T, k) matrix is the embedding of token t. All shape errors name
// the shapes involved.
namespace sentrep {

namespace opdetail {

inline void shape_eq(const std::vector<size_t>& a, const std::vector<size_t>& b,
                     const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": shape " + shape_str(a) + " vs " +
                     shape_str(b));
  }
}

inline void want_matrix(const std::vector<size_t>& s, const char* op) {
  if (s.size() != 2) {
    throw ShapeError(std::string(op) + ": expected matrix, got " +
                     shape_str(s));
  }
}

}  // namespace opdetail

template <class T>
Var add(Tape<T>& tp, Var a, Var b) {
  opdetail::shape_eq(tp.shape(a), tp.shape(b), "add");
  Var out = tp.make_node(tp.shape(a));
  size_t n = tp.numel(out);
  kernels::add(tp.mutable_data(out), tp.data(a), tp.data(b), n);
  tp.check(out, "add");
  tp.push_backward([&tp, a, b, out, n] {
    const T* g = tp.grad(out);
    if (T* ga = tp.grad(a)) kernels::axpy(ga, T(1), g, n);
    if (T* gb = tp.grad(b)) kernels::axpy(gb, T(1), g, n);
  });
  return out;
}

template <class T>
Var sub(Tape<T>& tp, Var a, Var b) {
  opdetail::shape_eq(tp.shape(a), tp.shape(b), "sub");
  Var out = tp.make_node(tp.shape(a));
  size_t n = tp.numel(out);
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  const T* pb = tp.data(b);
  for (size_t i = 0; i < n; ++i) o[i] = pa[i] - pb[i];
  tp.check(out, "sub");
  tp.push_backward([&tp, a, b, out, n] {
    const T* g = tp.grad(out);
    if (T* ga = tp.grad(a)) kernels::axpy(ga, T(1), g, n);
    if (T* gb = tp.grad(b)) kernels::axpy(gb, T(-1), g, n);
  });
  return out;
}

template <class T>
Var mul(Tape<T>& tp, Var a, Var b) {
  opdetail::shape_eq(tp.shape(a), tp.shape(b), "mul");
  Var out = tp.make_node(tp.shape(a));
  size_t n = tp.numel(out);
  kernels::mul(tp.mutable_data(out), tp.data(a), tp.data(b), n);
  tp.check(out, "mul");
  tp.push_backward([&tp, a, b, out, n] {
    const T* g = tp.grad(out);
    if (T* ga = tp.grad(a)) kernels::madd(ga, g, tp.data(b), n);
    if (T* gb = tp.grad(b)) kernels::madd(gb, g, tp.data(a), n);
  });
  return out;
}

template <class T>
Var scale(Tape<T>& tp, Var a, T alpha) {
  Var out = tp.make_node(tp.shape(a));
  size_t n = tp.numel(out);
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  for (size_t i = 0; i < n; ++i) o[i] = alpha * pa[i];
  tp.check(out, "scale");
  tp.push_backward([&tp, a, out, n, alpha] {
    if (T* ga = tp.grad(a)) kernels::axpy(ga, alpha, tp.grad(out), n);
  });
  return out;
}

template <class T>
Var add_scalar(Tape<T>& tp, Var a, T c) {
  Var out = tp.make_node(tp.shape(a));
  size_t n = tp.numel(out);
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  for (size_t i = 0; i < n; ++i) o[i] = pa[i] + c;
  tp.check(out, "add_scalar");
  tp.push_backward([&tp, a, out, n] {
    if (T* ga = tp.grad(a)) kernels::axpy(ga, T(1), tp.grad(out), n);
  });
  return out;
}

// a: (R, C); b: length-C vector added to every row.
template <class T>
Var add_rowvec(Tape<T>& tp, Var a, Var b) {
  opdetail::want_matrix(tp.shape(a), "add_rowvec");
  size_t r = tp.rows(a), c = tp.cols(a);
  if (tp.numel(b) != c) {
    throw ShapeError("add_rowvec: vector " + shape_str(tp.shape(b)) +
                     " vs matrix " + shape_str(tp.shape(a)));
  }
  Var out = tp.make_node(tp.shape(a));
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  const T* pb = tp.data(b);
  for (size_t i = 0; i < r; ++i) {
    kernels::add(o + i * c, pa + i * c, pb, c);
  }
  tp.check(out, "add_rowvec");
  tp.push_backward([&tp, a, b, out, r, c] {
    const T* g = tp.grad(out);
    if (T* ga = tp.grad(a)) kernels::axpy(ga, T(1), g, r * c);
    if (T* gb = tp.grad(b)) {
      for (size_t i = 0; i < r; ++i) kernels::axpy(gb, T(1), g + i * c, c);
    }
  });
  return out;
}

template <class T>
Var tanh_op(Tape<T>& tp, Var a) {
  Var out = tp.make_node(tp.shape(a));
  size_t n = tp.numel(out);
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  for (size_t i = 0; i < n; ++i) o[i] = std::tanh(pa[i]);
  tp.check(out, "tanh");
  tp.push_backward([&tp, a, out, n] {
    T* ga = tp.grad(a);
    if (!ga) return;
    const T* g = tp.grad(out);
    const T* y = tp.data(out);
    for (size_t i = 0; i < n; ++i) ga[i] += g[i] * (T(1) - y[i] * y[i]);
  });
  return out;
}

template <class T>
Var sigmoid_op(Tape<T>& tp, Var a) {
  Var out = tp.make_node(tp.shape(a));
  size_t n = tp.numel(out);
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  for (size_t i = 0; i < n; ++i) o[i] = T(1) / (T(1) + std::exp(-pa[i]));
  tp.check(out, "sigmoid");
  tp.push_backward([&tp, a, out, n] {
    T* ga = tp.grad(a);
    if (!ga) return;
    const T* g = tp.grad(out);
    const T* y = tp.data(out);
    for (size_t i = 0; i < n; ++i) ga[i] += g[i] * y[i] * (T(1) - y[i]);
  });
  return out;
}

template <class T>
Var relu_op(Tape<T>& tp, Var a) {
  Var out = tp.make_node(tp.shape(a));
  size_t n = tp.numel(out);
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  for (size_t i = 0; i < n; ++i) o[i] = pa[i] > T(0) ? pa[i] : T(0);
  tp.check(out, "relu");
  tp.push_backward([&tp, a, out, n] {
    T* ga = tp.grad(a);
    if (!ga) return;
    const T* g = tp.grad(out);
    const T* pa2 = tp.data(a);
    for (size_t i = 0; i < n; ++i) {
      if (pa2[i] > T(0)) ga[i] += g[i];
    }
  });
  return out;
}

// (R, K) x (K, C) -> (R, C)
template <class T>
Var matmul(Tape<T>& tp, Var a, Var b) {
  opdetail::want_matrix(tp.shape(a), "matmul");
  opdetail::want_matrix(tp.shape(b), "matmul");
  size_t r = tp.rows(a), k = tp.cols(a), c = tp.cols(b);
  if (tp.rows(b) != k) {
    throw ShapeError("matmul: inner axis " + shape_str(tp.shape(a)) + " vs " +
                     shape_str(tp.shape(b)));
  }
  Var out = tp.make_node({r, c});
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  const T* pb = tp.data(b);
  for (size_t i = 0; i < r; ++i) {
    for (size_t l = 0; l < k; ++l) {
      kernels::axpy(o + i * c, pa[i * k + l], pb + l * c, c);
    }
  }
  tp.check(out, "matmul");
  tp.push_backward([&tp, a, b, out, r, k, c] {
    const T* g = tp.grad(out);
    const T* pa2 = tp.data(a);
    const T* pb2 = tp.data(b);
    if (T* ga = tp.grad(a)) {
      for (size_t i = 0; i < r; ++i) {
        for (size_t l = 0; l < k; ++l) {
          ga[i * k + l] += kernels::dot(g + i * c, pb2 + l * c, c);
        }
      }
    }
    if (T* gb = tp.grad(b)) {
      for (size_t i = 0; i < r; ++i) {
        for (size_t l = 0; l < k; ++l) {
          kernels::axpy(gb + l * c, pa2[i * k + l], g + i * c, c);
        }
      }
    }
  });
  return out;
}

template <class T>
Var concat_cols(Tape<T>& tp, Var a, Var b) {
  opdetail::want_matrix(tp.shape(a), "concat_cols");
  opdetail::want_matrix(tp.shape(b), "concat_cols");
  size_t r = tp.rows(a), ca = tp.cols(a), cb = tp.cols(b);
  if (tp.rows(b) != r) {
    throw ShapeError("concat_cols: row axis " + shape_str(tp.shape(a)) +
                     " vs " + shape_str(tp.shape(b)));
  }
  Var out = tp.make_node({r, ca + cb});
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  const T* pb = tp.data(b);
  for (size_t i = 0; i < r; ++i) {
    std::copy(pa + i * ca, pa + (i + 1) * ca, o + i * (ca + cb));
    std::copy(pb + i * cb, pb + (i + 1) * cb, o + i * (ca + cb) + ca);
  }
  tp.push_backward([&tp, a, b, out, r, ca, cb] {
    const T* g = tp.grad(out);
    if (T* ga = tp.grad(a)) {
      for (size_t i = 0; i < r; ++i) {
        kernels::axpy(ga + i * ca, T(1), g + i * (ca + cb), ca);
      }
    }
    if (T* gb = tp.grad(b)) {
      for (size_t i = 0; i < r; ++i) {
        kernels::axpy(gb + i * cb, T(1), g + i * (ca + cb) + ca, cb);
      }
    }
  });
  return out;
}

template <class T>
Var slice_cols(Tape<T>& tp, Var a, size_t lo, size_t hi) {
  opdetail::want_matrix(tp.shape(a), "slice_cols");
  size_t r = tp.rows(a), c = tp.cols(a);
  if (!(lo < hi && hi <= c)) {
    throw ShapeError("slice_cols: [" + std::to_string(lo) + "," +
                     std::to_string(hi) + ") of " + shape_str(tp.shape(a)));
  }
  size_t w = hi - lo;
  Var out = tp.make_node({r, w});
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  for (size_t i = 0; i < r; ++i) {
    std::copy(pa + i * c + lo, pa + i * c + hi, o + i * w);
  }
  tp.push_backward([&tp, a, out, r, c, lo, w] {
    T* ga = tp.grad(a);
    if (!ga) return;
    const T* g = tp.grad(out);
    for (size_t i = 0; i < r; ++i) {
      kernels::axpy(ga + i * c + lo, T(1), g + i * w, w);
    }
  });
  return out;
}

// Stacks n row vectors (each (1, C)) into an (n, C) matrix.
template <class T>
Var stack_rows(Tape<T>& tp, const std::vector<Var>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no rows");
  size_t c = tp.cols(rows[0]);
  for (Var r : rows) {
    if (tp.rows(r) != 1 || tp.cols(r) != c) {
      throw ShapeError("stack_rows: row shape " + shape_str(tp.shape(r)));
    }
  }
  Var out = tp.make_node({rows.size(), c});
  T* o = tp.mutable_data(out);
  for (size_t i = 0; i < rows.size(); ++i) {
    const T* p = tp.data(rows[i]);
    std::copy(p, p + c, o + i * c);
  }
  tp.push_backward([&tp, rows, out, c] {
    const T* g = tp.grad(out);
    for (size_t i = 0; i < rows.size(); ++i) {
      if (T* gr = tp.grad(rows[i])) kernels::axpy(gr, T(1), g + i * c, c);
    }
  });
  return out;
}

template <class T>
Var reshape(Tape<T>& tp, Var a, std::vector<size_t> shape) {
  if (Tensor<T>::numel_of(shape) != tp.numel(a)) {
    throw ShapeError("reshape: " + shape_str(tp.shape(a)) + " to " +
                     shape_str(shape));
  }
  Var out = tp.make_node(std::move(shape));
  size_t n = tp.numel(out);
  const T* pa = tp.data(a);
  std::copy(pa, pa + n, tp.mutable_data(out));
  tp.push_backward([&tp, a, out, n] {
    if (T* ga = tp.grad(a)) kernels::axpy(ga, T(1), tp.grad(out), n);
  });
  return out;
}

// Row gather from a (V, k) table; backward scatter-adds into the table rows.
template <class T>
Var gather_rows(Tape<T>& tp, Var table, const std::vector<int32_t>& idx) {
  opdetail::want_matrix(tp.shape(table), "gather_rows");
  size_t v = tp.rows(table), k = tp.cols(table);
  if (idx.empty()) throw ShapeError("gather_rows: empty index list");
  for (int32_t i : idx) {
    if (i < 0 || static_cast<size_t>(i) >= v) {
      throw ValueError("gather_rows: index " + std::to_string(i) +
                       " outside table " + shape_str(tp.shape(table)));
    }
  }
  Var out = tp.make_node({idx.size(), k});
  T* o = tp.mutable_data(out);
  const T* pt = tp.data(table);
  for (size_t i = 0; i < idx.size(); ++i) {
    const T* src = pt + static_cast<size_t>(idx[i]) * k;
    std::copy(src, src + k, o + i * k);
  }
  tp.push_backward([&tp, table, out, idx, k] {
    T* gt = tp.grad(table);
    if (!gt) return;
    const T* g = tp.grad(out);
    for (size_t i = 0; i < idx.size(); ++i) {
      kernels::axpy(gt + static_cast<size_t>(idx[i]) * k, T(1), g + i * k, k);
    }
  });
  return out;
}

template <class T>
Var softmax_rows(Tape<T>& tp, Var a) {
  opdetail::want_matrix(tp.shape(a), "softmax_rows");
  size_t r = tp.rows(a), c = tp.cols(a);
  Var out = tp.make_node({r, c});
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  for (size_t i = 0; i < r; ++i) {
    const T* x = pa + i * c;
    T* y = o + i * c;
    T m = x[0];
    for (size_t j = 1; j < c; ++j) {
      if (x[j] > m) m = x[j];
    }
    T s = T(0);
    for (size_t j = 0; j < c; ++j) {
      y[j] = std::exp(x[j] - m);
      s += y[j];
    }
    for (size_t j = 0; j < c; ++j) y[j] /= s;
  }
  tp.check(out, "softmax_rows");
  tp.push_backward([&tp, a, out, r, c] {
    T* ga = tp.grad(a);
    if (!ga) return;
    const T* g = tp.grad(out);
    const T* p = tp.data(out);
    for (size_t i = 0; i < r; ++i) {
      const T* gi = g + i * c;
      const T* pi = p + i * c;
      T dotgp = kernels::dot(gi, pi, c);
      for (size_t j = 0; j < c; ++j) {
        ga[i * c + j] += pi[j] * (gi[j] - dotgp);
      }
    }
  });
  return out;
}

template <class T>
Var log_softmax_rows(Tape<T>& tp, Var a) {
  opdetail::want_matrix(tp.shape(a), "log_softmax_rows");
  size_t r = tp.rows(a), c = tp.cols(a);
  Var out = tp.make_node({r, c});
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  for (size_t i = 0; i < r; ++i) {
    const T* x = pa + i * c;
    T* y = o + i * c;
    T m = x[0];
    for (size_t j = 1; j < c; ++j) {
      if (x[j] > m) m = x[j];
    }
    T s = T(0);
    for (size_t j = 0; j < c; ++j) s += std::exp(x[j] - m);
    T lse = m + std::log(s);
    for (size_t j = 0; j < c; ++j) y[j] = x[j] - lse;
  }
  tp.check(out, "log_softmax_rows");
  tp.push_backward([&tp, a, out, r, c] {
    T* ga = tp.grad(a);
    if (!ga) return;
    const T* g = tp.grad(out);
    const T* y = tp.data(out);
    for (size_t i = 0; i < r; ++i) {
      const T* gi = g + i * c;
      T gsum = kernels::sum(gi, c);
      for (size_t j = 0; j < c; ++j) {
        ga[i * c + j] += gi[j] - std::exp(y[i * c + j]) * gsum;
      }
    }
  });
  return out;
}

// Per-row negative log-likelihood column. logp: (R, C) log-probabilities;
// out[i] = -mask[i] * logp[i, target[i]]. Masked rows contribute exactly zero
// forward and backward.
template <class T>
Var nll_rows(Tape<T>& tp, Var logp, const std::vector<int32_t>& target,
             const std::vector<T>& mask) {
  opdetail::want_matrix(tp.shape(logp), "nll_rows");
  size_t r = tp.rows(logp), c = tp.cols(logp);
  if (target.size() != r || mask.size() != r) {
    throw ShapeError("nll_rows: " + std::to_string(target.size()) +
                     " targets, " + std::to_string(mask.size()) +
                     " mask entries for " + shape_str(tp.shape(logp)));
  }
  for (int32_t t : target) {
    if (t < 0 || static_cast<size_t>(t) >= c) {
      throw ValueError("nll_rows: target " + std::to_string(t) +
                       " outside vocab axis of " + shape_str(tp.shape(logp)));
    }
  }
  Var out = tp.make_node({r});
  T* o = tp.mutable_data(out);
  const T* lp = tp.data(logp);
  for (size_t i = 0; i < r; ++i) {
    o[i] = -mask[i] * lp[i * c + static_cast<size_t>(target[i])];
  }
  tp.push_backward([&tp, logp, out, target, mask, c] {
    T* gl = tp.grad(logp);
    if (!gl) return;
    const T* g = tp.grad(out);
    for (size_t i = 0; i < target.size(); ++i) {
      gl[i * c + static_cast<size_t>(target[i])] -= mask[i] * g[i];
    }
  });
  return out;
}

template <class T>
Var sum_all(Tape<T>& tp, Var a) {
  Var out = tp.make_node({1});
  size_t n = tp.numel(a);
  tp.mutable_data(out)[0] = kernels::sum(tp.data(a), n);
  tp.check(out, "sum_all");
  tp.push_backward([&tp, a, out, n] {
    T* ga = tp.grad(a);
    if (!ga) return;
    T g = tp.grad(out)[0];
    for (size_t i = 0; i < n; ++i) ga[i] += g;
  });
  return out;
}

// Convolution bank over one time-major sentence. x: (T, k); filters w:
// (d, h*k), row j holding filter j's h x k window flattened position-major;
// b: d per-filter bias scalars broadcast over positions. Output (T-h+1, d)
// of pre-activation responses: out[p, j] = <x[p:p+h, :], w[j]> + b[j].
template <class T>
Var conv1d_bank(Tape<T>& tp, Var x, Var w, Var b, size_t h) {
  opdetail::want_matrix(tp.shape(x), "conv1d_bank");
  opdetail::want_matrix(tp.shape(w), "conv1d_bank");
  size_t tlen = tp.rows(x), k = tp.cols(x);
  size_t d = tp.rows(w), hk = tp.cols(w);
  if (h == 0) throw ValueError("conv1d_bank: window 0");
  if (hk != h * k) {
    throw ShapeError("conv1d_bank: filter axis " + shape_str(tp.shape(w)) +
                     " vs window " + std::to_string(h) + " x embedding " +
                     std::to_string(k));
  }
  if (tp.numel(b) != d) {
    throw ShapeError("conv1d_bank: bias " + shape_str(tp.shape(b)) + " vs " +
                     std::to_string(d) + " filters");
  }
  if (tlen < h) {
    throw ValueError("conv1d_bank: window " + std::to_string(h) +
                     " longer than padded length " + std::to_string(tlen));
  }
  size_t tout = tlen - h + 1;
  Var out = tp.make_node({tout, d});
  T* o = tp.mutable_data(out);
  const T* px = tp.data(x);
  const T* pw = tp.data(w);
  const T* pb = tp.data(b);
  for (size_t p = 0; p < tout; ++p) {
    for (size_t j = 0; j < d; ++j) {
      o[p * d + j] = kernels::dot(px + p * k, pw + j * hk, hk) + pb[j];
    }
  }
  tp.check(out, "conv1d_bank");
  tp.push_backward([&tp, x, w, b, out, tout, d, k, hk] {
    const T* g = tp.grad(out);
    const T* px2 = tp.data(x);
    const T* pw2 = tp.data(w);
    if (T* gx = tp.grad(x)) {
      for (size_t p = 0; p < tout; ++p) {
        for (size_t j = 0; j < d; ++j) {
          kernels::axpy(gx + p * k, g[p * d + j], pw2 + j * hk, hk);
        }
      }
    }
    if (T* gw = tp.grad(w)) {
      for (size_t p = 0; p < tout; ++p) {
        for (size_t j = 0; j < d; ++j) {
          kernels::axpy(gw + j * hk, g[p * d + j], px2 + p * k, hk);
        }
      }
    }
    if (T* gb = tp.grad(b)) {
      for (size_t p = 0; p < tout; ++p) {
        for (size_t j = 0; j < d; ++j) gb[j] += g[p * d + j];
      }
    }
  });
  return out;
}

// Single-filter feature map with tanh, as a (T-h+1) vector.
template <class T>
Var conv1d_feature_map(Tape<T>& tp, Var x, Var w, Var b, size_t h) {
  if (tp.rows(w) != 1) {
    throw ShapeError("conv1d_feature_map: expected one filter, got " +
                     shape_str(tp.shape(w)));
  }
  Var pre = conv1d_bank(tp, x, w, b, h);
  Var act = tanh_op(tp, pre);
  return reshape(tp, act, {tp.rows(act)});
}

// Column-wise max over the first valid_rows rows; ties go to the first
// occurrence, and backward routes each column's gradient to that row only.
template <class T>
Var max_cols_masked(Tape<T>& tp, Var a, size_t valid_rows) {
  opdetail::want_matrix(tp.shape(a), "max_cols_masked");
  size_t r = tp.rows(a), c = tp.cols(a);
  if (valid_rows == 0 || valid_rows > r) {
    throw ValueError("max_cols_masked: valid rows " +
                     std::to_string(valid_rows) + " of " +
                     shape_str(tp.shape(a)));
  }
  Var out = tp.make_node({1, c});
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  std::vector<size_t> arg(c, 0);
  std::copy(pa, pa + c, o);
  for (size_t i = 1; i < valid_rows; ++i) {
    for (size_t j = 0; j < c; ++j) {
      if (pa[i * c + j] > o[j]) {
        o[j] = pa[i * c + j];
        arg[j] = i;
      }
    }
  }
  tp.push_backward([&tp, a, out, arg, c] {
    T* ga = tp.grad(a);
    if (!ga) return;
    const T* g = tp.grad(out);
    for (size_t j = 0; j < c; ++j) ga[arg[j] * c + j] += g[j];
  });
  return out;
}

// Max of a vector; gradient goes to the first maximal index.
template <class T>
Var max_over_time(Tape<T>& tp, Var a) {
  if (tp.shape(a).size() != 1) {
    throw ShapeError("max_over_time: expected vector, got " +
                     shape_str(tp.shape(a)));
  }
  size_t n = tp.numel(a);
  size_t arg = kernels::argmax(tp.data(a), n);
  Var out = tp.make_node({1});
  tp.mutable_data(out)[0] = tp.data(a)[arg];
  tp.push_backward([&tp, a, out, arg] {
    if (T* ga = tp.grad(a)) ga[arg] += tp.grad(out)[0];
  });
  return out;
}

// Row-wise cosine similarity between two (N, D) matrices -> (N).
template <class T>
Var cosine_rows(Tape<T>& tp, Var a, Var b) {
  opdetail::shape_eq(tp.shape(a), tp.shape(b), "cosine_rows");
  opdetail::want_matrix(tp.shape(a), "cosine_rows");
  size_t n = tp.rows(a), d = tp.cols(a);
  Var out = tp.make_node({n});
  T* o = tp.mutable_data(out);
  const T* pa = tp.data(a);
  const T* pb = tp.data(b);
  std::vector<T> na(n), nb(n);
  for (size_t i = 0; i < n; ++i) {
    na[i] = std::sqrt(kernels::dot(pa + i * d, pa + i * d, d));
    nb[i] = std::sqrt(kernels::dot(pb + i * d, pb + i * d, d));
    if (na[i] == T(0) || nb[i] == T(0)) {
      throw NumericError("cosine_rows: zero-norm vector at row " +
                         std::to_string(i));
    }
    o[i] = kernels::dot(pa + i * d, pb + i * d, d) / (na[i] * nb[i]);
  }
  tp.check(out, "cosine_rows");
  tp.push_backward([&tp, a, b, out, n, d, na, nb] {
    const T* g = tp.grad(out);
    const T* pa2 = tp.data(a);
    const T* pb2 = tp.data(b);
    const T* c = tp.data(out);
    T* ga = tp.grad(a);
    T* gb = tp.grad(b);
    for (size_t i = 0; i < n; ++i) {
      if (ga) {
        kernels::axpy(ga + i * d, g[i] / (na[i] * nb[i]), pb2 + i * d, d);
        kernels::axpy(ga + i * d, -g[i] * c[i] / (na[i] * na[i]), pa2 + i * d,
                      d);
      }
      if (gb) {
        kernels::axpy(gb + i * d, g[i] / (na[i] * nb[i]), pa2 + i * d, d);
        kernels::axpy(gb + i * d, -g[i] * c[i] / (nb[i] * nb[i]), pb2 + i * d,
                      d);
      }
    }
  });
  return out;
}

}  // namespace sentrep
