#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sentrep/embedding.hpp"
#include "sentrep/linalg.hpp"
#include "sentrep/rng.hpp"
#include "sentrep/tensor.hpp"
#include "sentrep/util.hpp"

namespace sentrep {

enum class Variant { autoencoder, future_predictor, composite, hierarchical };

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::autoencoder: return "autoencoder";
    case Variant::future_predictor: return "future";
    case Variant::composite: return "composite";
    case Variant::hierarchical: return "hierarchical";
  }
  throw ValueError("bad variant enum value");
}

inline Variant variant_from_name(const std::string& name) {
  if (name == "autoencoder") return Variant::autoencoder;
  if (name == "future") return Variant::future_predictor;
  if (name == "composite") return Variant::composite;
  if (name == "hierarchical") return Variant::hierarchical;
  throw ValueError("unknown model variant '" + name + "'");
}

struct ModelDims {
  size_t embed_k = 64;
  std::vector<size_t> windows = {3, 4, 5};
  size_t maps_per_window = 800;
  size_t hidden = 600;
  size_t paragraph_hidden = 600;
  size_t vocab = 0;

  size_t feature_dim() const { return windows.size() * maps_per_window; }
  size_t max_window() const { return windows.empty() ? 0 : windows.back(); }

  void validate() const {
    if (embed_k == 0 || maps_per_window == 0 || hidden == 0 ||
        paragraph_hidden == 0) {
      throw ValueError("model dimensions must be positive");
    }
    if (vocab < 3) {
      throw ValueError("model vocabulary needs at least <pad>, <sos>, <eos>");
    }
    if (windows.empty()) throw ValueError("at least one convolution window is required");
    for (size_t i = 0; i < windows.size(); ++i) {
      if (windows[i] == 0) throw ValueError("convolution windows must be positive");
      if (i > 0 && windows[i] <= windows[i - 1]) {
        throw ValueError("convolution windows must be strictly ascending");
      }
    }
  }
};

template <class T>
struct LstmParams {
  // Gate blocks are column ranges of the 4H axis in order [input, forget,
  // cell, output].
  Tensor<T> w_in;   // (input width, 4H)
  Tensor<T> u_rec;  // (H, 4H)
  Tensor<T> bias;   // (4H)

  size_t hidden() const { return u_rec.rows(); }
};

template <class T>
struct DecoderParams {
  LstmParams<T> cell;
  Tensor<T> v_out;  // (H, vocab), no output bias
};

template <class T>
struct Model {
  Variant variant = Variant::autoencoder;
  ModelDims dims;
  EmbedMode embed_mode = EmbedMode::learned;
  Tensor<T> embedding;                    // (vocab, k), row v = token v
  std::vector<Tensor<T>> conv_filters;    // per window: (d, h*k)
  std::vector<Tensor<T>> conv_biases;     // per window: (d)
  std::vector<DecoderParams<T>> decoders; // composite has two, others one
  LstmParams<T> paragraph;                // hierarchical only

  bool has_paragraph() const { return variant == Variant::hierarchical; }

  // Width of the conditioning vector fed to the sentence decoder each step.
  size_t cond_dim() const {
    return has_paragraph() ? dims.paragraph_hidden : dims.feature_dim();
  }

  void for_each_param(const std::function<void(const std::string&, Tensor<T>&)>& fn) {
    fn("embedding", embedding);
    for (size_t w = 0; w < dims.windows.size(); ++w) {
      std::string base = "encoder.w" + std::to_string(dims.windows[w]);
      fn(base + ".filters", conv_filters[w]);
      fn(base + ".bias", conv_biases[w]);
    }
    for (size_t d = 0; d < decoders.size(); ++d) {
      std::string base = "decoder" + std::to_string(d);
      fn(base + ".w_in", decoders[d].cell.w_in);
      fn(base + ".u_rec", decoders[d].cell.u_rec);
      fn(base + ".bias", decoders[d].cell.bias);
      fn(base + ".v_out", decoders[d].v_out);
    }
    if (has_paragraph()) {
      fn("paragraph.w_in", paragraph.w_in);
      fn("paragraph.u_rec", paragraph.u_rec);
      fn("paragraph.bias", paragraph.bias);
    }
  }

  // Parameters touched by the optimizer; a fixed embedding table is excluded.
  void for_each_trainable(const std::function<void(const std::string&, Tensor<T>&)>& fn) {
    for_each_param([&](const std::string& name, Tensor<T>& t) {
      if (name == "embedding" && embed_mode == EmbedMode::fixed) return;
      fn(name, t);
    });
  }

  size_t param_count() {
    size_t n = 0;
    for_each_param([&](const std::string&, Tensor<T>& t) { n += t.numel(); });
    return n;
  }
};

// Square orthogonal matrix from the QR decomposition of a Gaussian draw.
// Rectangular requests are rejected: recurrent blocks must be square.
template <class T>
Tensor<T> orthogonal_tensor(size_t rows, size_t cols, Rng& rng) {
  if (rows != cols) {
    throw ShapeError("orthogonal init needs a square matrix, got " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  std::vector<double> q = random_orthogonal(rows, rng);
  Tensor<T> out({rows, cols});
  for (size_t i = 0; i < q.size(); ++i) out.v[i] = static_cast<T>(q[i]);
  return out;
}

namespace initdetail {

template <class T>
void fill_uniform_tensor(Tensor<T>& t, Rng& rng, double range) {
  for (auto& x : t.v) x = static_cast<T>(rng.uniform01() * 2.0 * range - range);
}

// u_rec (H, 4H): four independent orthogonal H x H gate blocks.
template <class T>
void fill_recurrent(Tensor<T>& u, size_t H, Rng& rng) {
  for (size_t g = 0; g < 4; ++g) {
    Tensor<T> q = orthogonal_tensor<T>(H, H, rng);
    for (size_t i = 0; i < H; ++i) {
      for (size_t j = 0; j < H; ++j) u.at(i, g * H + j) = q.at(i, j);
    }
  }
}

}  // namespace initdetail

// Zero-filled model with every tensor at its proper shape.
template <class T>
Model<T> allocate_model(Variant variant, const ModelDims& dims,
                        EmbedMode embed_mode = EmbedMode::learned) {
  dims.validate();
  Model<T> m;
  m.variant = variant;
  m.dims = dims;
  m.embed_mode = embed_mode;
  m.embedding = Tensor<T>({dims.vocab, dims.embed_k});
  for (size_t w = 0; w < dims.windows.size(); ++w) {
    m.conv_filters.push_back(
        Tensor<T>({dims.maps_per_window, dims.windows[w] * dims.embed_k}));
    m.conv_biases.push_back(Tensor<T>({dims.maps_per_window}));
  }
  size_t n_decoders = variant == Variant::composite ? 2 : 1;
  size_t cond = variant == Variant::hierarchical ? dims.paragraph_hidden
                                                 : dims.feature_dim();
  for (size_t d = 0; d < n_decoders; ++d) {
    DecoderParams<T> dec;
    dec.cell.w_in = Tensor<T>({dims.embed_k + cond, 4 * dims.hidden});
    dec.cell.u_rec = Tensor<T>({dims.hidden, 4 * dims.hidden});
    dec.cell.bias = Tensor<T>({4 * dims.hidden});
    dec.v_out = Tensor<T>({dims.hidden, dims.vocab});
    m.decoders.push_back(std::move(dec));
  }
  if (variant == Variant::hierarchical) {
    m.paragraph.w_in = Tensor<T>({dims.feature_dim(), 4 * dims.paragraph_hidden});
    m.paragraph.u_rec = Tensor<T>({dims.paragraph_hidden, 4 * dims.paragraph_hidden});
    m.paragraph.bias = Tensor<T>({4 * dims.paragraph_hidden});
  }
  return m;
}

// Draws every parameter from a single seeded stream in for_each_param order:
// small uniform weights, orthogonal recurrent gate blocks, zero biases except
// the forget gate, and a zeroed <pad> embedding row.
template <class T>
Model<T> init_model(Variant variant, const ModelDims& dims, uint64_t seed,
                    EmbedMode embed_mode = EmbedMode::learned,
                    double init_range = 0.01, double forget_bias = 3.0) {
  Model<T> m = allocate_model<T>(variant, dims, embed_mode);
  Rng rng(mix_seed(seed, 0x6d6f64656cull));

  initdetail::fill_uniform_tensor(m.embedding, rng, init_range);
  for (size_t j = 0; j < dims.embed_k; ++j) m.embedding.at(Vocab::kPad, j) = T(0);

  for (size_t w = 0; w < dims.windows.size(); ++w) {
    initdetail::fill_uniform_tensor(m.conv_filters[w], rng, init_range);
  }

  for (auto& dec : m.decoders) {
    initdetail::fill_uniform_tensor(dec.cell.w_in, rng, init_range);
    initdetail::fill_recurrent(dec.cell.u_rec, dims.hidden, rng);
    for (size_t j = dims.hidden; j < 2 * dims.hidden; ++j) {
      dec.cell.bias.v[j] = static_cast<T>(forget_bias);
    }
    initdetail::fill_uniform_tensor(dec.v_out, rng, init_range);
  }

  if (variant == Variant::hierarchical) {
    initdetail::fill_uniform_tensor(m.paragraph.w_in, rng, init_range);
    initdetail::fill_recurrent(m.paragraph.u_rec, dims.paragraph_hidden, rng);
    for (size_t j = dims.paragraph_hidden; j < 2 * dims.paragraph_hidden; ++j) {
      m.paragraph.bias.v[j] = static_cast<T>(forget_bias);
    }
  }
  return m;
}

}  // namespace sentrep
