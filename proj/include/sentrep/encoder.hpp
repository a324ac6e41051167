#pragma once

#include <vector>

#include "sentrep/corpus.hpp"
#include "sentrep/model.hpp"
#include "sentrep/ops.hpp"

namespace sentrep {

// Tape handles for one model's parameters.
template <class T>
struct ModelVars {
  Var embedding;
  std::vector<Var> conv_filters;
  std::vector<Var> conv_biases;
  struct DecVars {
    Var w_in, u_rec, bias, v_out;
  };
  std::vector<DecVars> decoders;
  Var para_w_in, para_u_rec, para_bias;
};

// Stages parameters as gradient-bearing leaves. A fixed embedding table is
// staged read-only so it never accumulates gradients.
template <class T>
ModelVars<T> stage_model(Tape<T>& tp, Model<T>& m) {
  ModelVars<T> mv;
  mv.embedding = m.embed_mode == EmbedMode::fixed ? tp.const_view(m.embedding)
                                                  : tp.param(m.embedding);
  for (size_t w = 0; w < m.conv_filters.size(); ++w) {
    mv.conv_filters.push_back(tp.param(m.conv_filters[w]));
    mv.conv_biases.push_back(tp.param(m.conv_biases[w]));
  }
  for (auto& dec : m.decoders) {
    mv.decoders.push_back({tp.param(dec.cell.w_in), tp.param(dec.cell.u_rec),
                           tp.param(dec.cell.bias), tp.param(dec.v_out)});
  }
  if (m.has_paragraph()) {
    mv.para_w_in = tp.param(m.paragraph.w_in);
    mv.para_u_rec = tp.param(m.paragraph.u_rec);
    mv.para_bias = tp.param(m.paragraph.bias);
  }
  return mv;
}

// Stages every parameter read-only; safe to share one model across threads.
template <class T>
ModelVars<T> stage_model_frozen(Tape<T>& tp, const Model<T>& m) {
  ModelVars<T> mv;
  mv.embedding = tp.const_view(m.embedding);
  for (size_t w = 0; w < m.conv_filters.size(); ++w) {
    mv.conv_filters.push_back(tp.const_view(m.conv_filters[w]));
    mv.conv_biases.push_back(tp.const_view(m.conv_biases[w]));
  }
  for (const auto& dec : m.decoders) {
    mv.decoders.push_back({tp.const_view(dec.cell.w_in),
                           tp.const_view(dec.cell.u_rec),
                           tp.const_view(dec.cell.bias),
                           tp.const_view(dec.v_out)});
  }
  if (m.has_paragraph()) {
    mv.para_w_in = tp.const_view(m.paragraph.w_in);
    mv.para_u_rec = tp.const_view(m.paragraph.u_rec);
    mv.para_bias = tp.const_view(m.paragraph.bias);
  }
  return mv;
}

// Encodes one row of a padded batch. The encoder sees content tokens only,
// re-padded with <pad>; <sos>/<eos> never reach it. Each window's feature
// maps are max-pooled over the valid positions max(content, h) - h + 1, so
// the result does not depend on how far the batch row was padded.
template <class T>
Var encode_row(Tape<T>& tp, const ModelVars<T>& mv, const ModelDims& dims,
               const SentenceBatch& batch, size_t row) {
  size_t content = static_cast<size_t>(batch.lengths[row]) - 1;
  size_t h_max = dims.max_window();
  size_t width = std::max(batch.t_max > 0 ? batch.t_max - 1 : 0, h_max);
  std::vector<int32_t> idx(width, Vocab::kPad);
  for (size_t t = 0; t < content; ++t) idx[t] = batch.at(row, t);
  Var x = gather_rows(tp, mv.embedding, idx);

  Var z;
  for (size_t w = 0; w < dims.windows.size(); ++w) {
    size_t h = dims.windows[w];
    Var act = tanh_op(
        tp, conv1d_bank(tp, x, mv.conv_filters[w], mv.conv_biases[w], h));
    size_t valid = std::max(content, h) - h + 1;
    Var pooled = max_cols_masked(tp, act, valid);
    z = z.valid() ? concat_cols(tp, z, pooled) : pooled;
  }
  return z;
}

// (B, m*d) encoder output for a whole batch; feature blocks are ordered by
// ascending window size. dropout_mask, if valid, is multiplied in.
template <class T>
Var encode_batch(Tape<T>& tp, const ModelVars<T>& mv, const ModelDims& dims,
                 const SentenceBatch& batch, Var dropout_mask = Var{}) {
  std::vector<Var> rows;
  rows.reserve(batch.rows);
  for (size_t i = 0; i < batch.rows; ++i) {
    rows.push_back(encode_row(tp, mv, dims, batch, i));
  }
  Var z = stack_rows(tp, rows);
  if (dropout_mask.valid()) z = mul(tp, z, dropout_mask);
  return z;
}

// Frozen-parameter encoding, one row at a time so the result is independent
// of batch grouping; parallelizes over sentences when threads > 1.
template <class T>
Tensor<T> encode_values(const Model<T>& m, const std::vector<std::vector<int32_t>>& sentences,
                        int threads = 1) {
  if (sentences.empty()) throw ValueError("no sentences to encode");
  Tensor<T> out({sentences.size(), m.dims.feature_dim()});
  parallel_for(sentences.size(), threads, [&](size_t i) {
    Tape<T> tp;
    ModelVars<T> mv = stage_model_frozen(tp, m);
    SentenceBatch one = SentenceBatch::build({&sentences[i]}, m.dims.max_window());
    Var z = encode_batch(tp, mv, m.dims, one);
    const T* v = tp.data(z);
    std::copy(v, v + m.dims.feature_dim(), out.v.begin() + i * m.dims.feature_dim());
  });
  return out;
}

}  // namespace sentrep
