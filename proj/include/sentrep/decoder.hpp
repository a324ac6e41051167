#pragma once

#include <algorithm>
#include <vector>

#include "sentrep/encoder.hpp"
#include "sentrep/kernels.hpp"

namespace sentrep {

// One LSTM cell update. x: (B, in), h/c: (B, H). Gate blocks of the 4H axis
// are [input, forget, cell, output].
template <class T>
std::pair<Var, Var> lstm_step(Tape<T>& tp, Var w_in, Var u_rec, Var bias,
                              Var x, Var h, Var c) {
  size_t H = tp.rows(u_rec);
  Var gates =
      add_rowvec(tp, add(tp, matmul(tp, x, w_in), matmul(tp, h, u_rec)), bias);
  Var gi = sigmoid_op(tp, slice_cols(tp, gates, 0, H));
  Var gf = sigmoid_op(tp, slice_cols(tp, gates, H, 2 * H));
  Var gg = tanh_op(tp, slice_cols(tp, gates, 2 * H, 3 * H));
  Var go = sigmoid_op(tp, slice_cols(tp, gates, 3 * H, 4 * H));
  Var c2 = add(tp, mul(tp, gf, c), mul(tp, gi, gg));
  Var h2 = mul(tp, go, tanh_op(tp, c2));
  return {h2, c2};
}

template <class T>
Var zeros_input(Tape<T>& tp, std::vector<size_t> shape) {
  Tensor<T> z(std::move(shape));
  return tp.input(z);
}

// Teacher-forced per-row NLL column for one decoder. cond (B, C) is
// concatenated to the token embedding at every step; h and c start at zero.
// Step t targets position t of the batch (content then <eos>); rows shorter
// than t are masked out. The result is the (B) vector of per-row token NLL
// sums, accumulated step by step in time order.
template <class T>
Var decode_nll_rows(Tape<T>& tp, const typename ModelVars<T>::DecVars& dec,
                    Var emb_table, const SentenceBatch& batch, Var cond) {
  size_t B = batch.rows;
  size_t H = tp.rows(dec.u_rec);
  Var h = zeros_input(tp, {B, H});
  Var c = zeros_input(tp, {B, H});
  size_t max_len = 0;
  for (int32_t len : batch.lengths) {
    max_len = std::max(max_len, static_cast<size_t>(len));
  }

  Var total;
  std::vector<int32_t> prev(B), tgt(B);
  std::vector<T> mask(B);
  for (size_t t = 0; t < max_len; ++t) {
    for (size_t i = 0; i < B; ++i) {
      prev[i] = t == 0 ? Vocab::kSos : batch.at(i, t - 1);
      tgt[i] = batch.at(i, t);
      mask[i] = t < static_cast<size_t>(batch.lengths[i]) ? T(1) : T(0);
    }
    Var x = concat_cols(tp, gather_rows(tp, emb_table, prev), cond);
    auto hc = lstm_step(tp, dec.w_in, dec.u_rec, dec.bias, x, h, c);
    h = hc.first;
    c = hc.second;
    Var logp = log_softmax_rows(tp, matmul(tp, h, dec.v_out));
    Var col = nll_rows(tp, logp, tgt, mask);
    total = total.valid() ? add(tp, total, col) : col;
  }
  return total;
}

// Token NLL summed per row, then averaged over rows.
template <class T>
Var mean_rows_loss(Tape<T>& tp, Var nll_col) {
  size_t B = tp.numel(nll_col);
  return scale(tp, sum_all(tp, nll_col), T(1) / T(B));
}

// log p(sentence | cond) including the <eos> step, for one sentence.
template <class T>
T sentence_log_prob(const Model<T>& m, size_t decoder_index,
                    const std::vector<int32_t>& content, const Tensor<T>& cond) {
  Tape<T> tp;
  ModelVars<T> mv = stage_model_frozen(tp, m);
  SentenceBatch one = SentenceBatch::build({&content}, 0);
  Var rows = decode_nll_rows(tp, mv.decoders.at(decoder_index), mv.embedding,
                             one, tp.input(cond));
  return -tp.data(rows)[0];
}

// Runs the decoder over a token prefix (no <eos>) and returns the
// distribution over the next token. An empty prefix gives the first-step
// distribution after <sos>.
template <class T>
std::vector<T> next_token_dist(const Model<T>& m, size_t decoder_index,
                               const std::vector<int32_t>& prefix,
                               const Tensor<T>& cond) {
  Tape<T> tp;
  ModelVars<T> mv = stage_model_frozen(tp, m);
  const auto& dec = mv.decoders.at(decoder_index);
  size_t H = tp.rows(dec.u_rec);
  Var h = zeros_input(tp, {1, H});
  Var c = zeros_input(tp, {1, H});
  Var cv = tp.input(cond);
  int32_t prev = Vocab::kSos;
  Var p;
  for (size_t t = 0; t <= prefix.size(); ++t) {
    Var x = concat_cols(tp, gather_rows(tp, mv.embedding, {prev}), cv);
    auto hc = lstm_step(tp, dec.w_in, dec.u_rec, dec.bias, x, h, c);
    h = hc.first;
    c = hc.second;
    p = softmax_rows(tp, matmul(tp, h, dec.v_out));
    if (t < prefix.size()) prev = prefix[t];
  }
  const T* v = tp.data(p);
  return std::vector<T>(v, v + m.dims.vocab);
}

// Greedy argmax decoding from a conditioning row; ties pick the lowest
// index. Returns content tokens only; generation stops at <eos> or after
// max_len tokens.
template <class T>
std::vector<int32_t> greedy_decode(const Model<T>& m, size_t decoder_index,
                                   const Tensor<T>& cond, size_t max_len) {
  Tape<T> tp;
  ModelVars<T> mv = stage_model_frozen(tp, m);
  const auto& dec = mv.decoders.at(decoder_index);
  size_t H = tp.rows(dec.u_rec);
  Var h = zeros_input(tp, {1, H});
  Var c = zeros_input(tp, {1, H});
  Var cv = tp.input(cond);
  std::vector<int32_t> out;
  int32_t prev = Vocab::kSos;
  for (size_t t = 0; t < max_len; ++t) {
    Var x = concat_cols(tp, gather_rows(tp, mv.embedding, {prev}), cv);
    auto hc = lstm_step(tp, dec.w_in, dec.u_rec, dec.bias, x, h, c);
    h = hc.first;
    c = hc.second;
    Var logits = matmul(tp, h, dec.v_out);
    int32_t tok =
        static_cast<int32_t>(kernels::argmax(tp.data(logits), m.dims.vocab));
    if (tok == Vocab::kEos) break;
    out.push_back(tok);
    prev = tok;
  }
  return out;
}

// Encode-then-decode round trip for one sentence.
template <class T>
std::vector<int32_t> reconstruct(const Model<T>& m,
                                 const std::vector<int32_t>& content,
                                 size_t max_len) {
  Tensor<T> z = encode_values(m, {content});
  return greedy_decode(m, 0, z, max_len);
}

// Paragraph-level hidden states h_p for each position of a paragraph batch,
// computed with frozen parameters. h_p[l] conditions sentence l. The chain
// starts from z_0 = encode(<sop>) and consumes the previous sentence's
// encoding at each step.
template <class T>
std::vector<Tensor<T>> paragraph_states(const Model<T>& m,
                                        const ParagraphBatch& pb) {
  if (!m.has_paragraph()) {
    throw ValueError("paragraph states need a hierarchical model");
  }
  Tape<T> tp;
  ModelVars<T> mv = stage_model_frozen(tp, m);
  size_t B = pb.rows;
  size_t Hp = m.dims.paragraph_hidden;
  Var h = zeros_input(tp, {B, Hp});
  Var c = zeros_input(tp, {B, Hp});
  std::vector<int32_t> sop = {Vocab::kSop};
  std::vector<const std::vector<int32_t>*> sops(B, &sop);
  SentenceBatch sop_batch = SentenceBatch::build(sops, m.dims.max_window());
  Var z = encode_batch(tp, mv, m.dims, sop_batch);
  std::vector<Tensor<T>> states;
  for (size_t l = 0; l < pb.members.size(); ++l) {
    auto hc = lstm_step(tp, mv.para_w_in, mv.para_u_rec, mv.para_bias, z, h, c);
    h = hc.first;
    c = hc.second;
    Tensor<T> hp({B, Hp});
    const T* v = tp.data(h);
    std::copy(v, v + B * Hp, hp.v.begin());
    states.push_back(std::move(hp));
    if (l + 1 < pb.members.size()) {
      z = encode_batch(tp, mv, m.dims, pb.members[l]);
    }
  }
  return states;
}

// Mean-over-rows NLL of one sentence batch under a fixed conditioning
// matrix, with frozen parameters.
template <class T>
T conditional_nll(const Model<T>& m, size_t decoder_index,
                  const SentenceBatch& batch, const Tensor<T>& cond) {
  Tape<T> tp;
  ModelVars<T> mv = stage_model_frozen(tp, m);
  Var rows = decode_nll_rows(tp, mv.decoders.at(decoder_index), mv.embedding,
                             batch, tp.input(cond));
  return tp.scalar(mean_rows_loss(tp, rows));
}

}  // namespace sentrep
