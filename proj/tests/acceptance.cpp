// Acceptance gate: runs the twelve release criteria end to end and prints
// one pass/fail line per criterion. Exits 0 only if every line passes.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "test_support.hpp"

#include "sentrep/checkpoint.hpp"
#include "sentrep/corpus.hpp"
#include "sentrep/decoder.hpp"
#include "sentrep/embedding.hpp"
#include "sentrep/encoder.hpp"
#include "sentrep/eval.hpp"
#include "sentrep/gradcheck.hpp"
#include "sentrep/kernels.hpp"
#include "sentrep/linalg.hpp"
#include "sentrep/model.hpp"
#include "sentrep/rng.hpp"
#include "sentrep/tape.hpp"
#include "sentrep/text.hpp"
#include "sentrep/train.hpp"
#include "sentrep/util.hpp"

using namespace sentrep;

namespace {

struct Gate {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::vector<int32_t> random_sentence(Rng& rng, size_t lo_len, size_t hi_len,
                                     int32_t lo_tok, int32_t hi_tok) {
  size_t len = lo_len + static_cast<size_t>(rng.below(hi_len - lo_len + 1));
  std::vector<int32_t> s(len);
  for (auto& t : s) {
    t = lo_tok + static_cast<int32_t>(rng.below(
                     static_cast<uint64_t>(hi_tok - lo_tok + 1)));
  }
  return s;
}

// ---------------------------------------------------------------------------
// 1. Analytic gradients match central finite differences for all variants.

Gate criterion_gradients() {
  auto t0 = std::chrono::steady_clock::now();
  ModelDims dims;
  dims.embed_k = 8;
  dims.windows = {2, 3};
  dims.maps_per_window = 4;
  dims.hidden = 16;
  dims.paragraph_hidden = 16;
  dims.vocab = 50;

  Rng data_rng(2024);
  auto sent = [&] { return random_sentence(data_rng, 3, 6, 5, 49); };
  SentenceBatch src = SentenceBatch::build({sent(), sent()}, 3);
  SentenceBatch tgt = SentenceBatch::build({sent(), sent()}, 3);
  Corpus pcorp;
  pcorp.paragraphs = {{sent(), sent(), sent()}, {sent(), sent(), sent()}};
  BatchStats stats;
  std::vector<ParagraphBatch> pbs =
      make_paragraph_batches(pcorp, 3, 2, 7, 0, 3, &stats);

  double worst = 0;
  std::string worst_at;
  for (Variant variant : {Variant::autoencoder, Variant::future_predictor,
                          Variant::composite, Variant::hierarchical}) {
    Model<double> m = init_model<double>(variant, dims, 67, EmbedMode::learned,
                                         0.5);
    auto build = [&](Tape<double>& tp, const ModelVars<double>& mv) {
      if (variant == Variant::hierarchical) {
        return build_paragraph_loss(tp, mv, m, pbs.at(0), 0.0, nullptr);
      }
      return build_pair_loss(tp, mv, m, src, tgt);
    };
    auto loss_of = [&](bool backward) {
      Tape<double> tp;
      ModelVars<double> mv = backward ? stage_model(tp, m)
                                      : stage_model_frozen(tp, m);
      Var loss = build(tp, mv);
      double val = tp.scalar(loss);
      if (backward) tp.backward(loss);
      return val;
    };
    std::vector<std::pair<std::string, Tensor<double>*>> params;
    m.for_each_param([&](const std::string& name, Tensor<double>& t) {
      params.emplace_back(name, &t);
    });
    // eps 5e-4 sits in the central-difference truncation regime here; the
    // seeds pin a point whose max-pool argmaxes have margin wider than eps,
    // since a pool switch inside the probe step would corrupt the estimate.
    auto res = finite_diff_check(
        params, [&] { return loss_of(false); },
        [&] {
          m.for_each_param(
              [&](const std::string&, Tensor<double>& t) { t.zero_grad(); });
          loss_of(true);
        },
        5e-4, 200);
    if (res.worst > worst) {
      worst = res.worst;
      worst_at = variant_name(variant) + "/" + res.worst_tensor;
    }
  }
  double dt = seconds_since(t0);
  Gate g;
  g.ok = worst < 1e-4 && dt < 120.0;
  g.detail = fmt("worst rel err %.3g at %s over 200 coords/tensor, %.1fs",
                 worst, worst_at.c_str(), dt);
  return g;
}

// ---------------------------------------------------------------------------
// 2. Decoder probabilities over all sentences up to length 2 sum to one.

template <class T>
double tree_mass(const Model<T>& m, const Tensor<T>& cond) {
  size_t v = m.dims.vocab;
  std::vector<T> d0 = next_token_dist(m, 0, {}, cond);
  double total = d0[Vocab::kEos];
  for (int32_t w0 = 0; w0 < static_cast<int32_t>(v); ++w0) {
    if (w0 == Vocab::kEos) continue;
    std::vector<T> d1 = next_token_dist(m, 0, {w0}, cond);
    double tail = d1[Vocab::kEos];
    for (int32_t w1 = 0; w1 < static_cast<int32_t>(v); ++w1) {
      if (w1 == Vocab::kEos) continue;
      std::vector<T> d2 = next_token_dist(m, 0, {w0, w1}, cond);
      double mass2 = 0;
      for (T p : d2) mass2 += p;
      tail += d1[w1] * mass2;
    }
    total += d0[w0] * tail;
  }
  return total;
}

Gate criterion_normalization() {
  ModelDims dims;
  dims.embed_k = 6;
  dims.windows = {2};
  dims.maps_per_window = 5;
  dims.hidden = 12;
  dims.paragraph_hidden = 12;
  dims.vocab = 8;  // five reserved plus a three-token alphabet

  Model<float> ae = init_model<float>(Variant::autoencoder, dims, 11,
                                      EmbedMode::learned, 0.4);
  Tensor<float> z = encode_values(ae, {{5, 6, 7}});
  double err_z = std::fabs(tree_mass(ae, z) - 1.0);

  Model<float> hier = init_model<float>(Variant::hierarchical, dims, 12,
                                        EmbedMode::learned, 0.4);
  Corpus pcorp;
  pcorp.paragraphs = {{{5, 6}, {7, 5, 6}}};
  std::vector<ParagraphBatch> pbs = make_paragraph_batches(pcorp, 2, 1, 1, 0, 2);
  std::vector<Tensor<float>> states = paragraph_states(hier, pbs.at(0));
  double err_h = std::fabs(tree_mass(hier, states.at(0)) - 1.0);

  Gate g;
  g.ok = err_z <= 1e-5 && err_h <= 1e-5;
  g.detail = fmt("|mass-1| = %.3g (z-conditioned), %.3g (paragraph-state)",
                 err_z, err_h);
  return g;
}

// ---------------------------------------------------------------------------
// 3. Hierarchical batch loss factors into per-sentence conditionals.

Gate criterion_factorization() {
  ModelDims dims;
  dims.embed_k = 6;
  dims.windows = {2, 3};
  dims.maps_per_window = 4;
  dims.hidden = 10;
  dims.paragraph_hidden = 10;
  dims.vocab = 30;

  size_t exact = 0;
  const size_t trials = 20;
  for (size_t trial = 0; trial < trials; ++trial) {
    Rng rng(3000 + trial);
    Corpus corpus;
    size_t paragraphs = 2 + rng.below(3);
    for (size_t p = 0; p < paragraphs; ++p) {
      std::vector<std::vector<int32_t>> para;
      size_t sents = 2 + rng.below(5);
      for (size_t s = 0; s < sents; ++s) {
        para.push_back(random_sentence(rng, 2, 5, 5, 29));
      }
      corpus.paragraphs.push_back(std::move(para));
    }
    std::vector<ParagraphBatch> pbs =
        make_paragraph_batches(corpus, 2, 4, trial, 0, 3);
    if (pbs.empty()) continue;
    Model<float> m = init_model<float>(Variant::hierarchical, dims,
                                       500 + trial, EmbedMode::learned, 0.2);
    float joint = paragraph_loss_value(m, pbs[0]);
    std::vector<Tensor<float>> states = paragraph_states(m, pbs[0]);
    float sum = 0.0f;
    for (size_t l = 0; l < pbs[0].members.size(); ++l) {
      sum += conditional_nll(m, 0, pbs[0].members[l], states[l]);
    }
    if (joint == sum) ++exact;
  }
  Gate g;
  g.ok = exact == trials;
  g.detail = fmt("%zu/%zu random paragraph batches bitwise equal", exact,
                 trials);
  return g;
}

// ---------------------------------------------------------------------------
// 4. Composite loss equals autoencoder part plus future part from one z.

Gate criterion_composite() {
  ModelDims dims;
  dims.embed_k = 6;
  dims.windows = {2, 3};
  dims.maps_per_window = 4;
  dims.hidden = 10;
  dims.paragraph_hidden = 10;
  dims.vocab = 30;

  size_t exact = 0;
  const size_t trials = 20;
  for (size_t trial = 0; trial < trials; ++trial) {
    Rng rng(4000 + trial);
    size_t rows = 2 + rng.below(4);
    std::vector<std::vector<int32_t>> srcs, tgts;
    for (size_t r = 0; r < rows; ++r) {
      srcs.push_back(random_sentence(rng, 2, 6, 5, 29));
      tgts.push_back(random_sentence(rng, 2, 6, 5, 29));
    }
    SentenceBatch src = SentenceBatch::build(srcs, 3);
    SentenceBatch tgt = SentenceBatch::build(tgts, 3);
    Model<float> comp = init_model<float>(Variant::composite, dims, 600 + trial,
                                          EmbedMode::learned, 0.2);
    Model<float> ae = comp;
    ae.variant = Variant::autoencoder;
    ae.decoders = {comp.decoders[0]};
    Model<float> fp = comp;
    fp.variant = Variant::future_predictor;
    fp.decoders = {comp.decoders[1]};

    float whole = pair_loss_value(comp, src, tgt);
    float parts = pair_loss_value(ae, src, tgt) + pair_loss_value(fp, src, tgt);
    if (whole == parts) ++exact;
  }
  Gate g;
  g.ok = exact == trials;
  g.detail = fmt("%zu/%zu random pair batches bitwise equal", exact, trials);
  return g;
}

// ---------------------------------------------------------------------------
// 5. Encodings ignore padding width; z has m*d lanes (2400 at full scale).

Gate criterion_length_invariance() {
  ModelDims dims;
  dims.embed_k = 8;
  dims.windows = {2, 3};
  dims.maps_per_window = 6;
  dims.hidden = 12;
  dims.paragraph_hidden = 12;
  dims.vocab = 40;
  Model<float> m = init_model<float>(Variant::autoencoder, dims, 91,
                                     EmbedMode::learned, 0.3);

  Rng rng(555);
  size_t identical = 0;
  const size_t trials = 100;
  for (size_t i = 0; i < trials; ++i) {
    std::vector<int32_t> s = random_sentence(rng, 1, 12, 5, 39);
    auto encode_at = [&](size_t min_width) {
      Tape<float> tp;
      ModelVars<float> mv = stage_model_frozen(tp, m);
      SentenceBatch one = SentenceBatch::build({&s}, min_width);
      Var z = encode_batch(tp, mv, m.dims, one);
      const float* v = tp.data(z);
      return std::vector<float>(v, v + m.dims.feature_dim());
    };
    if (encode_at(3) == encode_at(3 + 16)) ++identical;
  }

  ModelDims full;
  full.vocab = 50;
  Model<float> big = allocate_model<float>(Variant::autoencoder, full,
                                           EmbedMode::learned);
  Tensor<float> zb = encode_values(big, {{5, 6, 7, 8}});
  bool dims_ok = full.feature_dim() == 2400 && zb.cols() == 2400 &&
                 dims.feature_dim() == 12;

  Gate g;
  g.ok = identical == trials && dims_ok;
  g.detail = fmt("%zu/%zu sentences bitwise stable under +16 padding; "
                 "default-config dim(z) = %zu",
                 identical, trials, zb.cols());
  return g;
}

// ---------------------------------------------------------------------------
// 6. Initialization: orthogonal recurrent gates, forget bias 3, |w| <= 0.01.

Gate criterion_init() {
  double worst_gram = 0;
  double worst_uniform = 0;
  bool forget_exact = true;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    ModelDims dims;
    dims.embed_k = 7;
    dims.windows = {2, 3};
    dims.maps_per_window = 5;
    dims.hidden = 11;
    dims.paragraph_hidden = 9;
    dims.vocab = 23;
    Model<float> m = init_model<float>(Variant::hierarchical, dims, seed);
    m.for_each_param([&](const std::string& name, Tensor<float>& t) {
      bool recurrent = name.find("u_rec") != std::string::npos;
      bool lstm_bias = (name.find("bias") != std::string::npos &&
                        name.find("encoder") == std::string::npos);
      if (recurrent) {
        size_t h = t.rows();
        for (size_t gate = 0; gate < 4; ++gate) {
          std::vector<double> q(h * h);
          for (size_t r = 0; r < h; ++r) {
            for (size_t c = 0; c < h; ++c) {
              q[r * h + c] = t.v[r * 4 * h + gate * h + c];
            }
          }
          worst_gram = std::max(worst_gram, gram_defect(q, h));
        }
      } else if (lstm_bias) {
        size_t h = t.numel() / 4;
        for (size_t i = 0; i < t.numel(); ++i) {
          bool forget = i >= h && i < 2 * h;
          if (forget && t.v[i] != 3.0f) forget_exact = false;
          if (!forget && t.v[i] != 0.0f) forget_exact = false;
        }
      } else {
        for (float w : t.v) {
          worst_uniform = std::max(worst_uniform,
                                   std::fabs(static_cast<double>(w)));
        }
      }
    });
  }
  Gate g;
  g.ok = worst_gram < 1e-5 && forget_exact && worst_uniform <= 0.01;
  g.detail = fmt("gram defect %.3g, forget bias %s, max |w| %.4g over 10 seeds",
                 worst_gram, forget_exact ? "exact" : "WRONG", worst_uniform);
  return g;
}

// ---------------------------------------------------------------------------
// 7. Clipping only rescales norms above 5, exactly onto the threshold;
//    Adam follows the hand-stepped reference.

Gate criterion_clip_adam() {
  ModelDims dims;
  dims.embed_k = 6;
  dims.windows = {2, 3};
  dims.maps_per_window = 4;
  dims.hidden = 10;
  dims.paragraph_hidden = 10;
  dims.vocab = 25;
  Corpus corpus;
  Rng crng(808);
  corpus.paragraphs = {{}};
  for (int i = 0; i < 8; ++i) {
    corpus.paragraphs[0].push_back(random_sentence(crng, 2, 6, 5, 24));
  }
  auto batches = make_pair_batches(corpus, PairMode::self, 8, 3, 0, 3);

  auto post_norm = [](Model<float>& m) {
    double sq = 0;
    m.for_each_trainable([&](const std::string&, Tensor<float>& p) {
      for (float gk : p.g) sq += static_cast<double>(gk) * gk;
    });
    return std::sqrt(sq);
  };

  TrainConfig cfg;
  cfg.dropout = 0;
  bool small_ok = true;
  {
    Model<float> m = init_model<float>(Variant::autoencoder, dims, 21);
    Trainer<float> tr(m, cfg);
    for (int s = 0; s < 5; ++s) {
      StepInfo<float> info = tr.step_pair(batches[0].first, batches[0].second);
      if (info.grad_norm > 5.0 || info.clipped) small_ok = false;
      if (post_norm(m) != info.grad_norm) small_ok = false;
    }
  }

  double clip_err = 1e9;
  bool clipped_seen = false;
  {
    Model<float> m = init_model<float>(Variant::autoencoder, dims, 22);
    for (float& w : m.decoders[0].v_out.v) w *= 2000.0f;
    Trainer<float> tr(m, cfg);
    for (int s = 0; s < 5 && !clipped_seen; ++s) {
      StepInfo<float> info = tr.step_pair(batches[0].first, batches[0].second);
      if (info.grad_norm > 5.0) {
        clipped_seen = info.clipped;
        clip_err = std::fabs(post_norm(m) - 5.0);
      }
    }
  }

  const size_t n = 64;
  const double lr = 2e-4, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Rng rng(404);
  std::vector<double> w(n), gvec(n), mm(n, 0), vv(n, 0);
  for (auto& x : w) x = rng.uniform01() - 0.5;
  std::vector<double> w_ref = w, m_ref = mm, v_ref = vv;
  for (int t = 1; t <= 100; ++t) {
    for (auto& x : gvec) x = 2.0 * rng.uniform01() - 1.0;
    double bias1 = 1.0 - std::pow(b1, t);
    double bias2 = 1.0 - std::pow(b2, t);
    kernels::adam_update(w.data(), gvec.data(), mm.data(), vv.data(), n, lr,
                         b1, b2, eps, bias1, bias2);
    for (size_t i = 0; i < n; ++i) {
      m_ref[i] = b1 * m_ref[i] + (1 - b1) * gvec[i];
      v_ref[i] = b2 * v_ref[i] + (1 - b2) * gvec[i] * gvec[i];
      w_ref[i] -= lr * (m_ref[i] / bias1) /
                  (std::sqrt(v_ref[i] / bias2) + eps);
    }
  }
  double adam_err = 0;
  for (size_t i = 0; i < n; ++i) {
    adam_err = std::max(adam_err, std::fabs(w[i] - w_ref[i]));
  }

  Gate g;
  g.ok = small_ok && clipped_seen && clip_err <= 1e-5 && adam_err < 1e-10;
  g.detail = fmt("small grads untouched %s; post-clip |norm-5| = %.3g; adam "
                 "vs oracle %.3g over 100 steps",
                 small_ok ? "yes" : "NO", clip_err, adam_err);
  return g;
}

// ---------------------------------------------------------------------------
// 8. A desk-scale autoencoder memorizes 32 sentences.

Gate criterion_overfit() {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(777);
  std::vector<std::vector<int32_t>> sents;
  while (sents.size() < 32) {
    std::vector<int32_t> s = random_sentence(rng, 4, 9, 5, 59);
    bool dup = false;
    for (const auto& o : sents) dup = dup || o == s;
    if (!dup) sents.push_back(std::move(s));
  }
  Corpus corpus;
  corpus.paragraphs = {sents};

  ModelDims dims;
  dims.embed_k = 32;
  dims.windows = {2, 3};
  dims.maps_per_window = 48;
  dims.hidden = 96;
  dims.paragraph_hidden = 96;
  dims.vocab = 65;

  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.dropout = 0;
  cfg.batch_size = 64;
  cfg.seed = 9;
  cfg.max_steps = 3000;

  Model<float> m = init_model<float>(Variant::autoencoder, dims, cfg.seed);
  Trainer<float> tr(m, cfg);

  size_t steps = 0;
  double nll_per_token = 1e9;
  size_t reconstructed = 0;
  auto evaluate = [&] {
    Tensor<float> z = encode_values(m, sents);
    double total_nll = 0;
    size_t total_tokens = 0;
    reconstructed = 0;
    for (size_t i = 0; i < sents.size(); ++i) {
      Tensor<float> row({1, z.cols()});
      std::copy(z.v.begin() + i * z.cols(), z.v.begin() + (i + 1) * z.cols(),
                row.v.begin());
      total_nll -= static_cast<double>(sentence_log_prob(m, 0, sents[i], row));
      total_tokens += sents[i].size() + 1;  // content plus <eos>
      if (reconstruct(m, sents[i], 12) == sents[i]) ++reconstructed;
    }
    nll_per_token = total_nll / total_tokens;
    return nll_per_token < 0.1 && reconstructed >= 29;
  };

  bool met = false;
  size_t epoch = 0;
  while (!met && steps < cfg.max_steps) {
    auto batches =
        make_pair_batches(corpus, PairMode::self, cfg.batch_size, cfg.seed,
                          epoch++, m.dims.max_window());
    for (const auto& [src, tgt] : batches) {
      tr.step_pair(src, tgt);
      ++steps;
      if (steps % 100 == 0 && (met = evaluate())) break;
      if (steps >= cfg.max_steps) break;
    }
  }
  if (!met) met = evaluate();
  double dt = seconds_since(t0);

  Gate g;
  g.ok = met && steps <= 3000 && dt < 600.0;
  g.detail = fmt("per-token NLL %.4f, %zu/32 reconstructed, %zu steps, %.0fs",
                 nll_per_token, reconstructed, steps, dt);
  return g;
}

// ---------------------------------------------------------------------------
// 9. Vocabulary expansion: planted linear map recovered; fixed embeddings
//    never move during training.

Gate criterion_expansion() {
  Rng rng(313);
  const size_t k = 4, kp = 6, rows = 40;
  std::vector<double> planted(k * kp);
  for (auto& x : planted) x = rng.uniform(-1, 1);
  std::vector<std::vector<double>> ext(rows), native(rows);
  for (size_t r = 0; r < rows; ++r) {
    ext[r].resize(k);
    for (auto& x : ext[r]) x = rng.uniform(-1, 1);
    native[r].assign(kp, 0.0);
    for (size_t i = 0; i < k; ++i) {
      for (size_t j = 0; j < kp; ++j) {
        native[r][j] += ext[r][i] * planted[i * kp + j];
      }
    }
  }
  // map.m is native-by-external; the planted matrix is external-by-native.
  LinearMap map = fit_linear_map(ext, native, 1e-8);
  double map_err = 0;
  for (size_t i = 0; i < kp; ++i) {
    for (size_t j = 0; j < k; ++j) {
      map_err = std::max(map_err,
                         std::fabs(map.m[i * k + j] - planted[j * kp + i]));
    }
  }

  ModelDims dims;
  dims.embed_k = 6;
  dims.windows = {2, 3};
  dims.maps_per_window = 4;
  dims.hidden = 10;
  dims.paragraph_hidden = 10;
  dims.vocab = 25;
  Corpus corpus;
  Rng crng(99);
  corpus.paragraphs = {{}};
  for (int i = 0; i < 12; ++i) {
    corpus.paragraphs[0].push_back(random_sentence(crng, 2, 6, 5, 24));
  }
  Model<float> m = init_model<float>(Variant::autoencoder, dims, 17,
                                     EmbedMode::fixed);
  uint64_t before = m.embedding.checksum();
  uint64_t dec_before = m.decoders[0].cell.w_in.checksum();
  TrainConfig cfg;
  cfg.max_steps = 500;
  cfg.batch_size = 8;
  cfg.dropout = 0;
  train(m, corpus, cfg);
  bool frozen = m.embedding.checksum() == before;
  bool moved = m.decoders[0].cell.w_in.checksum() != dec_before;

  Gate g;
  g.ok = map_err < 1e-3 && frozen && moved;
  g.detail = fmt("planted-map max dev %.3g; fixed embedding %s over 500 "
                 "steps (other weights %s)",
                 map_err, frozen ? "unchanged" : "CHANGED",
                 moved ? "moved" : "STUCK");
  return g;
}

// ---------------------------------------------------------------------------
// 10. Frozen features separate a synthetic task; pretraining never hurts.

Gate criterion_downstream() {
  ModelDims dims;
  dims.embed_k = 12;
  dims.windows = {2, 3};
  dims.maps_per_window = 16;
  dims.hidden = 32;
  dims.paragraph_hidden = 32;
  dims.vocab = 25;

  // Class 0 sentences draw from tokens 5..14, class 1 from 15..24.
  Rng rng(616);
  auto sample = [&](int cls) {
    return random_sentence(rng, 4, 6, cls == 0 ? 5 : 15, cls == 0 ? 14 : 24);
  };
  Corpus pretrain;
  pretrain.paragraphs = {{}};
  for (int i = 0; i < 200; ++i) {
    pretrain.paragraphs[0].push_back(sample(i % 2));
  }
  TrainConfig pcfg;
  pcfg.learning_rate = 1e-3;
  pcfg.batch_size = 32;
  pcfg.max_steps = 300;
  pcfg.dropout = 0;
  pcfg.seed = 4;
  Model<float> m = init_model<float>(Variant::autoencoder, dims, pcfg.seed);
  train(m, pretrain, pcfg);

  std::vector<std::vector<int32_t>> train_s, test_s;
  std::vector<int32_t> train_y, test_y;
  for (int i = 0; i < 80; ++i) {
    train_s.push_back(sample(i % 2));
    train_y.push_back(i % 2);
  }
  for (int i = 0; i < 40; ++i) {
    test_s.push_back(sample(i % 2));
    test_y.push_back(i % 2);
  }

  std::vector<std::vector<int32_t>> all_s = train_s;
  all_s.insert(all_s.end(), test_s.begin(), test_s.end());
  std::vector<int32_t> all_y = train_y;
  all_y.insert(all_y.end(), test_y.begin(), test_y.end());
  Tensor<double> feats = encode_values(m, all_s).cast<double>();
  ClassifierConfig ccfg;
  ccfg.epochs = 400;
  ccfg.holdout_fraction = 0.25;
  ClassifierReport probe = train_linear_classifier(feats, all_y, ccfg);

  FinetuneConfig fcfg;
  fcfg.steps = 12;
  fcfg.learning_rate = 5e-3;
  fcfg.seed = 31;
  FinetuneReport ft =
      finetune_compare(m, train_s, train_y, test_s, test_y, fcfg);

  Gate g;
  g.ok = probe.holdout_accuracy >= 0.95 &&
         ft.pretrained.test_accuracy >= ft.random.test_accuracy;
  g.detail = fmt("frozen-probe holdout %.3f; finetune pretrained %.3f vs "
                 "random %.3f (gap %+.3f)",
                 probe.holdout_accuracy, ft.pretrained.test_accuracy,
                 ft.random.test_accuracy, ft.gap);
  return g;
}

// ---------------------------------------------------------------------------
// 11. Margin ranking reaches R@1 >= 0.9 on a held-out pool of 100, and
//     rank_eval matches brute force exactly.

Gate criterion_ranking() {
  Rng rng(272);
  const size_t n = 500, dc = 12, di = 16, held = 100;
  Tensor<double> caps({n, dc});
  rng.fill_uniform(caps.v.data(), caps.numel(), -1, 1);
  std::vector<double> map(dc * di);
  for (auto& x : map) x = rng.uniform(-1, 1);
  Tensor<double> items({n, di});
  for (size_t r = 0; r < n; ++r) {
    for (size_t j = 0; j < di; ++j) {
      double s = 0.02 * rng.gauss();
      for (size_t i = 0; i < dc; ++i) s += caps.v[r * dc + i] * map[i * di + j];
      items.v[r * di + j] = s;
    }
  }
  auto slice = [](const Tensor<double>& src, size_t begin, size_t count) {
    size_t w = src.cols();
    Tensor<double> out({count, w});
    std::copy(src.v.begin() + begin * w, src.v.begin() + (begin + count) * w,
              out.v.begin());
    return out;
  };
  RankingConfig cfg;
  cfg.shared_dim = 24;
  cfg.alpha = 0.1;
  cfg.steps = 400;
  cfg.seed = 5;
  RankingTrainReport trained =
      train_ranking(slice(caps, 0, n - held), slice(items, 0, n - held), cfg);

  Tensor<double> scores = trained.model.score_matrix(
      slice(caps, n - held, held), slice(items, n - held, held));
  std::vector<size_t> truth(held);
  for (size_t i = 0; i < held; ++i) truth[i] = i;
  RankReport rep = rank_eval(scores, truth);

  bool brute_ok = true;
  for (size_t r = 0; r < held; ++r) {
    std::vector<size_t> order(held);
    for (size_t i = 0; i < held; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      if (scores.v[r * held + a] != scores.v[r * held + b]) {
        return scores.v[r * held + a] > scores.v[r * held + b];
      }
      return a < b;
    });
    size_t pos = static_cast<size_t>(
        std::find(order.begin(), order.end(), truth[r]) - order.begin());
    if (rep.ranks[r] != pos + 1) brute_ok = false;
  }

  Gate g;
  g.ok = rep.recall_at_1 >= 0.9 && brute_ok;
  g.detail = fmt("held-out R@1 %.2f (pool %zu), median rank %.1f, brute-force "
                 "agreement %s",
                 rep.recall_at_1, held, rep.median_rank,
                 brute_ok ? "exact" : "BROKEN");
  return g;
}

// ---------------------------------------------------------------------------
// 12. CLI runs are bitwise reproducible.

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run_shell(const std::string& cmd) {
  int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Gate criterion_cli_rerun() {
  Gate g;
  const char* bin = std::getenv("SENTREP_BIN");
  if (!bin) {
    g.detail = "SENTREP_BIN is not set";
    return g;
  }
  ts::TempDir dir;
  write_text_file(dir.file("c.txt"),
                  "the cat sat on the mat\n"
                  "the dog ran far away\n"
                  "a bird flew over trees\n"
                  "the cat saw the dog\n");
  std::string dims = " --embed-k 8 --windows 2 3 --maps-per-window 4"
                     " --hidden 12 --paragraph-hidden 12 --batch-size 4";
  bool ok = true;
  std::string why;
  // Each pass runs in its own subdirectory with the same relative paths, so
  // every artifact including stdout must come out byte-identical.
  for (int r = 0; r < 2 && ok; ++r) {
    std::string cwd = dir.file("r" + std::to_string(r));
    std::filesystem::create_directory(cwd);
    auto shell = [&](const std::string& cmd) {
      return run_shell("cd " + quote(cwd) + " && " + cmd);
    };
    ok = ok && shell(quote(bin) +
                     " train --variant autoencoder --corpus ../c.txt"
                     " --steps 8 --seed 1 --out m.ckpt" +
                     dims + " > train.out") == 0;
    ok = ok && shell(quote(bin) +
                     " encode --checkpoint m.ckpt --input ../c.txt"
                     " --out f.tsv > encode.out") == 0;
    ok = ok && shell(quote(bin) +
                     " nn --checkpoint m.ckpt --pool ../c.txt"
                     " --query 'the cat sat on the mat' --top-k 4"
                     " > nn.out") == 0;
    if (!ok) why = "a command failed";
  }
  if (ok) {
    for (const char* name : {"m.ckpt", "m.ckpt.metrics.tsv", "train.out",
                             "f.tsv", "encode.out", "nn.out"}) {
      if (read_text_file(dir.file("r0/") + name) !=
          read_text_file(dir.file("r1/") + name)) {
        ok = false;
        why = std::string(name) + " differs between reruns";
        break;
      }
    }
  }
  g.ok = ok;
  g.detail = ok ? "train, encode, and nn reruns byte-identical" : why;
  return g;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    Gate (*fn)();
  };
  const Entry entries[] = {
      {"gradient oracle", criterion_gradients},
      {"probability normalization", criterion_normalization},
      {"hierarchical factorization", criterion_factorization},
      {"composite decomposition", criterion_composite},
      {"encoder length invariance", criterion_length_invariance},
      {"initialization contract", criterion_init},
      {"clipping and adam contract", criterion_clip_adam},
      {"overfit smoke test", criterion_overfit},
      {"vocabulary expansion", criterion_expansion},
      {"downstream protocol", criterion_downstream},
      {"ranking protocol", criterion_ranking},
      {"cli reproducibility", criterion_cli_rerun},
  };
  bool all_ok = true;
  for (size_t i = 0; i < std::size(entries); ++i) {
    Gate g;
    try {
      g = entries[i].fn();
    } catch (const std::exception& e) {
      g.ok = false;
      g.detail = std::string("exception: ") + e.what();
    }
    all_ok = all_ok && g.ok;
    std::printf("criterion %2zu [%s]: %s (%s)\n", i + 1,
                g.ok ? "PASS" : "FAIL", entries[i].name, g.detail.c_str());
    std::fflush(stdout);
  }
  return all_ok ? 0 : 1;
}
