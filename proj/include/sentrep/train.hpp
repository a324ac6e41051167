#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "sentrep/decoder.hpp"

namespace sentrep {

struct TrainConfig {
  double learning_rate = 2e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 5.0;
  size_t batch_size = 64;
  size_t sentences_per_paragraph = 8;
  double dropout = 0.5;
  double init_range = 0.01;
  double forget_bias = 3.0;
  uint64_t seed = 1;
  size_t max_steps = 100;

  void validate() const {
    if (learning_rate < 0) throw ValueError("learning_rate must be non-negative");
    if (adam_beta1 < 0 || adam_beta1 >= 1 || adam_beta2 < 0 || adam_beta2 >= 1) {
      throw ValueError("adam betas must lie in [0, 1)");
    }
    if (adam_eps <= 0) throw ValueError("adam_eps must be positive");
    if (clip_norm <= 0) throw ValueError("clip_norm must be positive");
    if (batch_size == 0) throw ValueError("batch_size must be positive");
    if (sentences_per_paragraph == 0) {
      throw ValueError("sentences_per_paragraph must be positive");
    }
    if (dropout < 0 || dropout >= 1) throw ValueError("dropout must lie in [0, 1)");
    if (init_range <= 0) throw ValueError("init_range must be positive");
  }
};

template <class T>
struct AdamState {
  std::vector<Tensor<T>> m, v;
  int64_t t = 0;

  void init(Model<T>& model) {
    m.clear();
    v.clear();
    t = 0;
    model.for_each_trainable([&](const std::string&, Tensor<T>& p) {
      m.push_back(Tensor<T>(p.shape));
      v.push_back(Tensor<T>(p.shape));
    });
  }
};

// Inverted-scaling dropout mask over a (B, md) feature block: kept entries
// carry 1/(1-rate) so eval needs no rescaling.
template <class T>
Var feature_dropout(Tape<T>& tp, size_t rows, size_t cols, double rate,
                    Rng* rng) {
  if (!rng || rate <= 0) return Var{};
  Tensor<T> mask({rows, cols});
  T keep_val = static_cast<T>(1.0 / (1.0 - rate));
  for (auto& x : mask.v) x = rng->uniform01() >= rate ? keep_val : T(0);
  return tp.input(mask);
}

// Loss for the sentence-pair variants. The autoencoder decodes the source
// back from z, the future predictor decodes the target, and the composite
// sums both objectives (two decoders, one shared z).
template <class T>
Var build_pair_loss(Tape<T>& tp, const ModelVars<T>& mv, const Model<T>& m,
                    const SentenceBatch& src, const SentenceBatch& tgt,
                    double dropout_rate = 0, Rng* dropout_rng = nullptr) {
  if (m.variant == Variant::hierarchical) {
    throw ValueError("hierarchical models train on paragraph batches, not sentence pairs");
  }
  if (src.rows != tgt.rows) {
    throw ShapeError("source and target batches disagree on rows");
  }
  Var mask = feature_dropout(tp, src.rows, m.dims.feature_dim(), dropout_rate,
                             dropout_rng);
  Var z = encode_batch(tp, mv, m.dims, src, mask);
  if (m.variant == Variant::autoencoder) {
    return mean_rows_loss(
        tp, decode_nll_rows(tp, mv.decoders[0], mv.embedding, src, z));
  }
  if (m.variant == Variant::future_predictor) {
    return mean_rows_loss(
        tp, decode_nll_rows(tp, mv.decoders[0], mv.embedding, tgt, z));
  }
  Var ae = mean_rows_loss(
      tp, decode_nll_rows(tp, mv.decoders[0], mv.embedding, src, z));
  Var fp = mean_rows_loss(
      tp, decode_nll_rows(tp, mv.decoders[1], mv.embedding, tgt, z));
  return add(tp, ae, fp);
}

// Loss for the hierarchical variant: a paragraph LSTM consumes the previous
// sentence's encoding and its hidden state conditions the decoder for the
// current sentence. Per-sentence mean losses are summed in sentence order.
template <class T>
Var build_paragraph_loss(Tape<T>& tp, const ModelVars<T>& mv, const Model<T>& m,
                         const ParagraphBatch& pb, double dropout_rate = 0,
                         Rng* dropout_rng = nullptr) {
  if (m.variant != Variant::hierarchical) {
    throw ValueError("paragraph batches require a hierarchical model");
  }
  size_t B = pb.rows;
  size_t md = m.dims.feature_dim();
  Var h = zeros_input(tp, {B, m.dims.paragraph_hidden});
  Var c = zeros_input(tp, {B, m.dims.paragraph_hidden});
  std::vector<int32_t> sop = {Vocab::kSop};
  std::vector<const std::vector<int32_t>*> sops(B, &sop);
  SentenceBatch sop_batch = SentenceBatch::build(sops, m.dims.max_window());
  Var z = encode_batch(tp, mv, m.dims, sop_batch,
                       feature_dropout<T>(tp, B, md, dropout_rate, dropout_rng));
  Var total;
  for (size_t l = 0; l < pb.members.size(); ++l) {
    auto hc = lstm_step(tp, mv.para_w_in, mv.para_u_rec, mv.para_bias, z, h, c);
    h = hc.first;
    c = hc.second;
    Var loss_l = mean_rows_loss(
        tp, decode_nll_rows(tp, mv.decoders[0], mv.embedding, pb.members[l], h));
    total = total.valid() ? add(tp, total, loss_l) : loss_l;
    if (l + 1 < pb.members.size()) {
      z = encode_batch(tp, mv, m.dims, pb.members[l],
                       feature_dropout<T>(tp, B, md, dropout_rate, dropout_rng));
    }
  }
  return total;
}

// Frozen-parameter loss values for tests and monitoring.
template <class T>
T pair_loss_value(const Model<T>& m, const SentenceBatch& src,
                  const SentenceBatch& tgt) {
  Tape<T> tp;
  ModelVars<T> mv = stage_model_frozen(tp, m);
  return tp.scalar(build_pair_loss(tp, mv, m, src, tgt));
}

template <class T>
T paragraph_loss_value(const Model<T>& m, const ParagraphBatch& pb) {
  Tape<T> tp;
  ModelVars<T> mv = stage_model_frozen(tp, m);
  return tp.scalar(build_paragraph_loss(tp, mv, m, pb));
}

template <class T>
struct StepInfo {
  T loss = T(0);
  double grad_norm = 0;  // before clipping
  bool clipped = false;
};

// One optimizer step: backward, joint-norm clip, Adam update. The loss must
// be finite or the step aborts naming the first non-finite parameter.
template <class T>
class Trainer {
 public:
  Trainer(Model<T>& model, const TrainConfig& cfg)
      : model_(model), cfg_(cfg), dropout_rng_(mix_seed(cfg.seed, 0x64726f70ull)) {
    cfg_.validate();
    opt_.init(model_);
  }

  StepInfo<T> step_pair(const SentenceBatch& src, const SentenceBatch& tgt) {
    Tape<T> tp;
    ModelVars<T> mv = stage_model(tp, model_);
    Var loss = build_pair_loss(tp, mv, model_, src, tgt, cfg_.dropout,
                               cfg_.dropout > 0 ? &dropout_rng_ : nullptr);
    return finish(tp, loss);
  }

  StepInfo<T> step_paragraph(const ParagraphBatch& pb) {
    Tape<T> tp;
    ModelVars<T> mv = stage_model(tp, model_);
    Var loss = build_paragraph_loss(tp, mv, model_, pb, cfg_.dropout,
                                    cfg_.dropout > 0 ? &dropout_rng_ : nullptr);
    return finish(tp, loss);
  }

  int64_t steps_taken() const { return opt_.t; }
  const AdamState<T>& optimizer() const { return opt_; }

 private:
  StepInfo<T> finish(Tape<T>& tp, Var loss) {
    StepInfo<T> info;
    info.loss = tp.scalar(loss);
    if (!std::isfinite(static_cast<double>(info.loss))) {
      std::string culprit = "loss";
      model_.for_each_trainable([&](const std::string& name, Tensor<T>& p) {
        if (culprit == "loss" && !p.finite()) culprit = name;
      });
      throw NumericError("non-finite loss at optimizer step " +
                         std::to_string(opt_.t + 1) +
                         "; first non-finite tensor: " + culprit);
    }
    model_.for_each_trainable(
        [&](const std::string&, Tensor<T>& p) { p.zero_grad(); });
    tp.backward(loss);

    double sq = 0;
    model_.for_each_trainable([&](const std::string&, Tensor<T>& p) {
      for (T g : p.g) sq += static_cast<double>(g) * static_cast<double>(g);
    });
    info.grad_norm = std::sqrt(sq);
    if (info.grad_norm > cfg_.clip_norm) {
      info.clipped = true;
      T factor = static_cast<T>(cfg_.clip_norm / info.grad_norm);
      model_.for_each_trainable([&](const std::string&, Tensor<T>& p) {
        kernels::scale(p.g.data(), factor, p.g.size());
      });
    }

    ++opt_.t;
    T bias1 = static_cast<T>(1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(opt_.t)));
    T bias2 = static_cast<T>(1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(opt_.t)));
    size_t slot = 0;
    model_.for_each_trainable([&](const std::string&, Tensor<T>& p) {
      kernels::adam_update(p.v.data(), p.g.data(), opt_.m[slot].v.data(),
                           opt_.v[slot].v.data(), p.numel(),
                           static_cast<T>(cfg_.learning_rate),
                           static_cast<T>(cfg_.adam_beta1),
                           static_cast<T>(cfg_.adam_beta2),
                           static_cast<T>(cfg_.adam_eps), bias1, bias2);
      ++slot;
    });
    return info;
  }

  Model<T>& model_;
  TrainConfig cfg_;
  AdamState<T> opt_;
  Rng dropout_rng_;
};

struct TrainMetrics {
  std::vector<size_t> step;
  std::vector<double> loss;
  std::vector<double> grad_norm;

  std::string to_tsv() const {
    std::string out = "step\tloss\tgrad_norm\n";
    char buf[96];
    for (size_t i = 0; i < step.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu\t%.9g\t%.9g\n", step[i], loss[i],
                    grad_norm[i]);
      out += buf;
    }
    return out;
  }
};

// Runs cfg.max_steps optimizer steps over the corpus, drawing a freshly
// shuffled batch stream per epoch from (seed, epoch).
template <class T>
TrainMetrics train(Model<T>& model, const Corpus& corpus, const TrainConfig& cfg,
                   std::ostream* log = nullptr) {
  Trainer<T> trainer(model, cfg);
  TrainMetrics metrics;
  size_t h_max = model.dims.max_window();
  size_t step = 0;
  if (log) *log << "step\tloss\tgrad_norm\n";
  for (uint64_t epoch = 0; step < cfg.max_steps; ++epoch) {
    std::vector<StepInfo<T>> infos;
    if (model.variant == Variant::hierarchical) {
      auto batches = make_paragraph_batches(corpus, cfg.sentences_per_paragraph,
                                            cfg.batch_size, cfg.seed, epoch, h_max);
      if (batches.empty()) {
        throw ValueError("corpus yields no paragraph batches of " +
                         std::to_string(cfg.sentences_per_paragraph) + " sentences");
      }
      for (const auto& b : batches) {
        if (step >= cfg.max_steps) break;
        infos.push_back(trainer.step_paragraph(b));
        ++step;
      }
    } else {
      PairMode mode = model.variant == Variant::autoencoder ? PairMode::self
                                                            : PairMode::next;
      auto batches = make_pair_batches(corpus, mode, cfg.batch_size, cfg.seed,
                                       epoch, h_max);
      if (batches.empty()) {
        throw ValueError("corpus yields no sentence-pair batches");
      }
      for (const auto& b : batches) {
        if (step >= cfg.max_steps) break;
        infos.push_back(trainer.step_pair(b.first, b.second));
        ++step;
      }
    }
    for (const auto& info : infos) {
      size_t s = metrics.step.size() + 1;
      metrics.step.push_back(s);
      metrics.loss.push_back(static_cast<double>(info.loss));
      metrics.grad_norm.push_back(info.grad_norm);
      if (log) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu\t%.9g\t%.9g\n", s,
                      static_cast<double>(info.loss), info.grad_norm);
        *log << buf;
      }
    }
  }
  return metrics;
}

}  // namespace sentrep
