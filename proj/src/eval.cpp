#include "sentrep/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include "sentrep/corpus.hpp"
#include "sentrep/decoder.hpp"
#include "sentrep/encoder.hpp"
#include "sentrep/kernels.hpp"
#include "sentrep/ops.hpp"
#include "sentrep/rng.hpp"
#include "sentrep/tape.hpp"
#include "sentrep/util.hpp"

namespace sentrep {

namespace {

// Stable softmax of a logit row, in place.
void softmax_inplace(double* p, size_t n) {
  double mx = p[0];
  for (size_t i = 1; i < n; ++i) mx = std::max(mx, p[i]);
  double sum = 0;
  for (size_t i = 0; i < n; ++i) {
    p[i] = std::exp(p[i] - mx);
    sum += p[i];
  }
  for (size_t i = 0; i < n; ++i) p[i] /= sum;
}

// Validates dense class ids and returns the class count.
size_t class_count(const std::vector<int32_t>& labels) {
  if (labels.empty()) throw ValueError("no labeled rows");
  int32_t mx = 0;
  for (int32_t y : labels) {
    if (y < 0) throw ValueError("negative class label " + std::to_string(y));
    mx = std::max(mx, y);
  }
  size_t classes = static_cast<size_t>(mx) + 1;
  std::vector<char> seen(classes, 0);
  for (int32_t y : labels) seen[static_cast<size_t>(y)] = 1;
  size_t distinct = 0;
  for (char s : seen) distinct += s;
  if (distinct < 2) {
    throw ValueError("degenerate labels: need at least 2 classes, found " +
                     std::to_string(distinct));
  }
  return classes;
}

double accuracy_of(const std::vector<int32_t>& pred,
                   const std::vector<int32_t>& gold) {
  size_t hit = 0;
  for (size_t i = 0; i < pred.size(); ++i) hit += pred[i] == gold[i];
  return pred.empty() ? 0.0 : static_cast<double>(hit) / pred.size();
}

}  // namespace

std::vector<double> pair_features(const std::vector<double>& zx,
                                  const std::vector<double>& zy) {
  if (zx.size() != zy.size()) {
    throw ShapeError("pair_features: widths " + std::to_string(zx.size()) +
                     " and " + std::to_string(zy.size()) + " differ");
  }
  size_t d = zx.size();
  std::vector<double> out(2 * d);
  for (size_t i = 0; i < d; ++i) {
    out[i] = zx[i] * zy[i];
    out[d + i] = std::fabs(zx[i] - zy[i]);
  }
  return out;
}

Tensor<double> pair_feature_matrix(const Tensor<double>& x,
                                   const Tensor<double>& y) {
  if (x.shape != y.shape) {
    throw ShapeError("pair_feature_matrix: mismatched inputs");
  }
  size_t n = x.rows(), d = x.cols();
  Tensor<double> out({n, 2 * d});
  for (size_t r = 0; r < n; ++r) {
    const double* a = x.v.data() + r * d;
    const double* b = y.v.data() + r * d;
    double* o = out.v.data() + r * 2 * d;
    for (size_t i = 0; i < d; ++i) {
      o[i] = a[i] * b[i];
      o[d + i] = std::fabs(a[i] - b[i]);
    }
  }
  return out;
}

int32_t LinearClassifier::predict(const double* x) const {
  std::vector<double> logits(classes);
  for (size_t c = 0; c < classes; ++c) {
    const double* row = w.data() + c * (dim + 1);
    logits[c] = kernels::dot(row, x, dim) + row[dim];
  }
  return static_cast<int32_t>(kernels::argmax(logits.data(), classes));
}

std::vector<int32_t> LinearClassifier::predict_rows(
    const Tensor<double>& x) const {
  if (x.cols() != dim) {
    throw ShapeError("classifier expects width " + std::to_string(dim) +
                     ", got " + std::to_string(x.cols()));
  }
  std::vector<int32_t> out(x.rows());
  for (size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.v.data() + r * dim);
  return out;
}

ClassifierReport train_linear_classifier(const Tensor<double>& features,
                                         const std::vector<int32_t>& labels,
                                         const ClassifierConfig& cfg) {
  size_t n = features.rows(), d = features.cols();
  if (labels.size() != n) {
    throw ShapeError("got " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " feature rows");
  }
  size_t classes = class_count(labels);
  if (!features.finite()) throw NumericError("non-finite feature rows");

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng split_rng(mix_seed(cfg.seed, 0x73706c6974ull));
  split_rng.shuffle(order);
  size_t n_hold = static_cast<size_t>(cfg.holdout_fraction * n);
  if (n_hold >= n) n_hold = n - 1;
  std::vector<size_t> train_idx(order.begin(), order.end() - n_hold);
  std::vector<size_t> hold_idx(order.end() - n_hold, order.end());

  ClassifierReport rep;
  rep.model.classes = classes;
  rep.model.dim = d;
  rep.model.w.assign(classes * (d + 1), 0.0);
  rep.train_rows = train_idx.size();
  rep.holdout_rows = hold_idx.size();

  std::vector<double> grad(classes * (d + 1));
  std::vector<double> p(classes);
  double inv = 1.0 / train_idx.size();
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (size_t i : train_idx) {
      const double* x = features.v.data() + i * d;
      for (size_t c = 0; c < classes; ++c) {
        const double* row = rep.model.w.data() + c * (d + 1);
        p[c] = kernels::dot(row, x, d) + row[d];
      }
      softmax_inplace(p.data(), classes);
      p[static_cast<size_t>(labels[i])] -= 1.0;
      for (size_t c = 0; c < classes; ++c) {
        double* g = grad.data() + c * (d + 1);
        kernels::axpy(g, p[c] * inv, x, d);
        g[d] += p[c] * inv;
      }
    }
    for (size_t c = 0; c < classes; ++c) {
      double* g = grad.data() + c * (d + 1);
      const double* row = rep.model.w.data() + c * (d + 1);
      kernels::axpy(g, cfg.l2, row, d);
    }
    kernels::axpy(rep.model.w.data(), -cfg.learning_rate, grad.data(),
                  grad.size());
  }

  auto subset_accuracy = [&](const std::vector<size_t>& idx) {
    if (idx.empty()) return 0.0;
    size_t hit = 0;
    for (size_t i : idx) {
      hit += rep.model.predict(features.v.data() + i * d) == labels[i];
    }
    return static_cast<double>(hit) / idx.size();
  };
  rep.train_accuracy = subset_accuracy(train_idx);
  rep.holdout_accuracy = subset_accuracy(hold_idx);
  return rep;
}

namespace {

double checked_score(double y) {
  if (!std::isfinite(y) || y < 1.0 || y > 5.0) {
    throw ValueError("relatedness score " + std::to_string(y) +
                     " outside [1, 5]");
  }
  return y;
}

}  // namespace

std::array<double, 5> relatedness_target(double y) {
  checked_score(y);
  std::array<double, 5> t{};
  double lo = std::floor(y);
  size_t li = static_cast<size_t>(lo) - 1;
  if (lo == y) {
    t[li] = 1.0;
  } else {
    t[li] = (lo + 1.0) - y;
    t[li + 1] = y - lo;
  }
  return t;
}

double target_expected_score(double y) {
  checked_score(y);
  double lo = std::floor(y);
  return lo + (y - lo);
}

double expected_score(const std::array<double, 5>& p) {
  double e = 0;
  for (size_t i = 0; i < 5; ++i) e += static_cast<double>(i + 1) * p[i];
  return e;
}

std::array<double, 5> RelatednessHead::distribution(const double* x) const {
  std::array<double, 5> p{};
  for (size_t c = 0; c < 5; ++c) {
    const double* row = w.data() + c * (dim + 1);
    p[c] = kernels::dot(row, x, dim) + row[dim];
  }
  softmax_inplace(p.data(), 5);
  return p;
}

double RelatednessHead::predict(const double* x) const {
  return expected_score(distribution(x));
}

RelatednessReport train_relatedness_head(const Tensor<double>& features,
                                         const std::vector<double>& scores,
                                         const RelatednessConfig& cfg) {
  size_t n = features.rows(), d = features.cols();
  if (scores.size() != n) {
    throw ShapeError("got " + std::to_string(scores.size()) + " scores for " +
                     std::to_string(n) + " feature rows");
  }
  std::vector<std::array<double, 5>> targets(n);
  for (size_t i = 0; i < n; ++i) targets[i] = relatedness_target(scores[i]);

  RelatednessReport rep;
  rep.model.dim = d;
  rep.model.w.assign(5 * (d + 1), 0.0);

  std::vector<double> grad(5 * (d + 1));
  double p[5];
  double inv = 1.0 / n;
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      const double* x = features.v.data() + i * d;
      for (size_t c = 0; c < 5; ++c) {
        const double* row = rep.model.w.data() + c * (d + 1);
        p[c] = kernels::dot(row, x, d) + row[d];
      }
      softmax_inplace(p, 5);
      for (size_t c = 0; c < 5; ++c) {
        double diff = (p[c] - targets[i][c]) * inv;
        double* g = grad.data() + c * (d + 1);
        kernels::axpy(g, diff, x, d);
        g[d] += diff;
      }
    }
    for (size_t c = 0; c < 5; ++c) {
      double* g = grad.data() + c * (d + 1);
      const double* row = rep.model.w.data() + c * (d + 1);
      kernels::axpy(g, cfg.l2, row, d);
    }
    kernels::axpy(rep.model.w.data(), -cfg.learning_rate, grad.data(),
                  grad.size());
  }

  rep.predicted.resize(n);
  for (size_t i = 0; i < n; ++i) {
    rep.predicted[i] = rep.model.predict(features.v.data() + i * d);
  }
  rep.pearson_r = pearson(rep.predicted, scores);
  return rep;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ValueError("pearson needs two equal-length series of at least 2");
  }
  size_t n = a.size();
  double ma = 0, mb = 0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cab = 0, caa = 0, cbb = 0;
  for (size_t i = 0; i < n; ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    cab += da * db;
    caa += da * da;
    cbb += db * db;
  }
  if (caa == 0 || cbb == 0) {
    throw NumericError("pearson undefined for a constant series");
  }
  return cab / std::sqrt(caa * cbb);
}

double ranking_loss(const std::vector<double>& related,
                    const std::vector<double>& unrelated, double alpha) {
  if (related.size() != unrelated.size()) {
    throw ShapeError("ranking_loss: " + std::to_string(related.size()) +
                     " related vs " + std::to_string(unrelated.size()) +
                     " unrelated scores");
  }
  if (related.empty()) throw ValueError("ranking_loss: no score pairs");
  double total = 0;
  for (size_t i = 0; i < related.size(); ++i) {
    total += std::max(0.0, alpha - related[i] + unrelated[i]);
  }
  return total / related.size();
}

double RankingModel::score(const double* cap, const double* item) const {
  std::vector<double> pc(shared_dim, 0.0), pi(shared_dim, 0.0);
  for (size_t k = 0; k < caption_dim; ++k) {
    kernels::axpy(pc.data(), cap[k], cap_proj.v.data() + k * shared_dim,
                  shared_dim);
  }
  for (size_t k = 0; k < item_dim; ++k) {
    kernels::axpy(pi.data(), item[k], item_proj.v.data() + k * shared_dim,
                  shared_dim);
  }
  return cosine(pc.data(), pi.data(), shared_dim);
}

Tensor<double> RankingModel::score_matrix(const Tensor<double>& captions,
                                          const Tensor<double>& items,
                                          int threads) const {
  if (captions.cols() != caption_dim || items.cols() != item_dim) {
    throw ShapeError("score_matrix: width mismatch with the trained model");
  }
  size_t q = captions.rows(), p = items.rows();
  Tensor<double> pc({q, shared_dim}), pi({p, shared_dim});
  for (size_t r = 0; r < q; ++r) {
    for (size_t k = 0; k < caption_dim; ++k) {
      kernels::axpy(pc.v.data() + r * shared_dim,
                    captions.v[r * caption_dim + k],
                    cap_proj.v.data() + k * shared_dim, shared_dim);
    }
  }
  for (size_t r = 0; r < p; ++r) {
    for (size_t k = 0; k < item_dim; ++k) {
      kernels::axpy(pi.v.data() + r * shared_dim, items.v[r * item_dim + k],
                    item_proj.v.data() + k * shared_dim, shared_dim);
    }
  }
  Tensor<double> out({q, p});
  parallel_for(q, threads, [&](size_t r) {
    for (size_t c = 0; c < p; ++c) {
      out.v[r * p + c] = cosine(pc.v.data() + r * shared_dim,
                                pi.v.data() + c * shared_dim, shared_dim);
    }
  });
  return out;
}

RankingTrainReport train_ranking(const Tensor<double>& captions,
                                 const Tensor<double>& items,
                                 const RankingConfig& cfg) {
  size_t n = captions.rows();
  if (items.rows() != n) {
    throw ShapeError("train_ranking: " + std::to_string(n) + " captions vs " +
                     std::to_string(items.rows()) + " items");
  }
  if (n < 2) {
    throw ValueError("train_ranking: need at least 2 aligned pairs to sample "
                     "an unrelated item");
  }
  size_t dc = captions.cols(), di = items.cols();

  RankingTrainReport rep;
  RankingModel& m = rep.model;
  m.caption_dim = dc;
  m.item_dim = di;
  m.shared_dim = cfg.shared_dim;
  m.cap_proj = Tensor<double>({dc, cfg.shared_dim});
  m.item_proj = Tensor<double>({di, cfg.shared_dim});
  Rng rng(mix_seed(cfg.seed, 0x72616e6bull));
  rng.fill_uniform(m.cap_proj.v.data(), m.cap_proj.numel(), -cfg.init_range,
                   cfg.init_range);
  rng.fill_uniform(m.item_proj.v.data(), m.item_proj.numel(), -cfg.init_range,
                   cfg.init_range);

  Tensor<double> m1(m.cap_proj.shape), v1(m.cap_proj.shape);
  Tensor<double> m2(m.item_proj.shape), v2(m.item_proj.shape);
  Tensor<double> unrel_items({n, di});

  for (size_t step = 0; step < cfg.steps; ++step) {
    for (size_t i = 0; i < n; ++i) {
      size_t j = static_cast<size_t>(rng.below(n - 1));
      if (j >= i) ++j;
      std::copy(items.v.data() + j * di, items.v.data() + (j + 1) * di,
                unrel_items.v.data() + i * di);
    }
    Tape<double> tp;
    m.cap_proj.ensure_grad();
    m.item_proj.ensure_grad();
    m.cap_proj.zero_grad();
    m.item_proj.zero_grad();
    Var pc = tp.param(m.cap_proj);
    Var pi = tp.param(m.item_proj);
    Var cap = tp.const_view(captions);
    Var rel_i = tp.const_view(items);
    Var unr_i = tp.input(unrel_items);
    Var c = matmul(tp, cap, pc);
    Var rel = cosine_rows(tp, c, matmul(tp, rel_i, pi));
    Var unr = cosine_rows(tp, c, matmul(tp, unr_i, pi));
    Var hinge = relu_op(tp, add_scalar(tp, sub(tp, unr, rel), cfg.alpha));
    Var loss = scale(tp, sum_all(tp, hinge), 1.0 / n);
    double lv = tp.scalar(loss);
    if (step == 0) rep.first_loss = lv;
    rep.final_loss = lv;
    tp.backward(loss);

    double bias1 = 1.0 - std::pow(0.9, static_cast<double>(step + 1));
    double bias2 = 1.0 - std::pow(0.999, static_cast<double>(step + 1));
    kernels::adam_update(m.cap_proj.v.data(), m.cap_proj.g.data(),
                         m1.v.data(), v1.v.data(), m.cap_proj.numel(),
                         cfg.learning_rate, 0.9, 0.999, 1e-8, bias1, bias2);
    kernels::adam_update(m.item_proj.v.data(), m.item_proj.g.data(),
                         m2.v.data(), v2.v.data(), m.item_proj.numel(),
                         cfg.learning_rate, 0.9, 0.999, 1e-8, bias1, bias2);
  }
  return rep;
}

RankReport rank_eval(const Tensor<double>& scores,
                     const std::vector<size_t>& truth) {
  size_t q = scores.rows(), pool = scores.cols();
  if (truth.size() != q) {
    throw ShapeError("rank_eval: " + std::to_string(truth.size()) +
                     " ground-truth entries for " + std::to_string(q) +
                     " queries");
  }
  RankReport rep;
  rep.ranks.resize(q);
  for (size_t r = 0; r < q; ++r) {
    if (truth[r] >= pool) {
      throw ValueError("rank_eval: query " + std::to_string(r) +
                       " has no ground-truth item in the pool");
    }
    const double* s = scores.v.data() + r * pool;
    double st = s[truth[r]];
    size_t rank = 1;
    for (size_t j = 0; j < pool; ++j) {
      if (s[j] > st || (s[j] == st && j < truth[r])) ++rank;
    }
    rep.ranks[r] = rank;
  }
  size_t a1 = 0, a5 = 0, a10 = 0;
  for (size_t rank : rep.ranks) {
    a1 += rank <= 1;
    a5 += rank <= 5;
    a10 += rank <= 10;
  }
  rep.recall_at_1 = static_cast<double>(a1) / q;
  rep.recall_at_5 = static_cast<double>(a5) / q;
  rep.recall_at_10 = static_cast<double>(a10) / q;
  std::vector<size_t> sorted = rep.ranks;
  std::sort(sorted.begin(), sorted.end());
  if (q % 2 == 1) {
    rep.median_rank = static_cast<double>(sorted[q / 2]);
  } else {
    rep.median_rank =
        0.5 * (static_cast<double>(sorted[q / 2 - 1]) +
               static_cast<double>(sorted[q / 2]));
  }
  return rep;
}

double cosine(const double* a, const double* b, size_t n) {
  double na = std::sqrt(kernels::dot(a, a, n));
  double nb = std::sqrt(kernels::dot(b, b, n));
  if (na == 0.0 || nb == 0.0) {
    throw NumericError("zero-norm vector has no cosine similarity");
  }
  return kernels::dot(a, b, n) / (na * nb);
}

std::vector<size_t> cosine_nn(const std::vector<double>& query,
                              const Tensor<double>& pool, size_t top_k) {
  size_t n = pool.rows(), d = pool.cols();
  if (d != query.size()) {
    throw ShapeError("cosine_nn: query width " + std::to_string(query.size()) +
                     " vs pool width " + std::to_string(d));
  }
  std::vector<double> sim(n);
  for (size_t i = 0; i < n; ++i) {
    sim[i] = cosine(query.data(), pool.v.data() + i * d, d);
  }
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (sim[a] != sim[b]) return sim[a] > sim[b];
    return a < b;
  });
  order.resize(std::min(top_k, n));
  return order;
}

std::vector<int32_t> vector_arithmetic(const Model<float>& m,
                                       const std::vector<int32_t>& a,
                                       const std::vector<int32_t>& b,
                                       const std::vector<int32_t>& c,
                                       size_t max_len) {
  Tensor<float> z = encode_values(m, {a, b, c});
  size_t d = m.dims.feature_dim();
  Tensor<float> comb({1, d});
  for (size_t i = 0; i < d; ++i) {
    comb.v[i] = (z.v[i] - z.v[d + i]) + z.v[2 * d + i];
  }
  return greedy_decode(m, 0, comb, max_len);
}

namespace {

FinetuneArm finetune_arm(Model<float> model,
                         const std::vector<std::vector<int32_t>>& train_sents,
                         const std::vector<int32_t>& train_labels,
                         const std::vector<std::vector<int32_t>>& test_sents,
                         const std::vector<int32_t>& test_labels,
                         size_t classes, const FinetuneConfig& cfg) {
  size_t d = model.dims.feature_dim();
  size_t n = train_sents.size();
  Tensor<float> head_w({d, classes});
  Tensor<float> head_b({classes});

  std::vector<Tensor<float>*> params;
  model.for_each_trainable(
      [&](const std::string&, Tensor<float>& p) { params.push_back(&p); });
  params.push_back(&head_w);
  params.push_back(&head_b);
  std::vector<Tensor<float>> om, ov;
  for (Tensor<float>* p : params) {
    om.emplace_back(p->shape);
    ov.emplace_back(p->shape);
  }

  SentenceBatch batch =
      SentenceBatch::build(train_sents, model.dims.max_window());
  std::vector<float> ones(n, 1.0f);
  for (size_t step = 0; step < cfg.steps; ++step) {
    Tape<float> tp;
    ModelVars<float> mv = stage_model(tp, model);
    Var wv = tp.param(head_w);
    Var bv = tp.param(head_b);
    Var z = encode_batch(tp, mv, model.dims, batch);
    Var logits = add_rowvec(tp, matmul(tp, z, wv), bv);
    Var logp = log_softmax_rows(tp, logits);
    Var nll = nll_rows(tp, logp, train_labels, ones);
    Var loss = scale(tp, sum_all(tp, nll), 1.0f / static_cast<float>(n));
    for (Tensor<float>* p : params) p->zero_grad();
    tp.backward(loss);
    float bias1 =
        static_cast<float>(1.0 - std::pow(0.9, static_cast<double>(step + 1)));
    float bias2 = static_cast<float>(
        1.0 - std::pow(0.999, static_cast<double>(step + 1)));
    for (size_t i = 0; i < params.size(); ++i) {
      Tensor<float>* p = params[i];
      kernels::adam_update(p->v.data(), p->g.data(), om[i].v.data(),
                           ov[i].v.data(), p->numel(),
                           static_cast<float>(cfg.learning_rate), 0.9f, 0.999f,
                           1e-8f, bias1, bias2);
    }
  }

  auto eval_set = [&](const std::vector<std::vector<int32_t>>& sents,
                      const std::vector<int32_t>& labels) {
    Tensor<float> z = encode_values(model, sents);
    std::vector<int32_t> pred(sents.size());
    std::vector<double> logits(classes);
    for (size_t r = 0; r < sents.size(); ++r) {
      for (size_t c = 0; c < classes; ++c) {
        double acc = static_cast<double>(head_b.v[c]);
        for (size_t k = 0; k < d; ++k) {
          acc += static_cast<double>(z.v[r * d + k]) *
                 static_cast<double>(head_w.v[k * classes + c]);
        }
        logits[c] = acc;
      }
      pred[r] = static_cast<int32_t>(kernels::argmax(logits.data(), classes));
    }
    return accuracy_of(pred, labels);
  };
  FinetuneArm arm;
  arm.train_accuracy = eval_set(train_sents, train_labels);
  arm.test_accuracy = eval_set(test_sents, test_labels);
  return arm;
}

}  // namespace

FinetuneReport finetune_compare(const Model<float>& pretrained,
                                const std::vector<std::vector<int32_t>>& train_sents,
                                const std::vector<int32_t>& train_labels,
                                const std::vector<std::vector<int32_t>>& test_sents,
                                const std::vector<int32_t>& test_labels,
                                const FinetuneConfig& cfg) {
  if (train_sents.size() != train_labels.size() ||
      test_sents.size() != test_labels.size()) {
    throw ShapeError("finetune_compare: sentence and label counts differ");
  }
  size_t classes = class_count(train_labels);
  for (int32_t y : test_labels) {
    if (y < 0 || static_cast<size_t>(y) >= classes) {
      throw ValueError("test label " + std::to_string(y) +
                       " outside the training classes");
    }
  }
  FinetuneReport rep;
  rep.pretrained = finetune_arm(pretrained, train_sents, train_labels,
                                test_sents, test_labels, classes, cfg);
  Model<float> fresh = init_model<float>(pretrained.variant, pretrained.dims,
                                         cfg.seed, pretrained.embed_mode);
  rep.random = finetune_arm(std::move(fresh), train_sents, train_labels,
                            test_sents, test_labels, classes, cfg);
  rep.gap = rep.pretrained.test_accuracy - rep.random.test_accuracy;
  return rep;
}

void write_feature_tsv(const std::string& path,
                       const std::vector<std::string>& labels,
                       const Tensor<float>& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  if (!labels.empty()) {
    size_t d = features.cols();
    if (features.rows() != labels.size()) {
      throw ShapeError("feature dump: " + std::to_string(labels.size()) +
                       " labels for " + std::to_string(features.rows()) +
                       " rows");
    }
    char buf[32];
    for (size_t r = 0; r < labels.size(); ++r) {
      out << labels[r];
      for (size_t i = 0; i < d; ++i) {
        std::snprintf(buf, sizeof buf, "%.9g",
                      static_cast<double>(features.v[r * d + i]));
        out << (i == 0 ? '\t' : ' ') << buf;
      }
      out << '\n';
    }
  }
  if (!out.flush()) throw IoError("write failed: " + path);
}

FeatureFile read_feature_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  FeatureFile ff;
  std::vector<double> values;
  size_t width = 0;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw IntegrityError("feature file " + path + " line " +
                           std::to_string(line_no) + ": no label column");
    }
    ff.labels.push_back(line.substr(0, tab));
    std::istringstream row(line.substr(tab + 1));
    size_t count = 0;
    double v;
    while (row >> v) {
      values.push_back(v);
      ++count;
    }
    if (!row.eof()) {
      throw IntegrityError("feature file " + path + " line " +
                           std::to_string(line_no) + ": non-numeric value");
    }
    if (width == 0) width = count;
    if (count == 0 || count != width) {
      throw IntegrityError("feature file " + path + " line " +
                           std::to_string(line_no) + ": expected " +
                           std::to_string(width) + " values, got " +
                           std::to_string(count));
    }
  }
  if (!ff.labels.empty()) {
    ff.features = Tensor<double>({ff.labels.size(), width});
    ff.features.v = std::move(values);
  }
  return ff;
}

void write_metrics(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  if (!out.flush()) throw IoError("write failed: " + path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace sentrep
