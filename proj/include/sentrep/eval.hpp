#pragma once

// Downstream evaluation over frozen sentence encoders: linear probes on
// extracted features, a soft-anchor relatedness head, margin ranking with
// learned projections, nearest-neighbor retrieval, and embedding-space
// arithmetic. Also a fine-tuning harness comparing pretrained against
// random initialization under an identical budget.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sentrep/model.hpp"
#include "sentrep/tensor.hpp"

namespace sentrep {

// Concatenation of the element-wise product and absolute difference of two
// equal-width vectors. Symmetric in its arguments; output width is 2 * dim.
std::vector<double> pair_features(const std::vector<double>& zx,
                                  const std::vector<double>& zy);

// Row-wise pair features for two (N, D) matrices; output is (N, 2D).
Tensor<double> pair_feature_matrix(const Tensor<double>& x,
                                   const Tensor<double>& y);

// ---------------------------------------------------------------------------
// Multinomial logistic regression probe.

struct ClassifierConfig {
  double learning_rate = 0.5;
  double l2 = 1e-4;
  size_t epochs = 300;
  double holdout_fraction = 0.2;
  uint64_t seed = 1;
};

struct LinearClassifier {
  size_t classes = 0;
  size_t dim = 0;
  std::vector<double> w;  // classes x (dim + 1); last column is the bias

  // Argmax class for one feature row; ties resolve to the lowest class id.
  int32_t predict(const double* x) const;
  std::vector<int32_t> predict_rows(const Tensor<double>& x) const;
};

struct ClassifierReport {
  LinearClassifier model;
  double train_accuracy = 0.0;
  double holdout_accuracy = 0.0;
  size_t train_rows = 0;
  size_t holdout_rows = 0;
};

// Full-batch gradient descent with an L2 penalty on the non-bias weights.
// Rows are split once into train/holdout by a seeded shuffle; both
// accuracies are reported. Labels must be dense class ids starting at 0
// with at least two distinct classes present.
ClassifierReport train_linear_classifier(const Tensor<double>& features,
                                         const std::vector<int32_t>& labels,
                                         const ClassifierConfig& cfg);

// ---------------------------------------------------------------------------
// Relatedness regression via a softmax over the five integer anchors 1..5.

// Target distribution for a gold score y in [1,5]: mass ceil(y)-y on
// floor(y) and y-floor(y) on ceil(y); one-hot at integer y.
std::array<double, 5> relatedness_target(double y);

// Expected anchor under relatedness_target(y), computed as
// floor(y) + (y - floor(y)). Both terms are exact for y in [1,5], so the
// result equals y bit for bit.
double target_expected_score(double y);

// Generic expected anchor of a length-5 distribution, sum over i * p_i.
double expected_score(const std::array<double, 5>& p);

struct RelatednessConfig {
  double learning_rate = 0.2;
  double l2 = 1e-6;
  size_t epochs = 500;
};

struct RelatednessHead {
  size_t dim = 0;
  std::vector<double> w;  // 5 x (dim + 1); last column is the bias

  std::array<double, 5> distribution(const double* x) const;
  double predict(const double* x) const;
};

struct RelatednessReport {
  RelatednessHead model;
  double pearson_r = 0.0;
  std::vector<double> predicted;
};

// Cross-entropy against the soft anchor targets, full-batch gradient
// descent. Scores outside [1,5] are rejected up front.
RelatednessReport train_relatedness_head(const Tensor<double>& features,
                                         const std::vector<double>& scores,
                                         const RelatednessConfig& cfg);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Margin ranking between caption vectors and fixed item vectors.

// Mean hinge over aligned score pairs: max(0, alpha - related + unrelated).
double ranking_loss(const std::vector<double>& related,
                    const std::vector<double>& unrelated, double alpha);

struct RankingConfig {
  size_t shared_dim = 64;
  double alpha = 0.1;
  double learning_rate = 1e-2;
  double init_range = 0.1;
  size_t steps = 300;
  uint64_t seed = 1;
};

struct RankingModel {
  size_t caption_dim = 0;
  size_t item_dim = 0;
  size_t shared_dim = 0;
  Tensor<double> cap_proj;   // (caption_dim, shared_dim)
  Tensor<double> item_proj;  // (item_dim, shared_dim)

  // Cosine similarity between the projected caption and item.
  double score(const double* cap, const double* item) const;

  // All-pairs scores, (queries, pool). Deterministic regardless of threads.
  Tensor<double> score_matrix(const Tensor<double>& captions,
                              const Tensor<double>& items,
                              int threads = 1) const;
};

struct RankingTrainReport {
  RankingModel model;
  double first_loss = 0.0;
  double final_loss = 0.0;
};

// Trains the two projections with the hinge loss over aligned rows; each
// step pairs every caption with one uniformly sampled non-matching item.
// Needs at least two rows so an unrelated item exists.
RankingTrainReport train_ranking(const Tensor<double>& captions,
                                 const Tensor<double>& items,
                                 const RankingConfig& cfg);

// ---------------------------------------------------------------------------
// Retrieval metrics.

struct RankReport {
  double recall_at_1 = 0.0;
  double recall_at_5 = 0.0;
  double recall_at_10 = 0.0;
  double median_rank = 0.0;
  std::vector<size_t> ranks;  // 1-based rank of the ground truth per query
};

// Exhaustive ranking from a (queries, pool) score matrix; higher scores
// rank earlier and ties are broken by pool index. truth[q] is the pool
// index of query q's single ground-truth item.
RankReport rank_eval(const Tensor<double>& scores,
                     const std::vector<size_t>& truth);

// Cosine similarity; rejects zero-norm inputs.
double cosine(const double* a, const double* b, size_t n);

// Top-k pool indices by cosine to the query, descending, ties by pool
// index. Returns min(top_k, pool rows) entries.
std::vector<size_t> cosine_nn(const std::vector<double>& query,
                              const Tensor<double>& pool, size_t top_k);

// ---------------------------------------------------------------------------
// Embedding arithmetic and fine-tuning (operate on float models).

// Decodes z(a) - z(b) + z(c) with the model's first decoder.
std::vector<int32_t> vector_arithmetic(const Model<float>& m,
                                       const std::vector<int32_t>& a,
                                       const std::vector<int32_t>& b,
                                       const std::vector<int32_t>& c,
                                       size_t max_len);

struct FinetuneConfig {
  double learning_rate = 1e-3;
  size_t steps = 0;  // full-batch optimizer steps
  uint64_t seed = 1;
};

struct FinetuneArm {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct FinetuneReport {
  FinetuneArm pretrained;
  FinetuneArm random;
  double gap = 0.0;  // pretrained test accuracy minus random test accuracy
};

// Fine-tunes encoder plus a zero-initialized softmax head end to end,
// once from the given checkpointed model and once from a fresh random
// initialization of the same architecture, with identical seed and budget.
FinetuneReport finetune_compare(const Model<float>& pretrained,
                                const std::vector<std::vector<int32_t>>& train_sents,
                                const std::vector<int32_t>& train_labels,
                                const std::vector<std::vector<int32_t>>& test_sents,
                                const std::vector<int32_t>& test_labels,
                                const FinetuneConfig& cfg);

// ---------------------------------------------------------------------------
// Feature dumps and metric reports.

// One row per feature vector: label, tab, space-separated values printed
// with enough digits to round-trip float exactly.
void write_feature_tsv(const std::string& path,
                       const std::vector<std::string>& labels,
                       const Tensor<float>& features);

struct FeatureFile {
  std::vector<std::string> labels;
  Tensor<double> features;
};

FeatureFile read_feature_tsv(const std::string& path);

// Plain key=value lines, one per entry, in the given order.
void write_metrics(const std::string& path,
                   const std::vector<std::pair<std::string, std::string>>& kv);

std::string format_double(double v);

}  // namespace sentrep
