#include <cmath>
#include <cstring>

#include "doctest.h"
#include "sentrep/gradcheck.hpp"
#include "sentrep/train.hpp"
#include "test_support.hpp"

using namespace sentrep;

namespace {

ModelDims tiny_dims(size_t vocab = 12) {
  ModelDims d;
  d.embed_k = 3;
  d.windows = {2, 3};
  d.maps_per_window = 4;
  d.hidden = 5;
  d.paragraph_hidden = 4;
  d.vocab = vocab;
  return d;
}

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Naive teacher-forced reference for one row of a batch.
template <class T>
double reference_row_nll(const Model<T>& m, size_t dec_idx,
                         const SentenceBatch& batch, size_t row,
                         const Tensor<T>& cond) {
  const DecoderParams<T>& dec = m.decoders[dec_idx];
  size_t H = m.dims.hidden;
  size_t k = m.dims.embed_k;
  size_t C = cond.cols();
  size_t V = m.dims.vocab;
  std::vector<double> h(H, 0), c(H, 0);
  double nll = 0;
  size_t len = static_cast<size_t>(batch.lengths[row]);
  for (size_t t = 0; t < len; ++t) {
    int32_t prev = t == 0 ? Vocab::kSos : batch.at(row, t - 1);
    std::vector<double> x(k + C);
    for (size_t j = 0; j < k; ++j) {
      x[j] = m.embedding.at(static_cast<size_t>(prev), j);
    }
    for (size_t j = 0; j < C; ++j) x[k + j] = cond.at(row, j);
    std::vector<double> gates(4 * H);
    for (size_t g = 0; g < 4 * H; ++g) {
      double acc = dec.cell.bias.v[g];
      for (size_t j = 0; j < x.size(); ++j) acc += x[j] * dec.cell.w_in.at(j, g);
      for (size_t j = 0; j < H; ++j) acc += h[j] * dec.cell.u_rec.at(j, g);
      gates[g] = acc;
    }
    std::vector<double> h2(H), c2(H);
    for (size_t j = 0; j < H; ++j) {
      double gi = sigmoid_ref(gates[j]);
      double gf = sigmoid_ref(gates[H + j]);
      double gg = std::tanh(gates[2 * H + j]);
      double go = sigmoid_ref(gates[3 * H + j]);
      c2[j] = gf * c[j] + gi * gg;
      h2[j] = go * std::tanh(c2[j]);
    }
    h = h2;
    c = c2;
    std::vector<double> logits(V);
    double mx = -1e300;
    for (size_t v = 0; v < V; ++v) {
      double acc = 0;
      for (size_t j = 0; j < H; ++j) acc += h[j] * dec.v_out.at(j, v);
      logits[v] = acc;
      mx = std::max(mx, acc);
    }
    double lse = 0;
    for (size_t v = 0; v < V; ++v) lse += std::exp(logits[v] - mx);
    lse = mx + std::log(lse);
    nll -= logits[static_cast<size_t>(batch.at(row, t))] - lse;
  }
  return nll;
}

template <class T>
std::vector<T> decode_rows(const Model<T>& m, size_t dec_idx,
                           const SentenceBatch& batch, const Tensor<T>& cond) {
  Tape<T> tp;
  ModelVars<T> mv = stage_model_frozen(tp, m);
  Var rows = decode_nll_rows(tp, mv.decoders.at(dec_idx), mv.embedding, batch,
                             tp.input(cond));
  const T* v = tp.data(rows);
  return std::vector<T>(v, v + batch.rows);
}

}  // namespace

TEST_CASE("teacher-forced NLL matches a naive reference") {
  Model<double> m = init_model<double>(Variant::autoencoder, tiny_dims(), 41,
                                       EmbedMode::learned, 0.3);
  SentenceBatch batch = SentenceBatch::build(
      std::vector<std::vector<int32_t>>{{5, 6, 7}, {8}}, 3);
  Rng rng(6);
  Tensor<double> cond({batch.rows, m.dims.feature_dim()});
  for (auto& x : cond.v) x = rng.uniform01() - 0.5;

  std::vector<double> rows = decode_rows(m, 0, batch, cond);
  for (size_t i = 0; i < batch.rows; ++i) {
    double want = reference_row_nll(m, 0, batch, i, cond);
    CHECK(rows[i] == doctest::Approx(want).epsilon(1e-10));
    CHECK(rows[i] > 0);
  }

  SUBCASE("sentence_log_prob is the negated row NLL") {
    std::vector<int32_t> content = {5, 6, 7};
    Tensor<double> one_cond({size_t{1}, m.dims.feature_dim()});
    for (size_t j = 0; j < one_cond.numel(); ++j) one_cond.v[j] = cond.at(0, j);
    double lp = sentence_log_prob(m, 0, content, one_cond);
    CHECK(lp == doctest::Approx(-rows[0]).epsilon(1e-12));
  }

  SUBCASE("widening the batch does not change the NLL") {
    SentenceBatch wide = SentenceBatch::build(
        std::vector<std::vector<int32_t>>{{5, 6, 7}, {8}}, 20);
    std::vector<double> wide_rows = decode_rows(m, 0, wide, cond);
    CHECK(std::memcmp(rows.data(), wide_rows.data(),
                      rows.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("sentence probability composes from stepwise distributions") {
  Model<float> m = init_model<float>(Variant::autoencoder, tiny_dims(9), 43,
                                     EmbedMode::learned, 0.3);
  Tensor<float> cond = encode_values(m, {{5, 6}});
  std::vector<int32_t> content = {7, 5, 8};

  double log_p = 0;
  std::vector<int32_t> prefix;
  for (int32_t w : content) {
    std::vector<float> d = next_token_dist(m, 0, prefix, cond);
    log_p += std::log(static_cast<double>(d[static_cast<size_t>(w)]));
    prefix.push_back(w);
  }
  std::vector<float> d_end = next_token_dist(m, 0, prefix, cond);
  log_p += std::log(static_cast<double>(d_end[Vocab::kEos]));

  double direct = sentence_log_prob(m, 0, content, cond);
  CHECK(direct == doctest::Approx(log_p).epsilon(1e-5));
}

TEST_CASE("sequence distribution sums to one over a depth-2 tree") {
  ModelDims d = tiny_dims(4);
  d.windows = {2};
  Model<float> m = init_model<float>(Variant::autoencoder, d, 47,
                                     EmbedMode::learned, 0.4);
  const std::vector<int32_t> alphabet = {0, 1, 3};  // every non-<eos> index

  auto total_mass = [&](const Tensor<float>& cond) {
    std::vector<float> d0 = next_token_dist(m, 0, {}, cond);
    double total = d0[Vocab::kEos];
    for (int32_t a : alphabet) {
      std::vector<float> d1 = next_token_dist(m, 0, {a}, cond);
      total += static_cast<double>(d0[a]) * d1[Vocab::kEos];
      for (int32_t b : alphabet) {
        std::vector<float> d2 = next_token_dist(m, 0, {a, b}, cond);
        double cont = 0;
        for (float p : d2) cont += p;  // not assumed normalized
        total += static_cast<double>(d0[a]) * d1[b] * cont;
      }
    }
    return total;
  };

  Tensor<float> z = encode_values(m, {{3, 1}});
  CHECK(total_mass(z) == doctest::Approx(1.0).epsilon(1e-5));
  Tensor<float> zeros({size_t{1}, m.dims.feature_dim()});
  CHECK(total_mass(zeros) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("greedy decoding is deterministic and breaks ties low") {
  Model<float> m = init_model<float>(Variant::autoencoder, tiny_dims(), 53,
                                     EmbedMode::learned, 0.3);
  Tensor<float> z = encode_values(m, {{5, 6, 7}});

  std::vector<int32_t> a = greedy_decode(m, 0, z, 12);
  std::vector<int32_t> b = greedy_decode(m, 0, z, 12);
  CHECK(a == b);
  CHECK(a.size() <= 12);
  CHECK(greedy_decode(m, 0, z, 0).empty());

  SUBCASE("all-equal logits emit index zero until the cap") {
    Model<float> flat = m;
    for (auto& x : flat.decoders[0].v_out.v) x = 0;
    std::vector<int32_t> out = greedy_decode(flat, 0, z, 5);
    CHECK(out == std::vector<int32_t>(5, 0));
  }

  SUBCASE("a dominant <eos> column stops generation immediately") {
    Model<float> eager = m;
    for (size_t j = 0; j < eager.dims.hidden; ++j) {
      eager.decoders[0].v_out.at(j, Vocab::kEos) = 50.0f;
    }
    CHECK(greedy_decode(eager, 0, z, 5).empty());
  }
}

TEST_CASE("composite loss is the sum of its standalone arms") {
  ModelDims d = tiny_dims();
  Model<float> comp = init_model<float>(Variant::composite, d, 59,
                                        EmbedMode::learned, 0.3);
  SentenceBatch src = SentenceBatch::build(
      std::vector<std::vector<int32_t>>{{5, 6, 7}, {8, 9}}, d.max_window());
  SentenceBatch tgt = SentenceBatch::build(
      std::vector<std::vector<int32_t>>{{6, 7}, {9, 10, 11}}, d.max_window());

  Model<float> ae = comp;
  ae.variant = Variant::autoencoder;
  ae.decoders = {comp.decoders[0]};
  Model<float> fp = comp;
  fp.variant = Variant::future_predictor;
  fp.decoders = {comp.decoders[1]};

  float whole = pair_loss_value(comp, src, tgt);
  float parts = pair_loss_value(ae, src, tgt) + pair_loss_value(fp, src, tgt);
  CHECK(whole == parts);
}

TEST_CASE("hierarchical loss factorizes over per-sentence conditionals") {
  ModelDims d = tiny_dims();
  Model<float> m = init_model<float>(Variant::hierarchical, d, 61,
                                     EmbedMode::learned, 0.3);
  Corpus c;
  c.paragraphs = {{{5, 6}, {7, 8, 9}, {10}, {6, 5}},
                  {{9, 8, 7}, {5}, {11, 10}, {8}}};
  auto batches = make_paragraph_batches(c, 4, 2, 3, 0, d.max_window());
  REQUIRE(batches.size() == 1);
  const ParagraphBatch& pb = batches[0];

  float joint = paragraph_loss_value(m, pb);
  std::vector<Tensor<float>> states = paragraph_states(m, pb);
  REQUIRE(states.size() == pb.members.size());
  float sum = 0;
  for (size_t l = 0; l < pb.members.size(); ++l) {
    sum += conditional_nll(m, 0, pb.members[l], states[l]);
  }
  CHECK(joint == sum);

  SUBCASE("paragraph batch against a pair-variant model is rejected") {
    Model<float> ae = init_model<float>(Variant::autoencoder, d, 1);
    Tape<float> tp;
    ModelVars<float> mv = stage_model_frozen(tp, ae);
    CHECK_THROWS_AS(build_paragraph_loss(tp, mv, ae, pb), ValueError);
  }
  SUBCASE("pair batch against a hierarchical model is rejected") {
    Tape<float> tp;
    ModelVars<float> mv = stage_model_frozen(tp, m);
    CHECK_THROWS_AS(build_pair_loss(tp, mv, m, pb.members[0], pb.members[0]),
                    ValueError);
  }
}

namespace {

template <class T>
void check_model_gradients(Model<T>& m, const std::function<Var(Tape<T>&, const ModelVars<T>&)>& build,
                           double tol) {
  auto loss_of = [&](bool backward) {
    Tape<T> tp;
    ModelVars<T> mv = backward ? stage_model(tp, m) : stage_model_frozen(tp, m);
    Var loss = build(tp, mv);
    double val = static_cast<double>(tp.scalar(loss));
    if (backward) tp.backward(loss);
    return val;
  };
  std::vector<std::pair<std::string, Tensor<double>*>> params;
  m.for_each_param([&](const std::string& name, Tensor<double>& t) {
    params.emplace_back(name, &t);
  });
  // eps = 1e-3: the whole-model loss is ~10 and some recurrent-matrix
  // coordinates have true derivatives near 1e-8, so smaller steps sit at the
  // FD round-off floor.
  auto res = finite_diff_check(
      params, [&] { return loss_of(false); },
      [&] {
        m.for_each_param([&](const std::string&, Tensor<double>& t) { t.zero_grad(); });
        loss_of(true);
      },
      1e-3, 60);
  INFO("worst ", res.worst_tensor, " rel err ", res.worst);
  CHECK(res.worst < tol);
}

}  // namespace

TEST_CASE("end-to-end gradients pass the finite-difference oracle") {
  SentenceBatch src = SentenceBatch::build(
      std::vector<std::vector<int32_t>>{{5, 6, 7}, {8, 6}}, 3);
  SentenceBatch tgt = SentenceBatch::build(
      std::vector<std::vector<int32_t>>{{6, 7}, {7, 8}}, 3);

  SUBCASE("autoencoder") {
    Model<double> m = init_model<double>(Variant::autoencoder, tiny_dims(9), 67,
                                         EmbedMode::learned, 0.3);
    check_model_gradients<double>(
        m, [&](Tape<double>& tp, const ModelVars<double>& mv) {
          return build_pair_loss(tp, mv, m, src, tgt);
        },
        1e-4);
  }
  SUBCASE("future predictor") {
    Model<double> m = init_model<double>(Variant::future_predictor, tiny_dims(9),
                                         71, EmbedMode::learned, 0.3);
    check_model_gradients<double>(
        m, [&](Tape<double>& tp, const ModelVars<double>& mv) {
          return build_pair_loss(tp, mv, m, src, tgt);
        },
        1e-4);
  }
  SUBCASE("composite") {
    Model<double> m = init_model<double>(Variant::composite, tiny_dims(9), 73,
                                         EmbedMode::learned, 0.3);
    check_model_gradients<double>(
        m, [&](Tape<double>& tp, const ModelVars<double>& mv) {
          return build_pair_loss(tp, mv, m, src, tgt);
        },
        1e-4);
  }
  SUBCASE("hierarchical") {
    Model<double> m = init_model<double>(Variant::hierarchical, tiny_dims(9), 79,
                                         EmbedMode::learned, 0.3);
    Corpus c;
    c.paragraphs = {{{5, 6}, {7}, {8, 6, 5}, {6}}};
    auto batches = make_paragraph_batches(c, 2, 2, 5, 0, 3);
    REQUIRE(batches.size() == 1);
    check_model_gradients<double>(
        m, [&](Tape<double>& tp, const ModelVars<double>& mv) {
          return build_paragraph_loss(tp, mv, m, batches[0]);
        },
        1e-4);
  }
}
