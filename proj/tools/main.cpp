// Command-line front end: trains sentence encoders, dumps features, and
// runs the retrieval and classification protocols over saved checkpoints.
// Exit codes: 0 success, 1 runtime failure, 2 usage or input validation.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "sentrep/checkpoint.hpp"
#include "sentrep/corpus.hpp"
#include "sentrep/decoder.hpp"
#include "sentrep/embedding.hpp"
#include "sentrep/encoder.hpp"
#include "sentrep/eval.hpp"
#include "sentrep/model.hpp"
#include "sentrep/text.hpp"
#include "sentrep/train.hpp"
#include "sentrep/util.hpp"

namespace {

using namespace sentrep;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int usage_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return kExitUsage;
}

bool file_readable(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return in.good();
}

// Canonical key=value rendering of a parsed command; feeding the same text
// back through --config reproduces it byte for byte.
struct Echo {
  std::string text;

  void add(const std::string& key, const std::string& value) {
    text += key;
    text += '=';
    text += value;
    text += '\n';
  }
  void add(const std::string& key, double value) { add(key, format_double(value)); }
  void add(const std::string& key, size_t value) { add(key, std::to_string(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
};

std::string join_sizes(const std::vector<size_t>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

Variant parse_variant(const std::string& name) {
  if (name == "autoencoder") return Variant::autoencoder;
  if (name == "future") return Variant::future_predictor;
  if (name == "composite") return Variant::composite;
  if (name == "hierarchical") return Variant::hierarchical;
  throw ValueError("unknown variant: " + name);
}

// Shared plumbing: every command carries its own name (so a config file can
// state it), a config file hook, and a --print-config dry run.
struct CommandBase {
  CLI::App app;
  std::string command;
  bool print_config = false;

  explicit CommandBase(const std::string& name, const std::string& blurb)
      : app(blurb, "sentrep " + name), command(name) {
    app.add_option("--command", command,
                   "Command name; config files may restate it")
        ->check(CLI::IsMember({name}));
    app.set_config("--config", "",
                   "Read defaults from a key=value file; flags override");
    app.add_flag("--print-config", print_config,
                 "Print the canonical configuration and exit");
  }
};

// Splits a file into lines and rejects blank ones, which have no sentence
// content to encode.
std::vector<std::string> read_sentence_lines(const std::string& path) {
  std::vector<std::string> lines = split_lines(read_text_file(path));
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string probe = lines[i];
    if (tokenize(probe).empty()) {
      throw ValueError(path + " line " + std::to_string(i + 1) +
                       " has no tokens");
    }
  }
  return lines;
}

std::vector<std::vector<int32_t>> encode_lines(
    const std::vector<std::string>& lines, const Vocab& vocab) {
  std::vector<std::vector<int32_t>> out;
  out.reserve(lines.size());
  for (const std::string& line : lines) {
    out.push_back(vocab.encode_tokens(tokenize(line)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// train

struct TrainCli : CommandBase {
  std::string variant = "autoencoder";
  std::string corpus;
  std::string out = "model.ckpt";
  std::string metrics;
  std::string embed_mode = "learned";
  std::string vectors;
  size_t vocab_size = 20000;
  size_t embed_k = 64;
  std::vector<size_t> windows = {3, 4, 5};
  size_t maps_per_window = 800;
  size_t hidden = 600;
  size_t paragraph_hidden = 600;
  TrainConfig tc;

  TrainCli() : CommandBase("train", "Train a sentence encoder-decoder model") {
    app.add_option("--variant", variant, "Model variant")
        ->check(CLI::IsMember({"autoencoder", "future", "composite",
                               "hierarchical"}));
    app.add_option("--corpus", corpus,
                   "Training text, one sentence per line, blank lines "
                   "separate paragraphs")
        ->required();
    app.add_option("--out", out, "Checkpoint output path");
    app.add_option("--metrics", metrics,
                   "Metrics log path (default: <out>.metrics.tsv)");
    app.add_option("--embed-mode", embed_mode,
                   "learned trains embeddings, fixed freezes them to "
                   "--vectors")
        ->check(CLI::IsMember({"learned", "fixed"}));
    app.add_option("--vectors", vectors,
                   "External word vector file for --embed-mode fixed");
    app.add_option("--vocab-size", vocab_size, "Vocabulary cap");
    app.add_option("--embed-k", embed_k, "Word embedding width");
    app.add_option("--windows", windows, "Convolution window sizes");
    app.add_option("--maps-per-window", maps_per_window,
                   "Feature maps per window size");
    app.add_option("--hidden", hidden, "Decoder LSTM width");
    app.add_option("--paragraph-hidden", paragraph_hidden,
                   "Paragraph LSTM width (hierarchical)");
    app.add_option("--learning-rate", tc.learning_rate, "Adam learning rate");
    app.add_option("--adam-beta1", tc.adam_beta1, "Adam beta1");
    app.add_option("--adam-beta2", tc.adam_beta2, "Adam beta2");
    app.add_option("--adam-eps", tc.adam_eps, "Adam epsilon");
    app.add_option("--clip-norm", tc.clip_norm, "Global gradient norm cap");
    app.add_option("--batch-size", tc.batch_size, "Sentence pairs per step");
    app.add_option("--sentences-per-paragraph", tc.sentences_per_paragraph,
                   "Chunk length for the hierarchical variant");
    app.add_option("--dropout", tc.dropout, "Dropout rate on the encoding");
    app.add_option("--init-range", tc.init_range,
                   "Uniform init half-width for non-recurrent weights");
    app.add_option("--forget-bias", tc.forget_bias, "LSTM forget gate bias");
    app.add_option("--seed", tc.seed, "Random seed");
    app.add_option("--steps", tc.max_steps, "Optimizer step budget");
  }

  std::string echo() const {
    Echo e;
    e.add("command", command);
    e.add("variant", variant);
    e.add("corpus", corpus);
    e.add("out", out);
    e.add("metrics", metrics.empty() ? out + ".metrics.tsv" : metrics);
    e.add("embed-mode", embed_mode);
    e.add("vectors", vectors);
    e.add("vocab-size", vocab_size);
    e.add("embed-k", embed_k);
    e.add("windows", join_sizes(windows));
    e.add("maps-per-window", maps_per_window);
    e.add("hidden", hidden);
    e.add("paragraph-hidden", paragraph_hidden);
    e.add("learning-rate", tc.learning_rate);
    e.add("adam-beta1", tc.adam_beta1);
    e.add("adam-beta2", tc.adam_beta2);
    e.add("adam-eps", tc.adam_eps);
    e.add("clip-norm", tc.clip_norm);
    e.add("batch-size", tc.batch_size);
    e.add("sentences-per-paragraph", tc.sentences_per_paragraph);
    e.add("dropout", tc.dropout);
    e.add("init-range", tc.init_range);
    e.add("forget-bias", tc.forget_bias);
    e.add("seed", tc.seed);
    e.add("steps", tc.max_steps);
    return e.text;
  }

  int run() {
    if (!file_readable(corpus)) return usage_error("corpus not readable: " + corpus);
    if (embed_mode == "fixed" && vectors.empty()) {
      return usage_error("--embed-mode fixed requires --vectors");
    }
    if (!vectors.empty() && !file_readable(vectors)) {
      return usage_error("vector file not readable: " + vectors);
    }

    std::vector<std::string> lines = split_lines(read_text_file(corpus));
    std::vector<std::vector<std::string>> tokenized;
    for (const std::string& line : lines) {
      std::vector<std::string> toks = tokenize(line);
      if (!toks.empty()) tokenized.push_back(std::move(toks));
    }
    Vocab vocab = Vocab::build(tokenized, vocab_size);
    Corpus text = Corpus::from_lines(lines, vocab);

    ModelDims dims;
    dims.embed_k = embed_k;
    dims.windows = windows;
    dims.maps_per_window = maps_per_window;
    dims.hidden = hidden;
    dims.paragraph_hidden = paragraph_hidden;
    dims.vocab = vocab.size();
    dims.validate();
    tc.validate();

    EmbedMode mode = embed_mode_from_name(embed_mode);
    Model<float> model =
        init_model<float>(parse_variant(variant), dims, tc.seed, mode,
                          tc.init_range, tc.forget_bias);
    size_t missing = 0;
    if (!vectors.empty()) {
      ExternalVectors ext = ExternalVectors::load(vectors);
      if (ext.width != embed_k) {
        return usage_error("vector width " + std::to_string(ext.width) +
                           " does not match --embed-k " +
                           std::to_string(embed_k));
      }
      for (size_t i = Vocab::kReserved; i < vocab.size(); ++i) {
        const double* row = ext.find(vocab.decode(static_cast<int32_t>(i)));
        if (!row) {
          ++missing;
          continue;
        }
        for (size_t j = 0; j < embed_k; ++j) {
          model.embedding.v[i * embed_k + j] = static_cast<float>(row[j]);
        }
      }
    }

    TrainMetrics metrics_log = train(model, text, tc);
    write_text_file(metrics.empty() ? out + ".metrics.tsv" : metrics,
                    metrics_log.to_tsv());
    save_checkpoint(model, tc, vocab, out);

    std::cout << "checkpoint=" << out << "\n";
    std::cout << "vocab=" << vocab.size() << "\n";
    std::cout << "steps=" << metrics_log.step.size() << "\n";
    if (!vectors.empty()) std::cout << "missing-vectors=" << missing << "\n";
    if (!metrics_log.loss.empty()) {
      std::cout << "final-loss=" << format_double(metrics_log.loss.back())
                << "\n";
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// encode

struct EncodeCli : CommandBase {
  std::string checkpoint;
  std::string input;
  std::string out;
  std::string labels_path;
  int threads = 1;

  EncodeCli() : CommandBase("encode", "Encode sentences into feature rows") {
    app.add_option("--checkpoint", checkpoint, "Trained model checkpoint")
        ->required();
    app.add_option("--input", input, "Sentences to encode, one per line")
        ->required();
    app.add_option("--out", out, "Feature dump path (label<TAB>values)")
        ->required();
    app.add_option("--labels", labels_path,
                   "Optional label file, one per input line; defaults to "
                   "the 0-based line index");
    app.add_option("--threads", threads, "Worker threads")
        ->check(CLI::PositiveNumber);
  }

  std::string echo() const {
    Echo e;
    e.add("command", command);
    e.add("checkpoint", checkpoint);
    e.add("input", input);
    e.add("out", out);
    e.add("labels", labels_path);
    e.add("threads", threads);
    return e.text;
  }

  int run() {
    if (!file_readable(checkpoint)) {
      return usage_error("checkpoint not readable: " + checkpoint);
    }
    if (!file_readable(input)) return usage_error("input not readable: " + input);

    std::vector<std::string> lines = read_sentence_lines(input);
    std::vector<std::string> labels;
    if (!labels_path.empty()) {
      if (!file_readable(labels_path)) {
        return usage_error("label file not readable: " + labels_path);
      }
      labels = split_lines(read_text_file(labels_path));
      if (labels.size() != lines.size()) {
        return usage_error(std::to_string(labels.size()) + " labels for " +
                           std::to_string(lines.size()) + " input lines");
      }
    } else {
      for (size_t i = 0; i < lines.size(); ++i) labels.push_back(std::to_string(i));
    }

    Checkpoint ck = load_checkpoint(checkpoint);
    if (lines.empty()) {
      write_feature_tsv(out, {}, Tensor<float>());
      std::cout << "rows=0\n";
      return kExitOk;
    }
    Tensor<float> z =
        encode_values(ck.model, encode_lines(lines, ck.vocab), threads);
    write_feature_tsv(out, labels, z);
    std::cout << "rows=" << z.rows() << "\n";
    std::cout << "width=" << z.cols() << "\n";
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// nn

struct NnCli : CommandBase {
  std::string checkpoint;
  std::string pool;
  std::string query;
  size_t top_k = 5;
  int threads = 1;

  NnCli() : CommandBase("nn", "Nearest sentences by cosine similarity") {
    app.add_option("--checkpoint", checkpoint, "Trained model checkpoint")
        ->required();
    app.add_option("--pool", pool, "Candidate sentences, one per line")
        ->required();
    app.add_option("--query", query, "Query sentence")->required();
    app.add_option("--top-k", top_k, "Neighbors to report")
        ->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "Worker threads")
        ->check(CLI::PositiveNumber);
  }

  std::string echo() const {
    Echo e;
    e.add("command", command);
    e.add("checkpoint", checkpoint);
    e.add("pool", pool);
    e.add("query", query);
    e.add("top-k", top_k);
    e.add("threads", threads);
    return e.text;
  }

  int run() {
    if (!file_readable(checkpoint)) {
      return usage_error("checkpoint not readable: " + checkpoint);
    }
    if (!file_readable(pool)) return usage_error("pool not readable: " + pool);
    if (tokenize(query).empty()) return usage_error("query has no tokens");

    Checkpoint ck = load_checkpoint(checkpoint);
    std::vector<std::string> lines = read_sentence_lines(pool);
    if (lines.empty()) return usage_error("pool is empty: " + pool);
    Tensor<double> zp =
        encode_values(ck.model, encode_lines(lines, ck.vocab), threads)
            .cast<double>();
    Tensor<float> zq =
        encode_values(ck.model, {ck.vocab.encode_tokens(tokenize(query))});
    std::vector<double> q(zq.v.begin(), zq.v.end());

    std::vector<size_t> nn = cosine_nn(q, zp, top_k);
    for (size_t r = 0; r < nn.size(); ++r) {
      double sim = cosine(q.data(), zp.v.data() + nn[r] * zp.cols(), zp.cols());
      std::cout << (r + 1) << "\t" << nn[r] << "\t" << format_double(sim)
                << "\t" << lines[nn[r]] << "\n";
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// arith

struct ArithCli : CommandBase {
  std::string checkpoint;
  std::string a, b, c;
  size_t max_len = 20;

  ArithCli() : CommandBase("arith", "Decode z(a) - z(b) + z(c)") {
    app.add_option("--checkpoint", checkpoint, "Trained model checkpoint")
        ->required();
    app.add_option("--a", a, "Sentence a")->required();
    app.add_option("--b", b, "Sentence b")->required();
    app.add_option("--c", c, "Sentence c")->required();
    app.add_option("--max-len", max_len, "Decoding length cap")
        ->check(CLI::PositiveNumber);
  }

  std::string echo() const {
    Echo e;
    e.add("command", command);
    e.add("checkpoint", checkpoint);
    e.add("a", a);
    e.add("b", b);
    e.add("c", c);
    e.add("max-len", max_len);
    return e.text;
  }

  int run() {
    if (!file_readable(checkpoint)) {
      return usage_error("checkpoint not readable: " + checkpoint);
    }
    for (const auto& [name, s] :
         {std::pair<const char*, const std::string&>{"--a", a},
          {"--b", b},
          {"--c", c}}) {
      if (tokenize(s).empty()) {
        return usage_error(std::string(name) + " has no tokens");
      }
    }
    Checkpoint ck = load_checkpoint(checkpoint);
    std::vector<int32_t> decoded = vector_arithmetic(
        ck.model, ck.vocab.encode_tokens(tokenize(a)),
        ck.vocab.encode_tokens(tokenize(b)),
        ck.vocab.encode_tokens(tokenize(c)), max_len);
    std::vector<std::string> words = ck.vocab.decode_indices(decoded);
    for (size_t i = 0; i < words.size(); ++i) {
      if (i) std::cout << ' ';
      std::cout << words[i];
    }
    std::cout << "\n";
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// eval-cls / eval-pair shared label handling

int parse_class_labels(const std::vector<std::string>& raw,
                       std::vector<int32_t>& out) {
  out.clear();
  for (size_t i = 0; i < raw.size(); ++i) {
    try {
      size_t pos = 0;
      int v = std::stoi(raw[i], &pos);
      if (pos != raw[i].size() || v < 0) throw std::invalid_argument(raw[i]);
      out.push_back(v);
    } catch (const std::exception&) {
      return usage_error("label '" + raw[i] + "' at row " +
                         std::to_string(i + 1) +
                         " is not a nonnegative integer class id");
    }
  }
  return kExitOk;
}

int parse_score_labels(const std::vector<std::string>& raw,
                       std::vector<double>& out) {
  out.clear();
  for (size_t i = 0; i < raw.size(); ++i) {
    try {
      size_t pos = 0;
      double v = std::stod(raw[i], &pos);
      if (pos != raw[i].size() || v < 1.0 || v > 5.0) {
        throw std::invalid_argument(raw[i]);
      }
      out.push_back(v);
    } catch (const std::exception&) {
      return usage_error("label '" + raw[i] + "' at row " +
                         std::to_string(i + 1) +
                         " is not a relatedness score in [1, 5]");
    }
  }
  return kExitOk;
}

void print_classifier_report(const ClassifierReport& rep) {
  std::cout << "train-accuracy=" << format_double(rep.train_accuracy) << "\n";
  std::cout << "holdout-accuracy=" << format_double(rep.holdout_accuracy)
            << "\n";
  std::cout << "train-rows=" << rep.train_rows << "\n";
  std::cout << "holdout-rows=" << rep.holdout_rows << "\n";
}

struct EvalClsCli : CommandBase {
  std::string features;
  ClassifierConfig cc;

  EvalClsCli()
      : CommandBase("eval-cls",
                    "Logistic-regression probe on dumped features") {
    app.add_option("--features", features,
                   "Feature dump; the label column holds class ids")
        ->required();
    app.add_option("--learning-rate", cc.learning_rate, "Descent step size");
    app.add_option("--l2", cc.l2, "L2 penalty");
    app.add_option("--epochs", cc.epochs, "Full-batch epochs");
    app.add_option("--holdout-fraction", cc.holdout_fraction,
                   "Held-out fraction of rows");
    app.add_option("--seed", cc.seed, "Split seed");
  }

  std::string echo() const {
    Echo e;
    e.add("command", command);
    e.add("features", features);
    e.add("learning-rate", cc.learning_rate);
    e.add("l2", cc.l2);
    e.add("epochs", cc.epochs);
    e.add("holdout-fraction", cc.holdout_fraction);
    e.add("seed", cc.seed);
    return e.text;
  }

  int run() {
    if (!file_readable(features)) {
      return usage_error("feature file not readable: " + features);
    }
    FeatureFile ff = read_feature_tsv(features);
    if (ff.labels.empty()) return usage_error("feature file is empty: " + features);
    std::vector<int32_t> labels;
    int rc = parse_class_labels(ff.labels, labels);
    if (rc != kExitOk) return rc;
    print_classifier_report(train_linear_classifier(ff.features, labels, cc));
    return kExitOk;
  }
};

struct EvalPairCli : CommandBase {
  std::string features_a;
  std::string features_b;
  std::string mode = "classify";
  ClassifierConfig cc;

  EvalPairCli()
      : CommandBase("eval-pair",
                    "Pair-feature probe: paraphrase classification or "
                    "relatedness regression") {
    app.add_option("--features-a", features_a,
                   "First sentence features; its label column carries the "
                   "pair's class id or relatedness score")
        ->required();
    app.add_option("--features-b", features_b,
                   "Second sentence features, row-aligned with --features-a")
        ->required();
    app.add_option("--mode", mode, "classify or relatedness")
        ->check(CLI::IsMember({"classify", "relatedness"}));
    app.add_option("--learning-rate", cc.learning_rate, "Descent step size");
    app.add_option("--l2", cc.l2, "L2 penalty");
    app.add_option("--epochs", cc.epochs, "Full-batch epochs");
    app.add_option("--holdout-fraction", cc.holdout_fraction,
                   "Held-out fraction (classify mode)");
    app.add_option("--seed", cc.seed, "Split seed");
  }

  std::string echo() const {
    Echo e;
    e.add("command", command);
    e.add("features-a", features_a);
    e.add("features-b", features_b);
    e.add("mode", mode);
    e.add("learning-rate", cc.learning_rate);
    e.add("l2", cc.l2);
    e.add("epochs", cc.epochs);
    e.add("holdout-fraction", cc.holdout_fraction);
    e.add("seed", cc.seed);
    return e.text;
  }

  int run() {
    for (const std::string& p : {features_a, features_b}) {
      if (!file_readable(p)) return usage_error("feature file not readable: " + p);
    }
    FeatureFile fa = read_feature_tsv(features_a);
    FeatureFile fb = read_feature_tsv(features_b);
    if (fa.labels.empty() || fb.labels.empty()) {
      return usage_error("feature files must be non-empty");
    }
    if (fa.labels.size() != fb.labels.size()) {
      return usage_error("row count mismatch: " +
                         std::to_string(fa.labels.size()) + " vs " +
                         std::to_string(fb.labels.size()));
    }
    if (fa.features.cols() != fb.features.cols()) {
      return usage_error("feature width mismatch: " +
                         std::to_string(fa.features.cols()) + " vs " +
                         std::to_string(fb.features.cols()));
    }
    Tensor<double> pf = pair_feature_matrix(fa.features, fb.features);
    if (mode == "classify") {
      std::vector<int32_t> labels;
      int rc = parse_class_labels(fa.labels, labels);
      if (rc != kExitOk) return rc;
      print_classifier_report(train_linear_classifier(pf, labels, cc));
    } else {
      std::vector<double> scores;
      int rc = parse_score_labels(fa.labels, scores);
      if (rc != kExitOk) return rc;
      RelatednessConfig rc2;
      rc2.learning_rate = cc.learning_rate;
      rc2.l2 = cc.l2;
      rc2.epochs = cc.epochs;
      RelatednessReport rep = train_relatedness_head(pf, scores, rc2);
      std::cout << "pearson-r=" << format_double(rep.pearson_r) << "\n";
      std::cout << "rows=" << scores.size() << "\n";
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// eval-rank

struct EvalRankCli : CommandBase {
  std::string captions;
  std::string items;
  RankingConfig rc;
  double holdout_fraction = 0.0;
  int threads = 1;

  EvalRankCli()
      : CommandBase("eval-rank",
                    "Margin-ranking projections plus recall at K") {
    app.add_option("--captions", captions, "Caption feature dump")->required();
    app.add_option("--items", items, "Item feature dump, row-aligned")
        ->required();
    app.add_option("--shared-dim", rc.shared_dim, "Projection width");
    app.add_option("--alpha", rc.alpha, "Hinge margin");
    app.add_option("--learning-rate", rc.learning_rate, "Adam learning rate");
    app.add_option("--init-range", rc.init_range, "Projection init half-width");
    app.add_option("--steps", rc.steps, "Training steps");
    app.add_option("--seed", rc.seed, "Seed for init, sampling, and split");
    app.add_option("--holdout-fraction", holdout_fraction,
                   "Fraction of pairs held out for ranking");
    app.add_option("--threads", threads, "Worker threads")
        ->check(CLI::PositiveNumber);
  }

  std::string echo() const {
    Echo e;
    e.add("command", command);
    e.add("captions", captions);
    e.add("items", items);
    e.add("shared-dim", rc.shared_dim);
    e.add("alpha", rc.alpha);
    e.add("learning-rate", rc.learning_rate);
    e.add("init-range", rc.init_range);
    e.add("steps", rc.steps);
    e.add("seed", rc.seed);
    e.add("holdout-fraction", holdout_fraction);
    e.add("threads", threads);
    return e.text;
  }

  int run() {
    for (const std::string& p : {captions, items}) {
      if (!file_readable(p)) return usage_error("feature file not readable: " + p);
    }
    FeatureFile fc = read_feature_tsv(captions);
    FeatureFile fi = read_feature_tsv(items);
    size_t n = fc.labels.size();
    if (n != fi.labels.size()) {
      return usage_error("row count mismatch: " + std::to_string(n) + " vs " +
                         std::to_string(fi.labels.size()));
    }
    if (n < 2) return usage_error("need at least 2 aligned pairs");
    if (holdout_fraction < 0 || holdout_fraction >= 1) {
      return usage_error("--holdout-fraction must be in [0, 1)");
    }

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng split_rng(mix_seed(rc.seed, 0x73706c6974ull));
    split_rng.shuffle(order);
    size_t n_hold = static_cast<size_t>(holdout_fraction * n);
    if (n - n_hold < 2) return usage_error("fewer than 2 training pairs left");

    size_t dc = fc.features.cols(), di = fi.features.cols();
    auto take = [&](const Tensor<double>& src, size_t width, size_t begin,
                    size_t count) {
      Tensor<double> out({count, width});
      for (size_t r = 0; r < count; ++r) {
        size_t i = order[begin + r];
        std::copy(src.v.data() + i * width, src.v.data() + (i + 1) * width,
                  out.v.data() + r * width);
      }
      return out;
    };
    Tensor<double> train_caps = take(fc.features, dc, 0, n - n_hold);
    Tensor<double> train_items = take(fi.features, di, 0, n - n_hold);
    RankingTrainReport trained = train_ranking(train_caps, train_items, rc);

    Tensor<double> eval_caps =
        n_hold ? take(fc.features, dc, n - n_hold, n_hold) : train_caps;
    Tensor<double> eval_items =
        n_hold ? take(fi.features, di, n - n_hold, n_hold) : train_items;
    Tensor<double> scores =
        trained.model.score_matrix(eval_caps, eval_items, threads);
    std::vector<size_t> truth(eval_caps.rows());
    for (size_t i = 0; i < truth.size(); ++i) truth[i] = i;
    RankReport rep = rank_eval(scores, truth);

    std::cout << "first-loss=" << format_double(trained.first_loss) << "\n";
    std::cout << "final-loss=" << format_double(trained.final_loss) << "\n";
    std::cout << "r-at-1=" << format_double(rep.recall_at_1) << "\n";
    std::cout << "r-at-5=" << format_double(rep.recall_at_5) << "\n";
    std::cout << "r-at-10=" << format_double(rep.recall_at_10) << "\n";
    std::cout << "median-rank=" << format_double(rep.median_rank) << "\n";
    std::cout << "queries=" << truth.size() << "\n";
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------

const char* kTopUsage =
    "usage: sentrep <command> [flags]\n"
    "commands:\n"
    "  train      train a sentence encoder-decoder model\n"
    "  encode     dump sentence features from a checkpoint\n"
    "  nn         nearest sentences by cosine similarity\n"
    "  arith      decode z(a) - z(b) + z(c)\n"
    "  eval-cls   logistic-regression probe on features\n"
    "  eval-pair  pair-feature classification or relatedness\n"
    "  eval-rank  margin-ranking recall at K\n"
    "run 'sentrep <command> --help' for flags.\n";

template <class Cmd>
int drive(int argc, char** argv) {
  Cmd cmd;
  try {
    cmd.app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cmd.app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cmd.app.exit(e);
  } catch (const CLI::ParseError& e) {
    cmd.app.exit(e);
    return kExitUsage;
  }
  if (cmd.print_config) {
    std::cout << cmd.echo();
    return kExitOk;
  }
  return cmd.run();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << kTopUsage;
    return kExitUsage;
  }
  std::string command = argv[1];
  if (command == "--help" || command == "-h" || command == "help") {
    std::cout << kTopUsage;
    return kExitOk;
  }
  try {
    if (command == "train") return drive<TrainCli>(argc - 1, argv + 1);
    if (command == "encode") return drive<EncodeCli>(argc - 1, argv + 1);
    if (command == "nn") return drive<NnCli>(argc - 1, argv + 1);
    if (command == "arith") return drive<ArithCli>(argc - 1, argv + 1);
    if (command == "eval-cls") return drive<EvalClsCli>(argc - 1, argv + 1);
    if (command == "eval-pair") return drive<EvalPairCli>(argc - 1, argv + 1);
    if (command == "eval-rank") return drive<EvalRankCli>(argc - 1, argv + 1);
    std::cerr << "error: unknown command '" << command << "'\n" << kTopUsage;
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
