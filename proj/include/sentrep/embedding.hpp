#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentrep/linalg.hpp"
#include "sentrep/tensor.hpp"
#include "sentrep/text.hpp"
#include "sentrep/util.hpp"

namespace sentrep {

enum class EmbedMode { learned, fixed };

std::string embed_mode_name(EmbedMode m);
EmbedMode embed_mode_from_name(const std::string& name);

// Word vectors loaded from a text file: optional "count dim" header line,
// then one "token v1 .. vk" row per word.
struct ExternalVectors {
  size_t width = 0;
  std::vector<std::string> tokens;
  std::unordered_map<std::string, size_t> index;
  std::vector<double> data;  // tokens.size() x width, row-major

  static ExternalVectors parse(const std::string& text);
  static ExternalVectors load(const std::string& path);

  const double* row(size_t i) const { return data.data() + i * width; }
  const double* find(const std::string& token) const;
};

// x -> M x mapping external width kp into embedding width k, fit by ridge
// regression on (external, native) vector pairs.
struct LinearMap {
  size_t k = 0;
  size_t kp = 0;
  std::vector<double> m;  // k x kp, row-major
  double residual = 0;    // mean squared residual over the training pairs

  std::vector<double> apply(const double* u) const;
};

LinearMap fit_linear_map(const std::vector<std::vector<double>>& external,
                         const std::vector<std::vector<double>>& native,
                         double ridge_lambda = 1e-5);

struct ExpandStats {
  size_t mapped = 0;
  size_t copied = 0;
  size_t missing = 0;
  std::vector<std::string> missing_tokens;
};

// A single out-of-vocabulary token's embedding: mapped external vector when a
// map is given, the external vector itself otherwise (widths must then
// match). Tokens absent from the table fall back to the <unk> row.
std::vector<double> expand_token(const std::string& token,
                                 const ExternalVectors& ext,
                                 const LinearMap* map,
                                 const std::vector<double>& unk_vec,
                                 ExpandStats* stats = nullptr);

// Grows (vocab, table) in place with rows for every extra token not already
// present. Existing rows are untouched, so encodings of in-vocabulary
// sentences are unchanged.
template <class T>
void expand_vocab_table(Vocab& vocab, Tensor<T>& table,
                        const std::vector<std::string>& extra_tokens,
                        const ExternalVectors& ext, const LinearMap* map,
                        ExpandStats* stats = nullptr) {
  size_t k = table.cols();
  if (table.rows() != vocab.size()) {
    throw ShapeError("embedding table has " + std::to_string(table.rows()) +
                     " rows but the vocabulary has " +
                     std::to_string(vocab.size()) + " entries");
  }
  std::vector<double> unk_vec(k);
  for (size_t j = 0; j < k; ++j) {
    unk_vec[j] = static_cast<double>(table.at(Vocab::kUnk, j));
  }
  std::vector<std::vector<double>> new_rows;
  std::vector<std::string> new_tokens;
  for (const auto& tok : extra_tokens) {
    if (vocab.contains(tok)) continue;
    new_rows.push_back(expand_token(tok, ext, map, unk_vec, stats));
    new_tokens.push_back(tok);
  }
  Tensor<T> grown({vocab.size() + new_tokens.size(), k});
  std::copy(table.v.begin(), table.v.end(), grown.v.begin());
  std::string tsv = vocab.to_tsv();
  for (size_t i = 0; i < new_tokens.size(); ++i) {
    for (size_t j = 0; j < k; ++j) {
      grown.at(vocab.size() + i, j) = static_cast<T>(new_rows[i][j]);
    }
    tsv += new_tokens[i] + "\t" + std::to_string(vocab.size() + i) + "\n";
  }
  vocab = Vocab::from_tsv(tsv);
  table = std::move(grown);
}

}  // namespace sentrep
