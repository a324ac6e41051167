#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sentrep/text.hpp"

namespace sentrep {

// Token-id corpus grouped into paragraphs. One sentence per input line, blank
// lines separate paragraphs. Sentences hold content ids only (no <eos>).
struct Corpus {
  std::vector<std::vector<std::vector<int32_t>>> paragraphs;

  static Corpus from_lines(const std::vector<std::string>& lines, const Vocab& vocab);
  static Corpus from_file(const std::string& path, const Vocab& vocab);

  size_t sentence_count() const;
  const std::vector<int32_t>& sentence(size_t flat_index) const;
};

// Padded id matrix for a batch of sentences. Row layout per sentence:
// content tokens, then <eos>, then <pad> out to t_max. lengths[i] counts
// content plus the <eos>. t_max is at least min_width so every row offers the
// widest convolution window at least one position.
struct SentenceBatch {
  size_t rows = 0;
  size_t t_max = 0;
  std::vector<int32_t> tokens;   // rows * t_max, row-major
  std::vector<int32_t> lengths;  // per row, includes <eos>

  static SentenceBatch build(const std::vector<const std::vector<int32_t>*>& sents,
                             size_t min_width);
  static SentenceBatch build(const std::vector<std::vector<int32_t>>& sents,
                             size_t min_width);

  int32_t at(size_t row, size_t t) const { return tokens[row * t_max + t]; }
  void validate() const;
};

// L parallel sentence batches: member l holds sentence l of every chunk row.
struct ParagraphBatch {
  size_t rows = 0;
  std::vector<SentenceBatch> members;
};

struct BatchStats {
  size_t pairs = 0;
  size_t skipped_single = 0;   // one-sentence paragraphs skipped in next mode
  size_t chunks = 0;
  size_t dropped_short = 0;    // paragraph tails shorter than L
};

enum class PairMode { self, next };

// Shuffled (source, target) sentence batches. self pairs every sentence with
// itself; next pairs consecutive sentences within a paragraph. The shuffle is
// a deterministic function of (seed, epoch); a short final batch is kept.
std::vector<std::pair<SentenceBatch, SentenceBatch>> make_pair_batches(
    const Corpus& corpus, PairMode mode, size_t batch_size, uint64_t seed,
    uint64_t epoch, size_t min_width, BatchStats* stats = nullptr);

// Shuffled batches of length-L chunks of consecutive sentences. Each
// paragraph is cut into floor(n/L) chunks; the remainder is dropped.
std::vector<ParagraphBatch> make_paragraph_batches(
    const Corpus& corpus, size_t L, size_t batch_size, uint64_t seed,
    uint64_t epoch, size_t min_width, BatchStats* stats = nullptr);

}  // namespace sentrep
