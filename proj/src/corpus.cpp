#include "sentrep/corpus.hpp"

#include <algorithm>

#include "sentrep/rng.hpp"
#include "sentrep/util.hpp"

namespace sentrep {

namespace {

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Corpus Corpus::from_lines(const std::vector<std::string>& lines, const Vocab& vocab) {
  Corpus c;
  std::vector<std::vector<int32_t>> para;
  for (const std::string& line : lines) {
    if (is_blank(line)) {
      if (!para.empty()) c.paragraphs.push_back(std::move(para));
      para.clear();
      continue;
    }
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    para.push_back(vocab.encode_tokens(toks));
  }
  if (!para.empty()) c.paragraphs.push_back(std::move(para));
  return c;
}

Corpus Corpus::from_file(const std::string& path, const Vocab& vocab) {
  return from_lines(split_lines(read_text_file(path)), vocab);
}

size_t Corpus::sentence_count() const {
  size_t n = 0;
  for (const auto& p : paragraphs) n += p.size();
  return n;
}

const std::vector<int32_t>& Corpus::sentence(size_t flat_index) const {
  size_t i = flat_index;
  for (const auto& p : paragraphs) {
    if (i < p.size()) return p[i];
    i -= p.size();
  }
  throw ValueError("sentence index " + std::to_string(flat_index) +
                   " out of range for corpus with " +
                   std::to_string(sentence_count()) + " sentences");
}

SentenceBatch SentenceBatch::build(
    const std::vector<const std::vector<int32_t>*>& sents, size_t min_width) {
  if (sents.empty()) throw ValueError("cannot build an empty sentence batch");
  SentenceBatch b;
  b.rows = sents.size();
  b.lengths.reserve(b.rows);
  size_t longest = 0;
  for (const auto* s : sents) {
    if (s->empty()) throw ValueError("cannot batch an empty sentence");
    b.lengths.push_back(static_cast<int32_t>(s->size() + 1));
    longest = std::max(longest, s->size() + 1);
  }
  b.t_max = std::max(longest, min_width);
  b.tokens.assign(b.rows * b.t_max, Vocab::kPad);
  for (size_t i = 0; i < b.rows; ++i) {
    const auto& s = *sents[i];
    int32_t* row = b.tokens.data() + i * b.t_max;
    std::copy(s.begin(), s.end(), row);
    row[s.size()] = Vocab::kEos;
  }
  return b;
}

SentenceBatch SentenceBatch::build(const std::vector<std::vector<int32_t>>& sents,
                                   size_t min_width) {
  std::vector<const std::vector<int32_t>*> ptrs;
  ptrs.reserve(sents.size());
  for (const auto& s : sents) ptrs.push_back(&s);
  return build(ptrs, min_width);
}

void SentenceBatch::validate() const {
  if (rows == 0 || t_max == 0 || tokens.size() != rows * t_max ||
      lengths.size() != rows) {
    throw IntegrityError("sentence batch bookkeeping is inconsistent");
  }
  for (size_t i = 0; i < rows; ++i) {
    size_t len = static_cast<size_t>(lengths[i]);
    if (len < 2 || len > t_max) {
      throw IntegrityError("row " + std::to_string(i) + " has bad length " +
                           std::to_string(lengths[i]));
    }
    if (at(i, len - 1) != Vocab::kEos) {
      throw IntegrityError("row " + std::to_string(i) +
                           " does not end with <eos> at its stated length");
    }
    for (size_t t = len; t < t_max; ++t) {
      if (at(i, t) != Vocab::kPad) {
        throw IntegrityError("row " + std::to_string(i) +
                             " has a non-<pad> token after <eos>");
      }
    }
  }
}

std::vector<std::pair<SentenceBatch, SentenceBatch>> make_pair_batches(
    const Corpus& corpus, PairMode mode, size_t batch_size, uint64_t seed,
    uint64_t epoch, size_t min_width, BatchStats* stats) {
  if (batch_size == 0) throw ValueError("batch_size must be positive");
  std::vector<std::pair<const std::vector<int32_t>*, const std::vector<int32_t>*>> pairs;
  BatchStats local;
  for (const auto& para : corpus.paragraphs) {
    if (mode == PairMode::self) {
      for (const auto& s : para) pairs.emplace_back(&s, &s);
      continue;
    }
    if (para.size() < 2) {
      ++local.skipped_single;
      continue;
    }
    for (size_t i = 0; i + 1 < para.size(); ++i) {
      pairs.emplace_back(&para[i], &para[i + 1]);
    }
  }
  local.pairs = pairs.size();

  std::vector<size_t> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(seed, epoch));
  rng.shuffle(order);

  std::vector<std::pair<SentenceBatch, SentenceBatch>> out;
  for (size_t start = 0; start < order.size(); start += batch_size) {
    size_t end = std::min(order.size(), start + batch_size);
    std::vector<const std::vector<int32_t>*> src, tgt;
    src.reserve(end - start);
    tgt.reserve(end - start);
    for (size_t i = start; i < end; ++i) {
      src.push_back(pairs[order[i]].first);
      tgt.push_back(pairs[order[i]].second);
    }
    out.emplace_back(SentenceBatch::build(src, min_width),
                     SentenceBatch::build(tgt, min_width));
  }
  if (stats) *stats = local;
  return out;
}

std::vector<ParagraphBatch> make_paragraph_batches(
    const Corpus& corpus, size_t L, size_t batch_size, uint64_t seed,
    uint64_t epoch, size_t min_width, BatchStats* stats) {
  if (L == 0) throw ValueError("sentences per paragraph chunk must be positive");
  if (batch_size == 0) throw ValueError("batch_size must be positive");
  std::vector<std::vector<const std::vector<int32_t>*>> chunks;
  BatchStats local;
  for (const auto& para : corpus.paragraphs) {
    size_t full = para.size() / L;
    for (size_t c = 0; c < full; ++c) {
      std::vector<const std::vector<int32_t>*> chunk;
      chunk.reserve(L);
      for (size_t l = 0; l < L; ++l) chunk.push_back(&para[c * L + l]);
      chunks.push_back(std::move(chunk));
    }
    if (para.size() % L != 0) ++local.dropped_short;
  }
  local.chunks = chunks.size();

  std::vector<size_t> order(chunks.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(seed, epoch));
  rng.shuffle(order);

  std::vector<ParagraphBatch> out;
  for (size_t start = 0; start < order.size(); start += batch_size) {
    size_t end = std::min(order.size(), start + batch_size);
    ParagraphBatch pb;
    pb.rows = end - start;
    for (size_t l = 0; l < L; ++l) {
      std::vector<const std::vector<int32_t>*> member;
      member.reserve(pb.rows);
      for (size_t i = start; i < end; ++i) member.push_back(chunks[order[i]][l]);
      pb.members.push_back(SentenceBatch::build(member, min_width));
    }
    out.push_back(std::move(pb));
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace sentrep
