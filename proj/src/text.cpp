#include "sentrep/text.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "sentrep/util.hpp"

namespace sentrep {

namespace {

bool is_word_byte(unsigned char c) {
  if (c >= 0x80) return true;
  return std::isalnum(c) != 0;
}

const char* kReservedNames[Vocab::kReserved] = {"<pad>", "<sos>", "<eos>",
                                                "<unk>", "<sop>"};

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  for (char raw : text) {
    unsigned char c = static_cast<unsigned char>(raw);
    if (c < 0x80 && std::isupper(c)) c = static_cast<unsigned char>(std::tolower(c));
    if (is_word_byte(c)) {
      word.push_back(static_cast<char>(c));
      continue;
    }
    if (!word.empty()) {
      out.push_back(word);
      word.clear();
    }
    if (c < 0x80 && std::isspace(c)) continue;
    out.push_back(std::string(1, static_cast<char>(c)));
  }
  if (!word.empty()) out.push_back(word);
  return out;
}

Vocab::Vocab() {
  for (const char* name : kReservedNames) add(name);
}

void Vocab::add(const std::string& token) {
  index_.emplace(token, static_cast<int32_t>(tokens_.size()));
  tokens_.push_back(token);
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& sentences,
                   size_t max_size) {
  if (max_size <= kReserved) {
    throw ValueError("vocab max_size must exceed the " +
                     std::to_string(kReserved) + " reserved entries");
  }
  std::unordered_map<std::string, uint64_t> counts;
  for (const auto& sent : sentences) {
    for (const auto& tok : sent) ++counts[tok];
  }
  if (counts.empty()) throw ValueError("cannot build a vocabulary from an empty corpus");

  std::vector<std::pair<std::string, uint64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab v;
  size_t keep = std::min(ranked.size(), max_size - kReserved);
  for (size_t i = 0; i < keep; ++i) v.add(ranked[i].first);
  return v;
}

int32_t Vocab::encode(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::decode(int32_t index) const {
  if (index < 0 || static_cast<size_t>(index) >= tokens_.size()) {
    throw ValueError("token index " + std::to_string(index) +
                     " out of range for vocabulary of size " +
                     std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<size_t>(index)];
}

std::vector<int32_t> Vocab::encode_tokens(const std::vector<std::string>& ts) const {
  std::vector<int32_t> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(encode(t));
  return out;
}

std::vector<std::string> Vocab::decode_indices(const std::vector<int32_t>& is) const {
  std::vector<std::string> out;
  out.reserve(is.size());
  for (int32_t i : is) out.push_back(decode(i));
  return out;
}

bool Vocab::contains(const std::string& token) const {
  return index_.count(token) != 0;
}

std::string Vocab::to_tsv() const {
  std::string out;
  for (size_t i = 0; i < tokens_.size(); ++i) {
    out += tokens_[i];
    out += '\t';
    out += std::to_string(i);
    out += '\n';
  }
  return out;
}

Vocab Vocab::from_tsv(const std::string& text) {
  Vocab v;
  v.tokens_.clear();
  v.index_.clear();
  size_t line_no = 0;
  for (const std::string& line : split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw IntegrityError("vocab line " + std::to_string(line_no) +
                           " is not token<TAB>index");
    }
    std::string tok = line.substr(0, tab);
    std::string idx_text = line.substr(tab + 1);
    size_t used = 0;
    long idx = -1;
    try {
      idx = std::stol(idx_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != idx_text.size() || idx < 0) {
      throw IntegrityError("vocab line " + std::to_string(line_no) +
                           " has a bad index field '" + idx_text + "'");
    }
    if (static_cast<size_t>(idx) != v.tokens_.size()) {
      throw IntegrityError("vocab indices must be dense and ascending; line " +
                           std::to_string(line_no) + " has index " +
                           std::to_string(idx) + ", expected " +
                           std::to_string(v.tokens_.size()));
    }
    if (v.index_.count(tok)) {
      throw IntegrityError("duplicate vocab token '" + tok + "'");
    }
    v.add(tok);
  }
  if (v.tokens_.size() < kReserved) {
    throw IntegrityError("vocab file is missing the reserved entries");
  }
  for (size_t i = 0; i < kReserved; ++i) {
    if (v.tokens_[i] != kReservedNames[i]) {
      throw IntegrityError("vocab index " + std::to_string(i) + " must be " +
                           kReservedNames[i] + ", found '" + v.tokens_[i] + "'");
    }
  }
  return v;
}

void Vocab::save(const std::string& path) const { write_text_file(path, to_tsv()); }

Vocab Vocab::load(const std::string& path) { return from_tsv(read_text_file(path)); }

}  // namespace sentrep
