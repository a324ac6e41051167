#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace sentrep {

// Lowercases ASCII letters, keeps runs of word characters (alphanumerics,
// apostrophe-free; bytes >= 0x80 count as word characters so UTF-8 sequences
// stay intact) and emits every other printable character as its own token.
std::vector<std::string> tokenize(const std::string& text);

// Token <-> index table. Indices 0..4 are reserved; real tokens start at 5.
// The tokenizer can never produce the reserved names (they contain '<').
class Vocab {
 public:
  static constexpr int32_t kPad = 0;
  static constexpr int32_t kSos = 1;
  static constexpr int32_t kEos = 2;
  static constexpr int32_t kUnk = 3;
  static constexpr int32_t kSop = 4;
  static constexpr size_t kReserved = 5;

  Vocab();

  // Keeps the most frequent tokens up to max_size total entries (reserved
  // included); frequency ties break lexicographically.
  static Vocab build(const std::vector<std::vector<std::string>>& sentences,
                     size_t max_size);

  int32_t encode(const std::string& token) const;
  const std::string& decode(int32_t index) const;
  std::vector<int32_t> encode_tokens(const std::vector<std::string>& ts) const;
  std::vector<std::string> decode_indices(const std::vector<int32_t>& is) const;

  bool contains(const std::string& token) const;
  size_t size() const { return tokens_.size(); }

  std::string to_tsv() const;
  static Vocab from_tsv(const std::string& text);
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  void add(const std::string& token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> index_;
};

}  // namespace sentrep
