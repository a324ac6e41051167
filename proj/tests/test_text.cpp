#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "sentrep/corpus.hpp"
#include "sentrep/rng.hpp"
#include "sentrep/text.hpp"
#include "test_support.hpp"

using namespace sentrep;

TEST_CASE("tokenizer lowercases and splits punctuation") {
  CHECK(tokenize("This is great.") ==
        std::vector<std::string>{"this", "is", "great", "."});
  CHECK(tokenize("you needed me?") ==
        std::vector<std::string>{"you", "needed", "me", "?"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t  ").empty());
  CHECK(tokenize("Don't stop") ==
        std::vector<std::string>{"don", "'", "t", "stop"});
  CHECK(tokenize("room 101") == std::vector<std::string>{"room", "101"});
  CHECK(tokenize("a,b") == std::vector<std::string>{"a", ",", "b"});
  CHECK(tokenize("caf\xc3\xa9 time") ==
        std::vector<std::string>{"caf\xc3\xa9", "time"});
  CHECK(tokenize("<pad>") == std::vector<std::string>{"<", "pad", ">"});
}

TEST_CASE("vocab keeps the most frequent tokens with lexicographic ties") {
  SUBCASE("reserved layout") {
    Vocab v;
    CHECK(v.size() == 5);
    CHECK(v.decode(Vocab::kPad) == "<pad>");
    CHECK(v.decode(Vocab::kSos) == "<sos>");
    CHECK(v.decode(Vocab::kEos) == "<eos>");
    CHECK(v.decode(Vocab::kUnk) == "<unk>");
    CHECK(v.decode(Vocab::kSop) == "<sop>");
  }

  SUBCASE("truncation pushes rare tokens to <unk>") {
    Vocab v = Vocab::build({tokenize("a a b")}, 6);
    CHECK(v.size() == 6);
    CHECK(v.encode("a") == 5);
    CHECK(v.encode("b") == Vocab::kUnk);
    CHECK(v.contains("a"));
    CHECK_FALSE(v.contains("b"));
  }

  SUBCASE("ordering matches a count-then-token sort oracle") {
    Rng rng(99);
    std::vector<std::vector<std::string>> sentences;
    std::vector<std::string> pool = {"kiwi", "apple", "fig", "date",
                                     "plum", "pear", "lime", "bean"};
    for (int s = 0; s < 40; ++s) {
      std::vector<std::string> sent;
      for (int t = 0; t < 6; ++t) sent.push_back(pool[rng.below(pool.size())]);
      sentences.push_back(sent);
    }
    std::map<std::string, uint64_t> counts;
    for (const auto& s : sentences) {
      for (const auto& t : s) ++counts[t];
    }
    std::vector<std::pair<std::string, uint64_t>> oracle(counts.begin(), counts.end());
    std::stable_sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    Vocab v = Vocab::build(sentences, Vocab::kReserved + pool.size());
    for (size_t i = 0; i < oracle.size(); ++i) {
      CHECK(v.decode(static_cast<int32_t>(Vocab::kReserved + i)) == oracle[i].first);
    }
  }

  SUBCASE("ties alone break lexicographically") {
    Vocab v = Vocab::build({{"zebra", "mango", "acorn"}}, 20);
    CHECK(v.encode("acorn") == 5);
    CHECK(v.encode("mango") == 6);
    CHECK(v.encode("zebra") == 7);
  }

  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(Vocab::build({{"a"}}, 5), ValueError);
    CHECK_THROWS_AS(Vocab::build({}, 10), ValueError);
    CHECK_THROWS_AS(Vocab::build({{}}, 10), ValueError);
  }
}

TEST_CASE("vocab round trips through encode/decode and TSV") {
  Vocab v = Vocab::build({tokenize("the cat sat on the mat")}, 32);
  std::vector<std::string> toks = tokenize("the mat sat");
  CHECK(v.decode_indices(v.encode_tokens(toks)) == toks);
  CHECK(v.encode("dog") == Vocab::kUnk);
  CHECK_THROWS_AS(v.decode(-1), ValueError);
  CHECK_THROWS_AS(v.decode(static_cast<int32_t>(v.size())), ValueError);

  ts::TempDir dir;
  std::string path = dir.file("vocab.tsv");
  v.save(path);
  Vocab back = Vocab::load(path);
  CHECK(back.size() == v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    CHECK(back.decode(static_cast<int32_t>(i)) == v.decode(static_cast<int32_t>(i)));
  }
  CHECK(back.to_tsv() == v.to_tsv());
}

TEST_CASE("vocab TSV validation") {
  CHECK_THROWS_AS(Vocab::from_tsv("only_four\t0\n"), IntegrityError);
  CHECK_THROWS_AS(
      Vocab::from_tsv("<pad>\t0\n<sos>\t1\n<eos>\t2\n<unk>\t3\n<oops>\t4\n"),
      IntegrityError);
  CHECK_THROWS_AS(
      Vocab::from_tsv("<pad>\t0\n<sos>\t1\n<eos>\t2\n<unk>\t3\n<sop>\t9\n"),
      IntegrityError);
  CHECK_THROWS_AS(
      Vocab::from_tsv("<pad>\t0\n<sos>\t1\n<eos>\t2\n<unk>\t3\n<sop>\tx\n"),
      IntegrityError);
  CHECK_THROWS_AS(
      Vocab::from_tsv(
          "<pad>\t0\n<sos>\t1\n<eos>\t2\n<unk>\t3\n<sop>\t4\na\t5\na\t6\n"),
      IntegrityError);
  Vocab ok = Vocab::from_tsv("<pad>\t0\n<sos>\t1\n<eos>\t2\n<unk>\t3\n<sop>\t4\n");
  CHECK(ok.size() == 5);
}

TEST_CASE("corpus splits paragraphs on blank lines") {
  Vocab v = Vocab::build({tokenize("a b c d e f")}, 16);
  Corpus c = Corpus::from_lines({"a b.", "c d", "  ", "e f", "", "", "a"}, v);
  REQUIRE(c.paragraphs.size() == 3);
  CHECK(c.paragraphs[0].size() == 2);
  CHECK(c.paragraphs[1].size() == 1);
  CHECK(c.paragraphs[2].size() == 1);
  CHECK(c.sentence_count() == 4);
  CHECK(c.paragraphs[0][0] == v.encode_tokens({"a", "b", "."}));
  CHECK(c.sentence(2) == v.encode_tokens({"e", "f"}));
  CHECK_THROWS_AS(c.sentence(4), ValueError);
}

TEST_CASE("sentence batch layout and validation") {
  std::vector<std::vector<int32_t>> sents = {{5, 6}, {7}};
  SentenceBatch b = SentenceBatch::build(sents, 4);
  CHECK(b.rows == 2);
  CHECK(b.t_max == 4);
  CHECK(b.lengths == std::vector<int32_t>{3, 2});
  CHECK(b.tokens == std::vector<int32_t>{5, 6, Vocab::kEos, Vocab::kPad, 7,
                                         Vocab::kEos, Vocab::kPad, Vocab::kPad});
  CHECK_NOTHROW(b.validate());

  SUBCASE("width grows past min_width when needed") {
    SentenceBatch wide = SentenceBatch::build(sents, 2);
    CHECK(wide.t_max == 3);
  }

  SUBCASE("corrupt batches are rejected") {
    SentenceBatch bad = b;
    bad.tokens[2] = 9;
    CHECK_THROWS_AS(bad.validate(), IntegrityError);
    bad = b;
    bad.tokens[3] = 9;
    CHECK_THROWS_AS(bad.validate(), IntegrityError);
    bad = b;
    bad.lengths[1] = 99;
    CHECK_THROWS_AS(bad.validate(), IntegrityError);
  }

  SUBCASE("empty inputs are rejected") {
    CHECK_THROWS_AS(SentenceBatch::build(std::vector<std::vector<int32_t>>{}, 3),
                    ValueError);
    CHECK_THROWS_AS(SentenceBatch::build(std::vector<std::vector<int32_t>>{{}}, 3),
                    ValueError);
  }
}

namespace {

Corpus marker_corpus() {
  // Paragraphs of distinct single-token sentences so pair provenance is
  // readable off the ids: paragraph p holds tokens 100p+0 .. 100p+n-1.
  Corpus c;
  c.paragraphs = {{{100}, {101}, {102}}, {{200}}, {{300}, {301}}};
  return c;
}

}  // namespace

TEST_CASE("pair batches respect mode and paragraph boundaries") {
  Corpus c = marker_corpus();

  SUBCASE("self mode pairs every sentence with itself") {
    BatchStats st;
    auto batches = make_pair_batches(c, PairMode::self, 2, 7, 0, 3, &st);
    CHECK(st.pairs == 6);
    CHECK(st.skipped_single == 0);
    REQUIRE(batches.size() == 3);
    std::multiset<int32_t> seen;
    for (const auto& [src, tgt] : batches) {
      CHECK(src.rows == tgt.rows);
      for (size_t i = 0; i < src.rows; ++i) {
        CHECK(src.at(i, 0) == tgt.at(i, 0));
        seen.insert(src.at(i, 0));
      }
    }
    CHECK(seen == std::multiset<int32_t>{100, 101, 102, 200, 300, 301});
  }

  SUBCASE("next mode emits consecutive pairs and skips singles") {
    BatchStats st;
    auto batches = make_pair_batches(c, PairMode::next, 1, 7, 0, 3, &st);
    CHECK(st.pairs == 3);
    CHECK(st.skipped_single == 1);
    std::multiset<std::pair<int32_t, int32_t>> seen;
    for (const auto& [src, tgt] : batches) {
      REQUIRE(src.rows == 1);
      seen.insert({src.at(0, 0), tgt.at(0, 0)});
    }
    std::multiset<std::pair<int32_t, int32_t>> want = {
        {100, 101}, {101, 102}, {300, 301}};
    CHECK(seen == want);
  }
}

TEST_CASE("pair batch shuffling is a pure function of seed and epoch") {
  Corpus c;
  for (int p = 0; p < 10; ++p) {
    std::vector<std::vector<int32_t>> para;
    for (int s = 0; s < 5; ++s) para.push_back({p * 10 + s + 5});
    c.paragraphs.push_back(para);
  }
  auto a = make_pair_batches(c, PairMode::next, 4, 42, 3, 3);
  auto b = make_pair_batches(c, PairMode::next, 4, 42, 3, 3);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first.tokens == b[i].first.tokens);
    CHECK(a[i].second.tokens == b[i].second.tokens);
  }

  auto other_epoch = make_pair_batches(c, PairMode::next, 4, 42, 4, 3);
  bool any_diff = false;
  for (size_t i = 0; i < a.size() && !any_diff; ++i) {
    any_diff = a[i].first.tokens != other_epoch[i].first.tokens;
  }
  CHECK(any_diff);

  SUBCASE("final short batch is kept") {
    BatchStats st;
    auto batches = make_pair_batches(c, PairMode::next, 7, 1, 0, 3, &st);
    CHECK(st.pairs == 40);
    REQUIRE(batches.size() == 6);
    CHECK(batches.back().first.rows == 5);
  }
}

TEST_CASE("paragraph batches chunk consecutive sentences") {
  Corpus c;
  std::vector<std::vector<int32_t>> long_para, short_para;
  for (int s = 0; s < 16; ++s) long_para.push_back({500 + s});
  for (int s = 0; s < 7; ++s) short_para.push_back({700 + s});
  c.paragraphs = {long_para, short_para};

  BatchStats st;
  auto batches = make_paragraph_batches(c, 8, 4, 11, 0, 3, &st);
  CHECK(st.chunks == 2);
  CHECK(st.dropped_short == 1);
  REQUIRE(batches.size() == 1);
  const ParagraphBatch& pb = batches[0];
  CHECK(pb.rows == 2);
  REQUIRE(pb.members.size() == 8);

  std::set<std::vector<int32_t>> rows_seen;
  for (size_t r = 0; r < pb.rows; ++r) {
    std::vector<int32_t> row;
    for (const auto& member : pb.members) {
      CHECK(member.rows == pb.rows);
      row.push_back(member.at(r, 0));
    }
    rows_seen.insert(row);
  }
  std::set<std::vector<int32_t>> want = {
      {500, 501, 502, 503, 504, 505, 506, 507},
      {508, 509, 510, 511, 512, 513, 514, 515}};
  CHECK(rows_seen == want);

  SUBCASE("determinism over reruns") {
    auto again = make_paragraph_batches(c, 8, 4, 11, 0, 3);
    REQUIRE(again.size() == batches.size());
    for (size_t l = 0; l < 8; ++l) {
      CHECK(again[0].members[l].tokens == batches[0].members[l].tokens);
    }
  }

  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(make_paragraph_batches(c, 0, 4, 1, 0, 3), ValueError);
    CHECK_THROWS_AS(make_paragraph_batches(c, 8, 0, 1, 0, 3), ValueError);
    CHECK_THROWS_AS(make_pair_batches(c, PairMode::self, 0, 1, 0, 3), ValueError);
  }
}
