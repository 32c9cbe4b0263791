#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mwe/errors.h"
#include "mwe/vocab.h"

namespace mwe {
namespace {

TEST(BuildVocab, CountsHeadAndTailAndAppliesThreshold) {
  const std::vector<RawTuple> tuples = {{"a", "r", "b", 3}, {"a", "r", "c", 1}};
  const VocabBuild built = build_vocab(tuples, 2);
  ASSERT_EQ(built.vocab.size(), 2u);
  EXPECT_EQ(built.vocab.word(0), "a");
  EXPECT_EQ(built.vocab.freq(0), 4u);
  EXPECT_EQ(built.vocab.word(1), "b");
  EXPECT_EQ(built.vocab.freq(1), 3u);
  EXPECT_FALSE(built.vocab.find("c"));
  ASSERT_EQ(built.relations.size(), 1u);
  EXPECT_EQ(built.relations.name(0), "r");
  EXPECT_EQ(built.relations.tuple_count(0), 4u);
}

TEST(BuildVocab, EmptyStream) {
  const VocabBuild built = build_vocab({}, 0);
  EXPECT_TRUE(built.vocab.empty());
  EXPECT_TRUE(built.relations.empty());
}

TEST(BuildVocab, MinCountOneKeepsEverything) {
  const std::vector<RawTuple> tuples = {{"x", "r", "y", 1}, {"z", "q", "x", 1}};
  const VocabBuild built = build_vocab(tuples, 1);
  EXPECT_EQ(built.vocab.size(), 3u);
  EXPECT_EQ(built.relations.size(), 2u);
}

TEST(BuildVocab, TiesAreLexicographic) {
  const std::vector<RawTuple> tuples = {{"m", "r", "b", 1}, {"a", "r", "z", 1}};
  const VocabBuild built = build_vocab(tuples, 0);
  EXPECT_EQ(built.vocab.words(), (std::vector<std::string>{"a", "b", "m", "z"}));
}

TEST(BuildVocab, MalformedRecordsAreCounted) {
  const std::vector<RawTuple> tuples = {{"", "r", "b", 1}, {"a", "r", "b", 0}, {"a", "r", "b", 2}};
  const VocabBuild built = build_vocab(tuples, 0);
  EXPECT_EQ(built.malformed, 2u);
  EXPECT_EQ(built.vocab.size(), 2u);
}

TEST(BuildVocab, RandomStreamsMatchBruteForceRecount) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> word(0, 30), rel(0, 3), count(1, 5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RawTuple> tuples;
    for (int i = 0; i < 200; ++i) {
      tuples.push_back({"w" + std::to_string(word(rng)), "r" + std::to_string(rel(rng)),
                        "w" + std::to_string(word(rng)),
                        static_cast<std::uint64_t>(count(rng))});
    }
    std::map<std::string, std::uint64_t> recount;
    for (const RawTuple& t : tuples) {
      recount[t.head] += t.count;
      recount[t.tail] += t.count;
    }
    const std::uint64_t min_count = 20;
    const VocabBuild built = build_vocab(tuples, min_count);
    std::size_t expected = 0;
    for (const auto& [w, c] : recount) {
      if (c < min_count) continue;
      ++expected;
      ASSERT_EQ(built.vocab.freq(built.vocab.id(w)), c);
    }
    ASSERT_EQ(built.vocab.size(), expected);
    for (WordId id = 0; id < built.vocab.size(); ++id) {
      EXPECT_EQ(built.vocab.id(built.vocab.word(id)), id);
      if (id > 0) EXPECT_GE(built.vocab.freq(id - 1), built.vocab.freq(id));
    }
    const VocabBuild again = build_vocab(tuples, min_count);
    EXPECT_EQ(again.vocab, built.vocab);
    EXPECT_EQ(again.relations, built.relations);
  }
}

TEST(Vocabulary, UnknownIdThrows) {
  const Vocabulary v({"a"}, {1});
  EXPECT_THROW(v.id("b"), std::out_of_range);
  EXPECT_THROW(v.word(3), std::out_of_range);
}

TEST(VocabFile, RoundTrip) {
  const Vocabulary v({"the", "dog"}, {10, 3});
  std::stringstream ss;
  write_vocab(ss, v);
  EXPECT_EQ(ss.str(), "#MWE-VOCAB v1 n=2\nthe\t10\ndog\t3\n");
  EXPECT_EQ(read_vocab(ss), v);
}

TEST(VocabFile, RejectsBadHeader) {
  std::stringstream ss("word\t3\n");
  EXPECT_THROW(read_vocab(ss), FormatError);
}

TEST(RelationFile, RoundTrip) {
  const RelationRegistry r({"amod", "nsubj"}, {4, 9});
  std::stringstream ss;
  write_relations(ss, r);
  EXPECT_EQ(ss.str(), "#MWE-RELS v1 m=2\namod\t4\nnsubj\t9\n");
  EXPECT_EQ(read_relations(ss), r);
}

}  // namespace
}  // namespace mwe
