#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "doc2doc/mrsplit.hpp"
#include "test_util.hpp"

namespace doc2doc {
namespace {

std::vector<std::size_t> sizes_at_level(const std::vector<Segment>& segs, std::size_t k) {
  std::vector<std::size_t> out;
  for (const auto& s : segs)
    if (s.level_k == k) out.push_back(s.sentence_span.size());
  return out;
}

TEST(MrLevels, Examples) {
  EXPECT_EQ(mr_levels(8), (std::vector<std::size_t>{1, 2, 4, 8}));
  EXPECT_EQ(mr_levels(1), (std::vector<std::size_t>{1}));
  EXPECT_EQ(mr_levels(6), (std::vector<std::size_t>{1, 2, 4, 6}));
  EXPECT_EQ(mr_levels(6, {.include_singletons = false}), (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(mr_levels(2), (std::vector<std::size_t>{1, 2}));
  EXPECT_THROW(mr_levels(0), Error);
}

TEST(MrLevels, NeverExceedsM) {
  for (std::size_t m = 1; m <= 600; ++m) {
    const auto levels = mr_levels(m);
    EXPECT_TRUE(std::is_sorted(levels.begin(), levels.end()));
    EXPECT_LE(levels.back(), m);
    EXPECT_EQ(levels.back(), m);  // sentence level always present with singletons on
  }
}

TEST(SplitDocument, EightSentences) {
  const auto c = testutil::corpus_with_sizes({8});
  const auto segs = split_document(c.documents[0]);
  ASSERT_EQ(segs.size(), 15u);
  EXPECT_EQ(sizes_at_level(segs, 1), (std::vector<std::size_t>{8}));
  EXPECT_EQ(sizes_at_level(segs, 2), (std::vector<std::size_t>{4, 4}));
  EXPECT_EQ(sizes_at_level(segs, 4), (std::vector<std::size_t>{2, 2, 2, 2}));
  EXPECT_EQ(sizes_at_level(segs, 8), std::vector<std::size_t>(8, 1));
  EXPECT_EQ(segs[1].source_text, "src d0 sentence 0 . src d0 sentence 1 . src d0 sentence 2 . "
                                 "src d0 sentence 3 .");
}

TEST(SplitDocument, SingleSentence) {
  const auto c = testutil::corpus_with_sizes({1});
  const auto segs = split_document(c.documents[0]);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].source_text, c.documents[0].source.sentences[0]);
  EXPECT_EQ(segs[0].target_text, c.documents[0].target.sentences[0]);
}

TEST(SplitDocument, RemainderGoesToFirstParts) {
  // M = 5: levels 1, 2, 4, 5. 5 = 2*2 + 1 -> (3, 2); 5 = 4*1 + 1 -> (2, 1, 1, 1).
  const auto c = testutil::corpus_with_sizes({5});
  const auto segs = split_document(c.documents[0]);
  EXPECT_EQ(segs.size(), 12u);
  EXPECT_EQ(sizes_at_level(segs, 2), (std::vector<std::size_t>{3, 2}));
  EXPECT_EQ(sizes_at_level(segs, 4), (std::vector<std::size_t>{2, 1, 1, 1}));
  EXPECT_EQ(sizes_at_level(segs, 5), std::vector<std::size_t>(5, 1));
}

TEST(SplitDocument, SixSentencesCountByEnumeration) {
  const auto c = testutil::corpus_with_sizes({6});
  const auto segs = split_document(c.documents[0]);
  std::map<std::size_t, std::size_t> per_level;
  for (const auto& s : segs) ++per_level[s.level_k];
  EXPECT_EQ(per_level, (std::map<std::size_t, std::size_t>{{1, 1}, {2, 2}, {4, 4}, {6, 6}}));
  EXPECT_EQ(segs.size(), 13u);
}

TEST(SplitDocument, RejectsUnaligned) {
  auto pd = make_parallel("x", {"a", "b"}, {"c"});
  EXPECT_THROW(split_document(pd), Error);
  auto flagged = make_parallel("y", {"a"}, {"b"});
  flagged.aligned = false;
  EXPECT_THROW(split_document(flagged), Error);
  EXPECT_THROW(split_document(make_parallel("z", {"a"}, {"b"}), {.joiner = "a\nb"}), Error);
}

TEST(BuildMrCorpus, OrderAndIds) {
  const auto c = testutil::corpus_with_sizes({2, 1});
  const auto mr = build_mr_corpus(c);
  ASSERT_EQ(mr.size(), 4u);
  EXPECT_EQ(mr.documents[0].id(), "000000/k1/p0");
  EXPECT_EQ(mr.documents[1].id(), "000000/k2/p0");
  EXPECT_EQ(mr.documents[2].id(), "000000/k2/p1");
  EXPECT_EQ(mr.documents[3].id(), "000001/k1/p0");
  EXPECT_EQ(mr.documents[3].source.sentences, c.documents[1].source.sentences);
  for (const auto& pd : mr.documents) EXPECT_EQ(pd.source.size(), 1u);
  EXPECT_NO_THROW(validate(mr));
}

TEST(BuildMrCorpus, CustomJoiner) {
  const auto c = testutil::corpus_with_sizes({2});
  const auto mr = build_mr_corpus(c, {.include_singletons = true, .joiner = " ||| "});
  EXPECT_EQ(mr.documents[0].source.sentences[0], "src d0 sentence 0 . ||| src d0 sentence 1 .");
}

TEST(BuildMrCorpus, TokenConservationForPowersOfTwo) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t levels = rng() % 6;  // L
    const std::size_t m = std::size_t{1} << levels;
    auto c = testutil::random_corpus(rng, 1, 1);
    // Rebuild with exactly m sentences.
    std::vector<std::string> src, tgt;
    std::size_t doc_tokens = 0;
    for (std::size_t i = 0; i < m; ++i) {
      std::string s;
      const std::size_t w = 1 + rng() % 7;
      for (std::size_t j = 0; j < w; ++j) s += (j ? " " : "") + std::to_string(rng() % 9);
      doc_tokens += w;
      src.push_back(s);
      tgt.push_back("t" + s);
    }
    c.documents = {make_parallel("doc", src, tgt)};
    const auto mr = build_mr_corpus(c);
    std::size_t mr_tokens = 0;
    for (const auto& pd : mr.documents) mr_tokens += count_whitespace_tokens(pd.source.sentences[0]);
    EXPECT_EQ(mr_tokens, (levels + 1) * doc_tokens);
  }
}

TEST(BuildMrCorpus, ThreadsDoNotChangeOutput) {
  std::mt19937_64 rng(99);
  const auto c = testutil::random_corpus(rng, 50, 20);
  EXPECT_EQ(build_mr_corpus(c, {}, 1), build_mr_corpus(c, {}, 3));
}

TEST(MrRatio, Examples) {
  EXPECT_EQ(mr_ratio(testutil::corpus_with_sizes({8, 8, 8})), 4.0);
  EXPECT_EQ(mr_ratio(testutil::corpus_with_sizes({1, 1})), 1.0);
  EXPECT_THROW(mr_ratio(ParallelCorpus{}), Error);
  EXPECT_EQ(suggested_oversample_factor(testutil::corpus_with_sizes({64})), 7u);
}

TEST(MrRatio, AtLeastOneWithEqualityOnlyForSingleSentences) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = testutil::random_corpus(rng, 1 + rng() % 5, 1 + trial % 10);
    const double r = mr_ratio(c);
    const bool all_single = std::all_of(c.documents.begin(), c.documents.end(),
                                        [](const auto& pd) { return pd.source.size() == 1; });
    EXPECT_GE(r, 1.0);
    EXPECT_EQ(r == 1.0, all_single);
  }
}

TEST(Oversample, ReplicatesInBlocks) {
  const auto c = testutil::corpus_with_sizes({2, 3});
  const auto six = oversample(c, 6);
  ASSERT_EQ(six.size(), 12u);
  EXPECT_EQ(six.documents[0].id(), "000000~r0");
  EXPECT_EQ(six.documents[5].id(), "000000~r5");
  EXPECT_EQ(six.documents[6].id(), "000001~r0");
  EXPECT_EQ(six.documents[7].source.sentences, c.documents[1].source.sentences);
  EXPECT_EQ(sentence_pair_count(six), 6 * sentence_pair_count(c));
  EXPECT_NO_THROW(validate(six));

  const auto one = oversample(c, 1);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one.documents[1].source.sentences, c.documents[1].source.sentences);
  EXPECT_THROW(oversample(c, 0), Error);
}

TEST(Bucket, GreedyRule) {
  EXPECT_EQ(greedy_paragraphs({5, 5, 5}, 10),
            (std::vector<SentenceSpan>{{0, 2}, {2, 3}}));
  EXPECT_EQ(greedy_paragraphs({12, 3, 4}, 10), (std::vector<SentenceSpan>{{0, 1}, {1, 3}}));
  EXPECT_EQ(greedy_paragraphs({3, 12}, 10), (std::vector<SentenceSpan>{{0, 1}, {1, 2}}));
}

TEST(Bucket, SaturationAndCoverage) {
  std::mt19937_64 rng(8);
  const auto c = testutil::random_corpus(rng, 10, 12);
  const auto buckets = bucket_by_length(c, {1, 4, 16, 100000});
  // Lower saturation: every sentence has > 1 token.
  std::size_t sentences = 0;
  for (const auto& pd : c.documents) sentences += pd.source.size();
  EXPECT_EQ(buckets.at(1).size(), sentences);
  EXPECT_EQ(buckets.at(100000).size(), c.size());
  for (const auto& [budget, corpus] : buckets) {
    std::vector<std::string> flat, expected;
    for (const auto& pd : corpus.documents) {
      EXPECT_TRUE(pd.aligned);
      flat.insert(flat.end(), pd.source.sentences.begin(), pd.source.sentences.end());
    }
    for (const auto& pd : c.documents)
      expected.insert(expected.end(), pd.source.sentences.begin(), pd.source.sentences.end());
    EXPECT_EQ(flat, expected) << budget;
    EXPECT_NO_THROW(validate(corpus));
  }
}

TEST(Bucket, Errors) {
  const auto c = testutil::corpus_with_sizes({2});
  EXPECT_THROW(bucket_by_length(c, {}), Error);
  EXPECT_THROW(bucket_by_length(c, {64, 32}), Error);
  EXPECT_THROW(bucket_by_length(c, {0}), Error);
}

}  // namespace
}  // namespace doc2doc
