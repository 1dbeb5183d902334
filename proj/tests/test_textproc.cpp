#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "itopics/error.hpp"
#include "itopics/textproc.hpp"

using namespace itopics;

namespace {

UserDocument doc(std::string id, TokenCounts counts) {
  UserDocument d;
  d.user_id = std::move(id);
  d.token_counts = std::move(counts);
  d.num_tweets = 1;
  return d;
}

SparseVector vec(std::vector<SparseEntry> e) { return SparseVector::from_entries(std::move(e)); }

}  // namespace

TEST(Tokenize, EmptyText) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, HashtagKeptUrlDropped) {
  EXPECT_EQ(tokenize("Vota #NoAlAborto YA http://x.co"), (std::vector<std::string>{"vota", "#noalaborto", "ya"}));
}

TEST(Tokenize, MentionStrippedCaseFolded) {
  EXPECT_EQ(tokenize("@juan aborto, Aborto"), (std::vector<std::string>{"aborto", "aborto"}));
}

TEST(Tokenize, AccentedLettersStayInWords) {
  EXPECT_EQ(tokenize("Interrupción TERAPÉUTICA del embarazo"),
            (std::vector<std::string>{"interrupción", "terapéutica", "del", "embarazo"}));
}

TEST(Tokenize, UrlVariants) {
  EXPECT_EQ(tokenize("ver https://t.co/abc?x=1 y www.emol.com hoy"), (std::vector<std::string>{"ver", "y", "hoy"}));
}

TEST(Tokenize, HashtagWithUnderscoreAndDigits) {
  EXPECT_EQ(tokenize("#Aborto_3Causales!"), (std::vector<std::string>{"#aborto_3causales"}));
}

TEST(Tokenize, LoneSymbolsProduceNothing) { EXPECT_TRUE(tokenize("# @ !!! ...").empty()); }

TEST(Vocabulary, MinDocFreqKeepsFrequentToken) {
  std::vector<UserDocument> docs;
  for (int i = 0; i < 10; ++i) docs.push_back(doc("u" + std::to_string(i), {{"aborto", 1}}));
  const auto v = build_vocabulary(docs, 5);
  ASSERT_TRUE(v.index_of("aborto"));
  EXPECT_EQ(v.doc_freq(*v.index_of("aborto")), 10u);
}

TEST(Vocabulary, BelowThresholdExcluded) {
  std::vector<UserDocument> docs;
  for (int i = 0; i < 10; ++i) {
    TokenCounts c{{"comun", 1}};
    if (i < 4) c["raro"] = 3;
    docs.push_back(doc("u" + std::to_string(i), c));
  }
  const auto v = build_vocabulary(docs, 5);
  EXPECT_FALSE(v.index_of("raro"));
  EXPECT_TRUE(v.index_of("comun"));
}

TEST(Vocabulary, MinDocFreqOneKeepsEverything) {
  std::vector<UserDocument> docs{doc("a", {{"x", 1}, {"y", 2}}), doc("b", {{"z", 1}})};
  const auto v = build_vocabulary(docs, 1);
  EXPECT_EQ(v.size(), 3u);
}

TEST(Vocabulary, EmptyResultIsAnError) {
  std::vector<UserDocument> docs{doc("a", {{"x", 1}})};
  EXPECT_THROW(build_vocabulary(docs, 5), PipelineError);
}

TEST(Vocabulary, RoundTrip) {
  std::vector<UserDocument> docs{doc("a", {{"x", 1}, {"ñandú", 2}}), doc("b", {{"x", 1}, {"#tag", 1}})};
  const auto v = build_vocabulary(docs, 1);
  std::stringstream ss;
  v.write(ss);
  const auto back = Vocabulary::read(ss);
  EXPECT_EQ(back, v);
  for (std::uint32_t i = 0; i < v.size(); ++i) EXPECT_EQ(back.index_of(v.token(i)), i);
}

TEST(Tfidf, HandEvaluatedWeight) {
  const auto v = Vocabulary::from_frequencies({{"b", 1}}, 4);
  const auto w = tfidf_vectorize({{"b", 2}}, v, 4);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_DOUBLE_EQ(w.entries()[0].weight, 4.0);
}

TEST(Tfidf, TokenInEveryDocDropped) {
  const auto v = Vocabulary::from_frequencies({{"a", 4}, {"b", 1}}, 4);
  const auto w = tfidf_vectorize({{"a", 3}, {"b", 1}}, v, 4);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w.entries()[0].index, *v.index_of("b"));
}

TEST(Tfidf, EmptyDocGivesEmptyVector) {
  const auto v = Vocabulary::from_frequencies({{"a", 1}}, 4);
  EXPECT_TRUE(tfidf_vectorize({}, v, 4).empty());
}

TEST(Tfidf, OutOfVocabularyTokensIgnored) {
  const auto v = Vocabulary::from_frequencies({{"a", 1}}, 4);
  EXPECT_TRUE(tfidf_vectorize({{"zzz", 5}}, v, 4).empty());
}

TEST(Tfidf, WeightsNonNegative) {
  const auto v = Vocabulary::from_frequencies({{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}}, 4);
  const auto w = tfidf_vectorize({{"a", 1}, {"b", 5}, {"c", 2}, {"d", 9}}, v, 4);
  for (const auto& e : w.entries()) EXPECT_GT(e.weight, 0.0);
}

TEST(Cosine, IdenticalVectors) {
  const auto a = vec({{0, 1.5}, {3, 2.0}});
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-12);
}

TEST(Cosine, DisjointSupports) { EXPECT_EQ(cosine_similarity(vec({{0, 1.0}}), vec({{1, 1.0}})), 0.0); }

TEST(Cosine, HandEvaluated) {
  EXPECT_NEAR(cosine_similarity(vec({{0, 1.0}, {1, 1.0}}), vec({{0, 1.0}})), 0.70710678, 1e-8);
}

TEST(Cosine, ZeroVectorGivesZero) { EXPECT_EQ(cosine_similarity(SparseVector{}, vec({{0, 1.0}})), 0.0); }

TEST(Cosine, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(0.01, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SparseEntry> ea, eb;
    for (std::uint32_t i = 0; i < 20; ++i) {
      if (rng() % 2) ea.push_back({i, w(rng)});
      if (rng() % 2) eb.push_back({i, w(rng)});
    }
    const auto a = vec(ea), b = vec(eb);
    const double s = cosine_similarity(a, b);
    EXPECT_NEAR(s, cosine_similarity(b, a), 1e-12);
    EXPECT_NEAR(s, cosine_similarity(a.scaled(w(rng)), b), 1e-12);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(SparseVector, RejectsUnsortedOrNegative) {
  EXPECT_THROW(vec({{2, 1.0}, {1, 1.0}}), std::invalid_argument);
  EXPECT_THROW(vec({{1, -1.0}}), std::invalid_argument);
}

TEST(SparseVector, TextRoundTripIsExact) {
  std::vector<std::pair<std::string, SparseVector>> rows{{"pro-choice", vec({{0, 0.1}, {7, 1.0 / 3.0}})},
                                                         {"pro-life", vec({{2, 2.5e-17}})}};
  std::stringstream ss;
  write_sparse_vectors(ss, rows);
  const auto back = read_sparse_vectors(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].first, "pro-choice");
  EXPECT_EQ(back[0].second, rows[0].second);
  EXPECT_EQ(back[1].second, rows[1].second);
}
