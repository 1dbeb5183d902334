#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "itopics/corpus.hpp"
#include "itopics/error.hpp"
#include "itopics/textproc.hpp"

using namespace itopics;
using itopics::testing::tweet;

namespace {

TweetLoadResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_tweets(in);
}

const char* kLine1 =
    R"({"tweet_id":"1","user_id":"a","text":"hola","created_at":"2013-06-01T10:00:00Z","kind":"original"})";
const char* kLine2 =
    R"({"tweet_id":"2","user_id":"b","text":"chao","created_at":1370080800,"kind":"retweet","retweet_of_user":"a"})";
const char* kLine3 =
    R"({"tweet_id":"3","user_id":"a","text":"si","created_at":"2013-06-01T12:00:00-04:00","kind":"reply","reply_to_user":"b","mentions":["b"],"extra":1})";

}  // namespace

TEST(ParseTweets, EmptyInput) {
  const auto r = parse("");
  EXPECT_TRUE(r.tweets.empty());
  EXPECT_EQ(r.skipped_malformed, 0u);
}

TEST(ParseTweets, MalformedLineSkipped) {
  const auto r = parse(std::string(kLine1) + "\n" + kLine2 + "\n{not json\n" + kLine3 + "\n");
  EXPECT_EQ(r.tweets.size(), 3u);
  EXPECT_EQ(r.skipped_malformed, 1u);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(ParseTweets, DuplicateIdKeepsFirst) {
  const std::string dup = R"({"tweet_id":"1","user_id":"zzz","text":"otro","created_at":0,"kind":"original"})";
  const auto r = parse(std::string(kLine1) + "\n" + dup + "\n");
  ASSERT_EQ(r.tweets.size(), 1u);
  EXPECT_EQ(r.tweets[0].user_id, "a");
  EXPECT_EQ(r.duplicates, 1u);
}

TEST(ParseTweets, FieldsAndTimestamps) {
  const auto r = parse(std::string(kLine2) + "\n" + kLine3 + "\n");
  ASSERT_EQ(r.tweets.size(), 2u);
  EXPECT_EQ(r.tweets[0].kind, TweetKind::retweet);
  EXPECT_EQ(r.tweets[0].retweet_of_user, "a");
  EXPECT_EQ(format_timestamp(r.tweets[0].created_at), "2013-06-01T10:00:00Z");
  EXPECT_EQ(format_timestamp(r.tweets[1].created_at), "2013-06-01T16:00:00Z");
  EXPECT_EQ(r.tweets[1].mentions, std::vector<std::string>{"b"});
}

TEST(ParseTweets, ReplyWithoutTargetIsMalformed) {
  const auto r = parse(R"({"tweet_id":"9","user_id":"a","text":"x","created_at":0,"kind":"reply"})");
  EXPECT_TRUE(r.tweets.empty());
  EXPECT_EQ(r.skipped_malformed, 1u);
}

TEST(ParseTweets, JsonRoundTrip) {
  auto t = tweet("7", "u", "texto con \"comillas\" y ñ");
  t.mentions = {"x", "y"};
  t.user_location = "Temuco";
  t.following_count = 10;
  std::ostringstream out;
  std::vector<TweetRecord> v{t};
  write_tweets(out, v);
  const auto r = parse(out.str());
  ASSERT_EQ(r.tweets.size(), 1u);
  EXPECT_EQ(r.tweets[0], t);
}

TEST(LoadTweets, MissingFileIsConfigError) {
  EXPECT_THROW(load_tweets("/nonexistent/tweets.jsonl"), ConfigError);
}

TEST(Location, SubstringMatch) {
  auto t = tweet("1", "a", "x");
  t.user_location = "Santiago, Chile";
  std::vector<TweetRecord> v{t};
  std::vector<std::string> g{"chile", "santiago"};
  EXPECT_EQ(filter_by_location(v, g).size(), 1u);
}

TEST(Location, AbsentExcluded) {
  std::vector<TweetRecord> v{tweet("1", "a", "x")};
  std::vector<std::string> g{"chile"};
  EXPECT_TRUE(filter_by_location(v, g).empty());
}

TEST(Location, NoMatchExcluded) {
  auto t = tweet("1", "a", "x");
  t.user_location = "Lima, Perú";
  std::vector<TweetRecord> v{t};
  std::vector<std::string> g{"chile"};
  EXPECT_TRUE(filter_by_location(v, g).empty());
}

TEST(Location, CaseInsensitiveAndIdempotent) {
  std::vector<TweetRecord> v;
  const char* places[] = {"VALPARAÍSO", "lima", "Concepción, CHILE", "", "santiago centro"};
  for (int i = 0; i < 5; ++i) {
    auto t = tweet(std::to_string(i), "u", "x");
    t.user_location = places[i];
    v.push_back(t);
  }
  std::vector<std::string> g{"valparaíso", "chile", "santiago"};
  const auto once = filter_by_location(v, g);
  EXPECT_EQ(once.size(), 3u);
  EXPECT_EQ(filter_by_location(once, g), once);
}

TEST(Gazetteer, SkipsCommentsAndBlanks) {
  std::istringstream in("# places\nChile\n\n  Santiago \n");
  EXPECT_EQ(parse_gazetteer(in), (std::vector<std::string>{"chile", "santiago"}));
}

TEST(KnowledgeBase, ParseAndValidate) {
  const auto kb = parse_knowledge_base(R"({"issues":[{"name":"abortion",
    "stances":[{"name":"pro-choice","keywords":["#abortolibre"]},{"name":"pro-life","keywords":["#provida"]}],
    "general_keywords":["aborto"]}]})");
  ASSERT_EQ(kb.issues.size(), 1u);
  EXPECT_EQ(kb.stance_names(), (std::vector<std::string>{"pro-choice", "pro-life"}));
  EXPECT_TRUE(kb.issues[0].vocabulary_keywords().contains("aborto"));
  const auto back = parse_knowledge_base(knowledge_base_to_json(kb));
  EXPECT_EQ(back.stance_names(), kb.stance_names());
}

TEST(KnowledgeBase, ShippedExampleLoads) {
  const auto kb = load_knowledge_base(std::filesystem::path(ITOPICS_DOCS_DIR) / "knowledge_base.example.json");
  ASSERT_EQ(kb.issues.size(), 1u);
  EXPECT_EQ(kb.stance_names(), (std::vector<std::string>{"pro-choice", "pro-life"}));
  EXPECT_TRUE(kb.issues[0].vocabulary_keywords().contains("decidir"));
}

TEST(KnowledgeBase, OverlappingKeywordsRejected) {
  EXPECT_THROW(parse_knowledge_base(R"({"issues":[{"name":"x",
    "stances":[{"name":"a","keywords":["k"]},{"name":"b","keywords":["k"]}]}]})"),
               ConfigError);
}

TEST(KnowledgeBase, SingleStanceRejected) {
  EXPECT_THROW(parse_knowledge_base(R"({"issues":[{"name":"x","stances":[{"name":"a","keywords":["k"]}]}]})"),
               ConfigError);
}

TEST(KnowledgeBase, UppercaseKeywordRejected) {
  EXPECT_THROW(parse_knowledge_base(R"({"issues":[{"name":"x",
    "stances":[{"name":"a","keywords":["#ProVida"]},{"name":"b","keywords":["k"]}]}]})"),
               ConfigError);
}

TEST(Documents, RepliesExcludedByDefault) {
  const auto kb = itopics::testing::abortion_kb();
  std::vector<TweetRecord> v{tweet("1", "a", "hola mundo"), itopics::testing::reply("2", "a", "b")};
  v[1].text = "respuesta";
  const auto docs = build_user_documents(v, kb);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].num_tweets, 1u);
  EXPECT_FALSE(docs[0].token_counts.contains("respuesta"));

  const auto with = build_user_documents(v, kb, true);
  ASSERT_EQ(with.size(), 1u);
  EXPECT_EQ(with[0].num_tweets, 2u);
  EXPECT_EQ(with[0].token_counts.at("respuesta"), 1u);
}

TEST(Documents, OnlyRepliesMeansNoDocument) {
  const auto kb = itopics::testing::abortion_kb();
  std::vector<TweetRecord> v{itopics::testing::reply("1", "a", "b")};
  EXPECT_TRUE(build_user_documents(v, kb).empty());
}

TEST(Documents, KeywordHitsIncludingPhrases) {
  const auto kb = itopics::testing::abortion_kb();
  std::vector<TweetRecord> v{tweet("1", "a", "Por el derecho a decidir #AbortoLibre"),
                             tweet("2", "a", "derecho decidir no cuenta")};
  const auto docs = build_user_documents(v, kb);
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].hits("pro-choice"), 2u);
  EXPECT_EQ(docs[0].hits("pro-life"), 0u);
}

TEST(Documents, PermutationInvariantAndTweetCountConserved) {
  const auto kb = itopics::testing::abortion_kb();
  std::vector<TweetRecord> v;
  std::mt19937_64 rng(5);
  const char* words[] = {"aborto", "vida", "#provida", "ley", "mujer", "!!!", "http://x.co"};
  for (int i = 0; i < 200; ++i) {
    std::string text;
    for (int w = 0; w < 4; ++w) text += std::string(words[rng() % 7]) + " ";
    auto t = tweet(std::to_string(i), "u" + std::to_string(rng() % 17), text,
                   rng() % 4 == 0 ? TweetKind::reply : TweetKind::original);
    if (t.kind == TweetKind::reply) t.reply_to_user = "u0";
    v.push_back(t);
  }
  const auto docs = build_user_documents(v, kb);
  std::size_t expected = 0;
  for (const auto& t : v) {
    if (t.kind != TweetKind::reply && !tokenize(t.text).empty()) ++expected;
  }
  std::size_t total = 0;
  for (const auto& d : docs) total += d.num_tweets;
  EXPECT_EQ(total, expected);

  std::shuffle(v.begin(), v.end(), rng);
  const auto again = build_user_documents(v, kb);
  ASSERT_EQ(again.size(), docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    EXPECT_EQ(again[i].user_id, docs[i].user_id);
    EXPECT_EQ(again[i].token_counts, docs[i].token_counts);
  }
}

TEST(RegularUsers, ThresholdAndMissingCounts) {
  const auto kb = itopics::testing::abortion_kb();
  auto a = tweet("1", "a", "hola");
  a.following_count = 150;
  a.followers_count = 90;
  auto b = tweet("2", "b", "hola");
  b.following_count = 2500;
  b.followers_count = 100;
  auto c = tweet("3", "c", "hola");
  std::vector<TweetRecord> v{a, b, c};
  const auto docs = build_user_documents(v, kb);
  const auto sel = select_regular_users(docs, v, 2000);
  EXPECT_EQ(sel.kept, std::vector<std::string>{"a"});
  EXPECT_EQ(sel.excluded_over_limit, 1u);
  EXPECT_EQ(sel.excluded_missing_counts, 1u);
}

TEST(RegularUsers, LatestCountsWin) {
  const auto kb = itopics::testing::abortion_kb();
  auto early = tweet("1", "a", "hola", TweetKind::original, 100);
  early.following_count = 5000;
  early.followers_count = 10;
  auto late = tweet("2", "a", "hola", TweetKind::original, 200);
  late.following_count = 50;
  late.followers_count = 10;
  std::vector<TweetRecord> v{late, early};
  const auto docs = build_user_documents(v, kb);
  EXPECT_EQ(select_regular_users(docs, v).kept, std::vector<std::string>{"a"});
}
