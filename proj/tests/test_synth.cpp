#include <gtest/gtest.h>

#include <set>

#include "helpers.hpp"
#include "itopics/error.hpp"
#include "itopics/homophily.hpp"
#include "itopics/synth.hpp"

using namespace itopics;

namespace {

synth::SynthConfig small(std::uint64_t seed = 3) {
  synth::SynthConfig c;
  c.num_users = 200;
  c.seed = seed;
  return c;
}

StanceLabels truth_labels(const synth::SynthCorpus& corpus) {
  StanceLabels labels;
  for (std::size_t u = 0; u < corpus.truth.user_ids.size(); ++u) {
    labels[corpus.truth.user_ids[u]] = corpus.truth.stance_names[corpus.truth.user_stance[u]];
  }
  return labels;
}

}  // namespace

TEST(Synth, SameSeedSameCorpus) {
  const auto a = synth::generate_corpus(small());
  const auto b = synth::generate_corpus(small());
  EXPECT_EQ(a.tweets, b.tweets);
  EXPECT_EQ(synth::ground_truth_to_json(a.truth), synth::ground_truth_to_json(b.truth));
  const auto c = synth::generate_corpus(small(4));
  EXPECT_NE(a.tweets, c.tweets);
}

TEST(Synth, SerialMatchesParallel) {
  const auto a = synth::generate_corpus(small(), Exec::serial);
  const auto b = synth::generate_corpus(small(), Exec::parallel);
  EXPECT_EQ(a.tweets, b.tweets);
}

TEST(Synth, TweetsSortedWithUniqueIds) {
  const auto c = synth::generate_corpus(small());
  std::set<std::string> ids;
  for (std::size_t i = 0; i < c.tweets.size(); ++i) {
    EXPECT_TRUE(ids.insert(c.tweets[i].tweet_id).second);
    if (i > 0) EXPECT_LT(c.tweets[i - 1].tweet_id, c.tweets[i].tweet_id);
  }
}

TEST(Synth, TopicRolesAndSupport) {
  auto cfg = small();
  cfg.num_users = 600;
  const auto c = synth::generate_corpus(cfg);
  ASSERT_EQ(c.truth.topics.size(), cfg.num_topics());
  for (const auto& t : c.truth.topics) {
    ASSERT_EQ(t.supporters_by_stance.size(), 2u);
    if (t.role == synth::TopicRole::bridge) {
      EXPECT_FALSE(t.stance.has_value());
      EXPECT_GT(t.supporters_by_stance[0], 0u);
      EXPECT_GT(t.supporters_by_stance[1], 0u);
    } else {
      ASSERT_TRUE(t.stance.has_value());
      EXPECT_GT(t.supporters_by_stance[*t.stance], 0u);
      EXPECT_EQ(t.supporters_by_stance[1 - *t.stance], 0u);  // no leakage configured
    }
    EXPECT_EQ(t.words.size(), t.word_probs.size());
  }
}

TEST(Synth, KnowledgeBaseMatchesConfig) {
  const auto cfg = small();
  const auto c = synth::generate_corpus(cfg);
  ASSERT_EQ(c.knowledge_base.issues.size(), 1u);
  const auto& issue = c.knowledge_base.issues[0];
  EXPECT_EQ(issue.name, cfg.issue_name);
  ASSERT_EQ(issue.stances.size(), 2u);
  EXPECT_EQ(issue.stances[0].name, cfg.stance_names[0]);
  EXPECT_EQ(issue.stances[1].keywords, cfg.stance_keywords[1]);
}

TEST(Synth, ValidationRejectsBadConfigs) {
  auto c = small();
  c.stance_split = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small();
  c.tweets_min = 5;
  c.tweets_max = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small();
  c.homophily_strength = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small();
  c.vocab_size = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small();
  c.issue_word_mass_spread = 2.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Synth, StrongHomophilyIsDetected) {
  auto cfg = small(11);
  cfg.num_users = 800;
  cfg.homophily_strength = 0.95;
  const auto c = synth::generate_corpus(cfg);
  const auto labels = truth_labels(c);
  const auto g = extract_two_way_interactions(c.tweets, labels);
  ASSERT_GT(g.edges.size(), 500u);
  const auto r = homophily_test(g, {{cfg.stance_names[0], cfg.stance_split}, {cfg.stance_names[1], 1 - cfg.stance_split}});
  for (const auto& s : r.per_stance) {
    EXPECT_LT(s.test.p_value, 1e-3) << s.stance;
    EXPECT_GT(s.same / s.total, 0.9);
  }
}

TEST(Synth, WriteCorpusFiles) {
  const auto c = synth::generate_corpus(small());
  itopics::testing::TempDir dir;
  synth::write_corpus(c, dir.path() / "out");
  for (const char* f : {"tweets.jsonl", "knowledge_base.json", "gazetteer.txt", "ground_truth.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "out" / f)) << f;
  }
  const auto back = load_tweets(dir.path() / "out" / "tweets.jsonl");
  EXPECT_EQ(back.tweets, c.tweets);
  EXPECT_NO_THROW(load_knowledge_base(dir.path() / "out" / "knowledge_base.json"));
}
