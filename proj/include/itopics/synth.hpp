#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "itopics/corpus.hpp"
#include "itopics/parallel.hpp"

namespace itopics::synth {

enum class TextModel {
  lda,                 // every word draws its own topic from the user's mixture
  mixture_of_unigrams  // every tweet draws a single topic
};

enum class TopicRole { bridge, partisan };

struct SynthConfig {
  std::uint32_t num_users = 1000;
  double stance_split = 0.55;  // fraction of users in stance 0
  // Probability that a two-way interaction partner shares the initiator's
  // stance. Empty: partners drawn uniformly from all users (random mixing).
  std::optional<double> homophily_strength = 0.75;
  std::uint32_t bridge_topics = 5;
  std::uint32_t partisan_topics_per_stance = 5;
  // Per partisan topic (indexed within its stance), probability that a user
  // of the other stance also takes up the topic. Missing entries are 0.
  std::vector<double> partisan_leakage;
  std::uint32_t tweets_min = 10;
  std::uint32_t tweets_max = 20;
  std::uint32_t words_per_tweet = 12;
  std::uint32_t vocab_size = 500;  // topic words, split into one block per topic
  double word_zipf_exponent = 0.8;
  double user_topic_concentration = 0.5;  // Dirichlet over a user's topics
  // Issue words ("aborto", ...): each topic gives them this much mass, spread
  // uniformly, so issue vocabulary is planted across all topics alike.
  double issue_word_mass = 0.0;
  // Per-topic variation of that mass: topic t gets
  // issue_word_mass * (1 + spread * (2u - 1)), u uniform, independent of role.
  double issue_word_mass_spread = 0.0;
  // Probability that a user is vocal, i.e. tags tweets with own-stance
  // keywords; a vocal user's tweet carries one with keyword_tweet_prob.
  double vocal_user_prob = 0.4;
  double keyword_tweet_prob = 0.3;
  double interactions_per_user = 2.0;
  double one_way_per_user = 1.0;  // unanswered mentions
  double reply_noise_per_user = 0.0;
  double foreign_location_prob = 0.05;
  double popular_user_prob = 0.03;  // following or followers above 2000
  TextModel text_model = TextModel::lda;
  bool emit_text = true;
  std::vector<std::string> stance_names{"pro-choice", "pro-life"};
  std::vector<std::vector<std::string>> stance_keywords{
      {"#abortolibre", "#yoabortoel25", "#abortolegal", "#yoaborto", "#derechoadecidir"},
      {"#provida", "#noalaborto", "#sialavida", "#siempreporlavida", "#somosprovida"}};
  std::vector<std::string> issue_words{"aborto", "embarazo", "feto", "interrupcion", "terapeutico"};
  std::string issue_name = "abortion";
  std::uint64_t seed = 7;

  std::uint32_t num_topics() const noexcept { return bridge_topics + 2 * partisan_topics_per_stance; }
  // Throws ConfigError.
  void validate() const;
};

struct PlantedTopic {
  std::uint32_t id = 0;
  TopicRole role = TopicRole::bridge;
  std::optional<std::uint32_t> stance;  // partisan topics only
  std::vector<std::string> words;       // the topic's word block
  std::vector<double> word_probs;       // over `words`
  std::vector<std::uint32_t> supporters_by_stance;
};

struct GroundTruth {
  std::vector<std::string> user_ids;
  std::vector<std::uint32_t> user_stance;  // index into stance_names
  std::vector<std::vector<std::uint32_t>> user_topics;
  std::vector<PlantedTopic> topics;
  std::vector<std::string> stance_names;
};

struct SynthCorpus {
  std::vector<TweetRecord> tweets;  // sorted by tweet_id
  IssueKnowledgeBase knowledge_base;
  std::vector<std::string> gazetteer;
  GroundTruth truth;
};

SynthCorpus generate_corpus(const SynthConfig& config, Exec exec = Exec::parallel);

std::string to_string(TopicRole role);
std::string ground_truth_to_json(const GroundTruth& truth);

// Writes tweets.jsonl, knowledge_base.json, gazetteer.txt and
// ground_truth.json into dir (created when missing).
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace itopics::synth
