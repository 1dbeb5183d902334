#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itopics/corpus.hpp"
#include "itopics/textproc.hpp"

namespace itopics {

struct LdaConfig {
  std::uint32_t k = 200;
  std::optional<double> alpha;  // defaults to 50 / k
  double beta = 0.01;
  std::uint32_t iterations = 1000;
  std::uint32_t burn_in = 800;
  std::uint64_t seed = 1;
  // Verify count conservation after every sweep (throws PipelineError).
  bool check_invariants = false;

  double alpha_value() const noexcept { return alpha ? *alpha : 50.0 / k; }
  // Throws ConfigError.
  void validate() const;
};

// A document as the sampler sees it: vocabulary indices, one per token
// occurrence, grouped by index.
struct BagOfWords {
  std::string user_id;
  std::vector<std::uint32_t> tokens;
};

// In-vocabulary tokens of each document; documents left empty are skipped
// and their ids appended to `dropped` when given.
std::vector<BagOfWords> to_bags(std::span<const UserDocument> docs, const Vocabulary& vocab,
                                std::vector<std::string>* dropped = nullptr);

class TopicModel {
 public:
  TopicModel() = default;
  TopicModel(LdaConfig config, std::vector<std::string> vocab_tokens, std::vector<std::string> user_ids,
             std::vector<double> phi, std::vector<double> theta, std::vector<double> log_likelihood);

  std::size_t num_topics() const noexcept { return config_.k; }
  std::size_t vocab_size() const noexcept { return vocab_tokens_.size(); }
  std::size_t num_users() const noexcept { return user_ids_.size(); }
  const LdaConfig& config() const noexcept { return config_; }

  // P(w | t), row t.
  std::span<const double> phi(std::size_t topic) const;
  // P(t | u), row u.
  std::span<const double> theta(std::size_t user) const;
  std::span<const std::string> user_ids() const noexcept { return user_ids_; }
  std::span<const std::string> vocab_tokens() const noexcept { return vocab_tokens_; }
  std::span<const double> log_likelihood() const noexcept { return log_likelihood_; }
  std::optional<std::size_t> user_index(std::string_view user_id) const;
  std::optional<std::uint32_t> token_index(std::string_view token) const;

  // Text format, see docs/formats.md. Doubles use 17 significant digits.
  void write(std::ostream& out) const;
  static TopicModel read(std::istream& in);

 private:
  LdaConfig config_;
  std::vector<std::string> vocab_tokens_;
  std::vector<std::string> user_ids_;
  std::vector<double> phi_;    // k x |V|
  std::vector<double> theta_;  // |U| x k
  std::vector<double> log_likelihood_;
};

struct GibbsSweepInfo {
  std::uint32_t sweep = 0;
  double log_likelihood = 0.0;
};

// Collapsed Gibbs sampling. phi and theta are averaged over the sweeps after
// burn_in. Deterministic for a given seed. Throws PipelineError for an empty
// corpus and ConfigError for an invalid configuration.
TopicModel fit_lda(std::span<const BagOfWords> docs, const Vocabulary& vocab, const LdaConfig& config,
                   const std::function<void(const GibbsSweepInfo&)>& on_sweep = {});

// Theta row of a user; throws std::out_of_range for unknown users.
std::vector<double> doc_topic_dist(const TopicModel& model, std::string_view user_id);

// sum of P(w | t) over the distinct in-vocabulary keywords.
double keyword_topic_prob(const TopicModel& model, const std::set<std::string, std::less<>>& keywords,
                          std::size_t topic);

// The n most probable words of a topic, ties broken by index.
std::vector<std::uint32_t> top_words(const TopicModel& model, std::size_t topic, std::size_t n);

}  // namespace itopics
