#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itopics/textproc.hpp"

namespace itopics {

enum class TweetKind { original, retweet, reply };

std::string_view to_string(TweetKind kind) noexcept;
std::optional<TweetKind> parse_tweet_kind(std::string_view text) noexcept;

using Timestamp = std::chrono::sys_seconds;

// "2013-07-25T14:03:00Z" (fractional seconds and offsets tolerated on input).
std::optional<Timestamp> parse_timestamp(std::string_view text) noexcept;
std::string format_timestamp(Timestamp ts);

struct TweetRecord {
  std::string tweet_id;
  std::string user_id;
  std::string text;
  Timestamp created_at{};
  TweetKind kind = TweetKind::original;
  std::optional<std::string> reply_to_user;
  std::optional<std::string> retweet_of_user;
  std::vector<std::string> mentions;
  std::optional<std::string> user_location;
  std::optional<std::uint64_t> following_count;
  std::optional<std::uint64_t> followers_count;

  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

struct TweetLoadResult {
  std::vector<TweetRecord> tweets;
  std::size_t skipped_malformed = 0;
  std::size_t duplicates = 0;
  std::vector<std::string> warnings;
};

// JSON Lines, one tweet object per line; unknown fields are ignored, blank
// lines are not counted. Duplicate tweet_ids keep their first occurrence.
TweetLoadResult parse_tweets(std::istream& in);
// Throws ConfigError when the file cannot be opened.
TweetLoadResult load_tweets(const std::filesystem::path& path);

// Canonical single-line JSON for a record (the inverse of parse_tweets).
std::string tweet_to_json(const TweetRecord& tweet);
void write_tweets(std::ostream& out, std::span<const TweetRecord> tweets);

struct Stance {
  std::string name;
  std::vector<std::string> keywords;
};

struct Issue {
  std::string name;
  std::vector<Stance> stances;
  std::vector<std::string> general_keywords;
  std::vector<std::string> related_hashtags;
  std::vector<std::string> relevant_accounts;
  std::vector<std::string> contingency_words;

  const Stance* find_stance(std::string_view stance_name) const noexcept;
  // Every keyword the issue lists (stances, general, hashtags, contingency),
  // deduplicated. Accounts are excluded: the tokenizer strips mentions.
  std::set<std::string, std::less<>> vocabulary_keywords() const;
};

struct IssueKnowledgeBase {
  std::vector<Issue> issues;

  const Issue* find_issue(std::string_view issue_name) const noexcept;
  // Stance names are unique across the whole base.
  std::vector<std::string> stance_names() const;
};

// Throws ConfigError: fewer than two stances, overlapping stance keyword
// lists, non-lowercase keywords, duplicate issue or stance names.
void validate(const IssueKnowledgeBase& kb);
IssueKnowledgeBase parse_knowledge_base(std::string_view json_text);
IssueKnowledgeBase load_knowledge_base(const std::filesystem::path& path);
std::string knowledge_base_to_json(const IssueKnowledgeBase& kb);

// One place per line, lowercased, blank lines and '#' comments skipped.
std::vector<std::string> parse_gazetteer(std::istream& in);
std::vector<std::string> load_gazetteer(const std::filesystem::path& path);

// Keeps tweets whose lowercased user_location contains a gazetteer entry.
// Throws std::invalid_argument for an empty gazetteer.
std::vector<TweetRecord> filter_by_location(std::span<const TweetRecord> tweets,
                                            std::span<const std::string> gazetteer);

struct UserDocument {
  std::string user_id;
  TokenCounts token_counts;
  std::uint32_t num_tweets = 0;
  std::map<std::string, std::uint32_t, std::less<>> stance_keyword_hits;

  std::uint32_t hits(std::string_view stance) const noexcept;
};

// One document per user with at least one qualifying tweet, ordered by
// user_id. A tweet qualifies when its kind is original or retweet (or reply
// when include_replies) and it tokenizes to at least one token.
std::vector<UserDocument> build_user_documents(std::span<const TweetRecord> tweets,
                                               const IssueKnowledgeBase& kb,
                                               bool include_replies = false);

// Occurrences of each stance's keywords in a token stream. Multi-word
// keywords count contiguous matches.
std::map<std::string, std::uint32_t, std::less<>> count_stance_keywords(
    std::span<const std::string> tokens, const IssueKnowledgeBase& kb);

struct RegularUserSelection {
  std::vector<std::string> kept;  // sorted
  std::size_t excluded_over_limit = 0;
  std::size_t excluded_missing_counts = 0;
};

// Users with following < max_degree and followers < max_degree, using the
// counts from each user's latest tweet that carries both. Users with no such
// tweet are excluded.
RegularUserSelection select_regular_users(std::span<const UserDocument> docs,
                                          std::span<const TweetRecord> tweets,
                                          std::uint64_t max_degree = 2000);

}  // namespace itopics
