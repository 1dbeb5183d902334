#include "itopics/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "itopics/error.hpp"

namespace itopics {

using nlohmann::json;

std::string_view to_string(TweetKind kind) noexcept {
  switch (kind) {
    case TweetKind::original: return "original";
    case TweetKind::retweet: return "retweet";
    case TweetKind::reply: return "reply";
  }
  return "original";
}

std::optional<TweetKind> parse_tweet_kind(std::string_view text) noexcept {
  if (text == "original") return TweetKind::original;
  if (text == "retweet") return TweetKind::retweet;
  if (text == "reply") return TweetKind::reply;
  return std::nullopt;
}

namespace {

bool parse_int(std::string_view text, int& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) noexcept {
  // YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]
  if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':') {
    return std::nullopt;
  }
  int y, mo, d, h, mi, s;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) || !parse_int(text.substr(8, 2), d) ||
      !parse_int(text.substr(11, 2), h) || !parse_int(text.substr(14, 2), mi) || !parse_int(text.substr(17, 2), s)) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;

  std::string_view rest = text.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    std::size_t i = 1;
    while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
    rest.remove_prefix(i);
  }
  int offset_minutes = 0;
  if (rest == "Z" || rest.empty()) {
    // UTC
  } else if ((rest.front() == '+' || rest.front() == '-') && rest.size() == 6 && rest[3] == ':') {
    int oh, om;
    if (!parse_int(rest.substr(1, 2), oh) || !parse_int(rest.substr(4, 2), om)) return std::nullopt;
    offset_minutes = (oh * 60 + om) * (rest.front() == '-' ? -1 : 1);
  } else {
    return std::nullopt;
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} - minutes{offset_minutes};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(ts);
  const year_month_day ymd{days};
  const hh_mm_ss hms{ts - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

namespace {

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw std::invalid_argument(std::string(key) + " must be a string");
  return it->get<std::string>();
}

std::optional<std::uint64_t> optional_count(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
    throw std::invalid_argument(std::string(key) + " must be a nonnegative integer");
  }
  return it->get<std::uint64_t>();
}

std::string required_string(const json& obj, const char* key) {
  auto value = optional_string(obj, key);
  if (!value || value->empty()) throw std::invalid_argument(std::string("missing ") + key);
  return *value;
}

TweetRecord tweet_from_json(const json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("not a JSON object");
  TweetRecord t;
  t.tweet_id = required_string(obj, "tweet_id");
  t.user_id = required_string(obj, "user_id");
  t.text = optional_string(obj, "text").value_or("");

  auto created = obj.find("created_at");
  if (created == obj.end()) throw std::invalid_argument("missing created_at");
  if (created->is_number_integer()) {
    t.created_at = Timestamp{std::chrono::seconds{created->get<std::int64_t>()}};
  } else if (created->is_string()) {
    auto ts = parse_timestamp(created->get<std::string>());
    if (!ts) throw std::invalid_argument("bad created_at");
    t.created_at = *ts;
  } else {
    throw std::invalid_argument("bad created_at");
  }

  const auto kind_text = optional_string(obj, "kind").value_or("original");
  const auto kind = parse_tweet_kind(kind_text);
  if (!kind) throw std::invalid_argument("unknown kind '" + kind_text + "'");
  t.kind = *kind;
  t.reply_to_user = optional_string(obj, "reply_to_user");
  t.retweet_of_user = optional_string(obj, "retweet_of_user");
  if (t.kind == TweetKind::reply && (!t.reply_to_user || t.reply_to_user->empty())) {
    throw std::invalid_argument("reply without reply_to_user");
  }
  if (t.kind == TweetKind::retweet && (!t.retweet_of_user || t.retweet_of_user->empty())) {
    throw std::invalid_argument("retweet without retweet_of_user");
  }
  if (auto m = obj.find("mentions"); m != obj.end() && !m->is_null()) {
    if (!m->is_array()) throw std::invalid_argument("mentions must be an array");
    for (const auto& item : *m) {
      if (!item.is_string()) throw std::invalid_argument("mentions must hold strings");
      t.mentions.push_back(item.get<std::string>());
    }
  }
  t.user_location = optional_string(obj, "user_location");
  t.following_count = optional_count(obj, "following_count");
  t.followers_count = optional_count(obj, "followers_count");
  return t;
}

}  // namespace

TweetLoadResult parse_tweets(std::istream& in) {
  TweetLoadResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      TweetRecord t = tweet_from_json(json::parse(line));
      if (!seen.insert(t.tweet_id).second) {
        ++result.duplicates;
        continue;
      }
      result.tweets.push_back(std::move(t));
    } catch (const std::exception& e) {
      ++result.skipped_malformed;
      result.warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return result;
}

TweetLoadResult load_tweets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read tweets file " + path.string());
  return parse_tweets(in);
}

std::string tweet_to_json(const TweetRecord& t) {
  json obj = json::object();
  obj["tweet_id"] = t.tweet_id;
  obj["user_id"] = t.user_id;
  obj["text"] = t.text;
  obj["created_at"] = format_timestamp(t.created_at);
  obj["kind"] = std::string(to_string(t.kind));
  if (t.reply_to_user) obj["reply_to_user"] = *t.reply_to_user;
  if (t.retweet_of_user) obj["retweet_of_user"] = *t.retweet_of_user;
  obj["mentions"] = t.mentions;
  if (t.user_location) obj["user_location"] = *t.user_location;
  if (t.following_count) obj["following_count"] = *t.following_count;
  if (t.followers_count) obj["followers_count"] = *t.followers_count;
  return obj.dump();
}

void write_tweets(std::ostream& out, std::span<const TweetRecord> tweets) {
  for (const auto& t : tweets) out << tweet_to_json(t) << '\n';
}

const Stance* Issue::find_stance(std::string_view stance_name) const noexcept {
  for (const auto& s : stances) {
    if (s.name == stance_name) return &s;
  }
  return nullptr;
}

std::set<std::string, std::less<>> Issue::vocabulary_keywords() const {
  std::set<std::string, std::less<>> words;
  auto add = [&](const std::vector<std::string>& list) {
    for (const auto& w : list) {
      for (auto& token : tokenize(w)) words.insert(std::move(token));
    }
  };
  for (const auto& s : stances) add(s.keywords);
  add(general_keywords);
  add(related_hashtags);
  add(contingency_words);
  return words;
}

const Issue* IssueKnowledgeBase::find_issue(std::string_view issue_name) const noexcept {
  for (const auto& issue : issues) {
    if (issue.name == issue_name) return &issue;
  }
  return nullptr;
}

std::vector<std::string> IssueKnowledgeBase::stance_names() const {
  std::vector<std::string> names;
  for (const auto& issue : issues) {
    for (const auto& s : issue.stances) names.push_back(s.name);
  }
  return names;
}

void validate(const IssueKnowledgeBase& kb) {
  if (kb.issues.empty()) throw ConfigError("knowledge base has no issues");
  std::set<std::string, std::less<>> issue_names;
  std::set<std::string, std::less<>> stance_names;
  for (const auto& issue : kb.issues) {
    if (!issue_names.insert(issue.name).second) throw ConfigError("duplicate issue '" + issue.name + "'");
    if (issue.stances.size() < 2) throw ConfigError("issue '" + issue.name + "' needs at least two stances");
    std::map<std::string, std::string, std::less<>> owner;
    for (const auto& stance : issue.stances) {
      if (stance.name.empty()) throw ConfigError("unnamed stance in issue '" + issue.name + "'");
      if (!stance_names.insert(stance.name).second) throw ConfigError("duplicate stance '" + stance.name + "'");
      if (stance.keywords.empty()) throw ConfigError("stance '" + stance.name + "' has no keywords");
      for (const auto& kw : stance.keywords) {
        if (to_lower_utf8(kw) != kw) throw ConfigError("keyword '" + kw + "' is not lowercase");
        if (tokenize(kw).empty()) throw ConfigError("keyword '" + kw + "' has no tokens");
        auto [it, inserted] = owner.emplace(kw, stance.name);
        if (!inserted && it->second != stance.name) {
          throw ConfigError("keyword '" + kw + "' belongs to both '" + it->second + "' and '" + stance.name + "'");
        }
      }
    }
  }
}

namespace {

std::vector<std::string> string_list(const json& obj, const char* key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw ConfigError(std::string(key) + " must be a list");
  for (const auto& item : *it) {
    if (!item.is_string()) throw ConfigError(std::string(key) + " must hold strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

IssueKnowledgeBase parse_knowledge_base(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("knowledge base: ") + e.what());
  }
  if (!root.is_object() || !root.contains("issues") || !root["issues"].is_array()) {
    throw ConfigError("knowledge base: expected an object with an 'issues' list");
  }
  IssueKnowledgeBase kb;
  for (const auto& item : root["issues"]) {
    if (!item.is_object() || !item.contains("name") || !item["name"].is_string()) {
      throw ConfigError("knowledge base: every issue needs a name");
    }
    Issue issue;
    issue.name = item["name"].get<std::string>();
    if (!item.contains("stances") || !item["stances"].is_array()) {
      throw ConfigError("knowledge base: issue '" + issue.name + "' needs a stances list");
    }
    for (const auto& s : item["stances"]) {
      if (!s.is_object() || !s.contains("name") || !s["name"].is_string()) {
        throw ConfigError("knowledge base: every stance needs a name");
      }
      issue.stances.push_back({s["name"].get<std::string>(), string_list(s, "keywords")});
    }
    issue.general_keywords = string_list(item, "general_keywords");
    issue.related_hashtags = string_list(item, "related_hashtags");
    issue.relevant_accounts = string_list(item, "relevant_accounts");
    issue.contingency_words = string_list(item, "contingency_words");
    kb.issues.push_back(std::move(issue));
  }
  validate(kb);
  return kb;
}

IssueKnowledgeBase load_knowledge_base(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read knowledge base " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_knowledge_base(buf.str());
}

std::string knowledge_base_to_json(const IssueKnowledgeBase& kb) {
  json issues = json::array();
  for (const auto& issue : kb.issues) {
    json stances = json::array();
    for (const auto& s : issue.stances) stances.push_back({{"name", s.name}, {"keywords", s.keywords}});
    issues.push_back({{"name", issue.name},
                      {"stances", stances},
                      {"general_keywords", issue.general_keywords},
                      {"related_hashtags", issue.related_hashtags},
                      {"relevant_accounts", issue.relevant_accounts},
                      {"contingency_words", issue.contingency_words}});
  }
  return json{{"issues", issues}}.dump(2) + "\n";
}

std::vector<std::string> parse_gazetteer(std::istream& in) {
  std::vector<std::string> places;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    places.push_back(to_lower_utf8(line.substr(first, last - first + 1)));
  }
  return places;
}

std::vector<std::string> load_gazetteer(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read gazetteer " + path.string());
  return parse_gazetteer(in);
}

std::vector<TweetRecord> filter_by_location(std::span<const TweetRecord> tweets,
                                            std::span<const std::string> gazetteer) {
  if (gazetteer.empty()) throw std::invalid_argument("filter_by_location: empty gazetteer");
  std::vector<std::string> places;
  for (const auto& g : gazetteer) {
    if (!g.empty()) places.push_back(to_lower_utf8(g));
  }
  std::vector<TweetRecord> kept;
  std::unordered_map<std::string, bool> verdicts;  // locations repeat per user
  for (const auto& t : tweets) {
    if (!t.user_location) continue;
    auto [it, inserted] = verdicts.try_emplace(*t.user_location, false);
    if (inserted) {
      const std::string loc = to_lower_utf8(*t.user_location);
      it->second = std::any_of(places.begin(), places.end(),
                               [&](const std::string& p) { return loc.find(p) != std::string::npos; });
    }
    if (it->second) kept.push_back(t);
  }
  return kept;
}

std::uint32_t UserDocument::hits(std::string_view stance) const noexcept {
  auto it = stance_keyword_hits.find(stance);
  return it == stance_keyword_hits.end() ? 0 : it->second;
}

namespace {

// Stance keyword patterns tokenized once. Single-token keywords are looked up
// per token; multi-token keywords are matched as contiguous runs.
class KeywordMatcher {
 public:
  explicit KeywordMatcher(const IssueKnowledgeBase& kb) {
    for (const auto& issue : kb.issues) {
      for (const auto& stance : issue.stances) {
        for (const auto& kw : stance.keywords) {
          auto pattern = tokenize(kw);
          if (pattern.size() == 1) {
            single_[pattern.front()].push_back(stance.name);
          } else if (pattern.size() > 1) {
            multi_.push_back({std::move(pattern), stance.name});
          }
        }
      }
    }
  }

  void count(std::span<const std::string> tokens, std::map<std::string, std::uint32_t, std::less<>>& hits) const {
    for (const auto& token : tokens) {
      auto it = single_.find(token);
      if (it == single_.end()) continue;
      for (const auto& stance : it->second) ++hits[stance];
    }
    for (const auto& [pattern, stance] : multi_) {
      if (pattern.size() > tokens.size()) continue;
      for (std::size_t i = 0; i + pattern.size() <= tokens.size(); ++i) {
        if (std::equal(pattern.begin(), pattern.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
          ++hits[stance];
        }
      }
    }
  }

 private:
  std::unordered_map<std::string, std::vector<std::string>> single_;
  std::vector<std::pair<std::vector<std::string>, std::string>> multi_;
};

}  // namespace

std::map<std::string, std::uint32_t, std::less<>> count_stance_keywords(std::span<const std::string> tokens,
                                                                         const IssueKnowledgeBase& kb) {
  std::map<std::string, std::uint32_t, std::less<>> hits;
  KeywordMatcher(kb).count(tokens, hits);
  return hits;
}

std::vector<UserDocument> build_user_documents(std::span<const TweetRecord> tweets, const IssueKnowledgeBase& kb,
                                               bool include_replies) {
  const KeywordMatcher matcher(kb);
  std::map<std::string, UserDocument, std::less<>> by_user;
  for (const auto& t : tweets) {
    if (t.kind == TweetKind::reply && !include_replies) continue;
    const auto tokens = tokenize(t.text);
    if (tokens.empty()) continue;
    auto& doc = by_user[t.user_id];
    doc.user_id = t.user_id;
    ++doc.num_tweets;
    for (const auto& token : tokens) ++doc.token_counts[token];
    matcher.count(tokens, doc.stance_keyword_hits);
  }
  std::vector<UserDocument> docs;
  docs.reserve(by_user.size());
  for (auto& [id, doc] : by_user) docs.push_back(std::move(doc));
  return docs;
}

RegularUserSelection select_regular_users(std::span<const UserDocument> docs, std::span<const TweetRecord> tweets,
                                          std::uint64_t max_degree) {
  struct Counts {
    Timestamp at;
    std::uint64_t following;
    std::uint64_t followers;
  };
  std::unordered_map<std::string, Counts> latest;
  for (const auto& t : tweets) {
    if (!t.following_count || !t.followers_count) continue;
    const Counts c{t.created_at, *t.following_count, *t.followers_count};
    auto [it, inserted] = latest.try_emplace(t.user_id, c);
    // Latest tweet wins; same-second ties take the larger counts so the
    // result does not depend on input order.
    const auto key = [](const Counts& x) { return std::tuple(x.at, x.following, x.followers); };
    if (!inserted && key(c) > key(it->second)) it->second = c;
  }
  RegularUserSelection sel;
  for (const auto& doc : docs) {
    auto it = latest.find(doc.user_id);
    if (it == latest.end()) {
      ++sel.excluded_missing_counts;
    } else if (it->second.following < max_degree && it->second.followers < max_degree) {
      sel.kept.push_back(doc.user_id);
    } else {
      ++sel.excluded_over_limit;
    }
  }
  std::sort(sel.kept.begin(), sel.kept.end());
  return sel;
}

}  // namespace itopics
