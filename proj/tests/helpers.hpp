#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "itopics/corpus.hpp"

namespace itopics::testing {

inline TweetRecord tweet(std::string id, std::string user, std::string text, TweetKind kind = TweetKind::original,
                         std::int64_t at = 1370044800) {
  TweetRecord t;
  t.tweet_id = std::move(id);
  t.user_id = std::move(user);
  t.text = std::move(text);
  t.kind = kind;
  t.created_at = Timestamp{std::chrono::seconds{at}};
  return t;
}

inline TweetRecord reply(std::string id, std::string user, std::string to, std::int64_t at = 1370044900) {
  auto t = tweet(std::move(id), std::move(user), "ok", TweetKind::reply, at);
  t.reply_to_user = std::move(to);
  return t;
}

inline TweetRecord mention(std::string id, std::string user, std::string target, std::int64_t at = 1370044800) {
  auto t = tweet(std::move(id), std::move(user), "hola @" + target, TweetKind::original, at);
  t.mentions.push_back(std::move(target));
  return t;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "itopics") {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline IssueKnowledgeBase abortion_kb() {
  IssueKnowledgeBase kb;
  Issue issue;
  issue.name = "abortion";
  issue.stances.push_back({"pro-choice", {"#abortolibre", "#abortolegal", "derecho a decidir"}});
  issue.stances.push_back({"pro-life", {"#provida", "#noalaborto", "#sialavida"}});
  issue.general_keywords = {"aborto", "embarazo"};
  kb.issues.push_back(std::move(issue));
  return kb;
}

}  // namespace itopics::testing
