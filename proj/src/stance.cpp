#include "itopics/stance.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "format.hpp"
#include "itopics/error.hpp"

namespace itopics {

SeedMap find_seed_users(std::span<const UserDocument> docs, const IssueKnowledgeBase& kb, std::string_view issue_name) {
  const Issue* issue = kb.find_issue(issue_name);
  if (!issue) throw PipelineError("unknown issue '" + std::string(issue_name) + "'");
  if (issue->stances.size() < 2) throw PipelineError("issue '" + issue->name + "' needs at least two stances");

  SeedMap seeds;
  for (const auto& stance : issue->stances) seeds[stance.name];
  for (const auto& doc : docs) {
    const Stance* only = nullptr;
    bool mixed = false;
    for (const auto& stance : issue->stances) {
      if (doc.hits(stance.name) == 0) continue;
      if (only) {
        mixed = true;
        break;
      }
      only = &stance;
    }
    if (only && !mixed) seeds[only->name].push_back(doc.user_id);
  }
  for (auto& [stance, users] : seeds) {
    if (users.empty()) {
      throw PipelineError("stance '" + stance + "' has no seed users: no document uses its keywords exclusively");
    }
    std::sort(users.begin(), users.end());
  }
  return seeds;
}

std::vector<std::string> StanceVectorSet::names() const {
  std::vector<std::string> out;
  for (const auto& s : stances) out.push_back(s.stance);
  return out;
}

std::size_t StanceVectorSet::index_of(std::string_view stance) const {
  for (std::size_t i = 0; i < stances.size(); ++i) {
    if (stances[i].stance == stance) return i;
  }
  throw std::out_of_range("unknown stance '" + std::string(stance) + "'");
}

const StanceVector& StanceVectorSet::at(std::string_view stance) const { return stances[index_of(stance)]; }

StanceVectorSet build_stance_vectors(std::span<const UserDocument> docs, const SeedMap& seeds, const Vocabulary& vocab,
                                     std::size_t num_docs, std::span<const std::string> order) {
  std::vector<std::string> names(order.begin(), order.end());
  if (names.empty()) {
    for (const auto& [stance, users] : seeds) names.push_back(stance);
  }
  std::map<std::string_view, const UserDocument*, std::less<>> by_user;
  for (const auto& doc : docs) by_user.emplace(doc.user_id, &doc);

  StanceVectorSet set;
  for (const auto& name : names) {
    auto it = seeds.find(name);
    if (it == seeds.end() || it->second.empty()) throw PipelineError("stance '" + name + "' has no seed users");
    StanceVector sv;
    sv.stance = name;
    sv.seed_users = it->second;
    TokenCounts merged;
    for (const auto& user : it->second) {
      auto doc = by_user.find(user);
      if (doc == by_user.end()) continue;
      sv.seed_tweets += doc->second->num_tweets;
      for (const auto& [token, count] : doc->second->token_counts) merged[token] += count;
    }
    sv.vector = tfidf_vectorize(merged, vocab, num_docs);
    if (sv.vector.empty()) {
      throw PipelineError("stance '" + name + "' has a zero vector: its seeds use no weighted vocabulary");
    }
    set.stances.push_back(std::move(sv));
  }
  return set;
}

UserStanceProfile user_stance_profile(const SparseVector& user_vec, const StanceVectorSet& stances,
                                      const TendencyAxis& axis, std::string user_id) {
  const std::size_t pos = stances.index_of(axis.positive);
  const std::size_t neg = stances.index_of(axis.negative);
  UserStanceProfile p;
  p.user_id = std::move(user_id);
  p.features.reserve(stances.stances.size());
  for (const auto& s : stances.stances) p.features.push_back(cosine_similarity(user_vec, s.vector));
  p.tendency = p.features[pos] - p.features[neg];
  p.label = p.tendency >= 0.0 ? axis.positive : axis.negative;
  return p;
}

namespace {

std::vector<SparseVector> vectorize_serial(std::span<const UserDocument> docs, const Vocabulary& vocab,
                                           std::size_t num_docs) {
  std::vector<SparseVector> out(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) out[i] = tfidf_vectorize(docs[i].token_counts, vocab, num_docs);
  return out;
}

std::vector<SparseVector> vectorize_parallel(std::span<const UserDocument> docs, const Vocabulary& vocab,
                                             std::size_t num_docs) {
  std::vector<SparseVector> out(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = tfidf_vectorize(docs[i].token_counts, vocab, num_docs);
    } catch (...) {
#pragma omp critical(itopics_vectorize_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace

std::vector<SparseVector> vectorize_documents(std::span<const UserDocument> docs, const Vocabulary& vocab,
                                              std::size_t num_docs, Exec exec) {
  return exec == Exec::serial ? vectorize_serial(docs, vocab, num_docs) : vectorize_parallel(docs, vocab, num_docs);
}

std::vector<UserStanceProfile> profile_users(std::span<const UserDocument> docs, const Vocabulary& vocab,
                                             std::size_t num_docs, const StanceVectorSet& stances,
                                             const TendencyAxis& axis, Exec exec) {
  // Fail on a bad axis before entering the parallel region.
  stances.index_of(axis.positive);
  stances.index_of(axis.negative);

  std::vector<UserStanceProfile> out(docs.size());
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      out[i] = user_stance_profile(tfidf_vectorize(docs[i].token_counts, vocab, num_docs), stances, axis,
                                   docs[i].user_id);
    }
    return out;
  }
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = user_stance_profile(tfidf_vectorize(docs[i].token_counts, vocab, num_docs), stances, axis,
                                   docs[i].user_id);
    } catch (...) {
#pragma omp critical(itopics_profile_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

double view_gap(const UserStanceProfile& a, const UserStanceProfile& b) {
  if (a.features.size() != b.features.size()) {
    throw std::invalid_argument("view_gap: profiles have different stance dimensions");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.features.size(); ++i) {
    const double d = a.features[i] - b.features[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::map<std::string, std::string, std::less<>> label_map(std::span<const UserStanceProfile> profiles) {
  std::map<std::string, std::string, std::less<>> labels;
  for (const auto& p : profiles) labels.emplace(p.user_id, p.label);
  return labels;
}

void write_profiles_csv(std::ostream& out, std::span<const UserStanceProfile> profiles,
                        std::span<const std::string> stance_names) {
  out << "user_id";
  for (const auto& s : stance_names) out << ",f_" << detail::csv_field(s);
  out << ",tendency,label\n";
  for (const auto& p : profiles) {
    out << detail::csv_field(p.user_id);
    for (double f : p.features) out << ',' << detail::fmt_exact(f);
    out << ',' << detail::fmt_exact(p.tendency) << ',' << detail::csv_field(p.label) << '\n';
  }
}

std::vector<UserStanceProfile> read_profiles_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("profiles: missing header");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (columns < 3) throw ConfigError("profiles: header needs user_id, features, tendency and label");
  const std::size_t num_features = columns - 2;
  std::vector<UserStanceProfile> profiles;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != columns + 1) throw ConfigError("profiles: bad row '" + line + "'");
    UserStanceProfile p;
    p.user_id = fields[0];
    for (std::size_t i = 0; i < num_features; ++i) p.features.push_back(std::stod(fields[1 + i]));
    p.tendency = std::stod(fields[1 + num_features]);
    p.label = fields[2 + num_features];
    profiles.push_back(std::move(p));
  }
  return profiles;
}

}  // namespace itopics
