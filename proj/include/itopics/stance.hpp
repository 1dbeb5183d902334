#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itopics/corpus.hpp"
#include "itopics/parallel.hpp"
#include "itopics/textproc.hpp"

namespace itopics {

using SeedMap = std::map<std::string, std::vector<std::string>, std::less<>>;

// A user seeds stance s when their document has at least one keyword of s
// and none of the issue's other stances. Throws PipelineError when the issue
// is unknown or a stance ends up without seeds.
SeedMap find_seed_users(std::span<const UserDocument> docs, const IssueKnowledgeBase& kb,
                        std::string_view issue);

struct StanceVector {
  std::string stance;
  SparseVector vector;
  std::vector<std::string> seed_users;
  std::uint32_t seed_tweets = 0;
};

// Stance vectors in the issue's stance order.
struct StanceVectorSet {
  std::vector<StanceVector> stances;

  std::vector<std::string> names() const;
  const StanceVector& at(std::string_view stance) const;
  std::size_t index_of(std::string_view stance) const;
};

// Per stance, the seeds' token counts are summed and TF-IDF weighted against
// the corpus vocabulary. Stances are emitted in the order of `order` when
// given, otherwise in map order. Throws PipelineError for a stance without
// seeds or a zero vector.
StanceVectorSet build_stance_vectors(std::span<const UserDocument> docs, const SeedMap& seeds,
                                     const Vocabulary& vocab, std::size_t num_docs,
                                     std::span<const std::string> order = {});

struct UserStanceProfile {
  std::string user_id;
  std::vector<double> features;  // cosine similarity per stance, StanceVectorSet order
  double tendency = 0.0;
  std::string label;
};

// The pair of stances whose similarity difference is the tendency.
struct TendencyAxis {
  std::string positive;  // label when tendency >= 0
  std::string negative;
};

UserStanceProfile user_stance_profile(const SparseVector& user_vec, const StanceVectorSet& stances,
                                      const TendencyAxis& axis, std::string user_id = {});

// Vectorizes every document and profiles it, one profile per document in
// input order.
std::vector<UserStanceProfile> profile_users(std::span<const UserDocument> docs,
                                             const Vocabulary& vocab, std::size_t num_docs,
                                             const StanceVectorSet& stances, const TendencyAxis& axis,
                                             Exec exec = Exec::parallel);

// Batch TF-IDF, one vector per document.
std::vector<SparseVector> vectorize_documents(std::span<const UserDocument> docs,
                                              const Vocabulary& vocab, std::size_t num_docs,
                                              Exec exec = Exec::parallel);

// Euclidean distance between stance features. Throws std::invalid_argument
// on dimension mismatch.
double view_gap(const UserStanceProfile& a, const UserStanceProfile& b);

std::map<std::string, std::string, std::less<>> label_map(std::span<const UserStanceProfile> profiles);

// CSV: user_id,f_<stance>...,tendency,label
void write_profiles_csv(std::ostream& out, std::span<const UserStanceProfile> profiles,
                        std::span<const std::string> stance_names);
std::vector<UserStanceProfile> read_profiles_csv(std::istream& in);

}  // namespace itopics
