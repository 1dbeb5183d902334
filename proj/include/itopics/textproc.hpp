#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace itopics {

struct UserDocument;

using TokenCounts = std::map<std::string, std::uint32_t, std::less<>>;

// Lowercased tokens. Hashtags survive as "#tag"; URLs and @-mentions are
// dropped; everything else splits on characters that are neither letters nor
// digits. Accented letters are letters.
std::vector<std::string> tokenize(std::string_view text);

// Unicode-aware lowercase of a UTF-8 string (Latin, Greek, Cyrillic).
std::string to_lower_utf8(std::string_view text);

struct SparseEntry {
  std::uint32_t index = 0;
  double weight = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sorted, strictly positive sparse vector.
class SparseVector {
 public:
  SparseVector() = default;

  // Throws std::invalid_argument unless indices strictly increase and all
  // weights are finite and > 0.
  static SparseVector from_entries(std::vector<SparseEntry> entries);

  std::span<const SparseEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  double norm() const noexcept;
  double dot(const SparseVector& other) const noexcept;
  SparseVector scaled(double factor) const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<SparseEntry> entries_;
};

// Token <-> dense index map with per-token document frequencies. Tokens are
// kept in lexicographic (byte) order, so index order is token order.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Entries may arrive in any order; throws std::invalid_argument on
  // duplicate tokens, df == 0 or df > num_docs.
  static Vocabulary from_frequencies(std::vector<std::pair<std::string, std::uint32_t>> token_df,
                                     std::size_t num_docs);

  std::optional<std::uint32_t> index_of(std::string_view token) const;
  const std::string& token(std::uint32_t index) const { return tokens_.at(index); }
  std::uint32_t doc_freq(std::uint32_t index) const { return doc_freq_.at(index); }
  std::span<const std::string> tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  std::size_t num_docs() const noexcept { return num_docs_; }

  // Line format: "# itopics-vocabulary v1 num_docs=<N> size=<M>" followed by
  // one "token<TAB>index<TAB>df" line per token in index order.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint32_t> doc_freq_;
  std::size_t num_docs_ = 0;
};

// Tokens whose user-document frequency is >= min_doc_freq.
// Throws PipelineError if nothing survives.
Vocabulary build_vocabulary(std::span<const UserDocument> docs, std::uint32_t min_doc_freq = 5);

// w_i = freq(i, doc) * log2(num_docs / df_i); out-of-vocabulary tokens are
// ignored and zero weights dropped. Throws PipelineError on df_i == 0 and
// std::invalid_argument when df_i > num_docs.
SparseVector tfidf_vectorize(const TokenCounts& doc, const Vocabulary& vocab, std::size_t num_docs);

// dot(a, b) / (|a| |b|), or 0 when either vector has zero norm.
double cosine_similarity(const SparseVector& a, const SparseVector& b) noexcept;

// One vector per line: "<label><TAB>idx:weight idx:weight ...", weights
// printed with 17 significant digits so they read back bit-exact.
void write_sparse_vectors(std::ostream& out,
                          const std::vector<std::pair<std::string, SparseVector>>& vectors);
std::vector<std::pair<std::string, SparseVector>> read_sparse_vectors(std::istream& in);

}  // namespace itopics
