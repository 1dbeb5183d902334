#include "itopics/textproc.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "format.hpp"
#include "itopics/corpus.hpp"
#include "itopics/error.hpp"

namespace itopics {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + len > s.size()) {
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

char32_t lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE && cp != 0xD7) return cp + 32;  // Latin-1 capitals
  if (cp >= 0x100 && cp <= 0x137 && cp % 2 == 0) return cp + 1;
  if (cp >= 0x139 && cp <= 0x148 && cp % 2 == 1) return cp + 1;
  if (cp >= 0x14A && cp <= 0x177 && cp % 2 == 0) return cp + 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;  // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;                 // Cyrillic
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' ||
         cp == 0xA0 || cp == 0x2028 || cp == 0x2029 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x3000;
}

// Letters and digits. Outside ASCII everything counts as a letter except
// the punctuation, symbol and emoji blocks.
bool is_word_char(char32_t cp) {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
  if (cp < 0xC0) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp == kReplacement) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE00 && cp <= 0xFE0F) return false;  // variation selectors
  if (cp >= 0x1F000 && cp <= 0x1FFFF) return false;  // emoji
  return true;
}

bool starts_with_ci(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = text[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    if (c != prefix[i]) return false;
  }
  return true;
}

bool is_url_start(std::string_view text) {
  return starts_with_ci(text, "http://") || starts_with_ci(text, "https://") ||
         starts_with_ci(text, "www.");
}

bool is_tag_char(char32_t cp) { return cp == '_' || is_word_char(cp); }

}  // namespace

std::string to_lower_utf8(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) append_utf8(out, lower(decode_utf8(text, pos)));
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };

  std::size_t pos = 0;
  bool at_chunk_start = true;
  while (pos < text.size()) {
    const std::size_t start = pos;
    char32_t cp = decode_utf8(text, pos);
    if (is_space(cp)) {
      flush();
      at_chunk_start = true;
      continue;
    }
    if (cp == 'h' || cp == 'H' || cp == 'w' || cp == 'W') {
      // URLs run to the next whitespace; they only start at a word boundary.
      if ((at_chunk_start || word.empty()) && is_url_start(text.substr(start))) {
        flush();
        while (pos < text.size()) {
          std::size_t next = pos;
          if (is_space(decode_utf8(text, next))) break;
          pos = next;
        }
        at_chunk_start = false;
        continue;
      }
    }
    at_chunk_start = false;

    if ((cp == '@' || cp == '#') && pos < text.size()) {
      std::size_t peek = pos;
      if (is_tag_char(decode_utf8(text, peek))) {
        flush();
        std::string tag = cp == '#' ? "#" : "";
        bool has_word_char = false;
        while (pos < text.size()) {
          std::size_t next = pos;
          const char32_t c = decode_utf8(text, next);
          if (!is_tag_char(c)) break;
          has_word_char |= is_word_char(c);
          append_utf8(tag, lower(c));
          pos = next;
        }
        if (cp == '#' && has_word_char) tokens.push_back(std::move(tag));
        continue;
      }
    }

    if (is_word_char(cp)) {
      append_utf8(word, lower(cp));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

SparseVector SparseVector::from_entries(std::vector<SparseEntry> entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!(entries[i].weight > 0.0) || !std::isfinite(entries[i].weight)) {
      throw std::invalid_argument("sparse vector weights must be finite and positive");
    }
    if (i > 0 && entries[i].index <= entries[i - 1].index) {
      throw std::invalid_argument("sparse vector indices must be strictly increasing");
    }
  }
  SparseVector v;
  v.entries_ = std::move(entries);
  return v;
}

double SparseVector::norm() const noexcept {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.weight * e.weight;
  return std::sqrt(sum);
}

double SparseVector::dot(const SparseVector& other) const noexcept {
  double sum = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->index < b->index) {
      ++a;
    } else if (b->index < a->index) {
      ++b;
    } else {
      sum += a->weight * b->weight;
      ++a;
      ++b;
    }
  }
  return sum;
}

SparseVector SparseVector::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
  SparseVector v = *this;
  for (auto& e : v.entries_) e.weight *= factor;
  return v;
}

Vocabulary Vocabulary::from_frequencies(std::vector<std::pair<std::string, std::uint32_t>> token_df,
                                        std::size_t num_docs) {
  std::sort(token_df.begin(), token_df.end());
  Vocabulary vocab;
  vocab.num_docs_ = num_docs;
  vocab.tokens_.reserve(token_df.size());
  vocab.doc_freq_.reserve(token_df.size());
  for (std::size_t i = 0; i < token_df.size(); ++i) {
    auto& [token, df] = token_df[i];
    if (i > 0 && token == token_df[i - 1].first) {
      throw std::invalid_argument("duplicate vocabulary token '" + token + "'");
    }
    if (df == 0 || df > num_docs) {
      throw std::invalid_argument("document frequency of '" + token + "' out of range");
    }
    vocab.tokens_.push_back(std::move(token));
    vocab.doc_freq_.push_back(df);
  }
  return vocab;
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view token) const {
  auto it = std::lower_bound(tokens_.begin(), tokens_.end(), token,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == tokens_.end() || *it != token) return std::nullopt;
  return static_cast<std::uint32_t>(it - tokens_.begin());
}

void Vocabulary::write(std::ostream& out) const {
  out << "# itopics-vocabulary v1 num_docs=" << num_docs_ << " size=" << tokens_.size() << '\n';
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i] << '\t' << i << '\t' << doc_freq_[i] << '\n';
  }
}

Vocabulary Vocabulary::read(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("vocabulary: missing header");
  std::size_t num_docs = 0, size = 0;
  if (std::sscanf(header.c_str(), "# itopics-vocabulary v1 num_docs=%zu size=%zu", &num_docs, &size) != 2) {
    throw ConfigError("vocabulary: bad header '" + header + "'");
  }
  std::vector<std::pair<std::string, std::uint32_t>> entries;
  entries.reserve(size);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    std::size_t index = 0;
    std::uint32_t df = 0;
    if (!std::getline(fields, token, '\t') || !(fields >> index >> df)) {
      throw ConfigError("vocabulary: bad line '" + line + "'");
    }
    if (index != entries.size()) throw ConfigError("vocabulary: indices must be dense and ordered");
    entries.emplace_back(std::move(token), df);
  }
  if (entries.size() != size) throw ConfigError("vocabulary: size mismatch");
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (!(entries[i - 1].first < entries[i].first)) throw ConfigError("vocabulary: tokens out of order");
  }
  try {
    return from_frequencies(std::move(entries), num_docs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("vocabulary: ") + e.what());
  }
}

Vocabulary build_vocabulary(std::span<const UserDocument> docs, std::uint32_t min_doc_freq) {
  if (docs.empty()) throw PipelineError("cannot build a vocabulary from zero documents");
  std::map<std::string, std::uint32_t, std::less<>> df;
  for (const auto& doc : docs) {
    for (const auto& [token, count] : doc.token_counts) {
      if (count > 0) ++df[token];
    }
  }
  std::vector<std::pair<std::string, std::uint32_t>> kept;
  std::uint32_t max_df = 0;
  for (auto& [token, n] : df) {
    max_df = std::max(max_df, n);
    if (n >= min_doc_freq) kept.emplace_back(token, n);
  }
  if (kept.empty()) {
    throw PipelineError("empty vocabulary: " + std::to_string(df.size()) + " distinct tokens over " +
                        std::to_string(docs.size()) + " documents, highest document frequency " +
                        std::to_string(max_df) + " < min_doc_freq " + std::to_string(min_doc_freq));
  }
  return Vocabulary::from_frequencies(std::move(kept), docs.size());
}

SparseVector tfidf_vectorize(const TokenCounts& doc, const Vocabulary& vocab, std::size_t num_docs) {
  std::vector<SparseEntry> entries;
  for (const auto& [token, count] : doc) {
    const auto index = vocab.index_of(token);
    if (!index || count == 0) continue;
    const std::uint32_t df = vocab.doc_freq(*index);
    if (df == 0) throw PipelineError("corrupt vocabulary: zero document frequency for '" + token + "'");
    if (df > num_docs) {
      throw std::invalid_argument("document frequency of '" + token + "' exceeds the document count");
    }
    const double weight = static_cast<double>(count) * std::log2(static_cast<double>(num_docs) / df);
    if (weight > 0.0) entries.push_back({*index, weight});
  }
  return SparseVector::from_entries(std::move(entries));
}

double cosine_similarity(const SparseVector& a, const SparseVector& b) noexcept {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), 0.0, 1.0);
}

void write_sparse_vectors(std::ostream& out,
                          const std::vector<std::pair<std::string, SparseVector>>& vectors) {
  for (const auto& [label, vec] : vectors) {
    out << label << '\t';
    bool first = true;
    for (const auto& e : vec.entries()) {
      if (!first) out << ' ';
      out << e.index << ':' << detail::fmt_exact(e.weight);
      first = false;
    }
    out << '\n';
  }
}

std::vector<std::pair<std::string, SparseVector>> read_sparse_vectors(std::istream& in) {
  std::vector<std::pair<std::string, SparseVector>> result;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ConfigError("sparse vectors: missing tab in '" + line + "'");
    std::vector<SparseEntry> entries;
    std::istringstream fields(line.substr(tab + 1));
    std::string item;
    while (fields >> item) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("sparse vectors: bad entry '" + item + "'");
      entries.push_back({static_cast<std::uint32_t>(std::stoul(item.substr(0, colon))),
                         std::stod(item.substr(colon + 1))});
    }
    try {
      result.emplace_back(line.substr(0, tab), SparseVector::from_entries(std::move(entries)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("sparse vectors: ") + e.what());
    }
  }
  return result;
}

}  // namespace itopics
