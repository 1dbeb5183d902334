#include "itopics/topicmodel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "format.hpp"
#include "itopics/error.hpp"

namespace itopics {

void LdaConfig::validate() const {
  if (k < 2) throw ConfigError("lda: k must be at least 2");
  if (!(alpha_value() > 0.0)) throw ConfigError("lda: alpha must be positive");
  if (!(beta > 0.0)) throw ConfigError("lda: beta must be positive");
  if (iterations == 0) throw ConfigError("lda: iterations must be positive");
  if (burn_in >= iterations) throw ConfigError("lda: burn_in must be below iterations");
}

std::vector<BagOfWords> to_bags(std::span<const UserDocument> docs, const Vocabulary& vocab,
                                std::vector<std::string>* dropped) {
  std::vector<BagOfWords> bags;
  bags.reserve(docs.size());
  for (const auto& doc : docs) {
    BagOfWords bag;
    bag.user_id = doc.user_id;
    for (const auto& [token, count] : doc.token_counts) {
      const auto index = vocab.index_of(token);
      if (!index) continue;
      bag.tokens.insert(bag.tokens.end(), count, *index);
    }
    if (bag.tokens.empty()) {
      if (dropped) dropped->push_back(doc.user_id);
      continue;
    }
    bags.push_back(std::move(bag));
  }
  return bags;
}

TopicModel::TopicModel(LdaConfig config, std::vector<std::string> vocab_tokens, std::vector<std::string> user_ids,
                       std::vector<double> phi, std::vector<double> theta, std::vector<double> log_likelihood)
    : config_(config),
      vocab_tokens_(std::move(vocab_tokens)),
      user_ids_(std::move(user_ids)),
      phi_(std::move(phi)),
      theta_(std::move(theta)),
      log_likelihood_(std::move(log_likelihood)) {
  if (phi_.size() != static_cast<std::size_t>(config_.k) * vocab_tokens_.size() ||
      theta_.size() != user_ids_.size() * config_.k) {
    throw std::invalid_argument("TopicModel: matrix dimensions do not match k, |V| and |U|");
  }
}

std::span<const double> TopicModel::phi(std::size_t topic) const {
  if (topic >= config_.k) throw std::out_of_range("topic index out of range");
  return std::span<const double>(phi_).subspan(topic * vocab_tokens_.size(), vocab_tokens_.size());
}

std::span<const double> TopicModel::theta(std::size_t user) const {
  if (user >= user_ids_.size()) throw std::out_of_range("user index out of range");
  return std::span<const double>(theta_).subspan(user * config_.k, config_.k);
}

std::optional<std::size_t> TopicModel::user_index(std::string_view user_id) const {
  // user_ids_ is sorted when produced by the pipeline, but do not rely on it.
  auto it = std::find(user_ids_.begin(), user_ids_.end(), user_id);
  if (it == user_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - user_ids_.begin());
}

std::optional<std::uint32_t> TopicModel::token_index(std::string_view token) const {
  auto it = std::lower_bound(vocab_tokens_.begin(), vocab_tokens_.end(), token,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == vocab_tokens_.end() || *it != token) return std::nullopt;
  return static_cast<std::uint32_t>(it - vocab_tokens_.begin());
}

void TopicModel::write(std::ostream& out) const {
  out << "# itopics-lda v1\n";
  out << "k " << config_.k << " vocab " << vocab_tokens_.size() << " users " << user_ids_.size() << '\n';
  out << "alpha " << detail::fmt_exact(config_.alpha_value()) << " beta " << detail::fmt_exact(config_.beta)
      << " iterations " << config_.iterations << " burn_in " << config_.burn_in << " seed " << config_.seed << '\n';
  out << "vocab\n";
  for (const auto& t : vocab_tokens_) out << t << '\n';
  out << "phi\n";
  for (std::size_t t = 0; t < config_.k; ++t) {
    const auto row = phi(t);
    for (std::size_t w = 0; w < row.size(); ++w) out << (w ? " " : "") << detail::fmt_exact(row[w]);
    out << '\n';
  }
  out << "theta\n";
  for (std::size_t u = 0; u < user_ids_.size(); ++u) {
    out << user_ids_[u] << '\t';
    const auto row = theta(u);
    for (std::size_t t = 0; t < row.size(); ++t) out << (t ? " " : "") << detail::fmt_exact(row[t]);
    out << '\n';
  }
  out << "loglik\n";
  for (std::size_t i = 0; i < log_likelihood_.size(); ++i) {
    out << (i ? " " : "") << detail::fmt_exact(log_likelihood_[i]);
  }
  out << '\n';
}

namespace {

void expect_line(std::istream& in, const std::string& want) {
  std::string line;
  if (!std::getline(in, line) || line != want) throw ConfigError("lda model: expected '" + want + "'");
}

std::vector<double> read_doubles(const std::string& line, std::size_t expected) {
  std::vector<double> values;
  if (expected != static_cast<std::size_t>(-1)) values.reserve(expected);
  const char* p = line.c_str();
  char* end = nullptr;
  while (true) {
    const double v = std::strtod(p, &end);
    if (end == p) break;
    values.push_back(v);
    p = end;
  }
  if (expected != static_cast<std::size_t>(-1) && values.size() != expected) {
    throw ConfigError("lda model: row has " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(expected));
  }
  return values;
}

}  // namespace

TopicModel TopicModel::read(std::istream& in) {
  expect_line(in, "# itopics-lda v1");
  std::string line;
  LdaConfig config;
  std::size_t vocab_size = 0, num_users = 0;
  {
    std::getline(in, line);
    std::istringstream ss(line);
    std::string a, b, c;
    if (!(ss >> a >> config.k >> b >> vocab_size >> c >> num_users) || a != "k" || b != "vocab" || c != "users") {
      throw ConfigError("lda model: bad dimensions line");
    }
  }
  {
    std::getline(in, line);
    std::istringstream ss(line);
    std::string a, b, c, d, e;
    double alpha = 0.0;
    if (!(ss >> a >> alpha >> b >> config.beta >> c >> config.iterations >> d >> config.burn_in >> e >>
          config.seed) ||
        a != "alpha" || b != "beta" || c != "iterations" || d != "burn_in" || e != "seed") {
      throw ConfigError("lda model: bad hyperparameter line");
    }
    config.alpha = alpha;
  }
  expect_line(in, "vocab");
  std::vector<std::string> vocab(vocab_size);
  for (auto& t : vocab) {
    if (!std::getline(in, t)) throw ConfigError("lda model: truncated vocabulary");
  }
  expect_line(in, "phi");
  std::vector<double> phi;
  phi.reserve(config.k * vocab_size);
  for (std::size_t t = 0; t < config.k; ++t) {
    if (!std::getline(in, line)) throw ConfigError("lda model: truncated phi");
    const auto row = read_doubles(line, vocab_size);
    phi.insert(phi.end(), row.begin(), row.end());
  }
  expect_line(in, "theta");
  std::vector<std::string> users(num_users);
  std::vector<double> theta;
  theta.reserve(num_users * config.k);
  for (std::size_t u = 0; u < num_users; ++u) {
    if (!std::getline(in, line)) throw ConfigError("lda model: truncated theta");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ConfigError("lda model: theta row without user id");
    users[u] = line.substr(0, tab);
    const auto row = read_doubles(line.substr(tab + 1), config.k);
    theta.insert(theta.end(), row.begin(), row.end());
  }
  expect_line(in, "loglik");
  std::getline(in, line);
  auto loglik = read_doubles(line, static_cast<std::size_t>(-1));
  return TopicModel(config, std::move(vocab), std::move(users), std::move(phi), std::move(theta), std::move(loglik));
}

namespace {

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class GibbsSampler {
 public:
  GibbsSampler(std::span<const BagOfWords> docs, std::size_t vocab_size, const LdaConfig& config)
      : docs_(docs),
        k_(config.k),
        v_(vocab_size),
        alpha_(config.alpha_value()),
        beta_(config.beta),
        rng_(config.seed),
        word_topic_(v_ * k_, 0),
        topic_total_(k_, 0),
        doc_topic_(docs.size() * k_, 0),
        doc_len_(docs.size(), 0),
        probs_(k_, 0.0) {
    std::size_t total = 0;
    for (const auto& d : docs) total += d.tokens.size();
    assignment_.reserve(total);
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (std::uint32_t w : docs[d].tokens) {
        if (w >= v_) throw PipelineError("token index outside the vocabulary");
        const auto t = static_cast<std::uint32_t>(std::min<std::size_t>(k_ - 1, static_cast<std::size_t>(uniform01(rng_) * k_)));
        assignment_.push_back(t);
        add(d, w, t);
      }
      doc_len_[d] = static_cast<std::int64_t>(docs[d].tokens.size());
    }
  }

  void sweep() {
    const double vbeta = static_cast<double>(v_) * beta_;
    std::size_t pos = 0;
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      std::int32_t* dt = &doc_topic_[d * k_];
      for (std::uint32_t w : docs_[d].tokens) {
        const std::uint32_t old = assignment_[pos];
        remove(d, w, old);
        const std::int32_t* wt = &word_topic_[static_cast<std::size_t>(w) * k_];
        double sum = 0.0;
        for (std::size_t t = 0; t < k_; ++t) {
          sum += (dt[t] + alpha_) * (wt[t] + beta_) / (topic_total_[t] + vbeta);
          probs_[t] = sum;
        }
        const double target = uniform01(rng_) * sum;
        std::size_t t = 0;
        while (t + 1 < k_ && probs_[t] <= target) ++t;
        assignment_[pos] = static_cast<std::uint32_t>(t);
        add(d, w, static_cast<std::uint32_t>(t));
        ++pos;
      }
    }
  }

  // log p(w, z) under the collapsed model.
  double log_likelihood() const {
    const double vbeta = static_cast<double>(v_) * beta_;
    const double kalpha = static_cast<double>(k_) * alpha_;
    const double lg_beta = std::lgamma(beta_);
    const double lg_alpha = std::lgamma(alpha_);
    double ll = static_cast<double>(k_) * (std::lgamma(vbeta) - static_cast<double>(v_) * lg_beta);
    for (std::size_t t = 0; t < k_; ++t) ll -= std::lgamma(topic_total_[t] + vbeta);
    for (std::size_t i = 0; i < word_topic_.size(); ++i) {
      if (word_topic_[i] > 0) ll += std::lgamma(word_topic_[i] + beta_) - lg_beta;
    }
    ll += static_cast<double>(docs_.size()) * (std::lgamma(kalpha) - static_cast<double>(k_) * lg_alpha);
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      ll -= std::lgamma(doc_len_[d] + kalpha);
      for (std::size_t t = 0; t < k_; ++t) {
        const std::int32_t n = doc_topic_[d * k_ + t];
        if (n > 0) ll += std::lgamma(n + alpha_) - lg_alpha;
      }
    }
    return ll;
  }

  void check_invariants(std::uint32_t sweep) const {
    auto fail = [&](const std::string& what) {
      throw PipelineError("lda count invariant violated after sweep " + std::to_string(sweep) + ": " + what);
    };
    std::vector<std::int64_t> from_words(k_, 0), from_docs(k_, 0);
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      std::int64_t len = 0;
      for (std::size_t t = 0; t < k_; ++t) {
        const std::int32_t n = doc_topic_[d * k_ + t];
        if (n < 0) fail("negative document-topic count");
        len += n;
        from_docs[t] += n;
      }
      if (len != doc_len_[d]) fail("document " + docs_[d].user_id + " topic counts do not sum to its length");
    }
    for (std::size_t w = 0; w < v_; ++w) {
      for (std::size_t t = 0; t < k_; ++t) {
        const std::int32_t n = word_topic_[w * k_ + t];
        if (n < 0) fail("negative word-topic count");
        from_words[t] += n;
      }
    }
    for (std::size_t t = 0; t < k_; ++t) {
      if (from_words[t] != topic_total_[t] || from_docs[t] != topic_total_[t]) {
        fail("topic " + std::to_string(t) + " totals disagree");
      }
    }
  }

  void accumulate(std::vector<double>& phi, std::vector<double>& theta) const {
    const double vbeta = static_cast<double>(v_) * beta_;
    const double kalpha = static_cast<double>(k_) * alpha_;
    for (std::size_t t = 0; t < k_; ++t) {
      const double denom = topic_total_[t] + vbeta;
      double* row = &phi[t * v_];
      for (std::size_t w = 0; w < v_; ++w) row[w] += (word_topic_[w * k_ + t] + beta_) / denom;
    }
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      const double denom = doc_len_[d] + kalpha;
      for (std::size_t t = 0; t < k_; ++t) theta[d * k_ + t] += (doc_topic_[d * k_ + t] + alpha_) / denom;
    }
  }

 private:
  void add(std::size_t d, std::uint32_t w, std::uint32_t t) {
    ++word_topic_[static_cast<std::size_t>(w) * k_ + t];
    ++topic_total_[t];
    ++doc_topic_[d * k_ + t];
  }
  void remove(std::size_t d, std::uint32_t w, std::uint32_t t) {
    --word_topic_[static_cast<std::size_t>(w) * k_ + t];
    --topic_total_[t];
    --doc_topic_[d * k_ + t];
  }

  std::span<const BagOfWords> docs_;
  std::size_t k_;
  std::size_t v_;
  double alpha_;
  double beta_;
  std::mt19937_64 rng_;
  std::vector<std::int32_t> word_topic_;  // |V| x k, word-major
  std::vector<std::int64_t> topic_total_;
  std::vector<std::int32_t> doc_topic_;   // |D| x k
  std::vector<std::int64_t> doc_len_;
  std::vector<std::uint32_t> assignment_;
  std::vector<double> probs_;
};

}  // namespace

TopicModel fit_lda(std::span<const BagOfWords> docs, const Vocabulary& vocab, const LdaConfig& config,
                   const std::function<void(const GibbsSweepInfo&)>& on_sweep) {
  config.validate();
  if (docs.empty()) throw PipelineError("lda: empty corpus");
  if (vocab.empty()) throw PipelineError("lda: empty vocabulary");
  for (const auto& d : docs) {
    if (d.tokens.empty()) throw PipelineError("lda: document '" + d.user_id + "' has no in-vocabulary tokens");
  }

  GibbsSampler sampler(docs, vocab.size(), config);
  const std::size_t k = config.k;
  std::vector<double> phi(k * vocab.size(), 0.0);
  std::vector<double> theta(docs.size() * k, 0.0);
  std::vector<double> trace;
  trace.reserve(config.iterations);

  for (std::uint32_t s = 1; s <= config.iterations; ++s) {
    sampler.sweep();
    if (config.check_invariants) sampler.check_invariants(s);
    const double ll = sampler.log_likelihood();
    trace.push_back(ll);
    if (s > config.burn_in) sampler.accumulate(phi, theta);
    if (on_sweep) on_sweep({s, ll});
  }

  const double samples = static_cast<double>(config.iterations - config.burn_in);
  for (double& x : phi) x /= samples;
  for (double& x : theta) x /= samples;

  std::vector<std::string> users;
  users.reserve(docs.size());
  for (const auto& d : docs) users.push_back(d.user_id);
  std::vector<std::string> tokens(vocab.tokens().begin(), vocab.tokens().end());
  return TopicModel(config, std::move(tokens), std::move(users), std::move(phi), std::move(theta), std::move(trace));
}

std::vector<double> doc_topic_dist(const TopicModel& model, std::string_view user_id) {
  const auto index = model.user_index(user_id);
  if (!index) throw std::out_of_range("user '" + std::string(user_id) + "' is not in the topic model");
  const auto row = model.theta(*index);
  return {row.begin(), row.end()};
}

double keyword_topic_prob(const TopicModel& model, const std::set<std::string, std::less<>>& keywords,
                          std::size_t topic) {
  const auto row = model.phi(topic);
  double sum = 0.0;
  for (const auto& kw : keywords) {
    if (const auto index = model.token_index(kw)) sum += row[*index];
  }
  return sum;
}

std::vector<std::uint32_t> top_words(const TopicModel& model, std::size_t topic, std::size_t n) {
  const auto row = model.phi(topic);
  std::vector<std::uint32_t> order(row.size());
  std::iota(order.begin(), order.end(), 0u);
  n = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::uint32_t a, std::uint32_t b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
  order.resize(n);
  return order;
}

}  // namespace itopics
