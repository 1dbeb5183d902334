#include "itopics/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "itopics/error.hpp"

namespace itopics::synth {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Small deterministic RNG helpers; std distributions are avoided so the
// corpus is byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(std::min<double>(n - 1, std::floor(uniform() * n)));
  }
  std::uint32_t between(std::uint32_t lo, std::uint32_t hi) { return lo + below(hi - lo + 1); }
  // Marsaglia-Tsang gamma(shape, 1).
  double gamma(double shape) {
    if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform_open(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  // Count with the given mean: floor plus a Bernoulli on the remainder.
  std::uint32_t count(double mean) {
    const double f = std::floor(mean);
    return static_cast<std::uint32_t>(f) + (bernoulli(mean - f) ? 1u : 0u);
  }
  std::size_t categorical(std::span<const double> cdf) {
    const double target = uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
  }

 private:
  double uniform_open() {
    double u;
    do u = uniform();
    while (u <= 0.0);
    return u;
  }
  std::mt19937_64 engine_;
};

std::vector<double> cumulative(std::span<const double> weights) {
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  return cdf;
}

const char* const kSyllables[] = {"ba", "ce", "di", "fo", "gu", "ka", "le", "mi",
                                  "no", "pu", "ra", "se", "ti", "vo", "xa", "ze"};

std::string make_word(std::uint32_t i) {
  std::string w;
  std::uint32_t x = i;
  for (int s = 0; s < 3; ++s) {
    w += kSyllables[x % 16];
    x /= 16;
  }
  if (x > 0) w += std::to_string(x);
  return w;
}

std::string pad(std::uint64_t value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

const char* const kHomeLocations[] = {"Santiago, Chile", "Valparaíso", "Concepción, Chile", "Temuco",
                                      "Antofagasta, Chile", "Providencia, Santiago"};
const char* const kForeignLocations[] = {"Lima, Perú", "Buenos Aires, Argentina", "Madrid, España"};
const char* const kGazetteer[] = {"chile", "santiago", "valparaíso", "concepción", "temuco", "antofagasta"};

// 2013-06-01T00:00:00Z
constexpr std::int64_t kEpochStart = 1370044800;
constexpr std::int64_t kWindow = 90LL * 24 * 3600;

struct World {
  const SynthConfig& cfg;
  std::vector<std::string> user_ids;
  std::vector<std::uint32_t> stance;
  std::vector<std::vector<std::uint32_t>> members;  // user indices per stance
  std::vector<PlantedTopic> topics;
  std::vector<std::vector<double>> topic_cdf;  // over topic words + issue words
  std::vector<std::vector<std::string>> topic_words;
  std::vector<std::string> location;
  std::vector<std::uint64_t> following;
  std::vector<std::uint64_t> followers;
};

struct UserOutput {
  std::vector<std::uint32_t> topics;
  std::vector<TweetRecord> tweets;
};

class UserGenerator {
 public:
  UserGenerator(const World& world, std::uint32_t user)
      : w_(world), cfg_(world.cfg), user_(user), rng_(splitmix64(world.cfg.seed ^ splitmix64(user + 1))) {}

  UserOutput run() {
    UserOutput out;
    choose_topics(out.topics);

    const std::uint32_t n_tweets = rng_.between(cfg_.tweets_min, cfg_.tweets_max);
    for (std::uint32_t i = 0; i < n_tweets; ++i) {
      auto t = base_tweet(user_);
      t.text = text(true);
      out.tweets.push_back(std::move(t));
    }
    const std::uint32_t n_interactions = rng_.count(cfg_.interactions_per_user);
    for (std::uint32_t i = 0; i < n_interactions; ++i) {
      const std::uint32_t partner = pick_partner();
      if (partner == user_) continue;
      auto first = base_tweet(user_);
      first.text = text(true);
      if (rng_.bernoulli(0.5)) {
        first.mentions.push_back(w_.user_ids[partner]);
      } else {
        first.kind = TweetKind::retweet;
        first.retweet_of_user = w_.user_ids[partner];
      }
      auto reply = base_tweet(partner);
      reply.kind = TweetKind::reply;
      reply.reply_to_user = w_.user_ids[user_];
      reply.mentions.push_back(w_.user_ids[user_]);
      reply.text = text(false);
      reply.created_at = first.created_at + std::chrono::seconds(60 + rng_.below(3600));
      out.tweets.push_back(std::move(first));
      out.tweets.push_back(std::move(reply));
    }
    const std::uint32_t n_one_way = rng_.count(cfg_.one_way_per_user);
    for (std::uint32_t i = 0; i < n_one_way; ++i) {
      const std::uint32_t target = rng_.below(static_cast<std::uint32_t>(w_.user_ids.size()));
      if (target == user_) continue;
      auto t = base_tweet(user_);
      t.text = text(true);
      t.mentions.push_back(w_.user_ids[target]);
      out.tweets.push_back(std::move(t));
    }
    const std::uint32_t n_noise = rng_.count(cfg_.reply_noise_per_user);
    for (std::uint32_t i = 0; i < n_noise; ++i) {
      const std::uint32_t target = rng_.below(static_cast<std::uint32_t>(w_.user_ids.size()));
      if (target == user_) continue;
      auto t = base_tweet(user_);
      t.kind = TweetKind::reply;
      t.reply_to_user = w_.user_ids[target];
      t.text = text(false);
      out.tweets.push_back(std::move(t));
    }
    return out;
  }

 private:
  void choose_topics(std::vector<std::uint32_t>& chosen) {
    const std::uint32_t own = w_.stance[user_];
    for (const auto& topic : w_.topics) {
      if (topic.role == TopicRole::bridge || *topic.stance == own) {
        chosen.push_back(topic.id);
        continue;
      }
      const std::uint32_t within = topic.id - cfg_.bridge_topics - *topic.stance * cfg_.partisan_topics_per_stance;
      const double leak = within < cfg_.partisan_leakage.size() ? cfg_.partisan_leakage[within] : 0.0;
      if (leak > 0.0 && rng_.bernoulli(leak)) chosen.push_back(topic.id);
    }
    std::vector<double> weights;
    for (std::size_t i = 0; i < chosen.size(); ++i) weights.push_back(rng_.gamma(cfg_.user_topic_concentration));
    topics_ = chosen;
    mixture_cdf_ = cumulative(weights);
    vocal_ = rng_.bernoulli(cfg_.vocal_user_prob);
  }

  TweetRecord base_tweet(std::uint32_t author) {
    TweetRecord t;
    t.tweet_id = "t" + pad(user_, 7) + "-" + pad(seq_++, 5);
    t.user_id = w_.user_ids[author];
    t.created_at = Timestamp{std::chrono::seconds{kEpochStart + static_cast<std::int64_t>(rng_.uniform() * kWindow)}};
    t.user_location = w_.location[author];
    t.following_count = w_.following[author];
    t.followers_count = w_.followers[author];
    return t;
  }

  std::string draw_word(std::uint32_t topic) {
    const auto& cdf = w_.topic_cdf[topic];
    return w_.topic_words[topic][rng_.categorical(cdf)];
  }

  std::string text(bool may_tag) {
    std::string out;
    std::uint32_t tweet_topic = topics_[rng_.categorical(mixture_cdf_)];
    for (std::uint32_t i = 0; i < cfg_.words_per_tweet; ++i) {
      const std::uint32_t topic =
          cfg_.text_model == TextModel::lda ? topics_[rng_.categorical(mixture_cdf_)] : tweet_topic;
      if (!out.empty()) out += ' ';
      out += draw_word(topic);
    }
    if (may_tag && vocal_ && rng_.bernoulli(cfg_.keyword_tweet_prob)) {
      const auto& kws = cfg_.stance_keywords[w_.stance[user_]];
      out += ' ';
      out += kws[rng_.below(static_cast<std::uint32_t>(kws.size()))];
    }
    return out;
  }

  std::uint32_t pick_partner() {
    const auto n = static_cast<std::uint32_t>(w_.user_ids.size());
    if (!cfg_.homophily_strength) return rng_.below(n);
    const std::uint32_t own = w_.stance[user_];
    const std::uint32_t group = rng_.bernoulli(*cfg_.homophily_strength) ? own : 1 - own;
    const auto& pool = w_.members[group];
    if (pool.empty()) return user_;
    return pool[rng_.below(static_cast<std::uint32_t>(pool.size()))];
  }

  const World& w_;
  const SynthConfig& cfg_;
  std::uint32_t user_;
  Rng rng_;
  std::uint32_t seq_ = 0;
  std::vector<std::uint32_t> topics_;
  std::vector<double> mixture_cdf_;
  bool vocal_ = false;
};

// Location and audience counts, from a stream separate from the user's
// content so that every tweet by the user (including replies generated on
// behalf of another user) carries the same profile.
void assign_profiles(World& world) {
  const auto& cfg = world.cfg;
  for (std::uint32_t u = 0; u < cfg.num_users; ++u) {
    Rng rng(splitmix64(cfg.seed ^ splitmix64(0x70F11E00ULL + u)));
    if (rng.bernoulli(cfg.foreign_location_prob)) {
      world.location.push_back(kForeignLocations[rng.below(3)]);
    } else {
      world.location.push_back(kHomeLocations[rng.below(6)]);
    }
    if (rng.bernoulli(cfg.popular_user_prob)) {
      world.following.push_back(rng.between(100, 3000));
      world.followers.push_back(rng.between(2000, 50000));
    } else {
      world.following.push_back(rng.between(20, 1500));
      world.followers.push_back(rng.between(5, 1500));
    }
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (num_users < 2) throw ConfigError("synth: need at least two users");
  if (stance_split < 0.0 || stance_split > 1.0) throw ConfigError("synth: stance_split must be in [0, 1]");
  if (homophily_strength && (*homophily_strength < 0.0 || *homophily_strength > 1.0)) {
    throw ConfigError("synth: homophily_strength must be in [0, 1]");
  }
  if (stance_names.size() != 2 || stance_keywords.size() != 2) throw ConfigError("synth: exactly two stances");
  for (const auto& kws : stance_keywords) {
    if (kws.empty()) throw ConfigError("synth: every stance needs keywords");
  }
  if (num_topics() == 0) throw ConfigError("synth: no topics");
  if (vocab_size < num_topics()) throw ConfigError("synth: vocab_size must cover one word per topic");
  if (tweets_min == 0 || tweets_min > tweets_max) throw ConfigError("synth: bad tweets_min / tweets_max");
  if (words_per_tweet == 0) throw ConfigError("synth: words_per_tweet must be positive");
  if (issue_word_mass < 0.0 || issue_word_mass >= 1.0) throw ConfigError("synth: issue_word_mass must be in [0, 1)");
  if (issue_word_mass_spread < 0.0 || issue_word_mass_spread > 1.0) {
    throw ConfigError("synth: issue_word_mass_spread must be in [0, 1]");
  }
  if (issue_word_mass * (1.0 + issue_word_mass_spread) >= 1.0) {
    throw ConfigError("synth: issue word mass with spread must stay below 1");
  }
  if (issue_word_mass > 0.0 && issue_words.empty()) throw ConfigError("synth: issue_word_mass needs issue_words");
  for (double p : partisan_leakage) {
    if (p < 0.0 || p > 1.0) throw ConfigError("synth: partisan_leakage entries must be in [0, 1]");
  }
  for (double p : {vocal_user_prob, keyword_tweet_prob, foreign_location_prob, popular_user_prob}) {
    if (p < 0.0 || p > 1.0) throw ConfigError("synth: probabilities must be in [0, 1]");
  }
  if (!(user_topic_concentration > 0.0)) throw ConfigError("synth: user_topic_concentration must be positive");
}

std::string to_string(TopicRole role) { return role == TopicRole::bridge ? "bridge" : "partisan"; }

SynthCorpus generate_corpus(const SynthConfig& cfg, Exec exec) {
  cfg.validate();
  World world{cfg, {}, {}, {}, {}, {}, {}, {}, {}, {}};
  const int width = static_cast<int>(std::to_string(cfg.num_users).size());
  for (std::uint32_t u = 0; u < cfg.num_users; ++u) world.user_ids.push_back("u" + pad(u, width));

  Rng global(splitmix64(cfg.seed));
  const auto n_first = static_cast<std::uint32_t>(std::llround(cfg.num_users * cfg.stance_split));
  world.stance.assign(cfg.num_users, 1);
  std::fill(world.stance.begin(), world.stance.begin() + n_first, 0);
  for (std::uint32_t i = cfg.num_users - 1; i > 0; --i) std::swap(world.stance[i], world.stance[global.below(i + 1)]);
  world.members.resize(2);
  for (std::uint32_t u = 0; u < cfg.num_users; ++u) world.members[world.stance[u]].push_back(u);

  // Topic word blocks.
  std::set<std::string> reserved(cfg.issue_words.begin(), cfg.issue_words.end());
  std::vector<std::string> words;
  for (std::uint32_t i = 0; words.size() < cfg.vocab_size; ++i) {
    auto w = make_word(i);
    if (!reserved.contains(w)) words.push_back(std::move(w));
  }
  const std::uint32_t k = cfg.num_topics();
  const std::uint32_t block = cfg.vocab_size / k;
  std::uint32_t next_word = 0;
  for (std::uint32_t t = 0; t < k; ++t) {
    PlantedTopic topic;
    topic.id = t;
    if (t < cfg.bridge_topics) {
      topic.role = TopicRole::bridge;
    } else {
      topic.role = TopicRole::partisan;
      topic.stance = (t - cfg.bridge_topics) / cfg.partisan_topics_per_stance;
    }
    const std::uint32_t size = block + (t < cfg.vocab_size % k ? 1 : 0);
    std::vector<double> weights;
    for (std::uint32_t r = 0; r < size; ++r) {
      topic.words.push_back(words[next_word++]);
      weights.push_back(1.0 / std::pow(r + 1.0, cfg.word_zipf_exponent));
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    const double issue_mass = cfg.issue_word_mass * (1.0 + cfg.issue_word_mass_spread * (2.0 * global.uniform() - 1.0));
    for (double& x : weights) x = x / total * (1.0 - issue_mass);
    std::vector<std::string> all_words = topic.words;
    std::vector<double> all_weights = weights;
    topic.word_probs = weights;
    if (issue_mass > 0.0) {
      for (const auto& iw : cfg.issue_words) {
        all_words.push_back(iw);
        all_weights.push_back(issue_mass / static_cast<double>(cfg.issue_words.size()));
      }
    }
    topic.supporters_by_stance.assign(2, 0);
    world.topic_words.push_back(std::move(all_words));
    world.topic_cdf.push_back(cumulative(all_weights));
    world.topics.push_back(std::move(topic));
  }

  assign_profiles(world);

  std::vector<UserOutput> outputs(cfg.num_users);
  if (exec == Exec::serial) {
    for (std::uint32_t u = 0; u < cfg.num_users; ++u) outputs[u] = UserGenerator(world, u).run();
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(cfg.num_users); ++u) {
      outputs[static_cast<std::size_t>(u)] = UserGenerator(world, static_cast<std::uint32_t>(u)).run();
    }
  }

  SynthCorpus corpus;
  GroundTruth& truth = corpus.truth;
  truth.user_ids = world.user_ids;
  truth.user_stance = world.stance;
  truth.stance_names = cfg.stance_names;
  for (std::uint32_t u = 0; u < cfg.num_users; ++u) {
    for (std::uint32_t t : outputs[u].topics) ++world.topics[t].supporters_by_stance[world.stance[u]];
    truth.user_topics.push_back(std::move(outputs[u].topics));
    if (cfg.emit_text) {
      for (auto& t : outputs[u].tweets) corpus.tweets.push_back(std::move(t));
    } else {
      for (auto& t : outputs[u].tweets) {
        t.text.clear();
        corpus.tweets.push_back(std::move(t));
      }
    }
  }
  truth.topics = world.topics;
  std::sort(corpus.tweets.begin(), corpus.tweets.end(),
            [](const TweetRecord& a, const TweetRecord& b) { return a.tweet_id < b.tweet_id; });

  Issue issue;
  issue.name = cfg.issue_name;
  for (std::size_t s = 0; s < 2; ++s) issue.stances.push_back({cfg.stance_names[s], cfg.stance_keywords[s]});
  issue.general_keywords = cfg.issue_words;
  corpus.knowledge_base.issues.push_back(std::move(issue));
  validate(corpus.knowledge_base);
  corpus.gazetteer.assign(std::begin(kGazetteer), std::end(kGazetteer));
  return corpus;
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  using nlohmann::json;
  json users = json::array();
  for (std::size_t u = 0; u < truth.user_ids.size(); ++u) {
    users.push_back({{"user_id", truth.user_ids[u]},
                     {"stance", truth.stance_names[truth.user_stance[u]]},
                     {"topics", truth.user_topics[u]}});
  }
  json topics = json::array();
  for (const auto& t : truth.topics) {
    json item = {{"id", t.id}, {"role", to_string(t.role)}, {"words", t.words}};
    item["stance"] = t.stance ? json(truth.stance_names[*t.stance]) : json(nullptr);
    json support = json::object();
    for (std::size_t s = 0; s < truth.stance_names.size(); ++s) support[truth.stance_names[s]] = t.supporters_by_stance[s];
    item["supporters"] = support;
    // bridge: supported by every stance; partisan: by its own stance only
    bool holds = true;
    for (std::size_t s = 0; s < truth.stance_names.size(); ++s) {
      const bool own = !t.stance || *t.stance == s;
      if (own && t.supporters_by_stance[s] == 0) holds = false;
    }
    item["role_support_holds"] = holds;
    topics.push_back(std::move(item));
  }
  return json{{"stances", truth.stance_names}, {"users", users}, {"topics", topics}}.dump(1) + "\n";
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("tweets.jsonl");
    write_tweets(out, corpus.tweets);
  }
  {
    auto out = open("knowledge_base.json");
    out << knowledge_base_to_json(corpus.knowledge_base);
  }
  {
    auto out = open("gazetteer.txt");
    for (const auto& g : corpus.gazetteer) out << g << '\n';
  }
  {
    auto out = open("ground_truth.json");
    out << ground_truth_to_json(corpus.truth);
  }
}

}  // namespace itopics::synth
