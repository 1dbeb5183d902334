#include "itopics/homophily.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "format.hpp"

namespace itopics {

InteractionGraph extract_two_way_interactions(std::span<const TweetRecord> tweets, const StanceLabels& labels) {
  using Pair = std::pair<std::string, std::string>;
  // (author, target) -> earliest mention or retweet of target by author
  std::map<Pair, Timestamp> one_way;
  std::set<Pair> replies;  // (replier, replied-to)

  auto note_one_way = [&](const std::string& from, const std::string& to, Timestamp at) {
    if (from == to) return;
    auto [it, inserted] = one_way.try_emplace({from, to}, at);
    if (!inserted && at < it->second) it->second = at;
  };
  for (const auto& t : tweets) {
    for (const auto& m : t.mentions) note_one_way(t.user_id, m, t.created_at);
    if (t.kind == TweetKind::retweet && t.retweet_of_user) note_one_way(t.user_id, *t.retweet_of_user, t.created_at);
    if (t.kind == TweetKind::reply && t.reply_to_user && *t.reply_to_user != t.user_id) {
      replies.insert({t.user_id, *t.reply_to_user});
    }
  }

  // pair (low, high) -> initiator candidates with their one-way time
  std::map<Pair, std::pair<Timestamp, std::string>> pairs;
  for (const auto& [key, at] : one_way) {
    const auto& [from, to] = key;
    if (!replies.contains({to, from})) continue;
    Pair unordered = from < to ? Pair{from, to} : Pair{to, from};
    auto [it, inserted] = pairs.try_emplace(unordered, at, from);
    if (!inserted && std::tie(at, from) < std::tie(it->second.first, it->second.second)) it->second = {at, from};
  }

  InteractionGraph graph;
  for (const auto& [key, initiator] : pairs) {
    const auto& [low, high] = key;
    auto la = labels.find(low);
    auto lb = labels.find(high);
    if (la == labels.end() || lb == labels.end()) {
      ++graph.dropped_unlabeled;
      continue;
    }
    const std::string& from = initiator.second;
    graph.edges.push_back({from, from == low ? high : low});
    graph.labels.emplace(low, la->second);
    graph.labels.emplace(high, lb->second);
  }
  return graph;
}

HomophilyResult homophily_test(const InteractionGraph& graph,
                               const std::map<std::string, double, std::less<>>& population_proportions) {
  if (population_proportions.size() < 2) throw std::invalid_argument("homophily_test: need at least two stances");
  double sum = 0.0;
  for (const auto& [stance, p] : population_proportions) {
    if (p < 0.0) throw std::invalid_argument("homophily_test: negative proportion");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw std::invalid_argument("homophily_test: proportions must sum to 1");
  if (graph.edges.empty()) throw std::invalid_argument("homophily_test: interaction graph has no edges");

  HomophilyResult result;
  for (const auto& [stance, p] : population_proportions) {
    result.stances.push_back(stance);
    result.population.push_back(p);
  }
  auto stance_index = [&](const std::string& user) {
    auto label = graph.labels.find(user);
    if (label == graph.labels.end()) throw std::invalid_argument("homophily_test: unlabeled user '" + user + "'");
    auto it = std::find(result.stances.begin(), result.stances.end(), label->second);
    if (it == result.stances.end()) {
      throw std::invalid_argument("homophily_test: stance '" + label->second + "' has no population proportion");
    }
    return static_cast<std::size_t>(it - result.stances.begin());
  };

  const std::size_t s = result.stances.size();
  std::vector<std::vector<double>> counts(s, std::vector<double>(s, 0.0));
  std::set<std::size_t> present;
  for (const auto& e : graph.edges) {
    const std::size_t from = stance_index(e.initiator);
    const std::size_t to = stance_index(e.partner);
    counts[from][to] += 1.0;
    present.insert(from);
    present.insert(to);
  }
  const bool single_stance = present.size() < 2;

  for (std::size_t i = 0; i < s; ++i) {
    StanceHomophily h;
    h.stance = result.stances[i];
    h.observed = counts[i];
    h.total = std::accumulate(h.observed.begin(), h.observed.end(), 0.0);
    h.same = h.observed[i];
    h.cross = h.total - h.same;
    h.expected.resize(s);
    for (std::size_t j = 0; j < s; ++j) h.expected[j] = h.total * result.population[j];
    if (h.total == 0.0) {
      h.test.method = stats::Method::chi_square;
      h.test.df = static_cast<double>(s - 1);
      h.test.degenerate = true;
      h.test.p_value = 1.0;
    } else {
      h.test = stats::chi_square_gof(h.observed, result.population);
      h.cohens_w = stats::cohens_w(h.test.statistic, h.total);
      if (single_stance) h.test.degenerate = true;
    }
    result.per_stance.push_back(std::move(h));
  }
  return result;
}

std::map<std::string, double, std::less<>> label_proportions(const StanceLabels& labels,
                                                             std::span<const std::string> stances) {
  std::map<std::string, double, std::less<>> out;
  for (const auto& s : stances) out[s] = 0.0;
  std::size_t total = 0;
  for (const auto& [user, label] : labels) {
    auto it = out.find(label);
    if (it == out.end()) continue;
    it->second += 1.0;
    ++total;
  }
  if (total == 0) throw std::invalid_argument("label_proportions: no labeled users");
  for (auto& [s, v] : out) v /= static_cast<double>(total);
  return out;
}

void write_homophily_csv(std::ostream& out, const HomophilyResult& result) {
  using detail::fmt_double;
  out << "stance,edges,same,cross,observed_same_fraction,expected_same_fraction,chi_square,df,p_value,cohens_w,"
         "low_power,degenerate\n";
  for (std::size_t i = 0; i < result.per_stance.size(); ++i) {
    const auto& h = result.per_stance[i];
    out << detail::csv_field(h.stance) << ',' << h.total << ',' << h.same << ',' << h.cross << ','
        << fmt_double(h.total > 0 ? h.same / h.total : 0.0) << ',' << fmt_double(result.population[i]) << ','
        << fmt_double(h.test.statistic) << ',' << h.test.df << ',' << fmt_double(h.test.p_value) << ','
        << fmt_double(h.cohens_w) << ',' << (h.test.low_power ? 1 : 0) << ',' << (h.test.degenerate ? 1 : 0) << '\n';
  }
}

void write_interactions_graphml(std::ostream& out, const InteractionGraph& graph) {
  using detail::xml_escape;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"stance\" for=\"node\" attr.name=\"stance\" attr.type=\"string\"/>\n"
         "  <key id=\"initiator\" for=\"edge\" attr.name=\"initiator\" attr.type=\"string\"/>\n"
         "  <graph id=\"interactions\" edgedefault=\"undirected\">\n";
  for (const auto& [user, label] : graph.labels) {
    out << "    <node id=\"" << xml_escape(user) << "\"><data key=\"stance\">" << xml_escape(label)
        << "</data></node>\n";
  }
  for (const auto& e : graph.edges) {
    out << "    <edge source=\"" << xml_escape(e.initiator) << "\" target=\"" << xml_escape(e.partner)
        << "\"><data key=\"initiator\">" << xml_escape(e.initiator) << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

}  // namespace itopics
