#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "itopics/corpus.hpp"
#include "itopics/stats.hpp"

namespace itopics {

using StanceLabels = std::map<std::string, std::string, std::less<>>;

// A two-way interaction, stored once per unordered pair. `initiator` is the
// user whose mention or retweet was answered by a reply from `partner`.
struct InteractionEdge {
  std::string initiator;
  std::string partner;
};

struct InteractionGraph {
  std::vector<InteractionEdge> edges;  // sorted by (min id, max id)
  StanceLabels labels;                 // every endpoint is labeled
  std::size_t dropped_unlabeled = 0;   // pairs with an endpoint lacking a label
};

// Edge {A, B} iff one of them mentions or retweets the other and the target
// replies back. Pairs are deduplicated globally and self-interactions are
// dropped. When both directions qualify, the initiator is the author of the
// earliest answered one-way tweet (ties: smaller user id).
InteractionGraph extract_two_way_interactions(std::span<const TweetRecord> tweets,
                                              const StanceLabels& labels);

struct StanceHomophily {
  std::string stance;
  // Partner-stance counts over edges initiated by this stance, in the order
  // of `stances` passed to homophily_test.
  std::vector<double> observed;
  std::vector<double> expected;  // counts, N * population proportion
  double same = 0.0;
  double cross = 0.0;
  double total = 0.0;
  stats::TestResult test;
  double cohens_w = 0.0;
};

struct HomophilyResult {
  std::vector<std::string> stances;
  std::vector<double> population;
  std::vector<StanceHomophily> per_stance;
};

// Chi-square goodness of fit of each stance's partner distribution against
// the population proportions, df = |S| - 1, w = sqrt(chi2 / N). Stances with
// no initiated edges are reported as degenerate with p = 1.
// Throws std::invalid_argument unless proportions sum to 1 +- 1e-9 and the
// graph has at least one edge.
HomophilyResult homophily_test(const InteractionGraph& graph,
                               const std::map<std::string, double, std::less<>>& population_proportions);

// Fractions of each label among the given users.
std::map<std::string, double, std::less<>> label_proportions(const StanceLabels& labels,
                                                             std::span<const std::string> stances);

void write_homophily_csv(std::ostream& out, const HomophilyResult& result);
void write_interactions_graphml(std::ostream& out, const InteractionGraph& graph);

}  // namespace itopics
