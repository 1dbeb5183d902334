#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "itopics/parallel.hpp"
#include "itopics/topicmodel.hpp"

namespace itopics {

struct TopicEdge {
  std::uint32_t a = 0;  // a < b, topic ids
  std::uint32_t b = 0;
  double weight = 0.0;  // supporting users / |U|
  std::uint32_t support = 0;
};

struct TopicGraph {
  std::vector<std::uint32_t> nodes;  // retained topic ids, ascending
  std::vector<TopicEdge> edges;      // sorted by (a, b)
  std::vector<std::uint32_t> users_count;  // per node, users with P(t|u) >= epsilon
  std::vector<double> users_fraction;      // per node
  double epsilon = 0.05;
  std::size_t num_users = 0;
  std::size_t num_topics = 0;  // k before junk removal

  std::size_t node_position(std::uint32_t topic) const;
};

// Topic co-occurrence graph: every pair of topics with P(t|u) >= epsilon in
// the same user gains that user's support. Topics above epsilon for nobody
// are dropped as junk. Throws std::invalid_argument unless 0 < epsilon < 1,
// PipelineError when every topic is junk.
TopicGraph build_topic_graph(const TopicModel& model, double epsilon = 0.05, Exec exec = Exec::parallel);

// Dense undirected weighted graph over n nodes (symmetric weight matrix,
// zero diagonal), the unit the centrality kernels work on.
struct WeightedGraph {
  std::size_t n = 0;
  std::vector<double> weights;  // n x n row-major

  static WeightedGraph from_topic_graph(const TopicGraph& graph);
  double weight(std::size_t i, std::size_t j) const { return weights[i * n + j]; }
};

// Connected component id per node, components numbered in order of their
// smallest node.
std::vector<std::size_t> connected_components(const WeightedGraph& graph);

// Moore-Penrose pseudo-inverse of the Laplacian of a connected graph, via
// (L + J/n)^-1 - J/n with a Cholesky factorization. Throws PipelineError when
// the factorization breaks down.
std::vector<double> laplacian_pseudoinverse(const WeightedGraph& connected, Exec exec = Exec::parallel);

// Current-flow closeness (information) centrality: per component of size
// n >= 2, (n - 1) / sum_j r(i, j) with r the effective resistance under
// conductance = edge weight. Isolated nodes get 0.
std::vector<double> information_centrality(const WeightedGraph& graph, Exec exec = Exec::parallel);

struct CentralityReport {
  std::vector<double> centrality;
  std::vector<bool> intermediary;
  std::vector<std::size_t> component;
  double median = 0.0;
  double max = 0.0;
};

// Intermediary iff centrality is strictly above the median of all nodes.
CentralityReport partition_intermediary(std::span<const double> centralities,
                                        std::span<const std::size_t> components = {});

struct TopicUserStats {
  std::vector<std::uint32_t> related_users;  // per node
  std::vector<double> users_fraction;
  std::vector<double> diversity;
  std::vector<std::vector<std::uint32_t>> stance_counts;  // per node, per stance
};

// Users related to a topic (P(t|u) >= epsilon), their fraction of |U| and the
// normalized Shannon entropy of their stance labels (0 with <= 1 labeled
// related user). Users without a label are counted as related but not in the
// entropy. Throws std::invalid_argument for fewer than two stances.
TopicUserStats topic_user_stats(const TopicGraph& graph, const TopicModel& model, double epsilon,
                                const std::map<std::string, std::string, std::less<>>& stance_labels,
                                std::span<const std::string> stances);

void write_topic_graph_graphml(std::ostream& out, const TopicGraph& graph, const CentralityReport& report,
                               std::span<const double> diversity);

}  // namespace itopics
