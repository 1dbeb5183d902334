#include "itopics/topicgraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "format.hpp"
#include "itopics/error.hpp"
#include "itopics/stats.hpp"

namespace itopics {

std::size_t TopicGraph::node_position(std::uint32_t topic) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), topic);
  if (it == nodes.end() || *it != topic) throw std::out_of_range("topic " + std::to_string(topic) + " is not a node");
  return static_cast<std::size_t>(it - nodes.begin());
}

namespace {

// Per topic membership counts and the upper triangle of pair supports for
// users [begin, end).
void accumulate_support(const TopicModel& model, double epsilon, std::size_t begin, std::size_t end,
                        std::vector<std::uint32_t>& members, std::vector<std::uint32_t>& pairs,
                        std::vector<std::uint32_t>& scratch) {
  const std::size_t k = model.num_topics();
  for (std::size_t u = begin; u < end; ++u) {
    const auto row = model.theta(u);
    scratch.clear();
    for (std::uint32_t t = 0; t < k; ++t) {
      if (row[t] >= epsilon) scratch.push_back(t);
    }
    for (std::size_t i = 0; i < scratch.size(); ++i) {
      ++members[scratch[i]];
      for (std::size_t j = i + 1; j < scratch.size(); ++j) ++pairs[scratch[i] * k + scratch[j]];
    }
  }
}

}  // namespace

TopicGraph build_topic_graph(const TopicModel& model, double epsilon, Exec exec) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("build_topic_graph: epsilon must be in (0, 1)");
  const std::size_t k = model.num_topics();
  const std::size_t num_users = model.num_users();
  if (num_users == 0) throw PipelineError("build_topic_graph: the model has no users");

  std::vector<std::uint32_t> members(k, 0);
  std::vector<std::uint32_t> pairs(k * k, 0);
  if (exec == Exec::serial) {
    std::vector<std::uint32_t> scratch;
    accumulate_support(model, epsilon, 0, num_users, members, pairs, scratch);
  } else {
#pragma omp parallel
    {
      std::vector<std::uint32_t> local_members(k, 0);
      std::vector<std::uint32_t> local_pairs(k * k, 0);
      std::vector<std::uint32_t> scratch;
#pragma omp for schedule(static)
      for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(num_users); ++u) {
        accumulate_support(model, epsilon, static_cast<std::size_t>(u), static_cast<std::size_t>(u) + 1,
                           local_members, local_pairs, scratch);
      }
#pragma omp critical(itopics_topic_graph_merge)
      {
        for (std::size_t t = 0; t < k; ++t) members[t] += local_members[t];
        for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] += local_pairs[i];
      }
    }
  }

  TopicGraph g;
  g.epsilon = epsilon;
  g.num_users = num_users;
  g.num_topics = k;
  for (std::uint32_t t = 0; t < k; ++t) {
    if (members[t] == 0) continue;
    g.nodes.push_back(t);
    g.users_count.push_back(members[t]);
    g.users_fraction.push_back(static_cast<double>(members[t]) / static_cast<double>(num_users));
  }
  if (g.nodes.empty()) {
    throw PipelineError("build_topic_graph: every topic is junk at epsilon " + detail::fmt_double(epsilon) +
                        " (no user has P(t|u) >= epsilon)");
  }
  for (std::uint32_t a = 0; a < k; ++a) {
    for (std::uint32_t b = a + 1; b < k; ++b) {
      const std::uint32_t support = pairs[a * k + b];
      if (support == 0) continue;
      g.edges.push_back({a, b, static_cast<double>(support) / static_cast<double>(num_users), support});
    }
  }
  return g;
}

WeightedGraph WeightedGraph::from_topic_graph(const TopicGraph& graph) {
  WeightedGraph w;
  w.n = graph.nodes.size();
  w.weights.assign(w.n * w.n, 0.0);
  for (const auto& e : graph.edges) {
    const std::size_t i = graph.node_position(e.a);
    const std::size_t j = graph.node_position(e.b);
    w.weights[i * w.n + j] = e.weight;
    w.weights[j * w.n + i] = e.weight;
  }
  return w;
}

std::vector<std::size_t> connected_components(const WeightedGraph& graph) {
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> comp(graph.n, kUnset);
  std::size_t next = 0;
  for (std::size_t start = 0; start < graph.n; ++start) {
    if (comp[start] != kUnset) continue;
    std::deque<std::size_t> queue{start};
    comp[start] = next;
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t u = 0; u < graph.n; ++u) {
        if (comp[u] == kUnset && graph.weight(v, u) > 0.0) {
          comp[u] = next;
          queue.push_back(u);
        }
      }
    }
    ++next;
  }
  return comp;
}

namespace {

// Solves (R R^T) x = e_col for one column of the inverse.
void solve_column(const std::vector<double>& chol, std::size_t n, std::size_t col, double* x) {
  std::vector<double> y(n, 0.0);
  for (std::size_t i = col; i < n; ++i) {
    double s = (i == col) ? 1.0 : 0.0;
    for (std::size_t k = col; k < i; ++k) s -= chol[i * n + k] * y[k];
    y[i] = s / chol[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= chol[k * n + ii] * x[k];
    x[ii] = s / chol[ii * n + ii];
  }
}

}  // namespace

std::vector<double> laplacian_pseudoinverse(const WeightedGraph& g, Exec exec) {
  const std::size_t n = g.n;
  if (n == 0) return {};
  if (n == 1) return {0.0};
  const double jn = 1.0 / static_cast<double>(n);

  // M = L + J/n, symmetric positive definite for a connected graph.
  std::vector<double> m(n * n, 0.0);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = g.weight(i, j);
      if (w < 0.0 || !std::isfinite(w)) throw PipelineError("laplacian: edge weights must be finite and nonnegative");
      degree += w;
      m[i * n + j] = -w + jn;
    }
    m[i * n + i] = degree + jn;
    max_diag = std::max(max_diag, m[i * n + i]);
  }

  // In-place lower Cholesky factor.
  std::vector<double>& r = m;
  double min_pivot = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double d = r[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= r[j * n + k] * r[j * n + k];
    min_pivot = std::min(min_pivot, d);
    if (!(d > max_diag * 1e-13)) {
      throw PipelineError("laplacian pseudo-inverse: Cholesky pivot " + detail::fmt_double(d) + " at row " +
                          std::to_string(j) + " against largest diagonal " + detail::fmt_double(max_diag) +
                          " (graph disconnected or ill-conditioned)");
    }
    const double root = std::sqrt(d);
    r[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = r[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= r[i * n + k] * r[j * n + k];
      r[i * n + j] = s / root;
    }
  }

  // Columns of M^-1, stored transposed (row c holds column c); M^-1 is symmetric.
  std::vector<double> inv(n * n, 0.0);
  if (exec == Exec::serial) {
    for (std::size_t c = 0; c < n; ++c) solve_column(r, n, c, &inv[c * n]);
  } else {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n); ++c) {
      solve_column(r, n, static_cast<std::size_t>(c), &inv[static_cast<std::size_t>(c) * n]);
    }
  }

  std::vector<double> pinv(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) pinv[i * n + j] = 0.5 * (inv[i * n + j] + inv[j * n + i]) - jn;
  }
  return pinv;
}

std::vector<double> information_centrality(const WeightedGraph& graph, Exec exec) {
  std::vector<double> centrality(graph.n, 0.0);
  if (graph.n == 0) return centrality;
  const auto comp = connected_components(graph);
  const std::size_t num_comp = *std::max_element(comp.begin(), comp.end()) + 1;
  for (std::size_t c = 0; c < num_comp; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < graph.n; ++i) {
      if (comp[i] == c) members.push_back(i);
    }
    const std::size_t n = members.size();
    if (n < 2) continue;
    WeightedGraph sub;
    sub.n = n;
    sub.weights.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) sub.weights[i * n + j] = graph.weight(members[i], members[j]);
    }
    const auto pinv = laplacian_pseudoinverse(sub, exec);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += pinv[i * n + i];
    // sum_j r(i, j) = n L+_ii + tr(L+) because rows of L+ sum to zero.
    for (std::size_t i = 0; i < n; ++i) {
      const double resistance_sum = static_cast<double>(n) * pinv[i * n + i] + trace;
      centrality[members[i]] = static_cast<double>(n - 1) / resistance_sum;
    }
  }
  return centrality;
}

CentralityReport partition_intermediary(std::span<const double> centralities, std::span<const std::size_t> components) {
  if (centralities.empty()) throw std::invalid_argument("partition_intermediary: no nodes");
  CentralityReport report;
  report.centrality.assign(centralities.begin(), centralities.end());
  report.median = stats::median(report.centrality);
  report.max = *std::max_element(centralities.begin(), centralities.end());
  report.intermediary.reserve(centralities.size());
  for (double c : centralities) report.intermediary.push_back(c > report.median);
  if (components.empty()) {
    report.component.assign(centralities.size(), 0);
  } else {
    if (components.size() != centralities.size()) {
      throw std::invalid_argument("partition_intermediary: component ids do not match nodes");
    }
    report.component.assign(components.begin(), components.end());
  }
  return report;
}

TopicUserStats topic_user_stats(const TopicGraph& graph, const TopicModel& model, double epsilon,
                                const std::map<std::string, std::string, std::less<>>& stance_labels,
                                std::span<const std::string> stances) {
  if (stances.size() < 2) throw std::invalid_argument("topic_user_stats: at least two stances are required");
  const std::size_t nodes = graph.nodes.size();
  TopicUserStats out;
  out.related_users.assign(nodes, 0);
  out.stance_counts.assign(nodes, std::vector<std::uint32_t>(stances.size(), 0));

  const auto users = model.user_ids();
  for (std::size_t u = 0; u < users.size(); ++u) {
    std::optional<std::size_t> stance;
    if (auto it = stance_labels.find(users[u]); it != stance_labels.end()) {
      auto s = std::find(stances.begin(), stances.end(), it->second);
      if (s != stances.end()) stance = static_cast<std::size_t>(s - stances.begin());
    }
    const auto row = model.theta(u);
    for (std::size_t p = 0; p < nodes; ++p) {
      if (row[graph.nodes[p]] < epsilon) continue;
      ++out.related_users[p];
      if (stance) ++out.stance_counts[p][*stance];
    }
  }

  const double num_users = static_cast<double>(std::max<std::size_t>(1, users.size()));
  for (std::size_t p = 0; p < nodes; ++p) {
    out.users_fraction.push_back(out.related_users[p] / num_users);
    std::uint32_t labeled = 0;
    for (auto c : out.stance_counts[p]) labeled += c;
    if (labeled <= 1) {
      out.diversity.push_back(0.0);
      continue;
    }
    std::vector<double> probs;
    for (auto c : out.stance_counts[p]) probs.push_back(static_cast<double>(c) / labeled);
    out.diversity.push_back(stats::shannon_entropy_normalized(probs));
  }
  return out;
}

void write_topic_graph_graphml(std::ostream& out, const TopicGraph& graph, const CentralityReport& report,
                               std::span<const double> diversity) {
  using detail::fmt_double;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
         "  <key id=\"users_fraction\" for=\"node\" attr.name=\"users_fraction\" attr.type=\"double\"/>\n"
         "  <key id=\"centrality\" for=\"node\" attr.name=\"centrality\" attr.type=\"double\"/>\n"
         "  <key id=\"diversity\" for=\"node\" attr.name=\"diversity\" attr.type=\"double\"/>\n"
         "  <key id=\"intermediary\" for=\"node\" attr.name=\"intermediary\" attr.type=\"boolean\"/>\n"
         "  <key id=\"component\" for=\"node\" attr.name=\"component\" attr.type=\"int\"/>\n"
         "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
         "  <key id=\"support\" for=\"edge\" attr.name=\"support\" attr.type=\"int\"/>\n"
         "  <graph id=\"topics\" edgedefault=\"undirected\">\n";
  for (std::size_t p = 0; p < graph.nodes.size(); ++p) {
    out << "    <node id=\"t" << graph.nodes[p] << "\">"
        << "<data key=\"users_fraction\">" << fmt_double(graph.users_fraction[p]) << "</data>"
        << "<data key=\"centrality\">" << fmt_double(report.centrality[p]) << "</data>";
    if (p < diversity.size()) out << "<data key=\"diversity\">" << fmt_double(diversity[p]) << "</data>";
    out << "<data key=\"intermediary\">" << (report.intermediary[p] ? "true" : "false") << "</data>"
        << "<data key=\"component\">" << report.component[p] << "</data></node>\n";
  }
  for (const auto& e : graph.edges) {
    out << "    <edge source=\"t" << e.a << "\" target=\"t" << e.b << "\"><data key=\"weight\">"
        << fmt_double(e.weight) << "</data><data key=\"support\">" << e.support << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
}

}  // namespace itopics
