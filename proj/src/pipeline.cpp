#include "itopics/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "format.hpp"
#include "itopics/corpus.hpp"
#include "itopics/error.hpp"
#include "itopics/homophily.hpp"
#include "itopics/stats.hpp"
#include "itopics/topicgraph.hpp"

namespace itopics {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::ingest: return "ingest";
    case Stage::stance: return "stance";
    case Stage::homophily: return "homophily";
    case Stage::lda: return "lda";
    case Stage::graph: return "graph";
    case Stage::report: return "report";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) noexcept {
  for (Stage s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<Stage> stage_dependencies(Stage stage) {
  switch (stage) {
    case Stage::ingest: return {};
    case Stage::stance: return {Stage::ingest};
    case Stage::homophily: return {Stage::ingest, Stage::stance};
    case Stage::lda: return {Stage::ingest};
    case Stage::graph: return {Stage::lda};
    case Stage::report: return {Stage::graph, Stage::stance, Stage::homophily};
  }
  return {};
}

std::string hash_string(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return hash_string(ss.str());
}

// ---------------------------------------------------------------- config

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

}  // namespace

PipelineConfig PipelineConfig::from_json(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> known = {"tweets",     "knowledge_base", "gazetteer",  "issue",
                                              "axis",       "include_replies", "min_doc_freq", "max_degree",
                                              "epsilon",    "lda",            "population"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
  PipelineConfig cfg;
  try {
    if (!j.contains("tweets")) throw ConfigError("config: 'tweets' is required");
    if (!j.contains("knowledge_base")) throw ConfigError("config: 'knowledge_base' is required");
    cfg.tweets = resolve(base_dir, j.at("tweets").get<std::string>());
    cfg.knowledge_base = resolve(base_dir, j.at("knowledge_base").get<std::string>());
    if (j.contains("gazetteer") && !j["gazetteer"].is_null()) {
      cfg.gazetteer = resolve(base_dir, j["gazetteer"].get<std::string>());
    }
    cfg.issue = get_or<std::string>(j, "issue", "");
    if (j.contains("axis") && !j["axis"].is_null()) {
      const auto& a = j["axis"];
      cfg.axis = TendencyAxis{a.at("positive").get<std::string>(), a.at("negative").get<std::string>()};
    }
    cfg.include_replies = get_or<bool>(j, "include_replies", false);
    cfg.min_doc_freq = get_or<std::uint32_t>(j, "min_doc_freq", 5);
    cfg.max_degree = get_or<std::uint64_t>(j, "max_degree", 2000);
    cfg.epsilon = get_or<double>(j, "epsilon", 0.05);
    if (j.contains("lda")) {
      const auto& l = j["lda"];
      static const std::set<std::string> lda_keys = {"topics", "alpha", "beta", "iterations", "burn_in", "seed"};
      for (const auto& [key, value] : l.items()) {
        if (!lda_keys.contains(key)) throw ConfigError("config: unknown lda key '" + key + "'");
      }
      cfg.lda.k = get_or<std::uint32_t>(l, "topics", cfg.lda.k);
      if (l.contains("alpha") && !l["alpha"].is_null()) cfg.lda.alpha = l["alpha"].get<double>();
      cfg.lda.beta = get_or<double>(l, "beta", cfg.lda.beta);
      cfg.lda.iterations = get_or<std::uint32_t>(l, "iterations", cfg.lda.iterations);
      cfg.lda.burn_in = get_or<std::uint32_t>(l, "burn_in", cfg.lda.iterations * 4 / 5);
      cfg.lda.seed = get_or<std::uint64_t>(l, "seed", cfg.lda.seed);
    }
    if (j.contains("population") && !j["population"].is_null()) {
      std::map<std::string, double, std::less<>> pop;
      for (const auto& [key, value] : j["population"].items()) pop[key] = value.get<double>();
      cfg.population = std::move(pop);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), path.parent_path());
}

void PipelineConfig::validate() const {
  if (tweets.empty()) throw ConfigError("config: tweets path is empty");
  if (knowledge_base.empty()) throw ConfigError("config: knowledge_base path is empty");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("config: epsilon must be in (0, 1)");
  if (min_doc_freq == 0) throw ConfigError("config: min_doc_freq must be positive");
  if (axis && axis->positive == axis->negative) throw ConfigError("config: axis stances must differ");
  lda.validate();
  if (population) {
    double sum = 0.0;
    for (const auto& [name, p] : *population) {
      if (p < 0.0) throw ConfigError("config: negative population proportion for '" + name + "'");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("config: population proportions must sum to 1");
  }
}

namespace {

json config_echo(const PipelineConfig& c) {
  json j;
  j["tweets"] = c.tweets.string();
  j["knowledge_base"] = c.knowledge_base.string();
  j["gazetteer"] = c.gazetteer ? json(c.gazetteer->string()) : json(nullptr);
  j["issue"] = c.issue;
  j["axis"] = c.axis ? json{{"positive", c.axis->positive}, {"negative", c.axis->negative}} : json(nullptr);
  j["include_replies"] = c.include_replies;
  j["min_doc_freq"] = c.min_doc_freq;
  j["max_degree"] = c.max_degree;
  j["epsilon"] = c.epsilon;
  j["lda"] = {{"topics", c.lda.k},          {"alpha", c.lda.alpha_value()}, {"beta", c.lda.beta},
              {"iterations", c.lda.iterations}, {"burn_in", c.lda.burn_in},   {"seed", c.lda.seed}};
  if (c.population) {
    json pop = json::object();
    for (const auto& [k, v] : *c.population) pop[k] = v;
    j["population"] = pop;
  } else {
    j["population"] = nullptr;
  }
  return j;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot read artifact " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot read artifact " + path.string());
  return in;
}

// Files each stage must leave behind.
std::vector<std::string> stage_outputs(Stage stage) {
  switch (stage) {
    case Stage::ingest: return {"tweets.jsonl", "vocabulary.txt", "regular_users.txt"};
    case Stage::stance: return {"vectors.txt", "profiles.csv", "seeds.tsv"};
    case Stage::homophily: return {"results.csv", "interactions.graphml"};
    case Stage::lda: return {"model.txt"};
    case Stage::graph: return {"centrality.csv", "topic_graph.graphml"};
    case Stage::report:
      return {"topics.csv",           "users_stance.csv",    "homophily.csv",       "topic_graph.graphml",
              "interactions.graphml", "ccdf_keyword_prob.csv", "summary.txt"};
  }
  return {};
}

struct IngestData {
  std::vector<TweetRecord> tweets;
  std::vector<UserDocument> docs;
  Vocabulary vocab;
};

std::vector<std::string> read_lines(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

// ---------------------------------------------------------------- pipeline

Pipeline::Pipeline(PipelineConfig config, fs::path workspace)
    : config_(std::move(config)), workspace_(std::move(workspace)) {
  config_.validate();
}

fs::path Pipeline::stage_dir(Stage stage) const { return workspace_ / std::string(to_string(stage)); }

std::optional<std::string> Pipeline::recorded_fingerprint(Stage stage) const {
  const fs::path manifest = stage_dir(stage) / "manifest.json";
  if (!fs::exists(manifest)) return std::nullopt;
  try {
    const json j = json::parse(read_text(manifest));
    for (const auto& [name, hash] : j.at("outputs").items()) {
      const fs::path file = stage_dir(stage) / name;
      if (!fs::exists(file) || hash_file(file) != hash.get<std::string>()) return std::nullopt;
    }
    return j.at("fingerprint").get<std::string>();
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string Pipeline::fingerprint(Stage stage) const {
  const json echo = config_echo(config_);
  json parts = json::object();
  parts["stage"] = std::string(to_string(stage));
  switch (stage) {
    case Stage::ingest:
      parts["tweets"] = hash_file(config_.tweets);
      parts["knowledge_base"] = hash_file(config_.knowledge_base);
      parts["gazetteer"] = config_.gazetteer ? json(hash_file(*config_.gazetteer)) : json(nullptr);
      parts["include_replies"] = echo["include_replies"];
      parts["min_doc_freq"] = echo["min_doc_freq"];
      parts["max_degree"] = echo["max_degree"];
      break;
    case Stage::stance:
      parts["issue"] = echo["issue"];
      parts["axis"] = echo["axis"];
      break;
    case Stage::homophily: parts["population"] = echo["population"]; break;
    case Stage::lda: parts["lda"] = echo["lda"]; break;
    case Stage::graph:
    case Stage::report: parts["epsilon"] = echo["epsilon"]; break;
  }
  // A stage is only as current as the upstream artifacts it consumed.
  for (Stage dep : stage_dependencies(stage)) parts[std::string(to_string(dep))] = fingerprint(dep);
  return hash_string(parts.dump());
}

bool Pipeline::is_current(Stage stage, const std::string& fp) const {
  const auto recorded = recorded_fingerprint(stage);
  return recorded && *recorded == fp;
}

void Pipeline::write_manifest(Stage stage, const std::string& fp, double seconds) const {
  json j;
  j["stage"] = std::string(to_string(stage));
  j["fingerprint"] = fp;
  j["config"] = config_echo(config_);
  json inputs = json::object();
  if (stage == Stage::ingest) {
    inputs[config_.tweets.string()] = hash_file(config_.tweets);
    inputs[config_.knowledge_base.string()] = hash_file(config_.knowledge_base);
    if (config_.gazetteer) inputs[config_.gazetteer->string()] = hash_file(*config_.gazetteer);
  }
  for (Stage dep : stage_dependencies(stage)) {
    inputs[std::string(to_string(dep))] = recorded_fingerprint(dep).value_or("");
  }
  j["inputs"] = inputs;
  json outputs = json::object();
  for (const auto& name : stage_outputs(stage)) outputs[name] = hash_file(stage_dir(stage) / name);
  j["outputs"] = outputs;
  j["elapsed_seconds"] = seconds;
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  j["finished_at"] = format_timestamp(now);
  auto out = open_out(stage_dir(stage) / "manifest.json");
  out << j.dump(2) << '\n';
}

StageOutcome Pipeline::run(Stage stage, bool force) {
  for (Stage dep : stage_dependencies(stage)) {
    const auto recorded = recorded_fingerprint(dep);
    if (!recorded || *recorded != fingerprint(dep)) throw MissingDependency(std::string(to_string(dep)));
  }
  StageOutcome outcome;
  outcome.stage = stage;
  const std::string fp = fingerprint(stage);
  if (!force && is_current(stage, fp)) {
    outcome.up_to_date = true;
    outcome.messages.push_back(std::string(to_string(stage)) + ": up to date");
    return outcome;
  }
  fs::create_directories(stage_dir(stage));
  // Invalidate before writing so an interrupted run never looks current.
  fs::remove(stage_dir(stage) / "manifest.json");
  const auto start = std::chrono::steady_clock::now();
  switch (stage) {
    case Stage::ingest: run_ingest(outcome); break;
    case Stage::stance: run_stance(outcome); break;
    case Stage::homophily: run_homophily(outcome); break;
    case Stage::lda: run_lda(outcome); break;
    case Stage::graph: run_graph(outcome); break;
    case Stage::report: run_report(outcome); break;
  }
  outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(stage, fp, outcome.seconds);
  return outcome;
}

std::vector<StageOutcome> Pipeline::run_all(bool force) {
  std::vector<StageOutcome> outcomes;
  for (Stage s : kAllStages) outcomes.push_back(run(s, force));
  return outcomes;
}

namespace {

const Issue& resolve_issue(const IssueKnowledgeBase& kb, const std::string& name) {
  if (kb.issues.empty()) throw ConfigError("knowledge base has no issues");
  if (name.empty()) return kb.issues.front();
  const Issue* issue = kb.find_issue(name);
  if (!issue) throw ConfigError("issue '" + name + "' not in knowledge base");
  return *issue;
}

TendencyAxis resolve_axis(const Issue& issue, const std::optional<TendencyAxis>& axis) {
  if (axis) {
    if (!issue.find_stance(axis->positive) || !issue.find_stance(axis->negative)) {
      throw ConfigError("axis stances must belong to issue '" + issue.name + "'");
    }
    return *axis;
  }
  return {issue.stances.at(0).name, issue.stances.at(1).name};
}

std::vector<std::string> stance_order(const Issue& issue) {
  std::vector<std::string> names;
  for (const auto& s : issue.stances) names.push_back(s.name);
  return names;
}

IngestData load_ingest(const fs::path& dir, const IssueKnowledgeBase& kb, bool include_replies) {
  IngestData data;
  data.tweets = load_tweets(dir / "tweets.jsonl").tweets;
  data.docs = build_user_documents(data.tweets, kb, include_replies);
  auto in = open_in(dir / "vocabulary.txt");
  data.vocab = Vocabulary::read(in);
  return data;
}

struct CentralityRow {
  std::uint32_t topic = 0;
  double centrality = 0.0;
  std::size_t component = 0;
  bool intermediary = false;
};

std::vector<CentralityRow> read_centrality(const fs::path& path) {
  std::vector<CentralityRow> rows;
  const auto lines = read_lines(path);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CentralityRow r;
    unsigned topic = 0;
    unsigned long component = 0;
    int inter = 0;
    if (std::sscanf(lines[i].c_str(), "%u,%lf,%lu,%d", &topic, &r.centrality, &component, &inter) != 4) {
      throw PipelineError("malformed centrality row: " + lines[i]);
    }
    r.topic = topic;
    r.component = component;
    r.intermediary = inter != 0;
    rows.push_back(r);
  }
  return rows;
}

// P(X >= x) at every distinct value, per group.
void write_ccdf(std::ostream& out, const std::string& group, std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    out << group << ',' << detail::fmt_double(values[i]) << ',' << detail::fmt_double((n - i) / n) << '\n';
    i = j;
  }
}

void write_test(std::ostream& out, const std::string& name, const stats::TestResult& t) {
  using detail::fmt_double;
  out << name << ": statistic=" << fmt_double(t.statistic);
  if (t.z) out << " z=" << fmt_double(*t.z);
  out << " p=" << fmt_double(t.p_value);
  if (t.exact) out << " (exact)";
  if (t.degenerate) out << " (degenerate)";
  if (t.low_power) out << " (low power)";
  out << '\n';
}

}  // namespace

void Pipeline::run_ingest(StageOutcome& out) {
  const auto kb = load_knowledge_base(config_.knowledge_base);
  auto loaded = load_tweets(config_.tweets);
  out.messages.push_back("tweets: " + std::to_string(loaded.tweets.size()) + " loaded, " +
                         std::to_string(loaded.skipped_malformed) + " malformed, " +
                         std::to_string(loaded.duplicates) + " duplicates");
  std::vector<TweetRecord> tweets = std::move(loaded.tweets);
  if (config_.gazetteer) {
    const auto places = load_gazetteer(*config_.gazetteer);
    if (places.empty()) throw ConfigError("gazetteer " + config_.gazetteer->string() + " is empty");
    tweets = filter_by_location(tweets, places);
    out.messages.push_back("location filter kept " + std::to_string(tweets.size()) + " tweets");
  }
  const auto docs = build_user_documents(tweets, kb, config_.include_replies);
  const auto vocab = build_vocabulary(docs, config_.min_doc_freq);
  const auto regular = select_regular_users(docs, tweets, config_.max_degree);
  out.messages.push_back("documents: " + std::to_string(docs.size()) + ", vocabulary: " +
                         std::to_string(vocab.size()) + ", regular users: " + std::to_string(regular.kept.size()) +
                         " (" + std::to_string(regular.excluded_over_limit) + " over limit, " +
                         std::to_string(regular.excluded_missing_counts) + " without counts)");

  const fs::path dir = stage_dir(Stage::ingest);
  {
    auto f = open_out(dir / "tweets.jsonl");
    write_tweets(f, tweets);
  }
  {
    auto f = open_out(dir / "vocabulary.txt");
    vocab.write(f);
  }
  {
    auto f = open_out(dir / "regular_users.txt");
    for (const auto& u : regular.kept) f << u << '\n';
  }
}

void Pipeline::run_stance(StageOutcome& out) {
  const auto kb = load_knowledge_base(config_.knowledge_base);
  const Issue& issue = resolve_issue(kb, config_.issue);
  const TendencyAxis axis = resolve_axis(issue, config_.axis);
  const auto data = load_ingest(stage_dir(Stage::ingest), kb, config_.include_replies);

  const auto seeds = find_seed_users(data.docs, kb, issue.name);
  const auto order = stance_order(issue);
  const auto vectors = build_stance_vectors(data.docs, seeds, data.vocab, data.docs.size(), order);
  const auto profiles = profile_users(data.docs, data.vocab, data.docs.size(), vectors, axis);

  std::map<std::string, std::size_t> counts;
  for (const auto& p : profiles) ++counts[p.label];
  for (const auto& sv : vectors.stances) {
    out.messages.push_back(sv.stance + ": " + std::to_string(sv.seed_users.size()) + " seeds, " +
                           std::to_string(counts[sv.stance]) + " labeled users");
  }

  const fs::path dir = stage_dir(Stage::stance);
  {
    std::vector<std::pair<std::string, SparseVector>> rows;
    for (const auto& sv : vectors.stances) rows.emplace_back(sv.stance, sv.vector);
    auto f = open_out(dir / "vectors.txt");
    write_sparse_vectors(f, rows);
  }
  {
    auto f = open_out(dir / "profiles.csv");
    write_profiles_csv(f, profiles, vectors.names());
  }
  {
    auto f = open_out(dir / "seeds.tsv");
    for (const auto& [stance, users] : seeds) {
      for (const auto& u : users) f << stance << '\t' << u << '\n';
    }
  }
}

namespace {

HomophilyResult compute_homophily(const PipelineConfig& config, const Issue& issue,
                                  std::span<const TweetRecord> tweets, std::span<const UserStanceProfile> profiles,
                                  InteractionGraph& graph) {
  const auto labels = label_map(profiles);
  graph = extract_two_way_interactions(tweets, labels);
  if (graph.edges.empty()) throw PipelineError("homophily: no two-way interactions between labeled users");
  const auto order = stance_order(issue);
  const auto population = config.population ? *config.population : label_proportions(labels, order);
  return homophily_test(graph, population);
}

}  // namespace

void Pipeline::run_homophily(StageOutcome& out) {
  const auto kb = load_knowledge_base(config_.knowledge_base);
  const Issue& issue = resolve_issue(kb, config_.issue);
  const auto tweets = load_tweets(stage_dir(Stage::ingest) / "tweets.jsonl").tweets;
  auto in = open_in(stage_dir(Stage::stance) / "profiles.csv");
  const auto profiles = read_profiles_csv(in);

  InteractionGraph graph;
  const auto result = compute_homophily(config_, issue, tweets, profiles, graph);
  out.messages.push_back("two-way interactions: " + std::to_string(graph.edges.size()) + " (" +
                         std::to_string(graph.dropped_unlabeled) + " dropped, unlabeled endpoint)");
  for (const auto& h : result.per_stance) {
    out.messages.push_back(h.stance + ": same-stance " + detail::fmt_double(h.total > 0 ? h.same / h.total : 0.0, 4) +
                           ", chi2 " + detail::fmt_double(h.test.statistic, 6) + ", p " +
                           detail::fmt_double(h.test.p_value, 4));
  }
  const fs::path dir = stage_dir(Stage::homophily);
  {
    auto f = open_out(dir / "results.csv");
    write_homophily_csv(f, result);
  }
  {
    auto f = open_out(dir / "interactions.graphml");
    write_interactions_graphml(f, graph);
  }
}

void Pipeline::run_lda(StageOutcome& out) {
  const auto kb = load_knowledge_base(config_.knowledge_base);
  const auto data = load_ingest(stage_dir(Stage::ingest), kb, config_.include_replies);
  const auto regular_ids = read_lines(stage_dir(Stage::ingest) / "regular_users.txt");
  const std::set<std::string, std::less<>> regular(regular_ids.begin(), regular_ids.end());

  std::vector<UserDocument> docs;
  for (const auto& d : data.docs) {
    if (regular.contains(d.user_id)) docs.push_back(d);
  }
  std::vector<std::string> dropped;
  const auto bags = to_bags(docs, data.vocab, &dropped);
  if (!dropped.empty()) {
    out.messages.push_back(std::to_string(dropped.size()) + " users without in-vocabulary tokens left out");
  }
  const auto model = fit_lda(bags, data.vocab, config_.lda);
  out.messages.push_back("lda: k=" + std::to_string(config_.lda.k) + " over " + std::to_string(bags.size()) +
                         " users, final log-likelihood " + detail::fmt_double(model.log_likelihood().back(), 8));
  auto f = open_out(stage_dir(Stage::lda) / "model.txt");
  model.write(f);
}

void Pipeline::run_graph(StageOutcome& out) {
  auto in = open_in(stage_dir(Stage::lda) / "model.txt");
  const auto model = TopicModel::read(in);
  const auto graph = build_topic_graph(model, config_.epsilon);
  const auto weighted = WeightedGraph::from_topic_graph(graph);
  const auto centrality = information_centrality(weighted);
  const auto components = connected_components(weighted);
  const auto report = partition_intermediary(centrality, components);
  out.messages.push_back("topic graph: " + std::to_string(graph.nodes.size()) + " of " +
                         std::to_string(graph.num_topics) + " topics retained, " +
                         std::to_string(graph.edges.size()) + " edges");

  const fs::path dir = stage_dir(Stage::graph);
  {
    auto f = open_out(dir / "centrality.csv");
    f << "topic,centrality,component,intermediary,users_count,users_fraction\n";
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      f << graph.nodes[i] << ',' << detail::fmt_exact(report.centrality[i]) << ',' << report.component[i] << ','
        << (report.intermediary[i] ? 1 : 0) << ',' << graph.users_count[i] << ','
        << detail::fmt_exact(graph.users_fraction[i]) << '\n';
    }
  }
  {
    auto f = open_out(dir / "topic_graph.graphml");
    write_topic_graph_graphml(f, graph, report, {});
  }
}

void Pipeline::run_report(StageOutcome& out) {
  using detail::fmt_double;
  const auto kb = load_knowledge_base(config_.knowledge_base);
  const Issue& issue = resolve_issue(kb, config_.issue);
  const auto order = stance_order(issue);

  auto model_in = open_in(stage_dir(Stage::lda) / "model.txt");
  const auto model = TopicModel::read(model_in);
  const auto graph = build_topic_graph(model, config_.epsilon);
  const auto rows = read_centrality(stage_dir(Stage::graph) / "centrality.csv");
  if (rows.size() != graph.nodes.size()) throw PipelineError("report: centrality.csv does not match the topic graph");

  CentralityReport report;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].topic != graph.nodes[i]) throw PipelineError("report: centrality.csv does not match the topic graph");
    report.centrality.push_back(rows[i].centrality);
    report.component.push_back(rows[i].component);
    report.intermediary.push_back(rows[i].intermediary);
  }
  report.median = stats::median(report.centrality);
  report.max = *std::max_element(report.centrality.begin(), report.centrality.end());

  auto profiles_in = open_in(stage_dir(Stage::stance) / "profiles.csv");
  const auto profiles = read_profiles_csv(profiles_in);
  const auto labels = label_map(profiles);
  const auto users = topic_user_stats(graph, model, config_.epsilon, labels, order);

  const auto keywords = issue.vocabulary_keywords();
  std::vector<double> keyword_prob;
  for (std::uint32_t t : graph.nodes) keyword_prob.push_back(keyword_topic_prob(model, keywords, t));

  const fs::path dir = stage_dir(Stage::report);
  {
    auto f = open_out(dir / "topics.csv");
    f << "topic,centrality,users_fraction,diversity,keyword_prob,intermediary\n";
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      f << graph.nodes[i] << ',' << fmt_double(report.centrality[i], 12) << ','
        << fmt_double(users.users_fraction[i], 12) << ',' << fmt_double(users.diversity[i], 12) << ','
        << fmt_double(keyword_prob[i], 12) << ',' << (report.intermediary[i] ? 1 : 0) << '\n';
    }
  }
  fs::copy_file(stage_dir(Stage::stance) / "profiles.csv", dir / "users_stance.csv",
                fs::copy_options::overwrite_existing);
  fs::copy_file(stage_dir(Stage::homophily) / "results.csv", dir / "homophily.csv",
                fs::copy_options::overwrite_existing);
  fs::copy_file(stage_dir(Stage::homophily) / "interactions.graphml", dir / "interactions.graphml",
                fs::copy_options::overwrite_existing);
  {
    auto f = open_out(dir / "topic_graph.graphml");
    write_topic_graph_graphml(f, graph, report, users.diversity);
  }

  std::vector<double> div_in, div_out, kp_in, kp_out;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    (report.intermediary[i] ? div_in : div_out).push_back(users.diversity[i]);
    (report.intermediary[i] ? kp_in : kp_out).push_back(keyword_prob[i]);
  }
  {
    auto f = open_out(dir / "ccdf_keyword_prob.csv");
    f << "group,keyword_prob,ccdf\n";
    write_ccdf(f, "intermediary", kp_in);
    write_ccdf(f, "non_intermediary", kp_out);
  }

  auto summary = open_out(dir / "summary.txt");
  summary << "issue: " << issue.name << '\n';
  summary << "labeled users:";
  {
    std::map<std::string, std::size_t> counts;
    for (const auto& p : profiles) ++counts[p.label];
    for (const auto& s : order) summary << ' ' << s << '=' << counts[s];
  }
  summary << "\n\n[homophily]\n";
  {
    auto in = open_in(stage_dir(Stage::homophily) / "results.csv");
    summary << in.rdbuf();
  }
  summary << "\n[topic graph]\n";
  summary << "topics retained: " << graph.nodes.size() << " of " << graph.num_topics << '\n';
  summary << "edges: " << graph.edges.size() << '\n';
  summary << "epsilon: " << fmt_double(config_.epsilon) << '\n';
  summary << "median centrality: " << fmt_double(report.median) << '\n';
  summary << "intermediary topics: " << div_in.size() << ", non-intermediary: " << div_out.size() << '\n';

  auto group_line = [&](const char* what, const std::vector<double>& a, const std::vector<double>& b) {
    summary << what << " intermediary mean=" << (a.empty() ? "nan" : fmt_double(stats::mean(a)))
            << " median=" << (a.empty() ? "nan" : fmt_double(stats::median(a)));
    summary << " | non-intermediary mean=" << (b.empty() ? "nan" : fmt_double(stats::mean(b)))
            << " median=" << (b.empty() ? "nan" : fmt_double(stats::median(b))) << '\n';
  };
  summary << "\n[diversity]\n";
  group_line("diversity:", div_in, div_out);
  if (!div_in.empty() && !div_out.empty()) {
    write_test(summary, "mann-whitney diversity", stats::mann_whitney_u(div_in, div_out));
  }
  summary << "\n[keyword probability]\n";
  group_line("P(A|t):", kp_in, kp_out);
  if (!kp_in.empty() && !kp_out.empty()) {
    write_test(summary, "mann-whitney P(A|t)", stats::mann_whitney_u(kp_in, kp_out));
  }
  summary << "\n[users fraction]\n";
  {
    std::vector<double> uf_in, uf_out;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      (report.intermediary[i] ? uf_in : uf_out).push_back(users.users_fraction[i]);
    }
    group_line("users_fraction:", uf_in, uf_out);
    if (graph.nodes.size() >= 3) {
      write_test(summary, "spearman users_fraction~centrality",
                 stats::spearman_rho(users.users_fraction, report.centrality));
    }
  }
  out.messages.push_back("report: " + std::to_string(graph.nodes.size()) + " topics, " +
                         std::to_string(div_in.size()) + " intermediary");
}

}  // namespace itopics
