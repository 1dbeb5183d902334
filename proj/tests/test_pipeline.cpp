#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "helpers.hpp"
#include "itopics/error.hpp"
#include "itopics/pipeline.hpp"
#include "itopics/synth.hpp"

using namespace itopics;
using itopics::testing::read_file;
using itopics::testing::TempDir;
using itopics::testing::write_file;

namespace {

const char* kMinimal = R"({"tweets": "t.jsonl", "knowledge_base": "kb.json"})";

// A small synthetic corpus plus a config that fits a 6-topic model quickly.
struct Fixture {
  TempDir dir{"itopics-pipe"};
  std::filesystem::path config;

  Fixture() {
    synth::SynthConfig s;
    s.num_users = 300;
    s.bridge_topics = 2;
    s.partisan_topics_per_stance = 2;
    s.vocab_size = 120;
    s.seed = 5;
    synth::write_corpus(synth::generate_corpus(s), dir / "corpus");
    config = dir / "config.json";
    write_file(config, R"({
      "tweets": "corpus/tweets.jsonl",
      "knowledge_base": "corpus/knowledge_base.json",
      "gazetteer": "corpus/gazetteer.txt",
      "min_doc_freq": 3,
      "lda": {"topics": 6, "alpha": 0.5, "iterations": 120, "seed": 3}
    })");
  }
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ITOPICS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Stages, NamesAndDependencies) {
  for (Stage s : kAllStages) EXPECT_EQ(parse_stage(to_string(s)), s);
  EXPECT_FALSE(parse_stage("bogus").has_value());
  EXPECT_TRUE(stage_dependencies(Stage::ingest).empty());
  EXPECT_EQ(stage_dependencies(Stage::graph), std::vector<Stage>{Stage::lda});
  EXPECT_EQ(stage_dependencies(Stage::report).front(), Stage::graph);
}

TEST(Config, DefaultsAndRelativePaths) {
  const auto c = PipelineConfig::from_json(kMinimal, "/data");
  EXPECT_EQ(c.tweets, std::filesystem::path("/data/t.jsonl"));
  EXPECT_EQ(c.epsilon, 0.05);
  EXPECT_EQ(c.min_doc_freq, 5u);
  EXPECT_EQ(c.lda.k, 200u);
  EXPECT_DOUBLE_EQ(c.lda.alpha_value(), 0.25);
  EXPECT_FALSE(c.population.has_value());
}

TEST(Config, LdaBurnInFollowsIterations) {
  const auto c = PipelineConfig::from_json(
      R"({"tweets": "/t", "knowledge_base": "/k", "lda": {"topics": 10, "iterations": 500}})");
  EXPECT_EQ(c.lda.k, 10u);
  EXPECT_EQ(c.lda.burn_in, 400u);
  EXPECT_DOUBLE_EQ(c.lda.alpha_value(), 5.0);
}

TEST(Config, Rejections) {
  EXPECT_THROW(PipelineConfig::from_json("{not json"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(R"({"tweets": "t"})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(R"({"tweets": "t", "knowledge_base": "k", "typo": 1})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(R"({"tweets": "t", "knowledge_base": "k", "epsilon": 1.5})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(R"({"tweets": "t", "knowledge_base": "k", "lda": {"k": 3}})"), ConfigError);
  EXPECT_THROW(
      PipelineConfig::from_json(R"({"tweets": "t", "knowledge_base": "k", "population": {"a": 0.5, "b": 0.4}})"),
      ConfigError);
  EXPECT_THROW(PipelineConfig::load("/nonexistent/config.json"), ConfigError);
}

TEST(Hashing, StableAndSensitive) {
  EXPECT_EQ(hash_string("abc"), hash_string("abc"));
  EXPECT_NE(hash_string("abc"), hash_string("abd"));
  EXPECT_EQ(hash_string("").size(), 16u);
}

TEST(Pipeline, ReportBeforeGraphIsMissingDependency) {
  Fixture f;
  Pipeline p(PipelineConfig::load(f.config), f.dir / "ws");
  try {
    p.run(Stage::report);
    FAIL() << "expected MissingDependency";
  } catch (const MissingDependency& e) {
    EXPECT_EQ(e.stage(), "graph");
  }
}

TEST(Pipeline, FullRunRerunAndReport) {
  Fixture f;
  Pipeline p(PipelineConfig::load(f.config), f.dir / "ws");
  const auto first = p.run_all();
  ASSERT_EQ(first.size(), 6u);
  for (const auto& o : first) EXPECT_FALSE(o.up_to_date);

  const auto again = p.run_all();
  for (const auto& o : again) {
    EXPECT_TRUE(o.up_to_date);
    ASSERT_FALSE(o.messages.empty());
    EXPECT_NE(o.messages.back().find("up to date"), std::string::npos);
  }

  const auto report = p.stage_dir(Stage::report);
  for (const char* name : {"topics.csv", "users_stance.csv", "homophily.csv", "topic_graph.graphml",
                           "interactions.graphml", "ccdf_keyword_prob.csv", "summary.txt", "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(report / name)) << name;
  }
  const auto centrality = read_file(p.stage_dir(Stage::graph) / "centrality.csv");
  const auto topics = read_file(report / "topics.csv");
  EXPECT_EQ(topics.substr(0, topics.find('\n')), "topic,centrality,users_fraction,diversity,keyword_prob,intermediary");
  EXPECT_EQ(count_lines(topics), count_lines(centrality));

  const auto summary = read_file(report / "summary.txt");
  for (const char* field : {"[homophily]", "topics retained:", "mann-whitney diversity", "mann-whitney P(A|t)",
                            "spearman users_fraction~centrality"}) {
    EXPECT_NE(summary.find(field), std::string::npos) << field;
  }

  // a changed parameter invalidates the LDA stage and everything downstream
  auto cfg = PipelineConfig::load(f.config);
  cfg.epsilon = 0.1;
  Pipeline q(cfg, f.dir / "ws");
  EXPECT_TRUE(q.run(Stage::lda).up_to_date);
  EXPECT_THROW(q.run(Stage::report), MissingDependency);
  EXPECT_FALSE(q.run(Stage::graph).up_to_date);
  EXPECT_FALSE(q.run(Stage::report).up_to_date);
}

TEST(Pipeline, TwoWorkspacesGiveIdenticalReports) {
  Fixture f;
  Pipeline a(PipelineConfig::load(f.config), f.dir / "ws1");
  Pipeline b(PipelineConfig::load(f.config), f.dir / "ws2");
  a.run_all();
  b.run_all();
  for (const char* name : {"topics.csv", "users_stance.csv", "homophily.csv", "summary.txt"}) {
    EXPECT_EQ(read_file(a.stage_dir(Stage::report) / name), read_file(b.stage_dir(Stage::report) / name)) << name;
  }
}

TEST(Cli, ExitCodes) {
  Fixture f;
  const std::string ws = (f.dir / "cli-ws").string();
  EXPECT_EQ(run_cli("--config " + f.config.string() + " --workspace " + ws + " --stage report"), 2);
  EXPECT_EQ(run_cli("--config " + (f.dir / "missing.json").string() + " --workspace " + ws), 1);
  EXPECT_EQ(run_cli("--config " + f.config.string() + " --workspace " + ws + " --stage nonsense"), 1);
  EXPECT_EQ(run_cli("--config " + f.config.string() + " --workspace " + ws + " --stage ingest"), 0);
  EXPECT_EQ(run_cli("--config " + f.config.string() + " --workspace " + ws + " --stage stance --epsilon 2"), 1);
}
