// Command-line front end: runs pipeline stages against a workspace, or
// writes a synthetic corpus with `itopics synth`.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "itopics/error.hpp"
#include "itopics/parallel.hpp"
#include "itopics/pipeline.hpp"
#include "itopics/synth.hpp"

namespace {

struct RunOptions {
  std::string config;
  std::string workspace;
  std::string stage = "all";
  bool force = false;
  std::optional<double> epsilon;
  std::optional<std::uint32_t> topics;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::uint32_t> iterations;
  std::optional<std::uint32_t> burn_in;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> min_doc_freq;
  std::optional<std::uint64_t> max_degree;
  int threads = 0;
};

struct SynthOptions {
  std::string out;
  std::string homophily = "0.75";
  std::string text_model = "lda";
  itopics::synth::SynthConfig cfg;
};

std::filesystem::path workspace_dir(const RunOptions& o) {
  if (!o.workspace.empty()) return o.workspace;
  if (const char* env = std::getenv("ITOPICS_WORKSPACE"); env && *env) return env;
  return "itopics-work";
}

int run_pipeline(const RunOptions& o) {
  using namespace itopics;
  auto cfg = PipelineConfig::load(o.config);
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.topics) cfg.lda.k = *o.topics;
  if (o.alpha) cfg.lda.alpha = *o.alpha;
  if (o.beta) cfg.lda.beta = *o.beta;
  if (o.iterations) {
    cfg.lda.iterations = *o.iterations;
    if (!o.burn_in) cfg.lda.burn_in = *o.iterations * 4 / 5;
  }
  if (o.burn_in) cfg.lda.burn_in = *o.burn_in;
  if (o.seed) cfg.lda.seed = *o.seed;
  if (o.min_doc_freq) cfg.min_doc_freq = *o.min_doc_freq;
  if (o.max_degree) cfg.max_degree = *o.max_degree;
  cfg.validate();
  if (o.threads > 0) set_num_threads(o.threads);

  Pipeline pipeline(std::move(cfg), workspace_dir(o));
  std::vector<Stage> stages;
  if (o.stage == "all") {
    stages.assign(std::begin(kAllStages), std::end(kAllStages));
  } else {
    const auto stage = parse_stage(o.stage);
    if (!stage) throw ConfigError("unknown stage '" + o.stage + "'");
    stages.push_back(*stage);
  }
  for (Stage s : stages) {
    const auto outcome = pipeline.run(s, o.force);
    for (const auto& m : outcome.messages) std::cout << m << '\n';
    if (!outcome.up_to_date) std::printf("%s: done in %.2f s\n", std::string(to_string(s)).c_str(), outcome.seconds);
  }
  return 0;
}

int run_synth(SynthOptions& o) {
  using namespace itopics;
  auto& cfg = o.cfg;
  if (o.homophily == "none") {
    cfg.homophily_strength.reset();
  } else {
    try {
      cfg.homophily_strength = std::stod(o.homophily);
    } catch (const std::exception&) {
      throw ConfigError("--homophily expects a number in [0, 1] or 'none'");
    }
  }
  if (o.text_model == "lda") {
    cfg.text_model = synth::TextModel::lda;
  } else if (o.text_model == "unigram") {
    cfg.text_model = synth::TextModel::mixture_of_unigrams;
  } else {
    throw ConfigError("--text-model expects 'lda' or 'unigram'");
  }
  const auto corpus = synth::generate_corpus(cfg);
  const std::filesystem::path dir = o.out;
  synth::write_corpus(corpus, dir);

  nlohmann::json pipeline_cfg = {{"tweets", "tweets.jsonl"},
                                 {"knowledge_base", "knowledge_base.json"},
                                 {"gazetteer", "gazetteer.txt"},
                                 {"issue", cfg.issue_name},
                                 {"lda", {{"topics", cfg.num_topics()}}}};
  std::ofstream out(dir / "config.json");
  out << pipeline_cfg.dump(2) << '\n';
  std::cout << "wrote " << corpus.tweets.size() << " tweets by " << cfg.num_users << " users to " << dir.string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Find intermediary topics between stances in a microblog corpus"};
  app.require_subcommand(0, 1);

  RunOptions run;
  app.add_option("--config", run.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--workspace", run.workspace, "Artifact directory (default: $ITOPICS_WORKSPACE or ./itopics-work)");
  app.add_option("--stage", run.stage, "ingest|stance|homophily|lda|graph|report|all")->capture_default_str();
  app.add_flag("--force", run.force, "Rerun even when artifacts are up to date");
  app.add_option("--epsilon", run.epsilon, "Topic relatedness threshold P(t|u) >= epsilon");
  app.add_option("--topics", run.topics, "Number of LDA topics K");
  app.add_option("--alpha", run.alpha, "Dirichlet prior on user topics (default 50/K)");
  app.add_option("--beta", run.beta, "Dirichlet prior on topic words");
  app.add_option("--iterations", run.iterations, "Gibbs sweeps");
  app.add_option("--burn-in", run.burn_in, "Sweeps discarded before averaging (default 80% of iterations)");
  app.add_option("--seed", run.seed, "LDA seed");
  app.add_option("--min-doc-freq", run.min_doc_freq, "Minimum user-document frequency of a token");
  app.add_option("--max-degree", run.max_degree, "Following/followers limit for regular users");
  app.add_option("--threads", run.threads, "OpenMP threads (default: runtime choice)");

  SynthOptions syn;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus with planted stances and topics");
  synth_cmd->add_option("--out", syn.out, "Output directory")->required();
  synth_cmd->add_option("--users", syn.cfg.num_users)->capture_default_str();
  synth_cmd->add_option("--split", syn.cfg.stance_split, "Fraction of users in the first stance")
      ->capture_default_str();
  synth_cmd->add_option("--homophily", syn.homophily, "Same-stance partner probability, or 'none'")
      ->capture_default_str();
  synth_cmd->add_option("--bridge-topics", syn.cfg.bridge_topics)->capture_default_str();
  synth_cmd->add_option("--partisan-topics", syn.cfg.partisan_topics_per_stance, "Per stance")
      ->capture_default_str();
  synth_cmd->add_option("--leakage", syn.cfg.partisan_leakage, "Per partisan topic cross-stance uptake");
  synth_cmd->add_option("--vocab", syn.cfg.vocab_size)->capture_default_str();
  synth_cmd->add_option("--tweets-min", syn.cfg.tweets_min)->capture_default_str();
  synth_cmd->add_option("--tweets-max", syn.cfg.tweets_max)->capture_default_str();
  synth_cmd->add_option("--words", syn.cfg.words_per_tweet, "Words per tweet")->capture_default_str();
  synth_cmd->add_option("--concentration", syn.cfg.user_topic_concentration, "Dirichlet over a user's topics")
      ->capture_default_str();
  synth_cmd->add_option("--vocal", syn.cfg.vocal_user_prob, "Fraction of users tagging stance keywords")
      ->capture_default_str();
  synth_cmd->add_option("--keyword-rate", syn.cfg.keyword_tweet_prob, "Per-tweet tag probability of a vocal user")
      ->capture_default_str();
  synth_cmd->add_option("--issue-mass", syn.cfg.issue_word_mass, "Mean mass of issue words in every topic")
      ->capture_default_str();
  synth_cmd->add_option("--issue-spread", syn.cfg.issue_word_mass_spread, "Per-topic relative spread of that mass")
      ->capture_default_str();
  synth_cmd->add_option("--text-model", syn.text_model, "lda|unigram")->capture_default_str();
  synth_cmd->add_option("--interactions", syn.cfg.interactions_per_user)->capture_default_str();
  synth_cmd->add_option("--foreign", syn.cfg.foreign_location_prob)->capture_default_str();
  synth_cmd->add_option("--popular", syn.cfg.popular_user_prob)->capture_default_str();
  synth_cmd->add_option("--seed", syn.cfg.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(syn);
    if (run.config.empty()) {
      std::cerr << "error: --config is required\n";
      return 1;
    }
    return run_pipeline(run);
  } catch (const itopics::MissingDependency& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const itopics::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const itopics::PipelineError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
