// Serial reference vs OpenMP kernels. Arg(0) runs the serial path, Arg(1)
// the parallel one.

#include <benchmark/benchmark.h>

#include <random>

#include "itopics/stance.hpp"
#include "itopics/synth.hpp"
#include "itopics/topicgraph.hpp"

using namespace itopics;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::serial : Exec::parallel; }

struct TextFixture {
  synth::SynthCorpus corpus;
  std::vector<UserDocument> docs;
  Vocabulary vocab;
  StanceVectorSet stances;
  TendencyAxis axis;

  TextFixture() {
    synth::SynthConfig cfg;
    cfg.num_users = 4000;
    cfg.foreign_location_prob = 0.0;
    corpus = synth::generate_corpus(cfg);
    docs = build_user_documents(corpus.tweets, corpus.knowledge_base);
    vocab = build_vocabulary(docs, 5);
    const auto seeds = find_seed_users(docs, corpus.knowledge_base, cfg.issue_name);
    stances = build_stance_vectors(docs, seeds, vocab, docs.size(), cfg.stance_names);
    axis = {cfg.stance_names[0], cfg.stance_names[1]};
  }
};

const TextFixture& text_fixture() {
  static const TextFixture f;
  return f;
}

TopicModel random_model(std::size_t users, std::size_t k) {
  std::mt19937_64 rng(5);
  std::gamma_distribution<double> g(0.1, 1.0);
  std::vector<double> theta(users * k);
  std::vector<std::string> ids;
  for (std::size_t u = 0; u < users; ++u) {
    double s = 0.0;
    for (std::size_t t = 0; t < k; ++t) s += (theta[u * k + t] = g(rng) + 1e-12);
    for (std::size_t t = 0; t < k; ++t) theta[u * k + t] /= s;
    ids.push_back("u" + std::to_string(u));
  }
  LdaConfig c;
  c.k = static_cast<std::uint32_t>(k);
  return TopicModel(c, {"w"}, ids, std::vector<double>(k, 1.0), theta, {});
}

void BM_Vectorize(benchmark::State& state) {
  const auto& f = text_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(vectorize_documents(f.docs, f.vocab, f.docs.size(), exec_of(state)));
}
BENCHMARK(BM_Vectorize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ProfileUsers(benchmark::State& state) {
  const auto& f = text_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(profile_users(f.docs, f.vocab, f.docs.size(), f.stances, f.axis, exec_of(state)));
  }
}
BENCHMARK(BM_ProfileUsers)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TopicGraph(benchmark::State& state) {
  static const auto model = random_model(20000, 200);
  for (auto _ : state) benchmark::DoNotOptimize(build_topic_graph(model, 0.05, exec_of(state)));
}
BENCHMARK(BM_TopicGraph)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LaplacianPseudoinverse(benchmark::State& state) {
  static const auto graph = [] {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    WeightedGraph g;
    g.n = 400;
    g.weights.assign(g.n * g.n, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
      for (std::size_t j = i + 1; j < g.n; ++j) {
        if (j == i + 1 || u(rng) < 0.1) g.weights[i * g.n + j] = g.weights[j * g.n + i] = 0.1 + u(rng);
      }
    }
    return g;
  }();
  for (auto _ : state) benchmark::DoNotOptimize(laplacian_pseudoinverse(graph, exec_of(state)));
}
BENCHMARK(BM_LaplacianPseudoinverse)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GenerateCorpus(benchmark::State& state) {
  synth::SynthConfig cfg;
  cfg.num_users = 2000;
  for (auto _ : state) benchmark::DoNotOptimize(synth::generate_corpus(cfg, exec_of(state)));
}
BENCHMARK(BM_GenerateCorpus)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
