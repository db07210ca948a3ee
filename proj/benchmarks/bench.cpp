#include <benchmark/benchmark.h>

#include <random>

#include "parsekit/encoder.hpp"
#include "parsekit/graph_parser.hpp"

using namespace parsekit;

namespace {

EncoderConfig small_config() {
  EncoderConfig cfg;
  cfg.word_dim = 32;
  cfg.pos_dim = 8;
  cfg.lstm_hidden = 32;
  cfg.mlp_hidden = 32;
  return cfg;
}

Sentence make_sentence(int n) {
  Sentence s;
  for (int i = 0; i < n; ++i)
    s.tokens.push_back({"w" + std::to_string(i % 50), "P" + std::to_string(i % 8), 0, "dep"});
  return s;
}

Vocabulary make_vocab(const Sentence& s) {
  return Vocabulary::build({s});
}

void bench_eisner(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<std::vector<double>> scores(n + 1, std::vector<double>(n + 1));
  for (auto& row : scores)
    for (double& x : row) x = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(eisner_decode(scores, n));
}
BENCHMARK(bench_eisner)->Arg(20)->Arg(50)->Arg(100);

void bench_bilstm_encode(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  Sentence s = make_sentence(n);
  Vocabulary vocab = make_vocab(s);
  EncoderConfig cfg = small_config();
  Encoder enc(cfg, vocab.num_words(), vocab.num_pos(), 0);
  ad::ParameterStore store;
  std::mt19937_64 rng(1);
  enc.init_params(store, rng);
  for (auto _ : state) {
    ad::Graph g(store);
    EmbeddedSentence xs = enc.embed(g, s, vocab, nullptr, false, rng);
    benchmark::DoNotOptimize(enc.encode(g, xs.xs));
  }
}
BENCHMARK(bench_bilstm_encode)->Arg(10)->Arg(30);

void bench_arc_scoring(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  bool factorized = state.range(1) != 0;
  Sentence s = make_sentence(n);
  Vocabulary vocab = make_vocab(s);
  GraphModel model(small_config(), vocab.num_words(), vocab.num_pos(), 1, 0, false);
  ad::ParameterStore store;
  std::mt19937_64 rng(1);
  model.init_params(store, rng);
  for (auto _ : state) {
    ad::Graph g(store);
    EmbeddedSentence xs = model.encoder.embed(g, s, vocab, nullptr, false, rng);
    ContextVectors cv = model.encoder.encode(g, xs.xs);
    if (factorized)
      benchmark::DoNotOptimize(model.score_arcs(g, cv));
    else
      benchmark::DoNotOptimize(model.score_arcs_naive(g, cv));
  }
}
BENCHMARK(bench_arc_scoring)->Args({20, 1})->Args({20, 0})->Args({40, 1})->Args({40, 0});

}  // namespace

BENCHMARK_MAIN();
