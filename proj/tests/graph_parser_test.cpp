#include <doctest.h>

#include <random>

#include "parsekit/graph_parser.hpp"
#include "support/corpus_gen.hpp"
#include "support/oracles.hpp"

using namespace parsekit;
using namespace parsekit::testing;

namespace {

EncoderConfig tiny_config() {
  EncoderConfig cfg;
  cfg.word_dim = 4;
  cfg.pos_dim = 2;
  cfg.lstm_hidden = 3;
  cfg.mlp_hidden = 5;
  return cfg;
}

Sentence sentence_from_tree(const std::vector<int>& heads) {
  Sentence s;
  for (size_t i = 1; i < heads.size(); ++i)
    s.tokens.push_back({"w" + std::to_string(i), "P" + std::to_string(i % 2), heads[i],
                        i % 2 ? "la" : "lb"});
  return s;
}

std::vector<std::vector<double>> random_scores(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  std::vector<std::vector<double>> s(n + 1, std::vector<double>(n + 1, 0.0));
  for (int h = 0; h <= n; ++h)
    for (int m = 1; m <= n; ++m)
      if (h != m) s[h][m] = d(rng);
  return s;
}

double tree_score(const std::vector<std::vector<double>>& s, const std::vector<int>& heads) {
  double total = 0.0;
  for (size_t m = 1; m < heads.size(); ++m) total += s[heads[m]][m];
  return total;
}

}  // namespace

TEST_CASE("eisner on a worked two-token example") {
  // arcs: 0->1: 1, 0->2: 0.5, 1->2: 2, 2->1: 2
  std::vector<std::vector<double>> s = {{0, 1, 0.5}, {0, 0, 2}, {0, 2, 0}};
  EisnerResult r = eisner_decode(s, 2);
  CHECK(r.total == doctest::Approx(3.0));  // 0->1 plus 1->2
  CHECK(r.heads[1] == 0);
  CHECK(r.heads[2] == 1);
  CHECK_THROWS_AS(eisner_decode(s, 0), std::invalid_argument);
}

TEST_CASE("eisner allows multiple arcs from the root") {
  // make both 0->1 and 0->2 strongly preferred
  std::vector<std::vector<double>> s = {{0, 10, 10}, {0, 0, -1}, {0, -1, 0}};
  EisnerResult r = eisner_decode(s, 2);
  CHECK(r.heads[1] == 0);
  CHECK(r.heads[2] == 0);
  CHECK(r.total == doctest::Approx(20.0));
}

TEST_CASE("eisner equals exhaustive search over projective trees") {
  std::mt19937_64 rng(77);
  for (int n = 1; n <= 6; ++n) {
    std::vector<std::vector<int>> trees;
    enumerate_projective_trees(n, false, trees);
    for (int trial = 0; trial < 50; ++trial) {
      auto s = random_scores(n, rng);
      EisnerResult r = eisner_decode(s, n);
      double best = -1e300;
      for (const auto& t : trees) best = std::max(best, tree_score(s, t));
      CHECK(r.total == doctest::Approx(best).epsilon(1e-12));
      CHECK(tree_score(s, r.heads) == doctest::Approx(r.total).epsilon(1e-12));
      CHECK(is_projective(r.heads));
    }
  }
}

TEST_CASE("eisner tie-breaking is deterministic") {
  std::vector<std::vector<double>> s(5, std::vector<double>(5, 0.0));
  EisnerResult a = eisner_decode(s, 4);
  EisnerResult b = eisner_decode(s, 4);
  CHECK(a.heads == b.heads);
  CHECK(a.total == 0.0);
  CHECK(is_projective(a.heads));
}

TEST_CASE("factorized arc scoring matches the naive route") {
  EncoderConfig cfg = tiny_config();
  Sentence s = sentence_from_tree({-1, 2, 0, 2, 3});
  int n = s.size();
  Vocabulary vocab = Vocabulary::build({s});
  GraphModel model(cfg, vocab.num_words(), vocab.num_pos(), vocab.num_labels());
  ad::ParameterStore store;
  std::mt19937_64 rng(19);
  model.init_params(store, rng);

  auto score_all = [&](bool factorized, ad::GradMap* grads) {
    ad::Graph g(store);
    std::mt19937_64 r2(4);
    EmbeddedSentence xs = model.encoder.embed(g, s, vocab, nullptr, false, r2);
    ContextVectors cv = model.encoder.encode(g, xs.xs);
    ArcScoreMatrix m = factorized ? model.score_arcs(g, cv) : model.score_arcs_naive(g, cv);
    if (grads) {
      std::vector<ad::Expr> all;
      for (int h = 0; h <= n; ++h)
        for (int mm = 1; mm <= n; ++mm)
          if (h != mm) all.push_back(m.node[h][mm]);
      *grads = g.backward(g.add_all(all));
    }
    return m.value;
  };

  ad::GradMap gf, gn;
  auto vf = score_all(true, &gf);
  auto vn = score_all(false, &gn);
  for (int h = 0; h <= n; ++h)
    for (int m = 1; m <= n; ++m)
      if (h != m) CHECK(vf[h][m] == doctest::Approx(vn[h][m]).epsilon(1e-12));
  CHECK(max_rel_error(gf, gn) < 1e-10);
  CHECK(model.hidden_matvec_count == 2 * (n + 1));
}

TEST_CASE("all-zero weights give the output bias as every arc score") {
  EncoderConfig cfg = tiny_config();
  Sentence s = sentence_from_tree({-1, 0, 1});
  Vocabulary vocab = Vocabulary::build({s});
  GraphModel model(cfg, vocab.num_words(), vocab.num_pos(), vocab.num_labels());
  ad::ParameterStore store;
  std::mt19937_64 rng(2);
  model.init_params(store, rng);
  for (auto& [name, t] : store.all()) store.get(name).v.assign(t.size(), 0.0);
  store.get("arc/b2").v[0] = 0.75;

  ad::Graph g(store);
  std::mt19937_64 r2(1);
  EmbeddedSentence xs = model.encoder.embed(g, s, vocab, nullptr, false, r2);
  ContextVectors cv = model.encoder.encode(g, xs.xs);
  ArcScoreMatrix m = model.score_arcs(g, cv);
  for (int h = 0; h <= 2; ++h)
    for (int mm = 1; mm <= 2; ++mm)
      if (h != mm) CHECK(m.value[h][mm] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("loss augmentation adds one to every non-gold arc") {
  std::vector<int> gold = {-1, 2, 0};
  std::vector<std::vector<double>> s = {{0, 0.1, 0.2}, {0, 0, 0.3}, {0, 0.4, 0}};
  auto a = loss_augmented_scores(s, gold);
  CHECK(a[0][1] == doctest::Approx(1.1));  // non-gold
  CHECK(a[2][1] == doctest::Approx(0.4));  // gold
  CHECK(a[0][2] == doctest::Approx(0.2));  // gold
  CHECK(a[1][2] == doctest::Approx(1.3));  // non-gold
}

TEST_CASE("structure loss on an all-zero model equals 1 + number of wrong arcs") {
  EncoderConfig cfg = tiny_config();
  Sentence s = sentence_from_tree({-1, 2, 0});
  Vocabulary vocab = Vocabulary::build({s});
  GraphModel model(cfg, vocab.num_words(), vocab.num_pos(), vocab.num_labels());
  ad::ParameterStore store;
  std::mt19937_64 rng(2);
  model.init_params(store, rng);
  for (auto& [name, t] : store.all()) store.get(name).v.assign(t.size(), 0.0);

  ad::Graph g(store);
  std::mt19937_64 r2(1);
  EmbeddedSentence xs = model.encoder.embed(g, s, vocab, nullptr, false, r2);
  ContextVectors cv = model.encoder.encode(g, xs.xs);
  ArcScoreMatrix m = model.score_arcs(g, cv);
  StructureLoss sl = structure_loss(g, m, s.gold_heads(), true);
  // raw scores all zero, augmented argmax picks two non-gold arcs: 0 - 0 + 1 + 2
  CHECK(sl.value == doctest::Approx(3.0));
  CHECK(sl.augmented_best != s.gold_heads());
}

TEST_CASE("structure loss is a constant zero when the augmented argmax is gold") {
  EncoderConfig cfg = tiny_config();
  Sentence s = sentence_from_tree({-1, 2, 0});
  Vocabulary vocab = Vocabulary::build({s});
  GraphModel model(cfg, vocab.num_words(), vocab.num_pos(), vocab.num_labels());
  ad::ParameterStore store;
  std::mt19937_64 rng(6);
  model.init_params(store, rng);

  ad::Graph g(store);
  std::mt19937_64 r2(1);
  EmbeddedSentence xs = model.encoder.embed(g, s, vocab, nullptr, false, r2);
  ContextVectors cv = model.encoder.encode(g, xs.xs);
  ArcScoreMatrix m = model.score_arcs(g, cv);
  // rig the forward values so the gold tree wins even with augmentation
  m.value[2][1] += 100.0;
  m.value[0][2] += 100.0;
  StructureLoss sl = structure_loss(g, m, s.gold_heads(), true);
  CHECK(sl.augmented_best == s.gold_heads());
  CHECK(sl.value == 0.0);
  ad::GradMap grads = g.backward(sl.node);
  for (const auto& [name, t] : grads)
    for (double x : t.v) CHECK(x == 0.0);
}

TEST_CASE("label loss: one per token under an all-zero model, skipped for < 2 labels") {
  EncoderConfig cfg = tiny_config();
  Sentence s = sentence_from_tree({-1, 2, 0, 2});
  Vocabulary vocab = Vocabulary::build({s});
  REQUIRE(vocab.num_labels() == 2);
  GraphModel model(cfg, vocab.num_words(), vocab.num_pos(), vocab.num_labels());
  ad::ParameterStore store;
  std::mt19937_64 rng(2);
  model.init_params(store, rng);
  for (auto& [name, t] : store.all()) store.get(name).v.assign(t.size(), 0.0);

  ad::Graph g(store);
  std::mt19937_64 r2(1);
  EmbeddedSentence xs = model.encoder.embed(g, s, vocab, nullptr, false, r2);
  ContextVectors cv = model.encoder.encode(g, xs.xs);
  std::vector<int> gold_labels = {-1, 0, 1, 0};
  LabelLoss ll = label_loss(g, cv, s.gold_heads(), gold_labels, vocab.num_labels());
  CHECK(ll.has_terms);
  CHECK(ll.value == doctest::Approx(3.0));  // max(0, 1 + 0 - 0) per token

  LabelLoss skipped = label_loss(g, cv, s.gold_heads(), gold_labels, 1);
  CHECK_FALSE(skipped.has_terms);
  CHECK(skipped.value == 0.0);
}

TEST_CASE("combined structure and label gradients match finite differences") {
  EncoderConfig cfg;
  cfg.word_dim = 2;
  cfg.pos_dim = 1;
  cfg.lstm_hidden = 2;
  cfg.mlp_hidden = 3;
  Sentence s = sentence_from_tree({-1, 2, 0, 2});
  Vocabulary vocab = Vocabulary::build({s});
  GraphModel model(cfg, vocab.num_words(), vocab.num_pos(), vocab.num_labels());
  ad::ParameterStore store;
  std::mt19937_64 rng(23);
  model.init_params(store, rng);
  std::vector<int> gold_labels = {-1, 0, 1, 0};

  // keep the augmented argmax fixed across finite-difference perturbations by
  // scoring against a frozen rival tree
  std::vector<int> rival = {-1, 0, 1, 1};
  REQUIRE(is_projective(rival));
  auto build = [&](ad::Graph& g) {
    std::mt19937_64 r2(4);
    EmbeddedSentence xs = model.encoder.embed(g, s, vocab, nullptr, false, r2);
    ContextVectors cv = model.encoder.encode(g, xs.xs);
    ArcScoreMatrix m = model.score_arcs(g, cv);
    std::vector<ad::Expr> pred, gold;
    for (int t = 1; t <= 3; ++t) {
      pred.push_back(m.node[rival[t]][t]);
      gold.push_back(m.node[s.gold_heads()[t]][t]);
    }
    ad::Expr sl = g.rectify(
        g.scalar_add(g.sub(g.add_all(pred), g.add_all(gold)), 1.0 + 3.0));
    return g.add(sl, label_loss(g, cv, s.gold_heads(), gold_labels, 2).node);
  };

  ad::Graph g(store);
  REQUIRE(g.scalar_value(build(g)) > 0.0);
  ad::GradMap analytic = g.backward(build(g));
  ad::GradMap numeric = finite_difference_grads(store, [&] {
    ad::Graph g2(store);
    return g2.scalar_value(build(g2));
  });
  CHECK(max_rel_error(analytic, numeric) < 1e-4);
}

TEST_CASE("graph training overfits a single sentence") {
  EncoderConfig cfg = tiny_config();
  CorpusGenerator gen(3);
  Sentence s = gen.sentence();
  Vocabulary vocab = Vocabulary::build({s});
  GraphModel model(cfg, vocab.num_words(), vocab.num_pos(), vocab.num_labels());
  ad::ParameterStore store;
  std::mt19937_64 rng(8);
  model.init_params(store, rng);
  GraphTrainOptions opts;
  opts.adam.lr = 0.01;

  bool solved = false;
  for (int it = 0; it < 300 && !solved; ++it) {
    graph_train_sentence(s, model, store, vocab, nullptr, opts, rng);
    ParseTree tree = graph_parse(s, model, store, vocab, nullptr);
    solved = true;
    for (int i = 1; i <= s.size(); ++i)
      if (tree.heads[i] != s.tok(i).gold_head || tree.labels[i] != s.tok(i).gold_label)
        solved = false;
  }
  CHECK(solved);
}

TEST_CASE("zero total loss skips the parameter update") {
  EncoderConfig cfg = tiny_config();
  Sentence s = sentence_from_tree({-1, 0});  // single token, one label in vocab
  Sentence s2 = s;
  Vocabulary vocab = Vocabulary::build({s});
  REQUIRE(vocab.num_labels() == 1);  // labeler loss is skipped
  GraphModel model(cfg, vocab.num_words(), vocab.num_pos(), vocab.num_labels());
  ad::ParameterStore store;
  std::mt19937_64 rng(4);
  model.init_params(store, rng);
  GraphTrainOptions opts;
  // train until the structure loss reaches zero, then confirm params freeze
  double loss = 1.0;
  for (int it = 0; it < 500 && loss > 0.0; ++it)
    loss = graph_train_sentence(s, model, store, vocab, nullptr, opts, rng);
  REQUIRE(loss == 0.0);
  auto before = store.snapshot();
  long step = store.step();
  CHECK(graph_train_sentence(s2, model, store, vocab, nullptr, opts, rng) == 0.0);
  CHECK(store.step() == step);
  for (const auto& [name, t] : before) CHECK(store.get(name).v == t.v);
}
