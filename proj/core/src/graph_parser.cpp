#include "parsekit/graph_parser.hpp"

#include <array>
#include <limits>
#include <stdexcept>

namespace parsekit {

void GraphModel::init_params(ad::ParameterStore& store, std::mt19937_64& rng) const {
  encoder.init_params(store, rng);
  int pair_dim = 2 * encoder.config().context_dim();
  init_mlp_params(store, "arc", pair_dim, encoder.config().mlp_hidden, 1, rng);
  if (with_labeler)
    init_mlp_params(store, "lbl", pair_dim, encoder.config().mlp_hidden, num_labels, rng);
}

namespace {

ArcScoreMatrix finish_scores(ad::Graph& g, int n,
                             std::vector<std::vector<ad::Expr>> nodes) {
  ArcScoreMatrix s;
  s.n = n;
  s.node = std::move(nodes);
  s.value.assign(n + 1, std::vector<double>(n + 1, 0.0));
  for (int h = 0; h <= n; ++h)
    for (int m = 1; m <= n; ++m)
      if (h != m) s.value[h][m] = g.scalar_value(s.node[h][m]);
  return s;
}

}  // namespace

ArcScoreMatrix GraphModel::score_arcs(ad::Graph& g, const ContextVectors& cv) const {
  int n = cv.n();
  int ctx = encoder.config().context_dim();
  ad::Expr w1 = g.param("arc/W1");
  ad::Expr w1h = g.col_slice(w1, 0, ctx);
  ad::Expr w1m = g.col_slice(w1, ctx, ctx);
  ad::Expr b1 = g.param("arc/b1");
  ad::Expr w2 = g.param("arc/W2");
  ad::Expr b2 = g.param("arc/b2");

  hidden_matvec_count = 0;
  std::vector<ad::Expr> head_half(n + 1), mod_half(n + 1);
  for (int t = 0; t <= n; ++t) {
    head_half[t] = g.matvec(w1h, cv.v[t]);
    mod_half[t] = g.matvec(w1m, cv.v[t]);
    hidden_matvec_count += 2;
  }

  std::vector<std::vector<ad::Expr>> nodes(n + 1, std::vector<ad::Expr>(n + 1));
  for (int h = 0; h <= n; ++h)
    for (int m = 1; m <= n; ++m) {
      if (h == m) continue;
      ad::Expr hidden = g.tanh(g.add(g.add(head_half[h], mod_half[m]), b1));
      nodes[h][m] = g.pick(g.add(g.matvec(w2, hidden), b2), 0);
    }
  return finish_scores(g, n, std::move(nodes));
}

ArcScoreMatrix GraphModel::score_arcs_naive(ad::Graph& g, const ContextVectors& cv) const {
  int n = cv.n();
  std::vector<std::vector<ad::Expr>> nodes(n + 1, std::vector<ad::Expr>(n + 1));
  for (int h = 0; h <= n; ++h)
    for (int m = 1; m <= n; ++m) {
      if (h == m) continue;
      nodes[h][m] = g.pick(mlp(g, "arc", g.concat({cv.v[h], cv.v[m]})), 0);
    }
  return finish_scores(g, n, std::move(nodes));
}

EisnerResult eisner_decode(const std::vector<std::vector<double>>& score, int n) {
  if (n < 1) throw std::invalid_argument("eisner_decode: n must be >= 1");
  constexpr int kLeft = 0, kRight = 1;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  // [i][j][dir]; spans over 0..n, i < j.
  auto table = [&] {
    return std::vector<std::vector<std::array<double, 2>>>(
        n + 1, std::vector<std::array<double, 2>>(n + 1, {neg_inf, neg_inf}));
  };
  auto comp = table(), incomp = table();
  auto back = [&] {
    return std::vector<std::vector<std::array<int, 2>>>(
        n + 1, std::vector<std::array<int, 2>>(n + 1, {-1, -1}));
  };
  auto comp_bt = back(), incomp_bt = back();

  for (int i = 0; i <= n; ++i) comp[i][i] = {0.0, 0.0};

  for (int len = 1; len <= n; ++len) {
    for (int i = 0; i + len <= n; ++i) {
      int j = i + len;
      for (int q = i; q < j; ++q) {
        double base = comp[i][q][kRight] + comp[q + 1][j][kLeft];
        if (i > 0 && base + score[j][i] > incomp[i][j][kLeft]) {
          incomp[i][j][kLeft] = base + score[j][i];
          incomp_bt[i][j][kLeft] = q;
        }
        if (base + score[i][j] > incomp[i][j][kRight]) {
          incomp[i][j][kRight] = base + score[i][j];
          incomp_bt[i][j][kRight] = q;
        }
      }
      for (int q = i; q < j; ++q) {
        double cand = comp[i][q][kLeft] + incomp[q][j][kLeft];
        if (i > 0 && cand > comp[i][j][kLeft]) {
          comp[i][j][kLeft] = cand;
          comp_bt[i][j][kLeft] = q;
        }
      }
      for (int q = i + 1; q <= j; ++q) {
        double cand = incomp[i][q][kRight] + comp[q][j][kRight];
        if (cand > comp[i][j][kRight]) {
          comp[i][j][kRight] = cand;
          comp_bt[i][j][kRight] = q;
        }
      }
    }
  }

  EisnerResult res;
  res.heads.assign(n + 1, -1);
  res.total = comp[0][n][kRight];

  // Recover arcs from the backpointers.
  struct Item {
    int i, j, dir;
    bool complete;
  };
  std::vector<Item> todo{{0, n, kRight, true}};
  while (!todo.empty()) {
    Item it = todo.back();
    todo.pop_back();
    if (it.i == it.j) continue;
    if (it.complete) {
      int q = comp_bt[it.i][it.j][it.dir];
      if (it.dir == kRight) {
        todo.push_back({it.i, q, kRight, false});
        todo.push_back({q, it.j, kRight, true});
      } else {
        todo.push_back({it.i, q, kLeft, true});
        todo.push_back({q, it.j, kLeft, false});
      }
    } else {
      if (it.dir == kRight)
        res.heads[it.j] = it.i;
      else
        res.heads[it.i] = it.j;
      int q = incomp_bt[it.i][it.j][it.dir];
      todo.push_back({it.i, q, kRight, true});
      todo.push_back({q + 1, it.j, kLeft, true});
    }
  }
  return res;
}

std::vector<std::vector<double>> loss_augmented_scores(
    const std::vector<std::vector<double>>& score, const std::vector<int>& gold_heads) {
  int n = static_cast<int>(gold_heads.size()) - 1;
  std::vector<std::vector<double>> out = score;
  for (int h = 0; h <= n; ++h)
    for (int m = 1; m <= n; ++m)
      if (h != m && gold_heads[m] != h) out[h][m] += 1.0;
  return out;
}

StructureLoss structure_loss(ad::Graph& g, const ArcScoreMatrix& scores,
                             const std::vector<int>& gold_heads, bool loss_augmented) {
  int n = scores.n;
  std::vector<std::vector<double>> augmented =
      loss_augmented ? loss_augmented_scores(scores.value, gold_heads) : scores.value;
  EisnerResult best = eisner_decode(augmented, n);

  StructureLoss out;
  out.augmented_best = best.heads;
  if (best.heads == gold_heads) {
    out.node = g.scalar(0.0);
    return out;
  }

  int delta = 0;
  std::vector<ad::Expr> pred_arcs, gold_arcs;
  for (int m = 1; m <= n; ++m) {
    pred_arcs.push_back(scores.node[best.heads[m]][m]);
    gold_arcs.push_back(scores.node[gold_heads[m]][m]);
    if (best.heads[m] != gold_heads[m]) ++delta;
  }
  double margin = 1.0 + (loss_augmented ? delta : 0);
  out.node = g.rectify(g.scalar_add(
      g.sub(g.add_all(pred_arcs), g.add_all(gold_arcs)), margin));
  out.value = g.scalar_value(out.node);
  return out;
}

void label_arcs(ad::Graph& g, const ContextVectors& cv, const Vocabulary& vocab,
                ParseTree& tree) {
  for (int m = 1; m <= cv.n(); ++m) {
    int h = tree.heads[m];
    ad::Expr s = mlp(g, "lbl", g.concat({cv.v[h], cv.v[m]}));
    const Tensor val = g.value(s);
    int best = 0;
    for (int l = 1; l < val.rows; ++l)
      if (val.v[l] > val.v[best]) best = l;
    tree.labels[m] = vocab.label_name(best);
  }
}

LabelLoss label_loss(ad::Graph& g, const ContextVectors& cv,
                     const std::vector<int>& gold_heads,
                     const std::vector<int>& gold_labels, int num_labels) {
  LabelLoss out;
  if (num_labels < 2) {
    out.node = g.scalar(0.0);
    return out;
  }
  std::vector<ad::Expr> terms;
  for (int m = 1; m <= cv.n(); ++m) {
    ad::Expr s = mlp(g, "lbl", g.concat({cv.v[gold_heads[m]], cv.v[m]}));
    std::vector<int> others;
    for (int l = 0; l < num_labels; ++l)
      if (l != gold_labels[m]) others.push_back(l);
    terms.push_back(g.rectify(g.scalar_add(
        g.sub(g.max_over(s, others), g.pick(s, gold_labels[m])), 1.0)));
  }
  out.node = g.add_all(terms);
  out.value = g.scalar_value(out.node);
  out.has_terms = true;
  return out;
}

ParseTree graph_parse(const Sentence& sentence, const GraphModel& model,
                      const ad::ParameterStore& store, const Vocabulary& vocab,
                      const ExternalEmbeddings* ext) {
  ad::Graph g(store);
  std::mt19937_64 unused_rng(0);
  EmbeddedSentence xs = model.encoder.embed(g, sentence, vocab, ext, false, unused_rng);
  ContextVectors cv = model.encoder.encode(g, xs.xs);
  ArcScoreMatrix scores = model.score_arcs(g, cv);
  EisnerResult best = eisner_decode(scores.value, scores.n);

  ParseTree tree = ParseTree::empty(sentence.size());
  for (int m = 1; m <= sentence.size(); ++m) tree.heads[m] = best.heads[m];
  if (model.with_labeler && vocab.num_labels() > 0)
    label_arcs(g, cv, vocab, tree);
  return tree;
}

double graph_train_sentence(const Sentence& sentence, const GraphModel& model,
                            ad::ParameterStore& store, const Vocabulary& vocab,
                            const ExternalEmbeddings* ext, const GraphTrainOptions& opts,
                            std::mt19937_64& rng) {
  std::vector<int> gold_heads = sentence.gold_heads();
  std::vector<int> gold_labels(sentence.size() + 1, -1);
  for (int i = 1; i <= sentence.size(); ++i)
    gold_labels[i] = vocab.label_id(sentence.tok(i).gold_label);

  ad::Graph g(store);
  EmbeddedSentence xs = model.encoder.embed(g, sentence, vocab, ext, true, rng);
  ContextVectors cv = model.encoder.encode(g, xs.xs);
  ArcScoreMatrix scores = model.score_arcs(g, cv);

  StructureLoss sl = structure_loss(g, scores, gold_heads, opts.loss_augmented);
  double total = sl.value;
  ad::Expr loss = sl.node;
  if (model.with_labeler) {
    LabelLoss ll = label_loss(g, cv, gold_heads, gold_labels, model.num_labels);
    total += ll.value;
    if (ll.has_terms) loss = g.add(loss, ll.node);
  }
  if (total > 0.0) store.adam_step(g.backward(loss), opts.adam);
  return total;
}

}  // namespace parsekit
