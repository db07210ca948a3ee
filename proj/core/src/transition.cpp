#include "parsekit/transition.hpp"

#include <stdexcept>

namespace parsekit {

int Configuration::num_arcs() const {
  int k = 0;
  for (int i = 1; i <= n; ++i)
    if (head[i] >= 0) ++k;
  return k;
}

Configuration initial_config(int n) {
  if (n < 1) throw std::invalid_argument("initial_config: sentence must be non-empty");
  Configuration c;
  c.n = n;
  c.buffer_pos = 0;
  c.head.assign(n + 1, -1);
  c.label.assign(n + 1, -1);
  c.leftmost_mod.assign(n + 1, -1);
  c.rightmost_mod.assign(n + 1, -1);
  return c;
}

std::vector<TKind> legal_transitions(const Configuration& c) {
  if (c.terminal())
    throw std::logic_error("legal_transitions: configuration is terminal");
  std::vector<TKind> out;
  if (c.buffer_front() != 0) out.push_back(TKind::Shift);
  if (!c.stack.empty() && c.buffer_size() >= 1) out.push_back(TKind::Left);
  if (c.stack.size() >= 2) out.push_back(TKind::Right);
  return out;
}

namespace {

void add_arc(Configuration& c, int h, int m, int label_id) {
  c.head[m] = h;
  c.label[m] = label_id;
  if (c.leftmost_mod[h] < 0 || m < c.leftmost_mod[h]) c.leftmost_mod[h] = m;
  if (c.rightmost_mod[h] < 0 || m > c.rightmost_mod[h]) c.rightmost_mod[h] = m;
}

}  // namespace

void apply_transition(Configuration& c, TKind t, int label_id) {
  switch (t) {
    case TKind::Shift: {
      if (c.buffer_front() == 0)
        throw std::logic_error("Shift: buffer front is ROOT");
      c.stack.push_back(c.buffer_front());
      ++c.buffer_pos;
      break;
    }
    case TKind::Left: {
      if (c.stack.empty()) throw std::logic_error("Left: empty stack");
      int m = c.stack.back();
      c.stack.pop_back();
      add_arc(c, c.buffer_front(), m, label_id);
      break;
    }
    case TKind::Right: {
      if (c.stack.size() < 2) throw std::logic_error("Right: needs two stack items");
      int m = c.stack.back();
      c.stack.pop_back();
      add_arc(c, c.stack.back(), m, label_id);
      break;
    }
  }
}

OracleCosts oracle_costs(const Configuration& c, const std::vector<int>& gold_heads) {
  auto in_buffer = [&](int x) { return x == 0 || x > c.buffer_pos; };

  OracleCosts costs;
  std::vector<TKind> legal = legal_transitions(c);
  int b0 = c.buffer_front();
  int s0 = c.stack_at(0), s1 = c.stack_at(1);

  // Gold dependents of s0 still in the buffer (lost by popping s0).
  int s0_buffer_deps = 0;
  if (s0 >= 0)
    for (int d = c.buffer_pos + 1; d <= c.n; ++d)
      if (gold_heads[d] == s0) ++s0_buffer_deps;

  for (TKind t : legal) {
    switch (t) {
      case TKind::Shift: {
        int cost = 0;
        for (size_t i = 0; i + 1 < c.stack.size(); ++i)
          if (gold_heads[b0] == c.stack[i]) ++cost;
        for (int s : c.stack)
          if (gold_heads[s] == b0) ++cost;
        costs.shift = cost;
        break;
      }
      case TKind::Left: {
        int cost = s0_buffer_deps;
        if (s1 >= 0 && gold_heads[s0] == s1) ++cost;
        if (in_buffer(gold_heads[s0]) && gold_heads[s0] != b0) ++cost;
        costs.left = cost;
        break;
      }
      case TKind::Right: {
        int cost = s0_buffer_deps;
        if (in_buffer(gold_heads[s0])) ++cost;
        costs.right = cost;
        break;
      }
    }
  }
  return costs;
}

ad::Expr extract_features(ad::Graph& g, const Configuration& c, const ContextVectors& cv,
                          ad::Expr pad, FeatureMode mode) {
  auto vec = [&](int tok) { return tok < 0 ? pad : cv.v[tok]; };
  auto lmod = [&](int tok) { return tok < 0 ? -1 : c.leftmost_mod[tok]; };
  auto rmod = [&](int tok) { return tok < 0 ? -1 : c.rightmost_mod[tok]; };

  int s0 = c.stack_at(0), s1 = c.stack_at(1), s2 = c.stack_at(2);
  int b0 = c.buffer_front();

  std::vector<ad::Expr> parts = {vec(s2), vec(s1), vec(s0), vec(b0)};
  if (mode == FeatureMode::Extended) {
    parts.push_back(vec(lmod(s2)));
    parts.push_back(vec(rmod(s2)));
    parts.push_back(vec(lmod(s1)));
    parts.push_back(vec(rmod(s1)));
    parts.push_back(vec(lmod(s0)));
    parts.push_back(vec(rmod(s0)));
    parts.push_back(vec(lmod(b0)));
  }
  return g.concat(parts);
}

int transition_index(TKind t, int label_id, int num_labels) {
  switch (t) {
    case TKind::Shift:
      return 0;
    case TKind::Left:
      return 1 + label_id;
    case TKind::Right:
      return 1 + num_labels + label_id;
  }
  return -1;
}

int output_width(int num_labels) { return 1 + 2 * num_labels; }

void TransitionModel::init_params(ad::ParameterStore& store, std::mt19937_64& rng) const {
  encoder.init_params(store, rng);
  int feat_dim = feature_count(mode) * encoder.config().context_dim();
  init_mlp_params(store, "mlp", feat_dim, encoder.config().mlp_hidden,
                  output_width(num_labels), rng);
}

ad::Expr TransitionModel::score(ad::Graph& g, const Configuration& c,
                                const ContextVectors& cv) const {
  return mlp(g, "mlp", extract_features(g, c, cv, g.param("pad"), mode));
}

namespace {

struct Indexed {
  TKind kind;
  int label;
  int index;
};

// All scorer output indices for the legal transitions, with correctness under
// the dynamic oracle: a zero-cost arc transition that creates a gold arc
// accepts only the gold label; on a non-gold arc any label counts as correct.
void enumerate_transitions(const Configuration& c, const OracleCosts& costs,
                           const std::vector<int>& gold_heads,
                           const std::vector<int>& gold_labels, int num_labels,
                           std::vector<Indexed>& correct, std::vector<Indexed>& incorrect) {
  for (TKind t : legal_transitions(c)) {
    int cost = costs.cost(t);
    if (t == TKind::Shift) {
      Indexed e{t, -1, 0};
      (cost == 0 ? correct : incorrect).push_back(e);
      continue;
    }
    int mod = c.stack_at(0);
    int head = t == TKind::Left ? c.buffer_front() : c.stack_at(1);
    bool gold_arc = gold_heads[mod] == head;
    for (int l = 0; l < num_labels; ++l) {
      Indexed e{t, l, transition_index(t, l, num_labels)};
      bool ok = cost == 0 && (!gold_arc || l == gold_labels[mod]);
      (ok ? correct : incorrect).push_back(e);
    }
  }
}

int argmax_index(const Tensor& scores, const std::vector<Indexed>& set) {
  int best = -1;
  for (size_t i = 0; i < set.size(); ++i)
    if (best < 0 || scores.v[set[i].index] > scores.v[set[best].index])
      best = static_cast<int>(i);
  return best;
}

}  // namespace

ParseTree greedy_parse(const Sentence& sentence, const TransitionModel& model,
                       const ad::ParameterStore& store, const Vocabulary& vocab,
                       const ExternalEmbeddings* ext) {
  ad::Graph g(store);
  std::mt19937_64 unused_rng(0);
  EmbeddedSentence xs = model.encoder.embed(g, sentence, vocab, ext, false, unused_rng);
  ContextVectors cv = model.encoder.encode(g, xs.xs);

  Configuration c = initial_config(sentence.size());
  while (!c.terminal()) {
    ad::Expr scores = model.score(g, c, cv);
    const Tensor& val = g.value(scores);
    TKind best_kind = TKind::Shift;
    int best_label = -1, best_index = -1;
    for (TKind t : legal_transitions(c)) {
      if (t == TKind::Shift) {
        if (best_index < 0 || val.v[0] > val.v[best_index]) {
          best_kind = t;
          best_label = -1;
          best_index = 0;
        }
        continue;
      }
      for (int l = 0; l < model.num_labels; ++l) {
        int idx = transition_index(t, l, model.num_labels);
        if (best_index < 0 || val.v[idx] > val.v[best_index]) {
          best_kind = t;
          best_label = l;
          best_index = idx;
        }
      }
    }
    apply_transition(c, best_kind, best_label);
  }

  ParseTree tree = ParseTree::empty(sentence.size());
  for (int i = 1; i <= sentence.size(); ++i) {
    tree.heads[i] = c.head[i];
    tree.labels[i] = c.label[i] >= 0 ? vocab.label_name(c.label[i]) : "";
  }
  return tree;
}

TransitionTrainer::TransitionTrainer(const TransitionModel& model, ad::ParameterStore& store,
                                     const Vocabulary& vocab, const ExternalEmbeddings* ext,
                                     TransitionTrainOptions opts)
    : model_(model), store_(store), vocab_(vocab), ext_(ext), opts_(opts), graph_(store) {}

double TransitionTrainer::train_sentence(const Sentence& sentence, std::mt19937_64& rng) {
  std::vector<int> gold_heads = sentence.gold_heads();
  if (!is_projective(gold_heads))
    throw DataError("train_sentence: non-projective gold tree");
  std::vector<int> gold_labels(sentence.size() + 1, -1);
  for (int i = 1; i <= sentence.size(); ++i)
    gold_labels[i] = vocab_.label_id(sentence.tok(i).gold_label);

  EmbeddedSentence xs = model_.encoder.embed(graph_, sentence, vocab_, ext_, true, rng);
  ContextVectors cv = model_.encoder.encode(graph_, xs.xs);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  double sentence_loss = 0.0;
  Configuration c = initial_config(sentence.size());
  while (!c.terminal()) {
    OracleCosts costs = oracle_costs(c, gold_heads);
    std::vector<Indexed> correct, incorrect;
    enumerate_transitions(c, costs, gold_heads, gold_labels, model_.num_labels, correct,
                          incorrect);

    ad::Expr scores = model_.score(graph_, c, cv);
    const Tensor val = graph_.value(scores);

    if (!incorrect.empty()) {
      std::vector<int> gi, wi;
      for (const Indexed& e : correct) gi.push_back(e.index);
      for (const Indexed& e : incorrect) wi.push_back(e.index);
      ad::Expr term = graph_.rectify(graph_.scalar_add(
          graph_.sub(graph_.max_over(scores, wi), graph_.max_over(scores, gi)),
          opts_.margin));
      double v = graph_.scalar_value(term);
      sentence_loss += v;
      if (v > 0.0) {
        pending_.push_back(term);
        ++nonzero_;
      }
    }

    if (correct.empty())
      throw std::logic_error("train_sentence: no zero-cost transition available");
    int bc = argmax_index(val, correct);
    int bw = argmax_index(val, incorrect);
    Indexed chosen = correct[bc];
    if (opts_.dyn_oracle) {
      if (bw >= 0 && val.v[incorrect[bw].index] > val.v[correct[bc].index])
        chosen = incorrect[bw];  // error exploration: follow the overall argmax
      else if (bw >= 0 &&
               val.v[correct[bc].index] - val.v[incorrect[bw].index] < opts_.margin &&
               coin(rng) < opts_.p_agg)
        chosen = incorrect[bw];  // aggressive exploration inside the margin
    }
    apply_transition(c, chosen.kind, chosen.label);
  }

  if (nonzero_ >= opts_.batch_min_nonzero) update();
  return sentence_loss;
}

void TransitionTrainer::flush() {
  if (!pending_.empty()) update();
  graph_.clear();
}

void TransitionTrainer::update() {
  ad::Expr loss = graph_.add_all(pending_);
  store_.adam_step(graph_.backward(loss), opts_.adam);
  graph_.clear();
  pending_.clear();
  nonzero_ = 0;
  ++updates_;
}

}  // namespace parsekit
