#pragma once

#include <random>
#include <vector>

#include "parsekit/encoder.hpp"

namespace parsekit {

// score[h][m] for h in 0..n, m in 1..n, h != m; unused entries are invalid.
struct ArcScoreMatrix {
  int n = 0;
  std::vector<std::vector<ad::Expr>> node;     // graph handles
  std::vector<std::vector<double>> value;      // forward values

  bool used(int h, int m) const { return m >= 1 && m <= n && h >= 0 && h <= n && h != m; }
};

struct GraphModel {
  Encoder encoder;
  int num_labels = 0;
  bool with_labeler = true;

  GraphModel(const EncoderConfig& cfg, int num_words, int num_pos, int num_labels,
             int num_ext_words = 0, bool with_labeler = true)
      : encoder(cfg, num_words, num_pos, num_ext_words),
        num_labels(num_labels),
        with_labeler(with_labeler) {}

  void init_params(ad::ParameterStore& store, std::mt19937_64& rng) const;

  // Factorized arc scoring: the input-to-hidden products are computed once
  // per token (2(n+1) matrix-vector products) and summed per pair.
  ArcScoreMatrix score_arcs(ad::Graph& g, const ContextVectors& cv) const;

  // Reference route: one matvec over the full W1 per pair. Same parameters,
  // same scores and gradients as the factorized route.
  ArcScoreMatrix score_arcs_naive(ad::Graph& g, const ContextVectors& cv) const;

  // Input-to-hidden matvec count of the last score_arcs call.
  mutable long hidden_matvec_count = 0;
};

struct EisnerResult {
  std::vector<int> heads;  // n+1-sized, index 0 unused
  double total = 0.0;
};

// Highest-scoring projective tree rooted at 0; O(n^3). Backtrack ties prefer
// the smaller split index.
EisnerResult eisner_decode(const std::vector<std::vector<double>>& score, int n);

// +1 on every arc not in the gold tree.
std::vector<std::vector<double>> loss_augmented_scores(
    const std::vector<std::vector<double>>& score, const std::vector<int>& gold_heads);

// Structured hinge against the loss-augmented argmax. Returns the loss node
// (constant zero when the augmented argmax equals gold) plus its value.
struct StructureLoss {
  ad::Expr node;
  double value = 0.0;
  std::vector<int> augmented_best;
};
StructureLoss structure_loss(ad::Graph& g, const ArcScoreMatrix& scores,
                             const std::vector<int>& gold_heads, bool loss_augmented = true);

// Per-arc label argmax using MLP_LBL(v_h . v_m); ties to the lowest index.
void label_arcs(ad::Graph& g, const ContextVectors& cv, const Vocabulary& vocab,
                ParseTree& tree);

// Per-gold-arc label hinge, summed over the sentence.
struct LabelLoss {
  ad::Expr node;
  double value = 0.0;
  bool has_terms = false;
};
LabelLoss label_loss(ad::Graph& g, const ContextVectors& cv,
                     const std::vector<int>& gold_heads,
                     const std::vector<int>& gold_labels, int num_labels);

ParseTree graph_parse(const Sentence& sentence, const GraphModel& model,
                      const ad::ParameterStore& store, const Vocabulary& vocab,
                      const ExternalEmbeddings* ext);

struct GraphTrainOptions {
  bool loss_augmented = true;
  ad::AdamConfig adam;
};

// One sentence: encode with word dropout, structure loss (+ label loss when
// the labeler is on), backward and Adam update when the loss is nonzero.
double graph_train_sentence(const Sentence& sentence, const GraphModel& model,
                            ad::ParameterStore& store, const Vocabulary& vocab,
                            const ExternalEmbeddings* ext, const GraphTrainOptions& opts,
                            std::mt19937_64& rng);

}  // namespace parsekit
