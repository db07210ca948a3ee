#pragma once

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "parsekit/encoder.hpp"

namespace parsekit {

enum class TKind { Shift = 0, Left = 1, Right = 2 };

enum class FeatureMode { Simple, Extended };

inline int feature_count(FeatureMode m) { return m == FeatureMode::Simple ? 4 : 11; }

// Arc-hybrid configuration. Stack top is the back of `stack`; the buffer is
// the suffix of [1..n, 0] starting at `buffer_pos` (0 is the ROOT sentinel).
struct Configuration {
  int n = 0;
  std::vector<int> stack;
  int buffer_pos = 0;                 // index into the implicit buffer [1..n, 0]
  std::vector<int> head;              // per token, -1 until attached
  std::vector<int> label;             // label id per token, -1 until attached
  std::vector<int> leftmost_mod;      // per token incl. 0, -1 if none
  std::vector<int> rightmost_mod;

  int buffer_size() const { return n + 1 - buffer_pos; }
  int buffer_front() const { return buffer_pos < n ? buffer_pos + 1 : 0; }
  bool terminal() const { return stack.empty() && buffer_size() == 1; }
  int stack_at(int depth) const {  // depth 0 = s0; -1 if absent
    int i = static_cast<int>(stack.size()) - 1 - depth;
    return i >= 0 ? stack[i] : -1;
  }
  int num_arcs() const;
};

Configuration initial_config(int n);

// Shift legal iff the buffer front is not ROOT; Left needs a stack item and a
// buffer item; Right needs two stack items. Querying a terminal configuration
// is an error.
std::vector<TKind> legal_transitions(const Configuration& c);

void apply_transition(Configuration& c, TKind t, int label_id = -1);

// Dynamic-oracle cost (gold arcs rendered unreachable) per legal transition;
// -1 marks illegal ones. gold_heads is n+1-sized and must be projective.
struct OracleCosts {
  int shift = -1, left = -1, right = -1;
  int cost(TKind t) const {
    return t == TKind::Shift ? shift : t == TKind::Left ? left : right;
  }
};
OracleCosts oracle_costs(const Configuration& c, const std::vector<int>& gold_heads);

// Concatenated BiLSTM vectors for the configuration: s2,s1,s0,b0 plus, in
// extended mode, left/rightmost modifiers of s2,s1,s0 and leftmost of b0.
// Absent positions use the shared pad vector.
ad::Expr extract_features(ad::Graph& g, const Configuration& c, const ContextVectors& cv,
                          ad::Expr pad, FeatureMode mode);

// Scorer output layout: index 0 = Shift, 1..L = Left_l, L+1..2L = Right_l.
int transition_index(TKind t, int label_id, int num_labels);
int output_width(int num_labels);

struct TransitionModel {
  Encoder encoder;
  FeatureMode mode = FeatureMode::Simple;
  int num_labels = 0;

  TransitionModel(const EncoderConfig& cfg, int num_words, int num_pos, int num_labels,
                  int num_ext_words = 0, FeatureMode mode = FeatureMode::Simple)
      : encoder(cfg, num_words, num_pos, num_ext_words),
        mode(mode),
        num_labels(num_labels) {}

  void init_params(ad::ParameterStore& store, std::mt19937_64& rng) const;

  ad::Expr score(ad::Graph& g, const Configuration& c, const ContextVectors& cv) const;
};

ParseTree greedy_parse(const Sentence& sentence, const TransitionModel& model,
                       const ad::ParameterStore& store, const Vocabulary& vocab,
                       const ExternalEmbeddings* ext);

struct TransitionTrainOptions {
  double p_agg = 0.1;
  double margin = 1.0;
  bool dyn_oracle = true;
  int batch_min_nonzero = 50;
  ad::AdamConfig adam;
};

// Carries the cross-sentence loss accumulation of mini-batch simulation.
class TransitionTrainer {
 public:
  TransitionTrainer(const TransitionModel& model, ad::ParameterStore& store,
                    const Vocabulary& vocab, const ExternalEmbeddings* ext,
                    TransitionTrainOptions opts);

  // Processes one sentence; updates parameters when >= 50 nonzero hinge terms
  // have accumulated. Returns the sentence's summed loss value.
  double train_sentence(const Sentence& sentence, std::mt19937_64& rng);

  // Updates on whatever is pending (used at end of training).
  void flush();

  long updates() const { return updates_; }

 private:
  void update();

  const TransitionModel& model_;
  ad::ParameterStore& store_;
  const Vocabulary& vocab_;
  const ExternalEmbeddings* ext_;
  TransitionTrainOptions opts_;
  ad::Graph graph_;
  std::vector<ad::Expr> pending_;
  int nonzero_ = 0;
  long updates_ = 0;
};

}  // namespace parsekit
