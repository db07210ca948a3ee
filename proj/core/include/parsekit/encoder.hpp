#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "parsekit/autodiff.hpp"
#include "parsekit/treebank.hpp"

namespace parsekit {

struct EncoderConfig {
  int word_dim = 100;
  int pos_dim = 25;
  int lstm_layers = 2;
  int lstm_hidden = 125;  // per direction; output width is 2*lstm_hidden
  double word_dropout_alpha = 0.25;
  int external_dim = 0;
  bool use_pos = true;
  int mlp_hidden = 100;

  int context_dim() const { return 2 * lstm_hidden; }
  int input_dim() const {
    return word_dim + (use_pos ? pos_dim : 0) + external_dim;
  }
  int layer_input_dim(int layer) const {
    return layer == 0 ? input_dim() : context_dim();
  }
};

// Pre-trained word vectors, loaded from "word v1 .. vd" text lines. The
// vectors become trainable parameters; words without an entry get a fixed
// zero vector.
class ExternalEmbeddings {
 public:
  static ExternalEmbeddings load(const std::string& path);

  int dim() const { return dim_; }
  int num_words() const { return static_cast<int>(names_.size()); }
  int id(const std::string& word) const;  // -1 if absent
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::vector<double>>& vectors() const { return vectors_; }

  void add(const std::string& word, std::vector<double> vec);

 private:
  int dim_ = 0;
  std::map<std::string, int> ids_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> vectors_;
};

// v[0] is the ROOT context vector; v[1..n] cover the tokens.
struct ContextVectors {
  std::vector<ad::Expr> v;
  int n() const { return static_cast<int>(v.size()) - 1; }
};

struct EmbeddedSentence {
  std::vector<ad::Expr> xs;     // n+1 inputs, ROOT appended last
  std::vector<int> word_ids;    // post-dropout ids, parallel to xs
};

class Encoder {
 public:
  Encoder(const EncoderConfig& cfg, int num_words, int num_pos, int num_ext_words);

  // Registers all encoder parameters (embeddings, LSTM weights, pad vector).
  void init_params(ad::ParameterStore& store, std::mt19937_64& rng) const;
  std::vector<std::pair<std::string, std::pair<int, int>>> param_shapes() const;

  EmbeddedSentence embed(ad::Graph& g, const Sentence& sentence, const Vocabulary& vocab,
                         const ExternalEmbeddings* ext, bool training,
                         std::mt19937_64& rng) const;

  ContextVectors encode(ad::Graph& g, const std::vector<ad::Expr>& xs) const;

  ad::Expr pad_vector(ad::Graph& g) const { return g.param("pad"); }

  const EncoderConfig& config() const { return cfg_; }

 private:
  EncoderConfig cfg_;
  int num_words_, num_pos_, num_ext_words_;
};

// One LSTM state transition: i,f,o logistic gates, tanh candidate,
// c' = f*c + i*g, h' = o*tanh(c'). Gate order in the packed matrices: i,f,o,g.
struct LstmState {
  ad::Expr h, c;
};
LstmState lstm_step(ad::Graph& g, const std::string& prefix, const LstmState& state,
                    ad::Expr x);

// W2 * tanh(W1*x + b1) + b2, parameters found under `prefix` ("/W1" etc).
ad::Expr mlp(ad::Graph& g, const std::string& prefix, ad::Expr input);

void init_mlp_params(ad::ParameterStore& store, const std::string& prefix, int in_dim,
                     int hidden, int out_dim, std::mt19937_64& rng);

}  // namespace parsekit
