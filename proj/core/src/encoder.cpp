#include "parsekit/encoder.hpp"

#include <fstream>
#include <sstream>

namespace parsekit {

ExternalEmbeddings ExternalEmbeddings::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open external embeddings file: " + path);
  ExternalEmbeddings e;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> vec;
    double x;
    while (ss >> x) vec.push_back(x);
    if (vec.empty())
      throw DataError(path + ":" + std::to_string(lineno) + ": no vector values");
    if (e.dim_ == 0) e.dim_ = static_cast<int>(vec.size());
    if (static_cast<int>(vec.size()) != e.dim_)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(e.dim_) + " values, got " + std::to_string(vec.size()));
    if (!e.ids_.count(word)) e.add(word, std::move(vec));
  }
  return e;
}

int ExternalEmbeddings::id(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? -1 : it->second;
}

void ExternalEmbeddings::add(const std::string& word, std::vector<double> vec) {
  if (dim_ == 0) dim_ = static_cast<int>(vec.size());
  ids_[word] = static_cast<int>(names_.size());
  names_.push_back(word);
  vectors_.push_back(std::move(vec));
}

Encoder::Encoder(const EncoderConfig& cfg, int num_words, int num_pos, int num_ext_words)
    : cfg_(cfg), num_words_(num_words), num_pos_(num_pos), num_ext_words_(num_ext_words) {}

std::vector<std::pair<std::string, std::pair<int, int>>> Encoder::param_shapes() const {
  std::vector<std::pair<std::string, std::pair<int, int>>> shapes;
  shapes.push_back({"emb/word", {num_words_, cfg_.word_dim}});
  if (cfg_.use_pos) shapes.push_back({"emb/pos", {num_pos_, cfg_.pos_dim}});
  if (cfg_.external_dim > 0) shapes.push_back({"emb/ext", {num_ext_words_, cfg_.external_dim}});
  shapes.push_back({"pad", {cfg_.context_dim(), 1}});
  int h = cfg_.lstm_hidden;
  for (int l = 0; l < cfg_.lstm_layers; ++l) {
    int in = cfg_.layer_input_dim(l);
    for (const char* dir : {"f", "b"}) {
      std::string p = "lstm/l" + std::to_string(l) + "/" + dir;
      shapes.push_back({p + "/Wx", {4 * h, in}});
      shapes.push_back({p + "/Wh", {4 * h, h}});
      shapes.push_back({p + "/b", {4 * h, 1}});
    }
  }
  return shapes;
}

void Encoder::init_params(ad::ParameterStore& store, std::mt19937_64& rng) const {
  for (const auto& [name, shape] : param_shapes()) {
    bool emb = name.rfind("emb/", 0) == 0 || name == "pad";
    bool bias = name.size() > 2 && name.compare(name.size() - 2, 2, "/b") == 0;
    if (bias)
      store.add_bias(name, shape.first);
    else if (emb)
      store.add_embedding(name, shape.first, shape.second, rng);
    else
      store.add_matrix(name, shape.first, shape.second, rng);
  }
}

EmbeddedSentence Encoder::embed(ad::Graph& g, const Sentence& sentence,
                                const Vocabulary& vocab, const ExternalEmbeddings* ext,
                                bool training, std::mt19937_64& rng) const {
  if (cfg_.external_dim > 0 && !ext)
    throw std::invalid_argument("external_dim > 0 but no external embedding table");

  ad::Expr word_table = g.param("emb/word");
  ad::Expr pos_table = cfg_.use_pos ? g.param("emb/pos") : ad::Expr{};
  ad::Expr ext_table = cfg_.external_dim > 0 ? g.param("emb/ext") : ad::Expr{};
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  EmbeddedSentence out;
  int n = sentence.size();
  for (int i = 1; i <= n + 1; ++i) {
    bool is_root = i == n + 1;
    int wid, pid;
    std::string form;
    bool dropped = false;
    if (is_root) {
      wid = Vocabulary::kRootWord;
      pid = Vocabulary::kRootPos;
    } else {
      const Token& t = sentence.tok(i);
      form = t.form;
      wid = vocab.word_id(form);
      pid = vocab.pos_id(t.pos);
      if (training) {
        double p_unk = cfg_.word_dropout_alpha /
                       (vocab.word_count(form) + cfg_.word_dropout_alpha);
        if (coin(rng) < p_unk) {
          wid = Vocabulary::kUnkWord;
          dropped = true;
        }
      }
    }

    std::vector<ad::Expr> parts;
    parts.push_back(g.row(word_table, wid));
    if (cfg_.use_pos) parts.push_back(g.row(pos_table, pid));
    if (cfg_.external_dim > 0) {
      int eid = is_root ? -1 : ext->id(form);
      bool zero_ext = eid < 0 || (dropped && coin(rng) < 0.5);
      parts.push_back(zero_ext ? g.constant(Tensor::zeros(cfg_.external_dim))
                               : g.row(ext_table, eid));
    }
    out.xs.push_back(parts.size() == 1 ? parts[0] : g.concat(parts));
    out.word_ids.push_back(wid);
  }
  return out;
}

LstmState lstm_step(ad::Graph& g, const std::string& prefix, const LstmState& state,
                    ad::Expr x) {
  ad::Expr pre = g.add(g.add(g.matvec(g.param(prefix + "/Wx"), x),
                             g.matvec(g.param(prefix + "/Wh"), state.h)),
                       g.param(prefix + "/b"));
  int h = g.value(state.h).rows;
  ad::Expr gi = g.logistic(g.slice(pre, 0, h));
  ad::Expr gf = g.logistic(g.slice(pre, h, h));
  ad::Expr go = g.logistic(g.slice(pre, 2 * h, h));
  ad::Expr gg = g.tanh(g.slice(pre, 3 * h, h));
  ad::Expr c = g.add(g.cmult(gf, state.c), g.cmult(gi, gg));
  return {g.cmult(go, g.tanh(c)), c};
}

ContextVectors Encoder::encode(ad::Graph& g, const std::vector<ad::Expr>& xs) const {
  if (xs.empty()) throw std::invalid_argument("encode: empty input sequence");
  int len = static_cast<int>(xs.size());
  int h = cfg_.lstm_hidden;

  std::vector<ad::Expr> seq = xs;
  for (int l = 0; l < cfg_.lstm_layers; ++l) {
    std::string pf = "lstm/l" + std::to_string(l) + "/f";
    std::string pb = "lstm/l" + std::to_string(l) + "/b";
    std::vector<ad::Expr> fwd(len), bwd(len);
    LstmState st{g.constant(Tensor::zeros(h)), g.constant(Tensor::zeros(h))};
    for (int i = 0; i < len; ++i) {
      st = lstm_step(g, pf, st, seq[i]);
      fwd[i] = st.h;
    }
    st = {g.constant(Tensor::zeros(h)), g.constant(Tensor::zeros(h))};
    for (int i = len - 1; i >= 0; --i) {
      st = lstm_step(g, pb, st, seq[i]);
      bwd[i] = st.h;
    }
    for (int i = 0; i < len; ++i) seq[i] = g.concat({fwd[i], bwd[i]});
  }

  // Input position len-1 carries ROOT; it becomes v[0].
  ContextVectors cv;
  cv.v.resize(len);
  cv.v[0] = seq[len - 1];
  for (int i = 1; i < len; ++i) cv.v[i] = seq[i - 1];
  return cv;
}

ad::Expr mlp(ad::Graph& g, const std::string& prefix, ad::Expr input) {
  ad::Expr hidden = g.tanh(g.add(g.matvec(g.param(prefix + "/W1"), input),
                                 g.param(prefix + "/b1")));
  return g.add(g.matvec(g.param(prefix + "/W2"), hidden), g.param(prefix + "/b2"));
}

void init_mlp_params(ad::ParameterStore& store, const std::string& prefix, int in_dim,
                     int hidden, int out_dim, std::mt19937_64& rng) {
  store.add_matrix(prefix + "/W1", hidden, in_dim, rng);
  store.add_bias(prefix + "/b1", hidden);
  store.add_matrix(prefix + "/W2", out_dim, hidden, rng);
  store.add_bias(prefix + "/b2", out_dim);
}

}  // namespace parsekit
