#include "parsekit/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace parsekit {

namespace {

constexpr const char* kMagic = "PKMODEL v1";

std::string fmt_double(double x) {
  std::ostringstream ss;
  ss << std::setprecision(17) << x;
  return ss.str();
}

}  // namespace

std::vector<std::pair<std::string, std::pair<int, int>>> ParserModel::expected_tensors()
    const {
  std::vector<std::pair<std::string, std::pair<int, int>>> shapes;
  Encoder enc(cfg, vocab.num_words(), vocab.num_pos(), ext.num_words());
  shapes = enc.param_shapes();
  int hidden = cfg.mlp_hidden;
  auto mlp_shapes = [&](const std::string& p, int in, int out) {
    shapes.push_back({p + "/W1", {hidden, in}});
    shapes.push_back({p + "/b1", {hidden, 1}});
    shapes.push_back({p + "/W2", {out, hidden}});
    shapes.push_back({p + "/b2", {out, 1}});
  };
  if (kind == ParserKind::Transition) {
    mlp_shapes("mlp", feature_count(mode) * cfg.context_dim(),
               output_width(vocab.num_labels()));
  } else {
    mlp_shapes("arc", 2 * cfg.context_dim(), 1);
    if (labeler) mlp_shapes("lbl", 2 * cfg.context_dim(), vocab.num_labels());
  }
  std::sort(shapes.begin(), shapes.end());
  return shapes;
}

void save_model(const std::string& path, const ParserModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open model file for writing: " + path);

  out << kMagic << '\n';
  out << "parser " << (m.kind == ParserKind::Transition ? "transition" : "graph") << '\n';
  out << "features " << (m.mode == FeatureMode::Simple ? "simple" : "extended") << '\n';
  out << "word_dim " << m.cfg.word_dim << '\n';
  out << "pos_dim " << m.cfg.pos_dim << '\n';
  out << "lstm_layers " << m.cfg.lstm_layers << '\n';
  out << "lstm_hidden " << m.cfg.lstm_hidden << '\n';
  out << "mlp_hidden " << m.cfg.mlp_hidden << '\n';
  out << "external_dim " << m.cfg.external_dim << '\n';
  out << "alpha " << fmt_double(m.cfg.word_dropout_alpha) << '\n';
  out << "use_pos " << (m.cfg.use_pos ? 1 : 0) << '\n';
  out << "labeler " << (m.labeler ? 1 : 0) << '\n';
  out << "loss_aug " << (m.loss_augmented ? 1 : 0) << '\n';
  out << "dyn_oracle " << (m.dyn_oracle ? 1 : 0) << '\n';

  auto words = m.vocab.word_entries();
  out << "words " << words.size() << '\n';
  for (const auto& [w, c] : words) out << w << '\t' << c << '\n';
  auto pos = m.vocab.pos_entries();
  out << "pos " << pos.size() << '\n';
  for (const auto& p : pos) out << p << '\n';
  auto labels = m.vocab.label_entries();
  out << "labels " << labels.size() << '\n';
  for (const auto& l : labels) out << l << '\n';
  out << "ext_words " << m.ext.num_words() << '\n';
  for (const auto& w : m.ext.names()) out << w << '\n';

  auto tensors = m.expected_tensors();
  out << "tensors " << tensors.size() << '\n';
  for (const auto& [name, shape] : tensors)
    out << name << '\t' << shape.first << '\t' << shape.second << '\n';
  out << "PAYLOAD\n";

  for (const auto& [name, shape] : tensors) {
    const Tensor& t = m.store.get(name);
    if (t.rows != shape.first || t.cols != shape.second)
      throw DataError("save_model: tensor " + name + " has shape " + t.shape_str() +
                      ", expected (" + std::to_string(shape.first) + "x" +
                      std::to_string(shape.second) + ")");
    out.write(reinterpret_cast<const char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  }
  if (!out) throw DataError("write failed: " + path);
}

namespace {

std::string expect_line(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": unexpected end of model header");
  return line;
}

std::string expect_kv(std::istream& in, const std::string& path, const std::string& key) {
  std::string line = expect_line(in, path);
  if (line.rfind(key + " ", 0) != 0)
    throw DataError(path + ": expected '" + key + "', got '" + line + "'");
  return line.substr(key.size() + 1);
}

}  // namespace

ParserModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);

  std::string magic = expect_line(in, path);
  if (magic != kMagic)
    throw DataError(path + ": unsupported model format version '" + magic + "'");

  ParserModel m;
  std::string kind = expect_kv(in, path, "parser");
  if (kind == "transition")
    m.kind = ParserKind::Transition;
  else if (kind == "graph")
    m.kind = ParserKind::Graph;
  else
    throw DataError(path + ": unknown parser kind '" + kind + "'");
  std::string mode = expect_kv(in, path, "features");
  if (mode == "simple")
    m.mode = FeatureMode::Simple;
  else if (mode == "extended")
    m.mode = FeatureMode::Extended;
  else
    throw DataError(path + ": unknown feature mode '" + mode + "'");

  m.cfg.word_dim = std::stoi(expect_kv(in, path, "word_dim"));
  m.cfg.pos_dim = std::stoi(expect_kv(in, path, "pos_dim"));
  m.cfg.lstm_layers = std::stoi(expect_kv(in, path, "lstm_layers"));
  m.cfg.lstm_hidden = std::stoi(expect_kv(in, path, "lstm_hidden"));
  m.cfg.mlp_hidden = std::stoi(expect_kv(in, path, "mlp_hidden"));
  m.cfg.external_dim = std::stoi(expect_kv(in, path, "external_dim"));
  m.cfg.word_dropout_alpha = std::stod(expect_kv(in, path, "alpha"));
  m.cfg.use_pos = expect_kv(in, path, "use_pos") == "1";
  m.labeler = expect_kv(in, path, "labeler") == "1";
  m.loss_augmented = expect_kv(in, path, "loss_aug") == "1";
  m.dyn_oracle = expect_kv(in, path, "dyn_oracle") == "1";

  long n_words = std::stol(expect_kv(in, path, "words"));
  for (long i = 0; i < n_words; ++i) {
    std::string line = expect_line(in, path);
    size_t tab = line.rfind('\t');
    if (tab == std::string::npos) throw DataError(path + ": malformed word entry: " + line);
    m.vocab.add_word(line.substr(0, tab), std::stol(line.substr(tab + 1)));
  }
  long n_pos = std::stol(expect_kv(in, path, "pos"));
  for (long i = 0; i < n_pos; ++i) m.vocab.add_pos(expect_line(in, path));
  long n_labels = std::stol(expect_kv(in, path, "labels"));
  for (long i = 0; i < n_labels; ++i) m.vocab.add_label(expect_line(in, path));
  long n_ext = std::stol(expect_kv(in, path, "ext_words"));
  for (long i = 0; i < n_ext; ++i)
    m.ext.add(expect_line(in, path), std::vector<double>(m.cfg.external_dim, 0.0));

  long n_tensors = std::stol(expect_kv(in, path, "tensors"));
  std::vector<std::pair<std::string, std::pair<int, int>>> header_tensors;
  for (long i = 0; i < n_tensors; ++i) {
    std::istringstream ss(expect_line(in, path));
    std::string name;
    int rows = 0, cols = 0;
    if (!(ss >> name >> rows >> cols))
      throw DataError(path + ": malformed tensor entry");
    header_tensors.push_back({name, {rows, cols}});
  }
  if (expect_line(in, path) != "PAYLOAD")
    throw DataError(path + ": missing PAYLOAD marker");

  auto expected = m.expected_tensors();
  if (header_tensors != expected) {
    for (const auto& e : expected) {
      if (std::find(header_tensors.begin(), header_tensors.end(), e) ==
          header_tensors.end())
        throw DataError(path + ": missing or misshapen tensor " + e.first +
                        ", expected (" + std::to_string(e.second.first) + "x" +
                        std::to_string(e.second.second) + ")");
    }
    throw DataError(path + ": tensor list does not match header configuration");
  }

  for (const auto& [name, shape] : header_tensors) {
    Tensor t(shape.first, shape.second);
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(t.v.size() * sizeof(double)))
      throw DataError(path + ": truncated payload while reading tensor " + name);
    m.store.add(name, std::move(t));
  }
  return m;
}

ParseTree parse_sentence(const ParserModel& model, const Sentence& sentence) {
  const ExternalEmbeddings* ext = model.cfg.external_dim > 0 ? &model.ext : nullptr;
  if (model.kind == ParserKind::Transition) {
    TransitionModel tm = model.transition_model();
    return greedy_parse(sentence, tm, model.store, model.vocab, ext);
  }
  GraphModel gm = model.graph_model();
  return graph_parse(sentence, gm, model.store, model.vocab, ext);
}

}  // namespace parsekit
