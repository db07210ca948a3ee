#include "parsekit/treebank.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace parsekit {

bool Sentence::has_gold() const {
  for (const Token& t : tokens)
    if (t.gold_head < 0) return false;
  return !tokens.empty();
}

std::vector<int> Sentence::gold_heads() const {
  std::vector<int> h(tokens.size() + 1, -1);
  for (int i = 1; i <= size(); ++i) h[i] = tok(i).gold_head;
  return h;
}

namespace {

std::vector<std::string> split_columns(const std::string& line) {
  std::vector<std::string> cols;
  if (line.find('\t') != std::string::npos) {
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
  } else {
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) cols.push_back(f);
  }
  return cols;
}

void finish_sentence(std::vector<Sentence>& out, Sentence& cur, const std::string& path,
                     int first_line, std::vector<std::string>* diagnostics,
                     bool validate_trees) {
  if (cur.tokens.empty()) return;
  if (validate_trees && cur.has_gold() && !is_valid_tree(cur.gold_heads())) {
    std::string msg = path + ":" + std::to_string(first_line) +
                      ": rejected sentence with cyclic or multi-root gold annotation";
    if (diagnostics)
      diagnostics->push_back(msg);
    else
      std::cerr << msg << "\n";
  } else {
    out.push_back(std::move(cur));
  }
  cur = Sentence{};
}

}  // namespace

std::vector<Sentence> read_conll(const std::string& path,
                                 std::vector<std::string>* diagnostics,
                                 bool validate_trees) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::vector<Sentence> out;
  Sentence cur;
  std::string line;
  int lineno = 0, sentence_start = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish_sentence(out, cur, path, sentence_start, diagnostics, validate_trees);
      sentence_start = lineno + 1;
      continue;
    }
    if (line[0] == '#') continue;

    std::vector<std::string> cols = split_columns(line);
    if (cols.size() != 10)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected 10 columns, got " +
                      std::to_string(cols.size()));
    // Skip multiword-token and empty-node lines.
    if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos)
      continue;

    Token t;
    t.form = cols[1];
    t.pos = cols[3] != "_" ? cols[3] : cols[4];
    if (cols[6] != "_") {
      try {
        size_t used = 0;
        t.gold_head = std::stoi(cols[6], &used);
        if (used != cols[6].size() || t.gold_head < 0) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": non-integer head field '" +
                        cols[6] + "'");
      }
      if (cols[7] != "_") t.gold_label = cols[7];
    }
    cur.tokens.push_back(std::move(t));
  }
  finish_sentence(out, cur, path, sentence_start, diagnostics, validate_trees);
  return out;
}

void write_conll(const std::string& path, const std::vector<Sentence>& sentences,
                 const std::vector<ParseTree>* trees) {
  if (trees && trees->size() != sentences.size())
    throw DataError("write_conll: " + std::to_string(sentences.size()) + " sentences vs " +
                    std::to_string(trees->size()) + " trees");
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  for (size_t s = 0; s < sentences.size(); ++s) {
    const Sentence& sent = sentences[s];
    for (int i = 1; i <= sent.size(); ++i) {
      const Token& t = sent.tok(i);
      int head = trees ? (*trees)[s].heads[i] : t.gold_head;
      std::string label = trees ? (*trees)[s].labels[i] : t.gold_label;
      out << i << '\t' << t.form << "\t_\t" << t.pos << '\t' << t.pos << "\t_\t"
          << (head >= 0 ? std::to_string(head) : "_") << '\t'
          << (!label.empty() ? label : "_") << "\t_\t_\n";
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

bool is_valid_tree(const std::vector<int>& heads) {
  int n = static_cast<int>(heads.size()) - 1;
  if (n < 1) return false;
  int roots = 0;
  for (int i = 1; i <= n; ++i) {
    if (heads[i] < 0 || heads[i] > n || heads[i] == i) return false;
    if (heads[i] == 0) ++roots;
  }
  if (roots != 1) return false;
  for (int i = 1; i <= n; ++i) {
    int hops = 0, j = i;
    while (j != 0) {
      j = heads[j];
      if (++hops > n) return false;  // cycle
    }
  }
  return true;
}

bool is_projective(const std::vector<int>& heads) {
  int n = static_cast<int>(heads.size()) - 1;
  auto is_descendant_of = [&](int node, int anc) {
    int hops = 0;
    while (node != anc) {
      if (node == 0 || ++hops > n) return false;
      node = heads[node];
    }
    return true;
  };
  for (int m = 1; m <= n; ++m) {
    int h = heads[m];
    int lo = std::min(h, m), hi = std::max(h, m);
    for (int k = lo + 1; k < hi; ++k)
      if (!is_descendant_of(k, h)) return false;
  }
  return true;
}

bool is_punct_pos(const std::string& pos) {
  return pos == "``" || pos == "''" || pos == ":" || pos == "," || pos == ".";
}

EvalResult evaluate(const std::vector<Sentence>& gold,
                    const std::vector<ParseTree>& predicted, bool exclude_punct) {
  if (gold.size() != predicted.size())
    throw DataError("evaluate: " + std::to_string(gold.size()) + " gold sentences vs " +
                    std::to_string(predicted.size()) + " predictions");
  EvalResult r;
  for (size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size())
      throw DataError("evaluate: length mismatch at sentence " + std::to_string(s) + ": " +
                      std::to_string(gold[s].size()) + " vs " +
                      std::to_string(predicted[s].size()));
    for (int i = 1; i <= gold[s].size(); ++i) {
      const Token& t = gold[s].tok(i);
      if (exclude_punct && is_punct_pos(t.pos)) continue;
      ++r.scored;
      if (predicted[s].heads[i] == t.gold_head) {
        ++r.correct_heads;
        if (predicted[s].labels[i] == t.gold_label) ++r.correct_labeled;
      }
    }
  }
  return r;
}

Vocabulary Vocabulary::build(const std::vector<Sentence>& train) {
  Vocabulary v;
  v.add_word("<unk>", 0);
  v.add_word("<root>", 0);
  v.add_pos("<root-pos>");
  for (const Sentence& s : train) {
    for (const Token& t : s.tokens) {
      auto it = v.words_.find(t.form);
      if (it == v.words_.end())
        v.add_word(t.form, 1);
      else
        ++v.counts_[t.form];
      if (!v.pos_.count(t.pos)) v.add_pos(t.pos);
      if (!t.gold_label.empty() && !v.labels_.count(t.gold_label)) v.add_label(t.gold_label);
    }
  }
  return v;
}

int Vocabulary::word_id(const std::string& form) const {
  auto it = words_.find(form);
  return it == words_.end() ? kUnkWord : it->second;
}

int Vocabulary::pos_id(const std::string& pos) const {
  auto it = pos_.find(pos);
  return it == pos_.end() ? kRootPos : it->second;
}

int Vocabulary::label_id(const std::string& label) const {
  auto it = labels_.find(label);
  return it == labels_.end() ? 0 : it->second;
}

int Vocabulary::word_count(const std::string& form) const {
  auto it = counts_.find(form);
  return it == counts_.end() ? 0 : static_cast<int>(it->second);
}

std::vector<std::pair<std::string, long>> Vocabulary::word_entries() const {
  std::vector<std::pair<std::string, long>> out;
  for (const std::string& w : word_names_) out.emplace_back(w, counts_.at(w));
  return out;
}

std::vector<std::string> Vocabulary::pos_entries() const { return pos_names_; }
std::vector<std::string> Vocabulary::label_entries() const { return label_names_; }

void Vocabulary::add_word(const std::string& form, long count) {
  if (words_.count(form)) throw std::invalid_argument("duplicate word: " + form);
  words_[form] = static_cast<int>(word_names_.size());
  word_names_.push_back(form);
  counts_[form] = count;
}

void Vocabulary::add_pos(const std::string& pos) {
  if (pos_.count(pos)) throw std::invalid_argument("duplicate pos: " + pos);
  pos_[pos] = static_cast<int>(pos_names_.size());
  pos_names_.push_back(pos);
}

void Vocabulary::add_label(const std::string& label) {
  if (labels_.count(label)) throw std::invalid_argument("duplicate label: " + label);
  labels_[label] = static_cast<int>(label_names_.size());
  label_names_.push_back(label);
}

}  // namespace parsekit
