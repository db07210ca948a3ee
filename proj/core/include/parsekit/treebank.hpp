#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parsekit {

struct Token {
  std::string form;
  std::string pos;
  int gold_head = -1;       // 0 = ROOT, -1 = absent
  std::string gold_label;   // empty = absent
};

// Tokens are 1-based; index 0 is reserved for ROOT.
struct Sentence {
  std::vector<Token> tokens;
  int size() const { return static_cast<int>(tokens.size()); }
  const Token& tok(int i) const { return tokens[i - 1]; }
  Token& tok(int i) { return tokens[i - 1]; }
  bool has_gold() const;
  std::vector<int> gold_heads() const;  // size n+1, index 0 unused (-1)
};

// heads/labels indexed 1..n; index 0 unused.
struct ParseTree {
  std::vector<int> heads;
  std::vector<std::string> labels;

  static ParseTree empty(int n) {
    ParseTree t;
    t.heads.assign(n + 1, -1);
    t.labels.assign(n + 1, "");
    return t;
  }
  int size() const { return static_cast<int>(heads.size()) - 1; }
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CoNLL-X / CoNLL-U reader. Comment lines and multiword/empty-node ids are
// skipped; with validate_trees, sentences whose gold heads are cyclic or
// multi-rooted are dropped with a diagnostic appended to `diagnostics` (or
// stderr when null).
std::vector<Sentence> read_conll(const std::string& path,
                                 std::vector<std::string>* diagnostics = nullptr,
                                 bool validate_trees = true);

void write_conll(const std::string& path, const std::vector<Sentence>& sentences,
                 const std::vector<ParseTree>* trees = nullptr);

// True iff heads[1..n] form a valid tree rooted at 0 (acyclic, single 0-child).
bool is_valid_tree(const std::vector<int>& heads);

// True iff every token strictly between an arc's endpoints is a descendant of
// the arc's head. heads is n+1-sized, index 0 unused.
bool is_projective(const std::vector<int>& heads);

struct EvalResult {
  long scored = 0;
  long correct_heads = 0;
  long correct_labeled = 0;
  double uas() const { return scored == 0 ? 0.0 : double(correct_heads) / scored; }
  double las() const { return scored == 0 ? 0.0 : double(correct_labeled) / scored; }
};

// Punctuation exclusion keys off the gold POS tag.
bool is_punct_pos(const std::string& pos);

EvalResult evaluate(const std::vector<Sentence>& gold,
                    const std::vector<ParseTree>& predicted, bool exclude_punct);

class Vocabulary {
 public:
  static constexpr int kUnkWord = 0;
  static constexpr int kRootWord = 1;
  static constexpr int kRootPos = 0;

  static Vocabulary build(const std::vector<Sentence>& train);

  int word_id(const std::string& form) const;  // OOV -> kUnkWord
  int pos_id(const std::string& pos) const;    // OOV -> 0 (the ROOT-POS slot doubles as unknown)
  int label_id(const std::string& label) const;
  int word_count(const std::string& form) const;  // training frequency, 0 if unseen

  int num_words() const { return static_cast<int>(words_.size()); }
  int num_pos() const { return static_cast<int>(pos_.size()); }
  int num_labels() const { return static_cast<int>(labels_.size()); }
  const std::string& label_name(int id) const { return label_names_[id]; }

  // Deterministic enumeration for model serialization.
  std::vector<std::pair<std::string, long>> word_entries() const;
  std::vector<std::string> pos_entries() const;
  std::vector<std::string> label_entries() const;

  void add_word(const std::string& form, long count);
  void add_pos(const std::string& pos);
  void add_label(const std::string& label);

 private:
  std::map<std::string, int> words_;
  std::map<std::string, long> counts_;
  std::map<std::string, int> pos_;
  std::map<std::string, int> labels_;
  std::vector<std::string> word_names_, pos_names_, label_names_;
};

}  // namespace parsekit
