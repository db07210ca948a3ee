#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "parsekit/treebank.hpp"
#include "support/oracles.hpp"

using namespace parsekit;
using namespace parsekit::testing;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = "treebank_test_tmp_" + std::to_string(counter++) + ".conll";
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

const char* kTwoTokens =
    "1\tthe\t_\tDT\t_\t_\t2\tdet\t_\t_\n"
    "2\tcat\t_\tNN\t_\t_\t0\troot\t_\t_\n"
    "\n";

}  // namespace

TEST_CASE("read_conll maps columns to Sentence fields") {
  TempFile f(kTwoTokens);
  auto sents = read_conll(f.path);
  REQUIRE(sents.size() == 1);
  CHECK(sents[0].size() == 2);
  CHECK(sents[0].tok(1).form == "the");
  CHECK(sents[0].tok(1).pos == "DT");
  CHECK(sents[0].tok(1).gold_head == 2);
  CHECK(sents[0].tok(2).gold_head == 0);
  CHECK(sents[0].tok(2).gold_label == "root");
}

TEST_CASE("read_conll skips comments, multiword ids and falls back to column 5") {
  TempFile f(
      "# a comment\n"
      "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdel\t_\t_\tADP\t_\t0\troot\t_\t_\n"
      "\n");
  auto sents = read_conll(f.path);
  REQUIRE(sents.size() == 1);
  CHECK(sents[0].size() == 1);
  CHECK(sents[0].tok(1).pos == "ADP");
}

TEST_CASE("read_conll errors name the offending line") {
  TempFile bad_head("1\tthe\t_\tDT\t_\t_\tx\tdet\t_\t_\n\n");
  CHECK_THROWS_WITH_AS(read_conll(bad_head.path), doctest::Contains(":1"), DataError);
  TempFile bad_cols("1\tthe\tDT\n\n");
  CHECK_THROWS_WITH_AS(read_conll(bad_cols.path), doctest::Contains("10 columns"),
                       DataError);
}

TEST_CASE("read_conll rejects cyclic gold annotation with a diagnostic") {
  TempFile f(
      "1\ta\t_\tA\t_\t_\t2\tx\t_\t_\n"
      "2\tb\t_\tB\t_\t_\t1\tx\t_\t_\n"
      "\n" +
      std::string(kTwoTokens));
  std::vector<std::string> diags;
  auto sents = read_conll(f.path, &diags);
  CHECK(sents.size() == 1);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].find("cyclic or multi-root") != std::string::npos);
}

TEST_CASE("write_conll round trip preserves fields") {
  TempFile f(kTwoTokens);
  auto sents = read_conll(f.path);
  TempFile out("");
  write_conll(out.path, sents);
  auto again = read_conll(out.path);
  REQUIRE(again.size() == sents.size());
  for (size_t s = 0; s < sents.size(); ++s)
    for (int i = 1; i <= sents[s].size(); ++i) {
      CHECK(again[s].tok(i).form == sents[s].tok(i).form);
      CHECK(again[s].tok(i).pos == sents[s].tok(i).pos);
      CHECK(again[s].tok(i).gold_head == sents[s].tok(i).gold_head);
      CHECK(again[s].tok(i).gold_label == sents[s].tok(i).gold_label);
    }
  // idempotence: a second round trip writes the identical file
  TempFile out2("");
  write_conll(out2.path, again);
  std::ifstream a(out.path), b(out2.path);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
}

TEST_CASE("write_conll of an empty corpus yields an empty file") {
  TempFile out("");
  write_conll(out.path, {});
  std::ifstream in(out.path);
  std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(s.empty());
}

TEST_CASE("is_projective on hand cases") {
  CHECK(is_projective({-1, 2, 0, 2}));
  CHECK_FALSE(is_projective({-1, 0, 4, 1, 1}));
  CHECK(is_projective({-1, 0}));
}

TEST_CASE("is_projective agrees with the crossing-arcs check on all small trees") {
  for (int n = 1; n <= 7; ++n) {
    std::vector<std::vector<int>> trees;
    enumerate_projective_trees(n, false, trees);
    CHECK(!trees.empty());
    // enumerate_projective_trees already filters by is_projective; re-verify
    // every enumerated tree and a sample of rejected ones via crossing arcs.
    for (const auto& t : trees) CHECK(projective_by_crossing(t));
  }
  // exhaustive agreement on all head-vectors for n <= 5
  for (int n = 1; n <= 5; ++n) {
    std::vector<int> heads(n + 1, -1);
    std::function<void(int)> rec = [&](int m) {
      if (m > n) {
        bool tree = true;
        for (int i = 1; i <= n && tree; ++i) {
          int j = i, hops = 0;
          while (j != 0) {
            j = heads[j];
            if (++hops > n) {
              tree = false;
              break;
            }
          }
        }
        if (tree) CHECK(is_projective(heads) == projective_by_crossing(heads));
        return;
      }
      for (int h = 0; h <= n; ++h) {
        if (h == m) continue;
        heads[m] = h;
        rec(m + 1);
      }
    };
    rec(1);
  }
}

TEST_CASE("evaluate counts heads and labels") {
  Sentence s;
  s.tokens = {{"a", "DT", 2, "det"}, {"b", "NN", 0, "root"}, {"c", "NN", 2, "dep"}};
  ParseTree pred = ParseTree::empty(3);
  pred.heads = {-1, 2, 0, 1};
  pred.labels = {"", "det", "root", "dep"};
  EvalResult r = evaluate({s}, {pred}, false);
  CHECK(r.scored == 3);
  CHECK(r.uas() == doctest::Approx(2.0 / 3.0));

  SUBCASE("gold vs gold is 100%") {
    ParseTree gold = ParseTree::empty(3);
    gold.heads = {-1, 2, 0, 2};
    gold.labels = {"", "det", "root", "dep"};
    for (bool excl : {false, true}) {
      EvalResult g = evaluate({s}, {gold}, excl);
      CHECK(g.uas() == 1.0);
      CHECK(g.las() == 1.0);
    }
  }
}

TEST_CASE("evaluate excludes punctuation by gold POS") {
  Sentence s;
  s.tokens = {{"a", "DT", 2, "det"}, {"b", "NN", 0, "root"}, {".", ".", 2, "punct"}};
  ParseTree pred = ParseTree::empty(3);
  pred.heads = {-1, 2, 0, 1};  // punct head wrong
  pred.labels = {"", "det", "root", "punct"};
  EvalResult r = evaluate({s}, {pred}, true);
  CHECK(r.scored == 2);
  CHECK(r.uas() == 1.0);
}

TEST_CASE("evaluate rejects length mismatch naming the sentence") {
  Sentence s;
  s.tokens = {{"a", "DT", 0, "root"}};
  CHECK_THROWS_WITH_AS(evaluate({s}, {ParseTree::empty(2)}, false),
                       doctest::Contains("sentence 0"), DataError);
}

TEST_CASE("vocabulary counts, reserved symbols and OOV lookup") {
  Sentence s1, s2;
  s1.tokens = {{"the", "DT", 2, "det"}, {"cat", "NN", 0, "root"}};
  s2.tokens = {{"the", "DT", 0, "root"}};
  Vocabulary v = Vocabulary::build({s1, s2});
  CHECK(v.word_count("the") == 2);
  CHECK(v.word_count("cat") == 1);
  CHECK(v.word_id("unseen") == Vocabulary::kUnkWord);
  CHECK(v.word_id("the") != Vocabulary::kUnkWord);
  CHECK(v.num_pos() == 3);  // DT, NN plus the reserved ROOT-POS
  CHECK(v.pos_id("DT") != Vocabulary::kRootPos);
  CHECK(v.num_labels() == 2);
}
