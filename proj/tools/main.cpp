#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "parsekit/model_io.hpp"
#include "parsekit/training.hpp"

using namespace parsekit;

namespace {

int cmd_train(const std::string& parser_kind, const std::string& train_path,
              const std::string& dev_path, const std::string& features,
              const std::string& ext_path, const std::string& model_path, int epochs,
              std::uint64_t seed, double p_agg, bool no_pos, bool no_labeler,
              bool no_loss_aug, bool no_dyn_oracle, bool keep_nonproj) {
  TrainConfig config;
  if (parser_kind == "transition")
    config.kind = ParserKind::Transition;
  else if (parser_kind == "graph")
    config.kind = ParserKind::Graph;
  else {
    std::cerr << "error: --parser must be 'transition' or 'graph'\n";
    return 1;
  }

  if (!features.empty()) {
    if (config.kind != ParserKind::Transition) {
      std::cerr << "error: --features applies only to --parser transition\n";
      return 1;
    }
    if (features == "simple")
      config.mode = FeatureMode::Simple;
    else if (features == "extended")
      config.mode = FeatureMode::Extended;
    else {
      std::cerr << "error: --features must be 'simple' or 'extended'\n";
      return 1;
    }
  }
  if ((no_labeler || no_loss_aug || keep_nonproj) && config.kind != ParserKind::Graph) {
    std::cerr << "error: --no-labeler/--no-loss-aug/--keep-nonproj apply only to "
                 "--parser graph\n";
    return 1;
  }
  if (no_dyn_oracle && config.kind != ParserKind::Transition) {
    std::cerr << "error: --no-dyn-oracle applies only to --parser transition\n";
    return 1;
  }

  config.epochs = epochs;
  config.seed = seed;
  config.p_agg = p_agg;
  config.enc.use_pos = !no_pos;
  config.labeler = !no_labeler;
  config.loss_augmented = !no_loss_aug;
  config.dyn_oracle = !no_dyn_oracle;
  config.keep_nonproj = keep_nonproj;
  config.ext_path = ext_path;

  std::vector<Sentence> train = read_conll(train_path);
  std::vector<Sentence> dev;
  if (!dev_path.empty()) dev = read_conll(dev_path);

  TrainResult result = train_model(train, dev, config, &std::cout);
  if (result.best_epoch > 0 && !dev.empty())
    std::cout << "best epoch " << result.best_epoch << " dev-uas " << result.best_uas
              << "\n";
  save_model(model_path, result.model);
  std::cout << "model written to " << model_path << "\n";
  return 0;
}

int cmd_parse(const std::string& model_path, const std::string& input_path,
              const std::string& output_path) {
  ParserModel model = load_model(model_path);
  std::vector<Sentence> sentences = read_conll(input_path, nullptr, false);
  std::vector<ParseTree> trees = parse_corpus(model, sentences);
  write_conll(output_path, sentences, &trees);
  return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& pred_path,
             bool include_punct) {
  std::vector<Sentence> gold = read_conll(gold_path, nullptr, false);
  std::vector<Sentence> pred = read_conll(pred_path, nullptr, false);
  std::vector<ParseTree> trees;
  for (const Sentence& s : pred) {
    ParseTree t = ParseTree::empty(s.size());
    for (int i = 1; i <= s.size(); ++i) {
      t.heads[i] = s.tok(i).gold_head;
      t.labels[i] = s.tok(i).gold_label;
    }
    trees.push_back(std::move(t));
  }
  EvalResult r = evaluate(gold, trees, !include_punct);
  std::cout << std::fixed << std::setprecision(2) << "UAS " << 100.0 * r.uas() << "\n"
            << "LAS " << 100.0 * r.las() << "\n"
            << "tokens " << r.scored << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BiLSTM dependency parser: transition-based and graph-based"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a parser on a CoNLL treebank");
  std::string parser_kind, train_path, dev_path, features, ext_path;
  std::string model_path = "model.pk";
  int epochs = 30;
  std::uint64_t seed = 1;
  double p_agg = 0.1;
  bool no_pos = false, no_labeler = false, no_loss_aug = false, no_dyn_oracle = false;
  bool keep_nonproj = false;
  train->add_option("--parser", parser_kind, "transition|graph")->required();
  train->add_option("--train", train_path, "training treebank (CoNLL)")->required();
  train->add_option("--dev", dev_path, "development treebank for model selection");
  train->add_option("--features", features, "simple|extended (transition parser only)");
  train->add_option("--ext-emb", ext_path, "external word embeddings (text)");
  train->add_option("--model", model_path, "output model file");
  train->add_option("--epochs", epochs, "training epochs");
  train->add_option("--seed", seed, "random seed");
  train->add_option("--pagg", p_agg, "aggressive-exploration probability");
  train->add_flag("--no-pos", no_pos, "drop POS embeddings from the input");
  train->add_flag("--no-labeler", no_labeler, "disable the graph parser's arc labeler");
  train->add_flag("--no-loss-aug", no_loss_aug, "disable loss-augmented inference");
  train->add_flag("--no-dyn-oracle", no_dyn_oracle, "static-oracle training");
  train->add_flag("--keep-nonproj", keep_nonproj,
                  "train the graph hinge on non-projective sentences too");

  // parse
  auto* parse = app.add_subcommand("parse", "parse a CoNLL file with a trained model");
  std::string p_model, p_input, p_output;
  parse->add_option("--model", p_model, "model file")->required();
  parse->add_option("--input", p_input, "input CoNLL file")->required();
  parse->add_option("--output", p_output, "output CoNLL file")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "compare predicted against gold CoNLL");
  std::string e_gold, e_pred;
  bool include_punct = false;
  eval->add_option("--gold", e_gold, "gold CoNLL file")->required();
  eval->add_option("--pred", e_pred, "predicted CoNLL file")->required();
  eval->add_flag("--include-punct", include_punct, "score punctuation tokens too");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(train))
      return cmd_train(parser_kind, train_path, dev_path, features, ext_path, model_path,
                       epochs, seed, p_agg, no_pos, no_labeler, no_loss_aug, no_dyn_oracle,
                       keep_nonproj);
    if (app.got_subcommand(parse)) return cmd_parse(p_model, p_input, p_output);
    if (app.got_subcommand(eval)) return cmd_eval(e_gold, e_pred, include_punct);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
