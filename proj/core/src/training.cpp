#include "parsekit/training.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>

namespace parsekit {

namespace {

std::vector<Sentence> trainable_subset(const std::vector<Sentence>& train,
                                       bool keep_nonproj, std::ostream* log) {
  std::vector<Sentence> out;
  int skipped_gold = 0, skipped_proj = 0;
  for (const Sentence& s : train) {
    if (!s.has_gold()) {
      ++skipped_gold;
      continue;
    }
    if (!keep_nonproj && !is_projective(s.gold_heads())) {
      ++skipped_proj;
      continue;
    }
    out.push_back(s);
  }
  if (log && (skipped_gold || skipped_proj))
    *log << "skipped " << skipped_gold << " sentences without gold heads, " << skipped_proj
         << " non-projective sentences\n";
  if (out.empty()) throw DataError("no usable training sentences");
  return out;
}

}  // namespace

std::vector<ParseTree> parse_corpus(const ParserModel& model,
                                    const std::vector<Sentence>& sentences) {
  std::vector<ParseTree> out;
  out.reserve(sentences.size());
  for (const Sentence& s : sentences) out.push_back(parse_sentence(model, s));
  return out;
}

ParseTree attach_to_previous_baseline(const Sentence& sentence) {
  ParseTree t = ParseTree::empty(sentence.size());
  for (int i = 1; i <= sentence.size(); ++i) {
    t.heads[i] = i - 1;
    t.labels[i] = "";
  }
  return t;
}

TrainResult train_model(const std::vector<Sentence>& train,
                        const std::vector<Sentence>& dev, const TrainConfig& config,
                        std::ostream* log_out) {
  TrainResult result;
  ParserModel& model = result.model;
  model.kind = config.kind;
  model.cfg = config.enc;
  model.mode = config.mode;
  model.labeler = config.labeler;
  model.loss_augmented = config.loss_augmented;
  model.dyn_oracle = config.dyn_oracle;

  model.vocab = Vocabulary::build(train);
  if (model.vocab.num_labels() == 0) model.vocab.add_label("dep");

  if (!config.ext_path.empty()) {
    model.ext = ExternalEmbeddings::load(config.ext_path);
    model.cfg.external_dim = model.ext.dim();
  }

  std::mt19937_64 rng(config.seed);
  if (model.kind == ParserKind::Transition) {
    model.transition_model().init_params(model.store, rng);
  } else {
    model.graph_model().init_params(model.store, rng);
  }
  if (model.cfg.external_dim > 0) {
    Tensor& ext_table = model.store.get("emb/ext");
    for (int r = 0; r < model.ext.num_words(); ++r)
      for (int c = 0; c < model.ext.dim(); ++c)
        ext_table.at(r, c) = model.ext.vectors()[r][c];
  }

  // Transition training keeps the graph parser's per-sentence projectivity
  // exclusion; --keep-nonproj only affects the graph hinge.
  bool keep_nonproj = config.keep_nonproj && model.kind == ParserKind::Graph;
  std::vector<Sentence> usable = trainable_subset(train, keep_nonproj, log_out);

  const ExternalEmbeddings* ext = model.cfg.external_dim > 0 ? &model.ext : nullptr;

  TransitionModel tmodel = model.transition_model();
  GraphModel gmodel = model.graph_model();
  TransitionTrainOptions topts;
  topts.p_agg = config.p_agg;
  topts.dyn_oracle = config.dyn_oracle;
  topts.adam = config.adam;
  GraphTrainOptions gopts;
  gopts.loss_augmented = config.loss_augmented;
  gopts.adam = config.adam;

  std::optional<TransitionTrainer> trainer;
  if (model.kind == ParserKind::Transition)
    trainer.emplace(tmodel, model.store, model.vocab, ext, topts);

  std::map<std::string, Tensor> best_params;
  std::vector<int> order(usable.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (int idx : order) {
      const Sentence& s = usable[idx];
      if (model.kind == ParserKind::Transition)
        epoch_loss += trainer->train_sentence(s, rng);
      else
        epoch_loss += graph_train_sentence(s, gmodel, model.store, model.vocab, ext, gopts,
                                           rng);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss;
    if (!dev.empty()) {
      EvalResult ev = evaluate(dev, parse_corpus(model, dev), /*exclude_punct=*/true);
      stats.dev_uas = ev.uas();
      stats.dev_las = ev.las();
      if (result.best_epoch < 0 || stats.dev_uas > result.best_uas) {
        result.best_epoch = epoch;
        result.best_uas = stats.dev_uas;
        best_params = model.store.snapshot();
      }
    }
    result.log.push_back(stats);
    if (log_out)
      *log_out << "epoch " << epoch << " loss " << stats.train_loss << " dev-uas "
               << stats.dev_uas << " dev-las " << stats.dev_las << "\n";
  }

  if (trainer) trainer->flush();

  if (dev.empty()) {
    if (log_out) *log_out << "warning: empty dev set, keeping the last epoch's model\n";
    result.best_epoch = config.epochs;
  } else if (!best_params.empty()) {
    model.store.restore(best_params);
  }
  return result;
}

}  // namespace parsekit
