#pragma once

#include <cstdint>
#include <ostream>

#include "parsekit/model_io.hpp"

namespace parsekit {

struct TrainConfig {
  ParserKind kind = ParserKind::Transition;
  EncoderConfig enc;
  FeatureMode mode = FeatureMode::Simple;
  bool labeler = true;
  bool loss_augmented = true;
  bool dyn_oracle = true;
  bool keep_nonproj = false;
  double p_agg = 0.1;
  int epochs = 30;
  std::uint64_t seed = 1;
  std::string ext_path;
  ad::AdamConfig adam;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_uas = 0.0;
  double dev_las = 0.0;
};

struct TrainResult {
  ParserModel model;  // parameters of the best dev-UAS epoch
  std::vector<EpochStats> log;
  int best_epoch = -1;
  double best_uas = 0.0;
};

// Full training protocol: shuffled epochs, per-epoch dev evaluation with
// punctuation excluded, best-dev model selection. With an empty dev set the
// last epoch's model is kept (with a warning on `log_out`).
TrainResult train_model(const std::vector<Sentence>& train,
                        const std::vector<Sentence>& dev, const TrainConfig& config,
                        std::ostream* log_out = nullptr);

std::vector<ParseTree> parse_corpus(const ParserModel& model,
                                    const std::vector<Sentence>& sentences);

// Deterministic head(i) = i-1 baseline used as a sanity floor.
ParseTree attach_to_previous_baseline(const Sentence& sentence);

}  // namespace parsekit
