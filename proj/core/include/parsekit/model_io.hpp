#pragma once

#include <cstdint>
#include <string>

#include "parsekit/graph_parser.hpp"
#include "parsekit/transition.hpp"

namespace parsekit {

enum class ParserKind { Transition, Graph };

// Everything a trained parser needs: hyperparameters, vocabulary, flags and
// the parameter tensors. Serialized as a text header plus a binary payload of
// 64-bit little-endian values; save -> load -> save is byte-identical.
struct ParserModel {
  ParserKind kind = ParserKind::Transition;
  EncoderConfig cfg;
  FeatureMode mode = FeatureMode::Simple;
  bool labeler = true;
  bool loss_augmented = true;
  bool dyn_oracle = true;
  Vocabulary vocab;
  ExternalEmbeddings ext;  // word list only needs to survive serialization
  ad::ParameterStore store;

  TransitionModel transition_model() const {
    return TransitionModel(cfg, vocab.num_words(), vocab.num_pos(), vocab.num_labels(),
                           ext.num_words(), mode);
  }
  GraphModel graph_model() const {
    return GraphModel(cfg, vocab.num_words(), vocab.num_pos(), vocab.num_labels(),
                      ext.num_words(), labeler);
  }

  // Tensor names and shapes implied by the header fields, in payload order.
  std::vector<std::pair<std::string, std::pair<int, int>>> expected_tensors() const;
};

void save_model(const std::string& path, const ParserModel& model);
ParserModel load_model(const std::string& path);

ParseTree parse_sentence(const ParserModel& model, const Sentence& sentence);

}  // namespace parsekit
