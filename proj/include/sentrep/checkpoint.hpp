#pragma once

#include <string>

#include "sentrep/model.hpp"
#include "sentrep/train.hpp"

namespace sentrep {

struct Checkpoint {
  Model<float> model;
  TrainConfig train;
  Vocab vocab;
};

// Canonical key=value text stored in the checkpoint header. Identical
// configurations serialize to identical bytes.
std::string checkpoint_config_text(const Model<float>& model,
                                   const TrainConfig& train);

// Binary container: magic, version, config text, vocab TSV, then each
// parameter tensor by name as float32. Written to a temp file and renamed so
// a crash never leaves a half-written checkpoint behind.
void save_checkpoint(Model<float>& model, const TrainConfig& train,
                     const Vocab& vocab, const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace sentrep
