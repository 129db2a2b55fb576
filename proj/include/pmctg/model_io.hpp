#pragma once

#include <filesystem>

#include "pmctg/encoder.hpp"
#include "pmctg/language_model.hpp"
#include "pmctg/text.hpp"

namespace pmctg {

// Builtin backends trained from one corpus. A model directory holds
// vocab.tsv, forward.knlm, backward.knlm and encoder.ppmi.
struct ModelBundle {
  Vocabulary vocab;
  KneserNeyLM forward;
  KneserNeyLM backward;
  PpmiEncoder encoder;
};

ModelBundle train_bundle(const Corpus& corpus, int order = 3, double discount = 0.75,
                         PpmiEncoder::Options encoder_options = {});

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir);
ModelBundle load_bundle(const std::filesystem::path& dir);

Vocabulary load_vocabulary(const std::filesystem::path& path);
KneserNeyLM load_kn(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace pmctg
