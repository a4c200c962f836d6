#pragma once

#include "bitcipher/cipher.hpp"
#include "bitcipher/cooccurrence.hpp"
#include "bitcipher/noise.hpp"
#include "bitcipher/postprocess.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bitcipher {

struct EmbedOptions {
  unsigned bits = 25;
  ContextConfig context;
  NoiseMode noise = NoiseMode::Unigram;
  std::optional<std::size_t> max_vocab;
  bool postprocess = false;
  PostprocOptions postproc;
  unsigned threads = 1;
};

struct EmbedResult {
  Vocabulary vocab;
  CipherPair cipher;
  NoiseModel noise;
  Matrix noisy;
  EmbeddingMatrix embedding;
  std::optional<PostprocReport> postproc_report;
};

/// Vocabulary, cipher, noise model, co-occurrence aggregation and optional
/// post-processing over pre-tokenized documents.
EmbedResult run_embed(const std::vector<std::vector<std::string>>& documents,
                      const FrequencyTable& table, const EmbedOptions& options);

}  // namespace bitcipher
