#pragma once

#include "bitcipher/common.hpp"

#include <string>
#include <vector>

namespace bitcipher {

/// Where an embedding matrix came from and what has been done to it.
struct EmbeddingMeta {
  unsigned bits = 0;
  unsigned radius = 0;
  std::string mode;        // "sum" | "cat" | "cipher"
  bool log_weighting = false;
  bool include_center = false;
  std::string noise_mode;  // "unigram" | "df"
  std::string corpus_digest;
  std::vector<std::string> postprocessing;

  bool operator==(const EmbeddingMeta&) const = default;
};

/// (N + 1) x d rows, the last row belongs to out-of-vocabulary tokens.
struct EmbeddingMatrix {
  Matrix rows;
  EmbeddingMeta meta;

  Eigen::Index dimension() const { return rows.cols(); }
};

}  // namespace bitcipher
