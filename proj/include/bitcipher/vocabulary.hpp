#pragma once

#include "bitcipher/frequency.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bitcipher {

/// Frequency-ranked token list. Rank 1 is the most frequent token; ranks are
/// 1..size() and every other token maps to oov_rank() == size() + 1.
///
/// Matrix rows are rank - 1, so row size() is always the OOV row.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> ranked);

  std::size_t size() const { return ranked_.size(); }
  std::uint64_t oov_rank() const { return ranked_.size() + 1; }
  std::size_t oov_row() const { return ranked_.size(); }

  std::uint64_t rank_of(std::string_view token) const;
  std::size_t row_of(std::string_view token) const { return rank_of(token) - 1; }
  bool contains(std::string_view token) const;

  /// Token for rank 1..size().
  const std::string& token_at(std::uint64_t rank) const { return ranked_.at(rank - 1); }
  const std::vector<std::string>& tokens() const { return ranked_; }

  /// Distinct tokens dropped by the capacity / max_vocab cap at build time.
  std::size_t truncated() const { return truncated_; }
  void set_truncated(std::size_t n) { truncated_ = n; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> ranked_;
  std::unordered_map<std::string, std::uint64_t, Hash, std::equal_to<>> index_;
  std::size_t truncated_ = 0;
};

/// Number of distinct nonzero b-bit vectors, 2^b - 1, saturating for b >= 64.
std::uint64_t cipher_capacity(unsigned bits);

/// Ranks the table (descending f, ties by token bytes) and keeps the first
/// min(distinct, max_vocab, 2^bits - 1) tokens.
Vocabulary build_vocabulary(const FrequencyTable& table, unsigned bits,
                            std::optional<std::size_t> max_vocab = std::nullopt);

}  // namespace bitcipher
