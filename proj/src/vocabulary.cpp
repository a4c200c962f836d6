#include "bitcipher/vocabulary.hpp"

#include "bitcipher/common.hpp"

#include <algorithm>
#include <limits>

namespace bitcipher {

Vocabulary::Vocabulary(std::vector<std::string> ranked) : ranked_(std::move(ranked)) {
  index_.reserve(ranked_.size());
  for (std::size_t i = 0; i < ranked_.size(); ++i) {
    if (!index_.emplace(ranked_[i], i + 1).second) {
      throw InputError("duplicate vocabulary token '" + ranked_[i] + "'");
    }
  }
}

std::uint64_t Vocabulary::rank_of(std::string_view token) const {
  auto it = index_.find(token);
  return it == index_.end() ? oov_rank() : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return index_.contains(token); }

std::uint64_t cipher_capacity(unsigned bits) {
  if (bits >= 64) return std::numeric_limits<std::uint64_t>::max();
  return (std::uint64_t{1} << bits) - 1;
}

Vocabulary build_vocabulary(const FrequencyTable& table, unsigned bits,
                            std::optional<std::size_t> max_vocab) {
  if (bits == 0) throw InputError("bit count must be at least 1");
  auto ranked = table.ranked();
  std::uint64_t keep = std::min<std::uint64_t>(ranked.size(), cipher_capacity(bits));
  if (max_vocab) keep = std::min<std::uint64_t>(keep, *max_vocab);
  if (keep == 0) {
    throw InputError("vocabulary would be empty (" + std::to_string(ranked.size()) +
                     " distinct tokens, bits=" + std::to_string(bits) + ")");
  }
  std::vector<std::string> tokens;
  tokens.reserve(keep);
  for (std::uint64_t i = 0; i < keep; ++i) tokens.push_back(std::move(ranked[i].first));
  Vocabulary vocab(std::move(tokens));
  vocab.set_truncated(ranked.size() - keep);
  return vocab;
}

}  // namespace bitcipher
