#pragma once

#include "bitcipher/tokenizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bitcipher {

struct TokenCounts {
  std::uint64_t frequency = 0;       // occurrences in the corpus
  std::uint64_t document_count = 0;  // distinct documents containing the token

  bool operator==(const TokenCounts&) const = default;
};

/// Unigram and document frequencies plus corpus totals.
///
/// Tables built over disjoint document shards can be merged; merging is exact
/// and order-independent, so sharded and single-pass counting agree.
class FrequencyTable {
 public:
  /// Counts one document's tokens and bumps the document total.
  void add_document(std::span<const std::string> tokens);

  void merge(const FrequencyTable& other);

  const std::unordered_map<std::string, TokenCounts>& counts() const { return counts_; }
  std::optional<TokenCounts> find(const std::string& token) const;
  std::uint64_t total_tokens() const { return total_tokens_; }
  std::uint64_t total_documents() const { return total_documents_; }
  std::size_t distinct() const { return counts_.size(); }

  /// Entries in rank order: descending frequency, ties by ascending token bytes.
  std::vector<std::pair<std::string, TokenCounts>> ranked() const;

  /// Tab-separated form: `#M=<int> D=<int>` header, then `token\tf\td` in rank order.
  void save(std::ostream& out) const;
  static FrequencyTable load(std::istream& in);

  /// Direct construction, used when loading and in tests.
  void set(const std::string& token, TokenCounts counts);
  void set_totals(std::uint64_t tokens, std::uint64_t documents);

  bool operator==(const FrequencyTable&) const = default;

 private:
  std::unordered_map<std::string, TokenCounts> counts_;
  std::uint64_t total_tokens_ = 0;
  std::uint64_t total_documents_ = 0;
};

/// Counts a (document id, token) stream. Document ids need not be contiguous,
/// but all tokens of one document must be adjacent.
FrequencyTable count_frequencies(std::span<const DocToken> stream);

/// Counts pre-split documents on `threads` workers, one contiguous shard each.
FrequencyTable count_frequencies(std::span<const std::vector<std::string>> documents,
                                 unsigned threads = 1);

}  // namespace bitcipher
