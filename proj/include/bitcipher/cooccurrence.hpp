#pragma once

#include "bitcipher/embedding.hpp"
#include "bitcipher/vocabulary.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bitcipher {

enum class ContextMode { Sum, Cat };

std::string to_string(ContextMode mode);
ContextMode parse_context_mode(std::string_view name);

struct ContextConfig {
  unsigned radius = 4;
  ContextMode mode = ContextMode::Sum;
  bool log_weighting = false;
  bool include_center = false;

  /// b for Sum, 2 * radius * b for Cat.
  std::size_t dimension(unsigned bits) const;
  /// Number of offset slots: 1 for Sum, 2 * radius for Cat.
  std::size_t slots() const { return mode == ContextMode::Sum ? 1 : 2u * radius; }
  /// Cat slot of a signed offset, ordered -r..-1, +1..+r.
  std::size_t slot_of(int offset) const;
  void validate() const;
};

/// Documents as matrix row ids (rank - 1; the vocabulary size is the OOV row).
using EncodedCorpus = std::vector<std::vector<std::uint32_t>>;

EncodedCorpus encode_documents(std::span<const std::vector<std::string>> documents,
                               const Vocabulary& vocab);

struct CoocKey {
  std::uint32_t center = 0;
  std::int32_t offset = 0;  // always 0 in Sum mode
  std::uint32_t context = 0;

  auto operator<=>(const CoocKey&) const = default;
};

struct CoocKeyHash {
  std::size_t operator()(const CoocKey& k) const {
    std::uint64_t h = (std::uint64_t{k.center} << 32) ^ k.context;
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.offset)) * 0x9e3779b97f4a7c15ull;
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 32;
    return static_cast<std::size_t>(h);
  }
};

struct CoocRecord {
  CoocKey key;
  std::uint64_t count = 0;

  bool operator==(const CoocRecord&) const = default;
};

/// Sparse windowed co-occurrence counts. Sum mode keys are (center, context);
/// Cat mode keys also carry the signed offset of the context.
class CoocCounts {
 public:
  CoocCounts() = default;
  CoocCounts(ContextMode mode, unsigned radius) : mode_(mode), radius_(radius) {}

  ContextMode mode() const { return mode_; }
  unsigned radius() const { return radius_; }

  void add(std::uint32_t center, std::int32_t offset, std::uint32_t context, std::uint64_t n = 1);
  /// Adds every window pair of one document.
  void add_document(std::span<const std::uint32_t> doc);
  void merge(const CoocCounts& other);

  std::size_t size() const { return counts_.size(); }
  std::uint64_t get(std::uint32_t center, std::int32_t offset, std::uint32_t context) const;
  const std::unordered_map<CoocKey, std::uint64_t, CoocKeyHash>& entries() const { return counts_; }

  /// Records sorted by (center, offset, context).
  std::vector<CoocRecord> sorted() const;

  /// Sum-mode counts obtained by summing Cat counts over offsets.
  CoocCounts marginalize() const;

  bool operator==(const CoocCounts&) const = default;

 private:
  ContextMode mode_ = ContextMode::Sum;
  unsigned radius_ = 1;
  std::unordered_map<CoocKey, std::uint64_t, CoocKeyHash> counts_;
};

CoocCounts accumulate_cooccurrence(const EncodedCorpus& docs, const ContextConfig& config,
                                   unsigned threads = 1);

/// Sorted-run spill files for corpora whose counts exceed memory.
///
/// Layout: "BCRN" magic, u32 version, u8 mode (0 sum, 1 cat), u32 radius,
/// u64 record count, then records of (u32 center, i32 offset, u32 context,
/// u64 count) sorted by key, all little-endian.
void write_run(const std::filesystem::path& path, const CoocCounts& counts);
CoocCounts read_run(const std::filesystem::path& path);

/// Streams a k-way merge of sorted runs, summing equal keys, into `out`.
/// Returns the number of records written.
std::uint64_t merge_runs(std::span<const std::filesystem::path> runs,
                         const std::filesystem::path& out);

/// Visits the records of a run file in key order without loading it.
void for_each_record(const std::filesystem::path& run,
                     const std::function<void(const CoocRecord&)>& fn);

/// Weighted aggregation of noisy context vectors.
///   weight(x) = log(1 + x) with log weighting, else x.
///   Sum: row(c) = sum_ctx weight(count) * nu_ctx  (+ nu_c with include_center)
///   Cat: slot o of row(c) = sum_ctx weight(count at o) * nu_ctx
/// `noisy` has one row per vocabulary token plus the OOV row.
EmbeddingMatrix aggregate(const CoocCounts& counts, const Matrix& noisy,
                          const ContextConfig& config);

/// Fused counting and aggregation. Equal to accumulate_cooccurrence followed
/// by aggregate up to float summation order.
EmbeddingMatrix embed_corpus(const EncodedCorpus& docs, const Matrix& noisy,
                             const ContextConfig& config, unsigned threads = 1);

}  // namespace bitcipher
