#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bitcipher {

struct TaggedToken {
  std::string token;
  std::string label;

  bool operator==(const TaggedToken&) const = default;
};

/// Token sequences with per-token labels. Labels are interned in order of
/// first appearance.
struct LabeledTokenDataset {
  std::vector<std::vector<TaggedToken>> sequences;
  std::vector<std::string> label_set;
  std::string split;

  std::size_t token_count() const;
  std::optional<std::size_t> label_index(const std::string& label) const;
  /// Adds a sequence, interning any new labels.
  void add_sequence(std::vector<TaggedToken> sequence);

  bool operator==(const LabeledTokenDataset&) const = default;
};

/// Reads CoNLL column layout: whitespace-separated columns, blank lines end a
/// sequence, `-DOCSTART-` lines are skipped. Every non-blank row must have the
/// same number of columns as the first one.
LabeledTokenDataset read_conll(std::istream& in, std::size_t token_column = 0,
                               std::size_t label_column = 1, std::string split = {});
LabeledTokenDataset load_conll(const std::filesystem::path& path, std::size_t token_column = 0,
                               std::size_t label_column = 1, std::string split = {});

/// Two columns, `token label`, one blank line after each sequence.
void write_conll(std::ostream& out, const LabeledTokenDataset& data);

}  // namespace bitcipher
