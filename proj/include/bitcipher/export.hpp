#pragma once

#include "bitcipher/embedding.hpp"
#include "bitcipher/vocabulary.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace bitcipher {

inline constexpr std::string_view kOovToken = "<oov>";

enum class EmbeddingFormat { Text, Binary };

std::string to_string(EmbeddingFormat format);
EmbeddingFormat parse_embedding_format(std::string_view name);

/// Vocabulary plus its embedding rows (vocabulary size + 1, OOV last).
struct EmbeddingSet {
  Vocabulary vocab;
  EmbeddingMatrix embedding;

  std::size_t row_of(std::string_view token) const { return vocab.row_of(token); }
};

/// Escapes backslash and ASCII whitespace so a token is one text field:
/// `\\`, `\s`, `\t`, `\n`, `\r`.
std::string escape_token(std::string_view token);
std::string unescape_token(std::string_view field);

/// Text: `N d` header, then `token v1 ... vd` per row with 6 significant
/// digits; the OOV row is written as `<oov>`.
/// Binary: "BCEM" magic, u32 version, u64 N, u64 d, N*d little-endian
/// float32 row-major, then N tokens as u32 byte length + bytes.
void export_embeddings(std::ostream& out, const Vocabulary& vocab, const EmbeddingMatrix& e,
                       EmbeddingFormat format);
void export_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                       const EmbeddingMatrix& e, EmbeddingFormat format);

/// Reads either format (detected from the magic bytes). A text file without
/// an `<oov>` row gets a zero OOV row appended.
EmbeddingSet import_embeddings(std::istream& in);
EmbeddingSet import_embeddings(const std::filesystem::path& path);

}  // namespace bitcipher
