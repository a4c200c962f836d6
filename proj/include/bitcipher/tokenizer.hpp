#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bitcipher {

enum class DocumentBoundary {
  Line,       // every non-empty line is a document
  BlankLine,  // documents are blocks separated by one or more blank lines
};

struct TokenizerConfig {
  bool lowercase = true;
  bool split_punctuation = true;
  DocumentBoundary boundary = DocumentBoundary::Line;
};

std::string to_string(DocumentBoundary boundary);
DocumentBoundary parse_document_boundary(std::string_view name);

struct DocToken {
  std::uint64_t doc = 0;
  std::string token;

  bool operator==(const DocToken&) const = default;
};

/// Returns the byte offset of the first invalid UTF-8 sequence, if any.
std::optional<std::size_t> find_invalid_utf8(std::string_view text);

/// Splits one line into tokens. ASCII whitespace separates tokens; with
/// split_punctuation every ASCII punctuation byte becomes its own token.
/// Lowercasing is ASCII-only, multi-byte sequences pass through untouched.
void tokenize_line(std::string_view line, const TokenizerConfig& config,
                   std::vector<std::string>& out);

/// Line source over a file. Gzip input is detected and decompressed
/// transparently.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  ~LineReader();
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  /// Reads the next line without its terminator. Returns false at end of input.
  bool next(std::string& line);

  /// Byte offset (in decompressed text) of the start of the last line returned.
  std::uint64_t line_offset() const { return line_offset_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::uint64_t line_offset_ = 0;
  std::uint64_t next_offset_ = 0;
};

/// Groups tokenized lines into documents. Documents that contain no tokens
/// are skipped and do not consume a document id.
class DocumentStream {
 public:
  DocumentStream(const std::filesystem::path& path, TokenizerConfig config);
  /// In-memory source; `text` must outlive the stream.
  DocumentStream(std::string_view text, TokenizerConfig config);
  ~DocumentStream();

  bool next(std::vector<std::string>& tokens);
  std::uint64_t documents_read() const { return next_id_; }

 private:
  bool next_line(std::string& line, std::uint64_t& offset);
  void append_line(const std::string& line, std::uint64_t offset,
                   std::vector<std::string>& tokens);

  TokenizerConfig config_;
  std::unique_ptr<LineReader> file_;
  std::string_view text_;
  std::size_t text_pos_ = 0;
  std::uint64_t next_id_ = 0;
};

/// Tokenizes a whole in-memory corpus into (document id, token) pairs.
std::vector<DocToken> stream_tokens(std::string_view input, const TokenizerConfig& config = {});

/// Reads a corpus file into memory as one token list per document.
std::vector<std::vector<std::string>> read_documents(const std::filesystem::path& path,
                                                     const TokenizerConfig& config = {});
std::vector<std::vector<std::string>> read_documents(std::string_view text,
                                                     const TokenizerConfig& config = {});

}  // namespace bitcipher
