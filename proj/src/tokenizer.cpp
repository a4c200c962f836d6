#include "bitcipher/tokenizer.hpp"

#include "bitcipher/common.hpp"

#include <zlib.h>

#include <array>

namespace bitcipher {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) || (c >= 0x5b && c <= 0x60) ||
         (c >= 0x7b && c <= 0x7e);
}

bool is_blank(std::string_view line) {
  for (unsigned char c : line) {
    if (!is_space(c)) return false;
  }
  return true;
}

}  // namespace

std::string to_string(DocumentBoundary boundary) {
  return boundary == DocumentBoundary::Line ? "line" : "blank-line";
}

DocumentBoundary parse_document_boundary(std::string_view name) {
  if (name == "line") return DocumentBoundary::Line;
  if (name == "blank-line") return DocumentBoundary::BlankLine;
  throw InputError("unknown document boundary '" + std::string(name) +
                   "' (expected line or blank-line)");
}

std::optional<std::size_t> find_invalid_utf8(std::string_view text) {
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > n) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if ((s[i + k] & 0xc0) != 0x80) return i;
      cp = (cp << 6) | (s[i + k] & 0x3f);
    }
    // overlong forms, surrogates, out of range
    static constexpr std::array<std::uint32_t, 5> kMin = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return i;
    i += len;
  }
  return std::nullopt;
}

void tokenize_line(std::string_view line, const TokenizerConfig& config,
                   std::vector<std::string>& out) {
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  };
  for (char ch : line) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      flush();
    } else if (config.split_punctuation && is_punct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      current.push_back(config.lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : ch);
    }
  }
  flush();
}

struct LineReader::Impl {
  gzFile file = nullptr;
};

LineReader::LineReader(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->file = gzopen(path.c_str(), "rb");
  if (impl_->file == nullptr) {
    throw InputError("cannot open '" + path.string() + "'");
  }
  gzbuffer(impl_->file, 1 << 17);
}

LineReader::~LineReader() {
  if (impl_ && impl_->file) gzclose(impl_->file);
}

bool LineReader::next(std::string& line) {
  line.clear();
  std::array<char, 1 << 14> buf{};
  bool got_any = false;
  bool newline = false;
  while (gzgets(impl_->file, buf.data(), static_cast<int>(buf.size())) != nullptr) {
    got_any = true;
    std::string_view chunk(buf.data());
    if (!chunk.empty() && chunk.back() == '\n') {
      chunk.remove_suffix(1);
      line.append(chunk);
      newline = true;
      break;
    }
    line.append(chunk);
  }
  int err = Z_OK;
  const char* msg = gzerror(impl_->file, &err);
  if (err != Z_OK && err != Z_STREAM_END) {
    throw InputError(std::string("read error: ") + msg);
  }
  if (!got_any) return false;
  line_offset_ = next_offset_;
  next_offset_ += line.size() + (newline ? 1 : 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

DocumentStream::DocumentStream(const std::filesystem::path& path, TokenizerConfig config)
    : config_(config), file_(std::make_unique<LineReader>(path)) {}

DocumentStream::DocumentStream(std::string_view text, TokenizerConfig config)
    : config_(config), text_(text) {}

DocumentStream::~DocumentStream() = default;

bool DocumentStream::next_line(std::string& line, std::uint64_t& offset) {
  if (file_) {
    if (!file_->next(line)) return false;
    offset = file_->line_offset();
    return true;
  }
  if (text_pos_ >= text_.size()) return false;
  const std::size_t end = text_.find('\n', text_pos_);
  const std::size_t stop = end == std::string_view::npos ? text_.size() : end;
  offset = text_pos_;
  line.assign(text_.substr(text_pos_, stop - text_pos_));
  text_pos_ = end == std::string_view::npos ? text_.size() : end + 1;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void DocumentStream::append_line(const std::string& line, std::uint64_t offset,
                                 std::vector<std::string>& tokens) {
  if (auto bad = find_invalid_utf8(line)) {
    throw InputError("invalid UTF-8 at byte offset " + std::to_string(offset + *bad));
  }
  tokenize_line(line, config_, tokens);
}

bool DocumentStream::next(std::vector<std::string>& tokens) {
  tokens.clear();
  std::string line;
  std::uint64_t offset = 0;
  if (config_.boundary == DocumentBoundary::Line) {
    while (next_line(line, offset)) {
      append_line(line, offset, tokens);
      if (!tokens.empty()) {
        ++next_id_;
        return true;
      }
    }
    return false;
  }
  bool in_block = false;
  while (next_line(line, offset)) {
    if (is_blank(line)) {
      if (in_block && !tokens.empty()) break;
      in_block = false;
      continue;
    }
    in_block = true;
    append_line(line, offset, tokens);
  }
  if (tokens.empty()) return false;
  ++next_id_;
  return true;
}

std::vector<DocToken> stream_tokens(std::string_view input, const TokenizerConfig& config) {
  std::vector<DocToken> out;
  DocumentStream stream(input, config);
  std::vector<std::string> tokens;
  while (stream.next(tokens)) {
    const std::uint64_t id = stream.documents_read() - 1;
    for (auto& t : tokens) out.push_back({id, std::move(t)});
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> drain(DocumentStream& stream) {
  std::vector<std::vector<std::string>> docs;
  std::vector<std::string> tokens;
  while (stream.next(tokens)) docs.push_back(std::move(tokens));
  return docs;
}

}  // namespace

std::vector<std::vector<std::string>> read_documents(const std::filesystem::path& path,
                                                     const TokenizerConfig& config) {
  DocumentStream stream(path, config);
  return drain(stream);
}

std::vector<std::vector<std::string>> read_documents(std::string_view text,
                                                     const TokenizerConfig& config) {
  DocumentStream stream(text, config);
  return drain(stream);
}

}  // namespace bitcipher
