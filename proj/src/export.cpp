#include "bitcipher/export.hpp"

#include "bitcipher/binary_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

namespace bitcipher {

namespace {
constexpr char kEmbeddingMagic[5] = "BCEM";
constexpr std::uint32_t kEmbeddingVersion = 1;
}  // namespace

std::string to_string(EmbeddingFormat format) {
  return format == EmbeddingFormat::Text ? "text" : "binary";
}

EmbeddingFormat parse_embedding_format(std::string_view name) {
  if (name == "text") return EmbeddingFormat::Text;
  if (name == "binary") return EmbeddingFormat::Binary;
  throw InputError("unknown embedding format '" + std::string(name) + "' (expected text or binary)");
}

std::string escape_token(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case ' ': out += "\\s"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\v': out += "\\v"; break;
      case '\f': out += "\\f"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_token(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] != '\\') {
      out += field[i];
      continue;
    }
    if (++i == field.size()) throw InputError("dangling escape in token '" + std::string(field) + "'");
    switch (field[i]) {
      case '\\': out += '\\'; break;
      case 's': out += ' '; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 'v': out += '\v'; break;
      case 'f': out += '\f'; break;
      default: throw InputError("unknown escape in token '" + std::string(field) + "'");
    }
  }
  return out;
}

namespace {

void check_shape(const Vocabulary& vocab, const EmbeddingMatrix& e) {
  if (static_cast<std::size_t>(e.rows.rows()) != vocab.size() + 1) {
    throw DimensionError("embedding has " + std::to_string(e.rows.rows()) +
                         " rows, vocabulary needs " + std::to_string(vocab.size() + 1));
  }
}

}  // namespace

void export_embeddings(std::ostream& out, const Vocabulary& vocab, const EmbeddingMatrix& e,
                       EmbeddingFormat format) {
  check_shape(vocab, e);
  const auto n = static_cast<std::size_t>(e.rows.rows());
  const auto d = static_cast<std::size_t>(e.rows.cols());
  if (format == EmbeddingFormat::Text) {
    std::unordered_set<std::string> seen{std::string(kOovToken)};
    std::vector<std::string> fields;
    fields.reserve(n);
    for (const auto& t : vocab.tokens()) {
      auto f = escape_token(t);
      if (!seen.insert(f).second) {
        throw InputError("token '" + t + "' collides with another token after escaping");
      }
      fields.push_back(std::move(f));
    }
    fields.emplace_back(kOovToken);

    out << n << ' ' << d << '\n';
    out << std::setprecision(6);
    for (std::size_t i = 0; i < n; ++i) {
      out << fields[i];
      for (std::size_t c = 0; c < d; ++c) out << ' ' << e.rows(i, c);
      out << '\n';
    }
    return;
  }

  for (const auto& t : vocab.tokens()) {
    if (t == kOovToken) throw InputError("vocabulary token collides with the OOV marker");
  }
  binio::put_magic(out, kEmbeddingMagic);
  binio::put<std::uint32_t>(out, kEmbeddingVersion);
  binio::put<std::uint64_t>(out, n);
  binio::put<std::uint64_t>(out, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) binio::put_f32(out, static_cast<float>(e.rows(i, c)));
  }
  auto put_token = [&](std::string_view t) {
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.size()));
    out.write(t.data(), static_cast<std::streamsize>(t.size()));
  };
  for (const auto& t : vocab.tokens()) put_token(t);
  put_token(kOovToken);
}

void export_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                       const EmbeddingMatrix& e, EmbeddingFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  export_embeddings(out, vocab, e, format);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

namespace {

EmbeddingSet finish(std::vector<std::string> tokens, Matrix rows) {
  EmbeddingSet set;
  if (!tokens.empty() && tokens.back() == kOovToken) {
    tokens.pop_back();
  } else {
    Matrix padded = Matrix::Zero(rows.rows() + 1, rows.cols());
    padded.topRows(rows.rows()) = rows;
    rows = std::move(padded);
  }
  set.vocab = Vocabulary(std::move(tokens));
  set.embedding.rows = std::move(rows);
  return set;
}

EmbeddingSet import_binary(std::istream& in) {
  binio::expect_magic(in, kEmbeddingMagic, "embedding");
  if (auto v = binio::get<std::uint32_t>(in); v != kEmbeddingVersion) {
    throw InputError("unsupported embedding file version " + std::to_string(v));
  }
  const auto n = binio::get<std::uint64_t>(in);
  const auto d = binio::get<std::uint64_t>(in);
  Matrix rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint64_t c = 0; c < d; ++c) rows(i, c) = binio::get_f32(in);
  }
  std::vector<std::string> tokens(n);
  for (auto& t : tokens) {
    t.resize(binio::get<std::uint32_t>(in));
    if (!in.read(t.data(), static_cast<std::streamsize>(t.size()))) {
      throw InputError("truncated embedding token table");
    }
  }
  return finish(std::move(tokens), std::move(rows));
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("embedding line " + std::to_string(line_no) + ": bad number '" +
                     std::string(s) + "'");
  }
  return v;
}

EmbeddingSet import_text(std::istream& in) {
  std::string line;
  std::size_t n = 0;
  std::size_t d = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> n >> d)) {
    throw InputError("embedding text file: missing 'N d' header");
  }
  Matrix rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<std::string> tokens;
  tokens.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw InputError("embedding text file: expected " + std::to_string(n) + " rows, got " +
                       std::to_string(i));
    }
    const std::size_t line_no = i + 2;
    std::string_view rest(line);
    auto next_field = [&]() -> std::string_view {
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      const auto end = rest.find(' ');
      auto field = rest.substr(0, end);
      rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
      return field;
    };
    tokens.push_back(unescape_token(next_field()));
    for (std::size_t c = 0; c < d; ++c) {
      auto f = next_field();
      if (f.empty()) {
        throw InputError("embedding line " + std::to_string(line_no) + ": expected " +
                         std::to_string(d) + " values");
      }
      rows(i, c) = parse_double(f, line_no);
    }
    if (!next_field().empty()) {
      throw InputError("embedding line " + std::to_string(line_no) + ": more than " +
                       std::to_string(d) + " values");
    }
  }
  return finish(std::move(tokens), std::move(rows));
}

}  // namespace

EmbeddingSet import_embeddings(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::string_view(magic, 4) == "BCEM";
  in.clear();
  in.seekg(0);
  return binary ? import_binary(in) : import_text(in);
}

EmbeddingSet import_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return import_embeddings(in);
}

}  // namespace bitcipher
