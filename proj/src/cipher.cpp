#include "bitcipher/cipher.hpp"

#include "bitcipher/binary_io.hpp"
#include "bitcipher/vocabulary.hpp"

#include <algorithm>
#include <bit>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <unordered_set>

namespace bitcipher {

BitMatrix::BitMatrix(std::size_t rows, unsigned bits)
    : rows_(rows), bits_(bits), words_((bits + 63) / 64), data_(rows * words_, 0) {}

unsigned BitMatrix::popcount(std::size_t r) const {
  unsigned n = 0;
  for (auto w : row(r)) n += std::popcount(w);
  return n;
}

namespace {

// Row representations for the enumeration. Rows of up to 64 bits are a
// single word; wider rows fall back to a word vector.
struct WideRow {
  std::vector<std::uint64_t> words;
  bool operator==(const WideRow&) const = default;
};

struct RowHash {
  std::size_t operator()(std::uint64_t w) const { return std::hash<std::uint64_t>{}(w); }
  std::size_t operator()(const WideRow& r) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto w : r.words) {
      h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

void flip(std::uint64_t& row, unsigned col) { row ^= std::uint64_t{1} << col; }
void flip(WideRow& row, unsigned col) { row.words[col / 64] ^= std::uint64_t{1} << (col % 64); }

unsigned weight(std::uint64_t row) { return std::popcount(row); }
unsigned weight(const WideRow& row) {
  unsigned n = 0;
  for (auto w : row.words) n += std::popcount(w);
  return n;
}

void store(BitMatrix& m, std::size_t r, std::uint64_t row) { m.row(r)[0] = row; }
void store(BitMatrix& m, std::size_t r, const WideRow& row) {
  std::copy(row.words.begin(), row.words.end(), m.row(r).begin());
}

template <typename Row>
Row zero_row(unsigned bits) {
  if constexpr (std::is_same_v<Row, std::uint64_t>) {
    return 0;
  } else {
    return WideRow{std::vector<std::uint64_t>((bits + 63) / 64, 0)};
  }
}

template <typename Row>
void enumerate(std::size_t n_rows, unsigned bits, BitMatrix& out) {
  // levels[k] collects weight-k vectors in assignment order
  std::vector<std::vector<Row>> levels(bits + 1);
  levels[0].push_back(zero_row<Row>(bits));
  std::unordered_set<Row, RowHash> assigned_at_level;

  std::vector<unsigned> basis(bits);
  std::iota(basis.begin(), basis.end(), 0u);

  std::size_t i = 0;  // position in basis
  std::size_t j = 0;  // position in levels[k - 1]
  unsigned k = 1;
  for (std::size_t n = 0; n < n_rows; ++n) {
    bool found = false;
    while (!found) {
      Row u = levels[k - 1][j];
      flip(u, basis[i]);
      if (weight(u) == k && assigned_at_level.insert(u).second) {
        store(out, n, u);
        levels[k].push_back(std::move(u));
        found = true;
      }
      if (++j == levels[k - 1].size()) {
        j = 0;
        if (++i == bits) {
          if (k == 1) std::reverse(basis.begin(), basis.end());
          i = 0;
          std::reverse(levels[k].begin(), levels[k].end());
          levels[k - 1] = {};
          assigned_at_level.clear();
          ++k;
        }
      }
    }
  }
}

}  // namespace

CipherPair build_cipher(std::size_t n, unsigned bits) {
  if (bits == 0) throw InputError("bit count must be at least 1");
  if (n == 0) throw InputError("cipher needs at least one row");
  if (n > cipher_capacity(bits)) {
    throw CapacityError("cannot build " + std::to_string(n) + " cipher rows with " +
                        std::to_string(bits) + " bits (capacity " +
                        std::to_string(cipher_capacity(bits)) + ")");
  }
  CipherPair pair;
  pair.raw = BitMatrix(n, bits);
  if (bits <= 64) {
    enumerate<std::uint64_t>(n, bits, pair.raw);
  } else {
    enumerate<WideRow>(n, bits, pair.raw);
  }

  pair.encoded = encode_rows(pair.raw);
  return pair;
}

Matrix encode_rows(const BitMatrix& raw) {
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(raw.rows()), raw.bits());
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    const unsigned w = raw.popcount(r);
    if (w == 0) throw InputError("cipher row " + std::to_string(r + 1) + " is all zero");
    const double share = 1.0 / w;
    for (unsigned c = 0; c < raw.bits(); ++c) {
      if (raw.get(r, c)) v(r, c) = share;
    }
  }
  return v;
}

std::string to_string(NoiseMode mode) {
  return mode == NoiseMode::Unigram ? "unigram" : "df";
}

NoiseMode parse_noise_mode(std::string_view name) {
  if (name == "unigram") return NoiseMode::Unigram;
  if (name == "df") return NoiseMode::DocumentFrequency;
  throw InputError("unknown noise mode '" + std::string(name) + "' (expected unigram or df)");
}

namespace {
constexpr char kCipherMagic[5] = "BCIP";
constexpr std::uint32_t kCipherVersion = 1;
}  // namespace

void save_cipher(std::ostream& out, const CipherPair& pair, NoiseMode mode) {
  binio::put_magic(out, kCipherMagic);
  binio::put<std::uint32_t>(out, kCipherVersion);
  binio::put<std::uint64_t>(out, pair.size());
  binio::put<std::uint32_t>(out, pair.bits());
  binio::put<std::uint8_t>(out, mode == NoiseMode::Unigram ? 0 : 1);
  const std::size_t row_bytes = (pair.bits() + 7) / 8;
  std::vector<char> packed(row_bytes);
  for (std::size_t r = 0; r < pair.size(); ++r) {
    std::fill(packed.begin(), packed.end(), 0);
    for (unsigned c = 0; c < pair.bits(); ++c) {
      if (pair.raw.get(r, c)) packed[c / 8] = static_cast<char>(packed[c / 8] | (1 << (c % 8)));
    }
    out.write(packed.data(), static_cast<std::streamsize>(row_bytes));
  }
  for (std::size_t r = 0; r < pair.size(); ++r) {
    for (unsigned c = 0; c < pair.bits(); ++c) {
      binio::put_f32(out, static_cast<float>(pair.encoded(r, c)));
    }
  }
}

CipherPair load_cipher(std::istream& in, NoiseMode* mode) {
  binio::expect_magic(in, kCipherMagic, "cipher");
  if (auto v = binio::get<std::uint32_t>(in); v != kCipherVersion) {
    throw InputError("unsupported cipher file version " + std::to_string(v));
  }
  const auto n = binio::get<std::uint64_t>(in);
  const auto bits = binio::get<std::uint32_t>(in);
  const auto m = binio::get<std::uint8_t>(in);
  if (mode) *mode = m == 0 ? NoiseMode::Unigram : NoiseMode::DocumentFrequency;

  CipherPair pair;
  pair.raw = BitMatrix(n, bits);
  const std::size_t row_bytes = (bits + 7) / 8;
  std::vector<char> packed(row_bytes);
  for (std::size_t r = 0; r < n; ++r) {
    if (!in.read(packed.data(), static_cast<std::streamsize>(row_bytes))) {
      throw InputError("truncated cipher file");
    }
    for (unsigned c = 0; c < bits; ++c) {
      if ((static_cast<unsigned char>(packed[c / 8]) >> (c % 8)) & 1u) pair.raw.set(r, c);
    }
  }
  // The float block is for external readers; rebuild V from U in double so a
  // loaded cipher is identical to a freshly built one.
  pair.encoded = encode_rows(pair.raw);
  for (std::size_t r = 0; r < n; ++r) {
    for (unsigned c = 0; c < bits; ++c) {
      const float stored = binio::get_f32(in);
      if (stored != static_cast<float>(pair.encoded(r, c))) {
        throw InputError("cipher file: encoded row " + std::to_string(r + 1) +
                         " disagrees with its bit pattern");
      }
    }
  }
  return pair;
}

void dump_cipher_text(std::ostream& out, const CipherPair& pair) {
  out << std::setprecision(6);
  for (std::size_t r = 0; r < pair.size(); ++r) {
    out << (r + 1) << '\t';
    for (unsigned c = 0; c < pair.bits(); ++c) out << (pair.raw.get(r, c) ? '1' : '0');
    out << '\t';
    for (unsigned c = 0; c < pair.bits(); ++c) {
      if (c) out << ' ';
      out << pair.encoded(r, c);
    }
    out << '\n';
  }
}

}  // namespace bitcipher
