#pragma once

#include "bitcipher/common.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace bitcipher {

/// Dense rows of packed bits, 64 columns per word, bit c of a row lives in
/// word c / 64 at position c % 64.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, unsigned bits);

  std::size_t rows() const { return rows_; }
  unsigned bits() const { return bits_; }
  std::size_t words_per_row() const { return words_; }

  bool get(std::size_t row, unsigned col) const {
    return (data_[row * words_ + col / 64] >> (col % 64)) & 1u;
  }
  void set(std::size_t row, unsigned col) { data_[row * words_ + col / 64] |= std::uint64_t{1} << (col % 64); }

  std::span<const std::uint64_t> row(std::size_t r) const {
    return {data_.data() + r * words_, words_};
  }
  std::span<std::uint64_t> row(std::size_t r) { return {data_.data() + r * words_, words_}; }

  unsigned popcount(std::size_t r) const;

  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  unsigned bits_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> data_;
};

/// Raw bit-vectors (decipher matrix) and their L1-normalized rows
/// (encipher matrix) for the N most frequent tokens.
struct CipherPair {
  BitMatrix raw;   // N x b, entries in {0, 1}
  Matrix encoded;  // N x b, row n = raw row n / popcount

  std::size_t size() const { return raw.rows(); }
  unsigned bits() const { return raw.bits(); }
};

/// Builds the b-bit cipher for N tokens.
///
/// Rows are produced level by level in Hamming weight. Level k is generated
/// by flipping one basis position of each level k-1 vector, scanning basis
/// positions in the outer loop and level k-1 vectors in the inner loop and
/// keeping the first unseen weight-k result. A finished level is reversed
/// before it seeds the next one, and the basis order is reversed once after
/// level 1.
///
/// Throws CapacityError when N > 2^b - 1 and InputError when N or b is zero.
CipherPair build_cipher(std::size_t n, unsigned bits);

/// L1-normalizes each bit row: v = eta / |eta|_1.
Matrix encode_rows(const BitMatrix& raw);

enum class NoiseMode { Unigram, DocumentFrequency };

std::string to_string(NoiseMode mode);
NoiseMode parse_noise_mode(std::string_view name);

/// Binary persistence: "BCIP" magic, u32 version, u64 N, u32 b, u8 noise
/// mode, then N rows of ceil(b/8) packed bytes (bit c in byte c/8, LSB
/// first), then N*b little-endian float32 in row-major order.
void save_cipher(std::ostream& out, const CipherPair& pair, NoiseMode mode);
CipherPair load_cipher(std::istream& in, NoiseMode* mode = nullptr);

/// One line per rank: `rank<TAB>bitstring<TAB>v_1 ... v_b`.
void dump_cipher_text(std::ostream& out, const CipherPair& pair);

}  // namespace bitcipher
