#pragma once

#include "bitcipher/common.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace bitcipher::binio {

// Little-endian primitives shared by the binary formats.

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  unsigned char bytes[sizeof(T)];
  auto u = static_cast<std::make_unsigned_t<T>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>(u & 0xff);
    if constexpr (sizeof(T) > 1) u >>= 8;
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  static_assert(std::is_integral_v<T>);
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw InputError("unexpected end of binary input");
  }
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = sizeof(T); i-- > 0;) {
    if constexpr (sizeof(T) > 1) u <<= 8;
    u |= bytes[i];
  }
  return static_cast<T>(u);
}

inline void put_f32(std::ostream& out, float v) { put(out, std::bit_cast<std::uint32_t>(v)); }
inline float get_f32(std::istream& in) { return std::bit_cast<float>(get<std::uint32_t>(in)); }

inline void put_magic(std::ostream& out, const char (&magic)[5]) { out.write(magic, 4); }

inline void expect_magic(std::istream& in, const char (&magic)[5], const std::string& what) {
  char buf[4];
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw InputError("not a " + what + " file (bad magic)");
  }
}

}  // namespace bitcipher::binio
