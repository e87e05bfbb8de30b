#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include "vssc/types.hpp"

namespace vssc {

// Little-endian scalar serialization, fixed regardless of host byte order.
// All binary formats in this project (fvecs, ivecs, index containers) go
// through these helpers.

template <typename T>
T byteswap_integral(T v) {
  static_assert(std::is_integral_v<T>);
  T out;
  auto* src = reinterpret_cast<const unsigned char*>(&v);
  auto* dst = reinterpret_cast<unsigned char*>(&out);
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
  return out;
}

template <typename T>
T to_little_endian(T v) {
  static_assert(std::is_integral_v<T>);
  if constexpr (std::endian::native == std::endian::little) return v;
  return byteswap_integral(v);
}

template <typename T>
T from_little_endian(T v) {
  return to_little_endian(v);
}

// Decodes a little-endian u32/i32/f32 from a raw byte buffer.
inline std::uint32_t decode_u32(const unsigned char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  return from_little_endian(v);
}

inline std::int32_t decode_i32(const unsigned char* p) {
  return static_cast<std::int32_t>(decode_u32(p));
}

inline float decode_f32(const unsigned char* p) {
  const std::uint32_t u = decode_u32(p);
  float f;
  std::memcpy(&f, &u, sizeof f);
  return f;
}

inline void encode_u32(unsigned char* p, std::uint32_t v) {
  v = to_little_endian(v);
  std::memcpy(p, &v, sizeof v);
}

inline void encode_i32(unsigned char* p, std::int32_t v) {
  encode_u32(p, static_cast<std::uint32_t>(v));
}

inline void encode_f32(unsigned char* p, float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, sizeof u);
  encode_u32(p, u);
}

// Stream variants used by the index container format.

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

inline void put_i32(std::ostream& out, std::int32_t v) {
  unsigned char buf[4];
  encode_i32(buf, v);
  out.write(reinterpret_cast<const char*>(buf), 4);
}

inline void put_f32(std::ostream& out, float v) {
  unsigned char buf[4];
  encode_f32(buf, v);
  out.write(reinterpret_cast<const char*>(buf), 4);
}

inline void read_exact(std::istream& in, unsigned char* buf, std::size_t len,
                       const char* what) {
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(len));
  if (static_cast<std::size_t>(in.gcount()) != len)
    throw IoError(std::string("short read while loading ") + what);
}

inline std::uint64_t get_u64(std::istream& in, const char* what) {
  unsigned char buf[8];
  read_exact(in, buf, 8, what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

inline std::int32_t get_i32(std::istream& in, const char* what) {
  unsigned char buf[4];
  read_exact(in, buf, 4, what);
  return decode_i32(buf);
}

inline float get_f32(std::istream& in, const char* what) {
  unsigned char buf[4];
  read_exact(in, buf, 4, what);
  return decode_f32(buf);
}

}  // namespace vssc
