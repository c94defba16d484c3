#pragma once

// Little-endian primitive I/O shared by the binary block formats.

#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string_view>

#include "cgolab/errors.hpp"

namespace cgolab::io {

template <class T>
T byteswap_if_needed(T value) {
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

template <class T>
void write_le(std::ostream& out, T value) {
  value = byteswap_if_needed(value);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
  if (!out) throw IoError("write failed");
}

template <class T>
T read_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("unexpected end of binary block");
  return byteswap_if_needed(value);
}

inline void write_complex(std::ostream& out, std::complex<double> z) {
  write_le<double>(out, z.real());
  write_le<double>(out, z.imag());
}

inline std::complex<double> read_complex(std::istream& in) {
  const double re = read_le<double>(in);
  const double im = read_le<double>(in);
  return {re, im};
}

inline void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!out) throw IoError("write failed");
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  char buffer[16] = {};
  in.read(buffer, static_cast<std::streamsize>(magic.size()));
  if (!in || std::string_view(buffer, magic.size()) != magic) {
    throw IoError("bad magic: expected " + std::string(magic));
  }
}

}  // namespace cgolab::io
