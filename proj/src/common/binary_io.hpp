#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

namespace pinnlab::io {

inline void write_f64_le(std::ostream& os, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xffu);
    os.write(reinterpret_cast<const char*>(buf), 8);
  }
}

/// Reads until EOF; returns false if the payload length is not a multiple of 8.
inline bool read_f64_le(std::istream& is, std::vector<double>& out) {
  out.clear();
  unsigned char buf[8];
  while (true) {
    is.read(reinterpret_cast<char*>(buf), 8);
    const auto got = is.gcount();
    if (got == 0) return true;
    if (got != 8) return false;
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    out.push_back(std::bit_cast<double>(bits));
  }
}

}  // namespace pinnlab::io
