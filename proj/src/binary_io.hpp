// Copyright 2026 The emorec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Little-endian helpers shared by the feature cache and checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "emorec/error.hpp"

namespace emorec::io {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f32(std::ostream& os, float f) {
  write_u32(os, std::bit_cast<std::uint32_t>(f));
}

// Returns false on clean end of stream before any byte was read.
inline bool read_exact(std::istream& is, void* dst, std::size_t n,
                       const std::string& what) {
  is.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(is.gcount());
  if (got == n) return true;
  if (got == 0 && is.eof()) return false;
  throw CorruptFileError("truncated " + what);
}

inline std::uint32_t read_u32(std::istream& is, const std::string& what) {
  unsigned char b[4];
  if (!read_exact(is, b, 4, what)) throw CorruptFileError("truncated " + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t read_u64(std::istream& is, const std::string& what) {
  const std::uint64_t lo = read_u32(is, what);
  const std::uint64_t hi = read_u32(is, what);
  return lo | (hi << 32);
}

inline float read_f32(std::istream& is, const std::string& what) {
  return std::bit_cast<float>(read_u32(is, what));
}

}  // namespace emorec::io
