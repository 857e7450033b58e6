// include/phmm/binio.h

// Copyright 2026  PHMM Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef PHMM_BINIO_H_
#define PHMM_BINIO_H_

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include "phmm/common.h"

namespace phmm {

// Little-endian binary primitives.  Bytes are assembled explicitly so the
// on-disk formats are identical on any host.

inline void WriteU32(std::ostream &os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char *>(b), 4);
}

inline std::uint32_t ReadU32(std::istream &is, const std::string &what) {
  unsigned char b[4];
  is.read(reinterpret_cast<char *>(b), 4);
  RequireIo(is.good(), "truncated file while reading " + what);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void WriteU64(std::ostream &os, std::uint64_t v) {
  WriteU32(os, static_cast<std::uint32_t>(v & 0xffffffffULL));
  WriteU32(os, static_cast<std::uint32_t>(v >> 32));
}

inline std::uint64_t ReadU64(std::istream &is, const std::string &what) {
  std::uint64_t lo = ReadU32(is, what);
  std::uint64_t hi = ReadU32(is, what);
  return lo | (hi << 32);
}

inline void WriteF32(std::ostream &os, float v) {
  WriteU32(os, std::bit_cast<std::uint32_t>(v));
}

inline float ReadF32(std::istream &is, const std::string &what) {
  return std::bit_cast<float>(ReadU32(is, what));
}

inline void WriteF64(std::ostream &os, double v) {
  WriteU64(os, std::bit_cast<std::uint64_t>(v));
}

inline double ReadF64(std::istream &is, const std::string &what) {
  return std::bit_cast<double>(ReadU64(is, what));
}

inline void WriteMagic(std::ostream &os, const char magic[5]) {
  os.write(magic, 4);
}

inline void ExpectMagic(std::istream &is, const char magic[5],
                        const std::string &path) {
  char got[4];
  is.read(got, 4);
  RequireIo(is.good() && got[0] == magic[0] && got[1] == magic[1] &&
                got[2] == magic[2] && got[3] == magic[3],
            "malformed header in " + path + ": expected magic \"" +
                std::string(magic, 4) + "\"");
}

inline std::ifstream OpenBinaryIn(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  RequireIo(is.is_open(), "cannot open file for reading: " + path);
  return is;
}

inline std::ofstream OpenBinaryOut(const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  RequireIo(os.is_open(), "cannot open file for writing: " + path);
  return os;
}

inline std::ifstream OpenTextIn(const std::string &path) {
  std::ifstream is(path);
  RequireIo(is.is_open(), "cannot open file for reading: " + path);
  return is;
}

inline std::ofstream OpenTextOut(const std::string &path) {
  std::ofstream os(path);
  RequireIo(os.is_open(), "cannot open file for writing: " + path);
  return os;
}

}  // namespace phmm

#endif  // PHMM_BINIO_H_
