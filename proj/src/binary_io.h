// Copyright 2026 The AZAlign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian readers and writers for the table and checkpoint formats.

#ifndef AZALIGN_SRC_BINARY_IO_H_
#define AZALIGN_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>
#include <type_traits>

#include "azalign/common.h"

namespace azalign::internal {

template <typename T>
T ToLittle(T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (size_t i = 0; i < sizeof(T) / 2; ++i) {
      std::swap(b[i], b[sizeof(T) - 1 - i]);
    }
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) {
      throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
    }
  }

  template <typename T>
  void Put(T v) {
    v = ToLittle(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void PutBytes(std::string_view bytes) {
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  // Fixed-width, NUL-padded string field.
  void PutFixedString(std::string_view s, size_t width) {
    std::string buf(width, '\0');
    std::memcpy(buf.data(), s.data(), std::min(width - 1, s.size()));
    PutBytes(buf);
  }
  void Close() {
    out_.flush();
    if (!out_) throw Error(ErrorCode::kIo, "write to '" + path_ + "' failed");
    out_.close();
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  }

  template <typename T>
  T Get() {
    T v;
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) Truncated();
    return ToLittle(v);
  }
  std::string GetBytes(size_t n) {
    std::string buf(n, '\0');
    in_.read(buf.data(), static_cast<std::streamsize>(n));
    if (!in_) Truncated();
    return buf;
  }
  std::string GetFixedString(size_t width) {
    std::string buf = GetBytes(width);
    return buf.substr(0, buf.find('\0'));
  }
  bool AtEnd() { return in_.peek() == std::char_traits<char>::eof(); }
  const std::string& path() const { return path_; }

 private:
  [[noreturn]] void Truncated() {
    throw Error(ErrorCode::kFormat, "'" + path_ + "' is truncated");
  }

  std::string path_;
  std::ifstream in_;
};

}  // namespace azalign::internal

#endif  // AZALIGN_SRC_BINARY_IO_H_
