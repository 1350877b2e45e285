// Copyright 2026 The echodepth Authors.
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

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "echodepth/error.hpp"
#include "echodepth/hash.hpp"

namespace echodepth::persistence {

namespace fs = std::filesystem;

/// Append-only little-endian encoder, independent of host byte order.
class ByteWriter {
 public:
  void magic(std::string_view tag) {
    require(tag.size() == 4, "magic tags are four bytes");
    for (char c : tag) bytes_.push_back(static_cast<unsigned char>(c));
  }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) bytes_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
  }
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> bytes, std::string source = "buffer")
      : bytes_(std::move(bytes)), source_(std::move(source)) {}

  void expect_magic(std::string_view tag) {
    need(4);
    if (std::string_view(reinterpret_cast<const char*>(bytes_.data() + pos_), 4) != tag) {
      throw FormatError(source_ + ": bad magic, expected " + std::string(tag));
    }
    pos_ += 4;
  }
  void expect_version(std::uint32_t expected) {
    const std::uint32_t v = u32();
    if (v != expected) {
      throw FormatError(source_ + ": format version " + std::to_string(v) + " is not supported (expected " +
                        std::to_string(expected) + ")");
    }
  }
  std::uint32_t u32() { return std::uint32_t(get(4)); }
  std::uint64_t u64() { return get(8); }
  float f32() { return std::bit_cast<float>(std::uint32_t(get(4))); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void expect_end() const {
    if (pos_ != bytes_.size()) throw FormatError(source_ + ": trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError(source_ + ": truncated file");
  }
  std::uint64_t get(int width) {
    need(std::size_t(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t(bytes_[pos_ + std::size_t(i)]) << (8 * i);
    pos_ += std::size_t(width);
    return v;
  }
  std::vector<unsigned char> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

inline std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

inline void write_file(const fs::path& path, const std::vector<unsigned char>& bytes) {
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

inline std::string file_hash(const fs::path& path) {
  const auto bytes = read_file(path);
  return ContentHash().bytes(std::as_bytes(std::span(bytes))).hex();
}

}  // namespace echodepth::persistence
