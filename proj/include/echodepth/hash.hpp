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

#include <cstdint>
#include <cstring>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>

namespace echodepth {

/// 64-bit FNV-1a. Used for content addressing and integrity checks, not security.
class ContentHash {
 public:
  ContentHash& bytes(std::span<const std::byte> data) {
    for (std::byte b : data) {
      state_ ^= std::uint64_t(std::to_integer<unsigned char>(b));
      state_ *= kPrime;
    }
    return *this;
  }

  ContentHash& text(std::string_view s) {
    return bytes(std::as_bytes(std::span<const char>(s.data(), s.size())));
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  ContentHash& value(T v) {
    return bytes(std::as_bytes(std::span<const T, 1>(&v, 1)));
  }

  std::uint64_t digest() const { return state_; }

  std::string hex() const { return to_hex(state_); }

  static std::string to_hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
  }

 private:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ull;
  static constexpr std::uint64_t kPrime = 0x100000001b3ull;
  std::uint64_t state_ = kOffset;
};

}  // namespace echodepth
