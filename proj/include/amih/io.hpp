// Copyright (C) 2026 The AMIH Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "amih/binary_code.hpp"
#include "amih/multi_index.hpp"
#include "amih/single_index.hpp"

namespace amih {

/// Malformed, truncated or corrupt file contents.
class FormatError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

// Dataset file, all integers little-endian:
//   "ABC1" | version u32 = 1 | p u32 | n u64 | n records of ceil(p/64) u64 words
inline constexpr char kDatasetMagic[4] = {'A', 'B', 'C', '1'};
inline constexpr uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 20;

std::vector<uint8_t>
encode_dataset(const CodeStore& codes);

CodeStore
decode_dataset(std::span<const uint8_t> bytes);

void
write_dataset(const std::filesystem::path& path, const CodeStore& codes);

CodeStore
read_dataset(const std::filesystem::path& path);

/// n codes with every bit set independently with probability `density`, from a seeded mt19937_64.
CodeStore
generate_codes(uint64_t n, uint32_t p, double density, uint64_t seed);

enum class Engine : uint32_t { kSingle = 0, kAmih = 1 };

using AnyIndex = std::variant<HashIndex, MultiIndex>;

inline Engine
engine_of(const AnyIndex& index) {
    return std::holds_alternative<HashIndex>(index) ? Engine::kSingle : Engine::kAmih;
}

const CodeStore&
codes_of(const AnyIndex& index);

// Index snapshot, little-endian:
//   "ABCX" | version u32 = 1 | engine u32 | p u32 | n u64 | m u32 | m x (offset u32, width u32)
//   m x table { mode u32 | k u64 | k keys u64 | k counts u32 | n ids u32 }
//   n records of ceil(p/64) u64 words | FNV-1a 64 of every preceding byte
inline constexpr char kSnapshotMagic[4] = {'A', 'B', 'C', 'X'};
inline constexpr uint32_t kSnapshotVersion = 1;

std::vector<uint8_t>
encode_snapshot(const AnyIndex& index);

AnyIndex
decode_snapshot(std::span<const uint8_t> bytes);

void
save_snapshot(const std::filesystem::path& path, const AnyIndex& index);

AnyIndex
load_snapshot(const std::filesystem::path& path);

std::vector<uint8_t>
read_file(const std::filesystem::path& path);

void
write_file(const std::filesystem::path& path, std::span<const uint8_t> bytes);

uint64_t
fnv1a64(std::span<const uint8_t> bytes);

}  // namespace amih
