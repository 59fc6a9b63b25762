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
#include <optional>
#include <span>
#include <vector>

#include "amih/binary_code.hpp"
#include "amih/bucket_table.hpp"
#include "amih/query_stats.hpp"

namespace amih {

/// Codes at most this long get a direct-addressed table by default.
inline constexpr uint32_t kDefaultDenseMaxBits = 26;

/// Longest code the single-table engine accepts; each code is its own 64-bit bucket key.
inline constexpr uint32_t kSingleMaxBits = 64;

/// One hash table whose buckets are addressed by the full code.
class HashIndex {
 public:
    HashIndex() = default;
    HashIndex(CodeStore codes, BucketTable table) : codes_(std::move(codes)), table_(std::move(table)) {
    }

    uint32_t
    bits() const {
        return codes_.bits();
    }
    std::size_t
    size() const {
        return codes_.size();
    }
    const CodeStore&
    codes() const {
        return codes_;
    }
    const BucketTable&
    table() const {
        return table_;
    }
    std::span<const uint32_t>
    bucket(uint64_t key) const {
        return table_.find(key);
    }
    std::size_t
    memory_bytes() const {
        return codes_.memory_bytes() + table_.memory_bytes();
    }

 private:
    CodeStore codes_;
    BucketTable table_;
};

HashIndex
build_single(CodeStore codes, uint32_t dense_max_bits = kDefaultDenseMaxBits);

HashIndex
build_single(std::span<const BinaryCode> codes, uint32_t dense_max_bits = kDefaultDenseMaxBits);

struct SingleSearchOptions {
    /// Stop after this many bucket probes (the result is then partial and flagged).
    std::optional<uint64_t> max_probes;
};

/// Exact angular KNN: walks tuples in similarity order and reads every bucket of each tuple until K items are
/// found. Ties inside the last tuple class go to the smallest ids.
SearchResult
knn_single(const HashIndex& index, const BinaryCode& q, uint32_t k, const SingleSearchOptions& opts = {});

/// Ids whose tuple from q is component-wise <= bound, ascending.
std::vector<uint32_t>
rnn_tuple_single(const HashIndex& index, const BinaryCode& q, HammingTuple bound);

}  // namespace amih
