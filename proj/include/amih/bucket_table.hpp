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
#include <span>
#include <vector>

#include "amih/detail/huge_pages.hpp"

namespace amih {

/// Static map from a key of up to 64 bits to the ascending list of item ids stored under it.
/// Dense mode addresses 2^bits slots directly; sparse mode is a linear-probing open-addressing table over
/// the occupied keys. Either way the ids live in one contiguous array.
class BucketTable {
 public:
    enum class Mode : uint32_t { kDense = 0, kSparse = 1 };

    BucketTable() = default;

    /// `keys[i]` is the key of item i.
    static BucketTable
    build(std::span<const uint64_t> keys, uint32_t bits, Mode mode);

    /// Rebuilds from the serialized form (distinct keys ascending, their counts, ids grouped by key).
    static BucketTable
    from_parts(uint32_t bits, Mode mode, std::vector<uint64_t> keys, std::vector<uint32_t> counts,
               std::vector<uint32_t> ids);

    std::span<const uint32_t>
    find(uint64_t key) const {
        if (mode_ == Mode::kDense) {
            if (key >= offsets_.size() - 1) {
                return {};
            }
            return {ids_.data() + offsets_[key], ids_.data() + offsets_[key + 1]};
        }
        if (slots_.empty()) {
            return {};
        }
        std::size_t mask = slots_.size() - 1;
        for (std::size_t h = mix(key) & mask;; h = (h + 1) & mask) {
            const Slot& s = slots_[h];
            if (s.count == 0) {
                return {};
            }
            if (s.key == key) {
                return {ids_.data() + s.begin, s.count};
            }
        }
    }

    /// Hints the cache line that find(key) reads first.
    void
    prefetch(uint64_t key) const {
        if (mode_ == Mode::kDense) {
            if (key < offsets_.size()) {
                __builtin_prefetch(offsets_.data() + key);
            }
        } else if (!slots_.empty()) {
            __builtin_prefetch(slots_.data() + (mix(key) & (slots_.size() - 1)));
        }
    }

    /// Dense mode only: one bit per key, set when the bucket is non-empty.
    const uint64_t*
    dense_occupancy() const {
        return mode_ == Mode::kDense ? occupancy_.data() : nullptr;
    }
    /// Dense mode only: 2^bits + 1 offsets into ids(); the bucket of key k is [offsets[k], offsets[k + 1]).
    const uint32_t*
    dense_offsets() const {
        return mode_ == Mode::kDense ? offsets_.data() : nullptr;
    }
    const uint32_t*
    ids() const {
        return ids_.data();
    }

    Mode
    mode() const {
        return mode_;
    }
    uint32_t
    bits() const {
        return bits_;
    }
    std::size_t
    size() const {
        return ids_.size();
    }
    /// Number of non-empty buckets.
    std::size_t
    occupied() const;

    /// Distinct keys ascending with their counts, and the id array in that key order.
    void
    export_parts(std::vector<uint64_t>& keys, std::vector<uint32_t>& counts, std::vector<uint32_t>& ids) const;

    std::size_t
    memory_bytes() const;

 private:
    struct Slot {
        uint64_t key = 0;
        uint32_t begin = 0;
        uint32_t count = 0;  // 0 marks an empty slot
    };

    static uint64_t
    mix(uint64_t x) {
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        x *= 0xc4ceb9fe1a85ec53ULL;
        x ^= x >> 33;
        return x;
    }

    void
    index_occupancy();
    void
    index_sparse(std::span<const uint64_t> keys, std::span<const uint32_t> counts);

    Mode mode_ = Mode::kDense;
    uint32_t bits_ = 0;
    detail::huge_vector<uint32_t> offsets_{0};  // dense: 2^bits + 1 entries
    // Dense: occupancy bitmap, small enough to stay cached while the offsets array is not.
    std::vector<uint64_t> occupancy_;
    detail::huge_vector<Slot> slots_;           // sparse: power-of-two capacity
    detail::huge_vector<uint32_t> ids_;
};

}  // namespace amih
