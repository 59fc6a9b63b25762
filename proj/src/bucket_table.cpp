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

#include "amih/bucket_table.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

#include "amih/binary_code.hpp"

namespace amih {

namespace {

constexpr uint32_t kMaxDenseBits = 32;

}  // namespace

BucketTable
BucketTable::build(std::span<const uint64_t> keys, uint32_t bits, Mode mode) {
    if (bits > 64) {
        throw InvalidArgument("bucket keys are limited to 64 bits");
    }
    if (mode == Mode::kDense && bits > kMaxDenseBits) {
        throw InvalidArgument("dense bucket tables are limited to 32-bit keys");
    }
    if (keys.size() > UINT32_MAX) {
        throw InvalidArgument("too many items for 32-bit ids");
    }
    BucketTable t;
    t.mode_ = mode;
    t.bits_ = bits;
    const auto n = static_cast<uint32_t>(keys.size());
    if (mode == Mode::kDense) {
        t.offsets_.assign((std::size_t{1} << bits) + 1, 0);
        for (uint64_t k : keys) {
            if (k >> bits) {
                throw InvalidArgument("key wider than the table");
            }
            ++t.offsets_[k + 1];
        }
        std::partial_sum(t.offsets_.begin(), t.offsets_.end(), t.offsets_.begin());
        std::vector<uint32_t> fill(t.offsets_.begin(), t.offsets_.end() - 1);
        t.ids_.resize(n);
        for (uint32_t i = 0; i < n; ++i) {
            t.ids_[fill[keys[i]]++] = i;
        }
        t.index_occupancy();
        return t;
    }
    // Sparse: stable sort of ids by key keeps ids ascending inside each bucket.
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) { return keys[a] < keys[b]; });
    std::vector<uint64_t> distinct;
    std::vector<uint32_t> counts;
    for (uint32_t i : order) {
        if (distinct.empty() || distinct.back() != keys[i]) {
            distinct.push_back(keys[i]);
            counts.push_back(0);
        }
        ++counts.back();
    }
    t.ids_.assign(order.begin(), order.end());
    t.index_sparse(distinct, counts);
    return t;
}

void
BucketTable::index_occupancy() {
    const std::size_t slots = offsets_.size() - 1;
    occupancy_.assign((slots + 63) / 64, 0);
    for (std::size_t k = 0; k < slots; ++k) {
        if (offsets_[k + 1] != offsets_[k]) {
            occupancy_[k / 64] |= uint64_t{1} << (k % 64);
        }
    }
}

void
BucketTable::index_sparse(std::span<const uint64_t> keys, std::span<const uint32_t> counts) {
    slots_.clear();
    if (keys.empty()) {
        return;
    }
    std::size_t cap = std::bit_ceil(keys.size() * 2);
    slots_.assign(cap, Slot{});
    std::size_t mask = cap - 1;
    uint32_t begin = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        std::size_t h = mix(keys[i]) & mask;
        while (slots_[h].count != 0) {
            if (slots_[h].key == keys[i]) {
                throw InvalidArgument("duplicate bucket key");
            }
            h = (h + 1) & mask;
        }
        slots_[h] = Slot{keys[i], begin, counts[i]};
        begin += counts[i];
    }
}

BucketTable
BucketTable::from_parts(uint32_t bits, Mode mode, std::vector<uint64_t> keys, std::vector<uint32_t> counts,
                        std::vector<uint32_t> ids) {
    if (keys.size() != counts.size()) {
        throw InvalidArgument("bucket key and count lists differ in length");
    }
    uint64_t total = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (counts[i] == 0 || (i > 0 && keys[i] <= keys[i - 1]) || (bits < 64 && (keys[i] >> bits) != 0)) {
            throw InvalidArgument("malformed bucket list");
        }
        total += counts[i];
    }
    if (total != ids.size()) {
        throw InvalidArgument("bucket counts do not sum to the id count");
    }
    BucketTable t;
    t.mode_ = mode;
    t.bits_ = bits;
    if (mode == Mode::kDense) {
        if (bits > kMaxDenseBits) {
            throw InvalidArgument("dense bucket tables are limited to 32-bit keys");
        }
        t.offsets_.assign((std::size_t{1} << bits) + 1, 0);
        for (std::size_t i = 0; i < keys.size(); ++i) {
            t.offsets_[keys[i] + 1] = counts[i];
        }
        std::partial_sum(t.offsets_.begin(), t.offsets_.end(), t.offsets_.begin());
        t.index_occupancy();
    } else {
        t.index_sparse(keys, counts);
    }
    t.ids_.assign(ids.begin(), ids.end());
    return t;
}

std::size_t
BucketTable::occupied() const {
    if (mode_ == Mode::kSparse) {
        return static_cast<std::size_t>(
            std::count_if(slots_.begin(), slots_.end(), [](const Slot& s) { return s.count != 0; }));
    }
    std::size_t c = 0;
    for (std::size_t k = 0; k + 1 < offsets_.size(); ++k) {
        c += offsets_[k + 1] != offsets_[k];
    }
    return c;
}

void
BucketTable::export_parts(std::vector<uint64_t>& keys, std::vector<uint32_t>& counts,
                          std::vector<uint32_t>& ids) const {
    keys.clear();
    counts.clear();
    ids.clear();
    ids.reserve(ids_.size());
    if (mode_ == Mode::kDense) {
        for (std::size_t k = 0; k + 1 < offsets_.size(); ++k) {
            if (offsets_[k + 1] != offsets_[k]) {
                keys.push_back(k);
                counts.push_back(offsets_[k + 1] - offsets_[k]);
            }
        }
        ids.assign(ids_.begin(), ids_.end());
        return;
    }
    std::vector<const Slot*> live;
    for (const Slot& s : slots_) {
        if (s.count != 0) {
            live.push_back(&s);
        }
    }
    std::sort(live.begin(), live.end(), [](const Slot* a, const Slot* b) { return a->key < b->key; });
    for (const Slot* s : live) {
        keys.push_back(s->key);
        counts.push_back(s->count);
        ids.insert(ids.end(), ids_.begin() + s->begin, ids_.begin() + s->begin + s->count);
    }
}

std::size_t
BucketTable::memory_bytes() const {
    return offsets_.capacity() * sizeof(uint32_t) + occupancy_.capacity() * sizeof(uint64_t) +
           slots_.capacity() * sizeof(Slot) + ids_.capacity() * sizeof(uint32_t);
}

}  // namespace amih
