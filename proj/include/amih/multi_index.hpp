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
#include <unordered_map>
#include <vector>

#include "amih/binary_code.hpp"
#include "amih/bucket_table.hpp"
#include "amih/query_stats.hpp"
#include "amih/similarity.hpp"

namespace amih {

/// Contiguous bit range [offset, offset + width) of a code.
struct Span {
    uint32_t offset = 0;
    uint32_t width = 0;

    bool
    operator==(const Span&) const = default;
};

/// Table count for n items of p bits: round(p / log2 n) (ties to even), clamped to [ceil(p / 64), p].
uint32_t
default_m(uint32_t p, uint64_t n);

/// m balanced spans covering [0, p); the first p % m spans are one bit wider.
std::vector<Span>
make_spans(uint32_t p, uint32_t m);

/// Substring values of a code, one per span, right-aligned.
std::vector<uint64_t>
partition(CodeView code, std::span<const Span> spans);

inline std::vector<uint64_t>
partition(const BinaryCode& code, std::span<const Span> spans) {
    return partition(code.view(), spans);
}

/// Substring tuple bounds that must be probed to answer one (r1, r2)-near-neighbor query over m tables:
/// every (a, b) with a + b <= floor((r1 + r2) / m), a <= r1, b <= r2. Listed by distance, then a.
struct CandidateTupleSet {
    HammingTuple bound;
    uint32_t m = 1;
    std::vector<HammingTuple> tuples;

    bool
    contains(HammingTuple t) const {
        return t.r1 <= bound.r1 && t.r2 <= bound.r2 && t.distance() <= bound.distance() / m;
    }
};

CandidateTupleSet
candidate_tuples(HammingTuple bound, uint32_t m);

/// Ceiling on buckets probed by one (r1, r2)-near-neighbor query: m * 2^(w * H((r1 + r2) / p)), w = ceil(p/m).
/// Requires (r1 + r2) / p <= 1/2.
double
probing_bound(uint32_t p, uint32_t m, HammingTuple bound);

struct MultiBuildOptions {
    uint32_t dense_max_bits = 26;
    /// A table is direct-addressed only while 2^w <= dense_slots_per_item * n.
    uint64_t dense_slots_per_item = 8;
};

/// m substring hash tables over a shared code store.
class MultiIndex {
 public:
    MultiIndex() = default;
    MultiIndex(CodeStore codes, std::vector<Span> spans, std::vector<BucketTable> tables);

    uint32_t
    bits() const {
        return codes_.bits();
    }
    std::size_t
    size() const {
        return codes_.size();
    }
    uint32_t
    m() const {
        return static_cast<uint32_t>(spans_.size());
    }
    const CodeStore&
    codes() const {
        return codes_;
    }
    std::span<const Span>
    spans() const {
        return spans_;
    }
    const BucketTable&
    table(uint32_t s) const {
        return tables_[s];
    }
    /// Codes of table s laid out in the order of its id list, so a bucket's codes sit next to each other.
    const uint64_t*
    bucket_codes(uint32_t s) const {
        return bucket_codes_[s].data();
    }
    std::size_t
    memory_bytes() const;

 private:
    CodeStore codes_;
    std::vector<Span> spans_;
    std::vector<BucketTable> tables_;
    std::vector<detail::huge_vector<uint64_t>> bucket_codes_;
};

MultiIndex
build_multi(CodeStore codes, uint32_t m, const MultiBuildOptions& opts = {});

/// Per-query working state: which (table, substring tuple) pairs were probed and every candidate pulled so
/// far together with its full tuple. Reused across near-neighbor calls for the same query; switching to
/// another query resets it.
class SearchScratch {
 public:
    /// Starts a new query. With keep_best > 0, candidates that rank strictly after the keep_best-th best
    /// candidate seen so far are verified and counted but not pooled (K nearest neighbor mode).
    void
    prepare(const MultiIndex& index, const BinaryCode& q, uint32_t keep_best = 0);

    /// True when the scratch holds every candidate pulled so far for q on this index.
    bool
    prepared_for(const MultiIndex& index, const BinaryCode& q) const {
        return index_ == &index && keep_best_ == 0 && q == query_;
    }

    /// Probes whatever the candidate tuples for `bound` still need.
    void
    cover(HammingTuple bound);

    /// Every candidate pulled so far, in discovery order.
    std::span<const uint32_t>
    pool() const {
        return pool_;
    }
    HammingTuple
    tuple_of_pooled(std::size_t i) const {
        return pool_tuples_[i];
    }
    /// Replaces `out` with the pooled ids at exactly tuple t, in no particular order.
    void
    group(HammingTuple t, std::vector<uint32_t>& out) const;

    uint64_t
    buckets_probed() const {
        return buckets_probed_;
    }
    /// Distinct candidates verified, pooled or not.
    uint64_t
    candidates_checked() const {
        return verified_;
    }

 private:
    const MultiIndex* index_ = nullptr;
    BinaryCode query_;
    uint32_t z_ = 0;
    uint32_t zeros_stride_ = 1;
    std::vector<uint64_t> sub_;
    std::vector<uint32_t> sub_z_;
    // Per table: where its substring sits in a code and the row stride of its probed flags.
    struct SpanCut {
        uint32_t word;
        uint32_t shift;
        uint32_t stride;
        bool straddles;
        uint64_t mask;
        uint64_t in_place;  // the span's bits within word 0, for codes of one word
        const uint8_t* probed;
    };
    std::vector<SpanCut> cuts_;
    std::vector<std::vector<uint8_t>> probed_;
    std::vector<uint32_t> pool_;
    std::vector<HammingTuple> pool_tuples_;
    // Pooled ids sharing a full tuple form a singly linked list through next_in_group_. Heads are a flat
    // array over all tuples when that is small, a hash map otherwise.
    std::vector<uint32_t> next_in_group_;
    std::vector<uint32_t> heads_;
    std::unordered_map<uint64_t, uint32_t> head_map_;
    uint64_t buckets_probed_ = 0;
    uint64_t verified_ = 0;
    // K nearest neighbor mode: heap of the best pooled tuples (worst on top) and a float pre-filter.
    uint32_t keep_best_ = 0;
    std::vector<HammingTuple> best_;
    std::vector<double> scores_;
    double cutoff_ = -1.0;

    void
    verify(uint32_t id, const uint64_t* words, uint32_t from_table);
    void
    add_to_pool(uint32_t id, HammingTuple full);
    /// Reads every bucket of table s at substring tuple t; false once every item is pooled.
    bool
    read_buckets(uint32_t s, HammingTuple t);
};

/// Exact (r1, r2)-near neighbors of q: ids whose tuple is component-wise <= bound, ascending.
std::vector<uint32_t>
rnn_amih(const MultiIndex& index, const BinaryCode& q, HammingTuple bound, SearchScratch& scratch);

std::vector<uint32_t>
rnn_amih(const MultiIndex& index, const BinaryCode& q, HammingTuple bound);

/// Exact angular KNN over the multi-index. Same ranking as knn_single and linear_scan_knn.
SearchResult
knn_amih(const MultiIndex& index, const BinaryCode& q, uint32_t k, SearchScratch& scratch);

SearchResult
knn_amih(const MultiIndex& index, const BinaryCode& q, uint32_t k);

}  // namespace amih
