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

#include "amih/single_index.hpp"

#include <algorithm>
#include <string>

#include "amih/probing.hpp"

namespace amih {

namespace {

void
check_query(const HashIndex& index, const BinaryCode& q) {
    if (q.popcount() == 0) {
        throw InvalidArgument("all-zero query: cosine similarity is undefined");
    }
    if (index.size() > 0 && q.size() != index.bits()) {
        throw InvalidArgument("query length " + std::to_string(q.size()) + " does not match index length " +
                              std::to_string(index.bits()));
    }
}

}  // namespace

HashIndex
build_single(CodeStore codes, uint32_t dense_max_bits) {
    const uint32_t p = codes.bits();
    if (p > kSingleMaxBits) {
        throw InvalidArgument("single-table index supports codes of at most 64 bits, got " + std::to_string(p));
    }
    std::vector<uint64_t> keys(codes.size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        keys[i] = codes[i].words[0];
    }
    auto mode = p <= dense_max_bits ? BucketTable::Mode::kDense : BucketTable::Mode::kSparse;
    auto table = BucketTable::build(keys, p, mode);
    return HashIndex(std::move(codes), std::move(table));
}

HashIndex
build_single(std::span<const BinaryCode> codes, uint32_t dense_max_bits) {
    return build_single(CodeStore::from_codes(codes), dense_max_bits);
}

SearchResult
knn_single(const HashIndex& index, const BinaryCode& q, uint32_t k, const SingleSearchOptions& opts) {
    auto start = std::chrono::steady_clock::now();
    check_query(index, q);
    if (k == 0) {
        throw InvalidArgument("K must be positive");
    }
    SearchResult res;
    const std::size_t want = std::min<std::size_t>(k, index.size());
    if (want == 0) {
        res.stats.wall_time = std::chrono::steady_clock::now() - start;
        return res;
    }
    const uint32_t p = index.bits();
    const uint32_t z = q.popcount();
    const uint64_t qkey = q.words()[0];

    std::vector<uint32_t> group;
    TupleSequence seq(z, p);
    bool stop = false;
    while (!stop && res.neighbors.size() < want) {
        auto t = seq.next();
        if (!t) {
            break;
        }
        ++res.stats.tuples_emitted;
        if (seq.phase() != TupleSequence::Phase::kBall) {
            res.stats.entered_anchor_phase = true;
        }
        group.clear();
        SubcodeEnumerator buckets(qkey, p, *t);
        uint64_t key = 0;
        while (buckets.next(key)) {
            if (opts.max_probes && res.stats.buckets_probed >= *opts.max_probes) {
                res.stats.budget_exhausted = true;
                stop = true;
                break;
            }
            ++res.stats.buckets_probed;
            auto ids = index.bucket(key);
            group.insert(group.end(), ids.begin(), ids.end());
        }
        if (stop) {
            break;
        }
        res.stats.candidates_checked += group.size();
        if (group.empty()) {
            continue;
        }
        std::sort(group.begin(), group.end());
        const double s = similarity(z, *t);
        const std::size_t take = std::min(group.size(), want - res.neighbors.size());
        for (std::size_t i = 0; i < take; ++i) {
            res.neighbors.push_back({group[i], s});
        }
        res.stats.boundary = *t;
    }
    res.stats.wall_time = std::chrono::steady_clock::now() - start;
    return res;
}

std::vector<uint32_t>
rnn_tuple_single(const HashIndex& index, const BinaryCode& q, HammingTuple bound) {
    if (index.size() > 0 && q.size() != index.bits()) {
        throw InvalidArgument("query length does not match index length");
    }
    const uint32_t p = q.size();
    const uint32_t z = q.popcount();
    check_valid(bound, z, p);
    std::vector<uint32_t> out;
    if (index.size() == 0) {
        return out;
    }
    const uint64_t qkey = q.words()[0];
    for (uint32_t a = 0; a <= bound.r1; ++a) {
        for (uint32_t b = 0; b <= bound.r2; ++b) {
            SubcodeEnumerator buckets(qkey, p, HammingTuple{a, b});
            uint64_t key = 0;
            while (buckets.next(key)) {
                auto ids = index.bucket(key);
                out.insert(out.end(), ids.begin(), ids.end());
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace amih
