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

#include "amih/scan.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "amih/similarity.hpp"

namespace amih {

namespace {

struct Entry {
    HammingTuple t;
    uint32_t id;
    double score;
};

}  // namespace

std::vector<Neighbor>
linear_scan_knn(const CodeStore& codes, const BinaryCode& q, uint32_t k) {
    const uint32_t z = q.popcount();
    if (z == 0) {
        throw InvalidArgument("all-zero query: cosine similarity is undefined");
    }
    if (k == 0) {
        throw InvalidArgument("K must be positive");
    }
    const std::size_t n = codes.size();
    if (n == 0) {
        return {};
    }
    if (codes.bits() != q.size()) {
        throw InvalidArgument("query length " + std::to_string(q.size()) + " does not match dataset length " +
                              std::to_string(codes.bits()));
    }
    const uint32_t p = q.size();
    // 1 / sqrt(|b|) for every possible code norm; sqrt(z) is common to all items and dropped.
    std::vector<double> inv_norm(p + 1, 0.0);
    for (uint32_t v = 1; v <= p; ++v) {
        inv_norm[v] = 1.0 / std::sqrt(static_cast<double>(v));
    }
    // Score of every valid tuple for this query.
    const uint32_t stride = p - z + 1;
    std::vector<double> scores(std::size_t(z + 1) * stride);
    for (uint32_t r1 = 0; r1 <= z; ++r1) {
        for (uint32_t r2 = 0; r2 < stride; ++r2) {
            scores[r1 * stride + r2] = (z - r1) * inv_norm[z - r1 + r2];
        }
    }
    const SimOrder order{z};
    auto ranks_before = [&](const Entry& a, const Entry& b) {
        if (a.t == b.t) {
            return a.id < b.id;
        }
        return order.before(a.t, b.t);
    };
    // Worst kept entry on top.
    std::priority_queue<Entry, std::vector<Entry>, decltype(ranks_before)> heap(ranks_before);
    const std::size_t want = std::min<std::size_t>(k, n);
    const uint32_t wpc = codes.words_per_code();
    const uint64_t* qw = q.words().data();
    const uint64_t* base = codes.raw().data();
    // Float scores settle clear cases; near-ties go to the exact comparator. Returns the new cutoff.
    auto offer = [&](std::size_t i, HammingTuple t, double score) -> double {
        Entry e{t, static_cast<uint32_t>(i), score};
        if (heap.size() < want) {
            heap.push(e);
        } else if (ranks_before(e, heap.top())) {
            heap.pop();
            heap.push(e);
        }
        return heap.size() == want ? heap.top().score * (1 - 1e-9) : -1.0;
    };
    const double* sc = scores.data();
    double cutoff = -1.0;
    if (wpc == 1) {
        const uint64_t q0 = qw[0];
        for (std::size_t i = 0; i < n; ++i) {
            const uint64_t b = base[i];
            const auto r1 = static_cast<uint32_t>(std::popcount(q0 & ~b));
            const auto r2 = static_cast<uint32_t>(std::popcount(~q0 & b));
            const double score = sc[r1 * stride + r2];
            if (score >= cutoff) [[unlikely]] {
                cutoff = offer(i, {r1, r2}, score);
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const HammingTuple t = hamming_tuple_unchecked(qw, base + i * wpc, wpc);
            const double score = sc[t.r1 * stride + t.r2];
            if (score >= cutoff) [[unlikely]] {
                cutoff = offer(i, t, score);
            }
        }
    }
    std::vector<Neighbor> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        const Entry& e = heap.top();
        out[i] = {e.id, similarity(z, e.t)};
        heap.pop();
    }
    return out;
}

std::vector<HammingTuple>
oracle_tuple_order(uint32_t z, uint32_t p) {
    if (z == 0) {
        throw InvalidArgument("tuple order is undefined for an all-zero query");
    }
    if (z > p || p > 24) {
        throw InvalidArgument("oracle tuple order needs 1 <= z <= p <= 24");
    }
    std::vector<HammingTuple> all;
    for (uint32_t a = 0; a <= z; ++a) {
        for (uint32_t b = 0; b <= p - z; ++b) {
            all.push_back({a, b});
        }
    }
    const SimOrder order{z};
    std::sort(all.begin(), all.end(), [&](HammingTuple x, HammingTuple y) { return order.before(x, y); });
    return all;
}

}  // namespace amih
