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

#include <compare>
#include <cstdint>
#include <optional>

#include "amih/binary_code.hpp"

namespace amih {

/// Bit-flip counts from a query to a code: r1 = ones of the query cleared, r2 = zeros of the query set.
struct HammingTuple {
    uint32_t r1 = 0;
    uint32_t r2 = 0;

    uint32_t
    distance() const {
        return r1 + r2;
    }

    bool
    operator==(const HammingTuple&) const = default;
};

/// Component-wise partial order on tuples.
inline bool
precedes_or_equal(HammingTuple a, HammingTuple b) {
    return a.r1 <= b.r1 && a.r2 <= b.r2;
}

/// A tuple is valid for a query of popcount z and length p when r1 <= z and r2 <= p - z.
inline bool
is_valid(HammingTuple t, uint32_t z, uint32_t p) {
    return z <= p && t.r1 <= z && t.r2 <= p - z;
}

void
check_valid(HammingTuple t, uint32_t z, uint32_t p);

HammingTuple
hamming_tuple(CodeView q, CodeView b);

inline HammingTuple
hamming_tuple(const BinaryCode& q, const BinaryCode& b) {
    return hamming_tuple(q.view(), b.view());
}

/// Unchecked tuple for same-length word spans.
inline HammingTuple
hamming_tuple_unchecked(const uint64_t* q, const uint64_t* b, uint32_t words) {
    uint32_t r1 = 0;
    uint32_t r2 = 0;
    for (uint32_t i = 0; i < words; ++i) {
        r1 += static_cast<uint32_t>(std::popcount(q[i] & ~b[i]));
        r2 += static_cast<uint32_t>(std::popcount(~q[i] & b[i]));
    }
    return {r1, r2};
}

/// Cosine similarity of two binary codes from the query popcount and their tuple.
/// A zero-norm code (r1 == z, r2 == 0) has similarity 0.
double
similarity(uint32_t z, HammingTuple t);

/// Cosine similarity of two same-length codes. Throws for a zero-norm query.
double
cosine_similarity(const BinaryCode& q, const BinaryCode& b);

/// Exact comparison of sim(z, a) against sim(z, b). Never consults floating point.
std::partial_ordering
compare_sim(uint32_t z, HammingTuple a, HammingTuple b);

/// Strict total order used everywhere results are ranked: higher similarity first, then smaller
/// distance, then smaller r1.
struct SimOrder {
    uint32_t z = 0;

    /// True when `a` ranks strictly before `b`.
    bool
    before(HammingTuple a, HammingTuple b) const {
        auto c = compare_sim(z, a, b);
        if (c != 0) {
            return c > 0;
        }
        if (a.distance() != b.distance()) {
            return a.distance() < b.distance();
        }
        return a.r1 < b.r1;
    }
};

/// C(n, k), saturating at UINT64_MAX.
uint64_t
binomial(uint32_t n, uint32_t k);

/// Number of codes at tuple t from a query with popcount z: C(z, r1) * C(p - z, r2), saturating.
uint64_t
bucket_count(uint32_t z, uint32_t p, HammingTuple t);

}  // namespace amih
