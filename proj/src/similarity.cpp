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

#include "amih/similarity.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace amih {

void
check_valid(HammingTuple t, uint32_t z, uint32_t p) {
    if (!is_valid(t, z, p)) {
        throw InvalidArgument("tuple (" + std::to_string(t.r1) + "," + std::to_string(t.r2) +
                              ") is not valid for popcount " + std::to_string(z) + " and length " +
                              std::to_string(p));
    }
}

HammingTuple
hamming_tuple(CodeView q, CodeView b) {
    if (q.bits != b.bits) {
        throw InvalidArgument("codes of different lengths: " + std::to_string(q.bits) + " vs " +
                              std::to_string(b.bits));
    }
    return hamming_tuple_unchecked(q.words.data(), b.words.data(), static_cast<uint32_t>(q.words.size()));
}

double
similarity(uint32_t z, HammingTuple t) {
    uint32_t num = z - t.r1;
    if (num == 0) {
        return 0.0;
    }
    // n / (sqrt(z) sqrt(n + r2)) evaluated as one rounded sqrt of an exact ratio, so identical codes give 1.0.
    const double n = num;
    return std::sqrt(n * n / (static_cast<double>(z) * (n + t.r2)));
}

double
cosine_similarity(const BinaryCode& q, const BinaryCode& b) {
    HammingTuple t = hamming_tuple(q, b);
    uint32_t z = q.popcount();
    if (z == 0) {
        throw InvalidArgument("cosine similarity is undefined for an all-zero query");
    }
    return similarity(z, t);
}

std::partial_ordering
compare_sim(uint32_t z, HammingTuple a, HammingTuple b) {
    using u128 = unsigned __int128;
    uint64_t na = z - a.r1;
    uint64_t nb = z - b.r1;
    if (na == 0 || nb == 0) {
        return na <=> nb;
    }
    // sim^2 = n^2 / (z * (n + r2)); z cancels.
    u128 lhs = u128(na * na) * (nb + b.r2);
    u128 rhs = u128(nb * nb) * (na + a.r2);
    return lhs <=> rhs;
}

uint64_t
binomial(uint32_t n, uint32_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    constexpr auto kMax = std::numeric_limits<uint64_t>::max();
    for (uint32_t i = 1; i <= k; ++i) {
        // r * (n - k + i) / i is exact at every step.
        r = r * (n - k + i) / i;
        if (r > kMax) {
            return kMax;
        }
    }
    return static_cast<uint64_t>(r);
}

uint64_t
bucket_count(uint32_t z, uint32_t p, HammingTuple t) {
    check_valid(t, z, p);
    unsigned __int128 r = static_cast<unsigned __int128>(binomial(z, t.r1)) * binomial(p - z, t.r2);
    constexpr auto kMax = std::numeric_limits<uint64_t>::max();
    return r > kMax ? kMax : static_cast<uint64_t>(r);
}

}  // namespace amih
