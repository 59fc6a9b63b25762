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

#ifdef __BMI2__
#include <immintrin.h>
#endif

#include <bit>
#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "amih/binary_code.hpp"
#include "amih/similarity.hpp"

namespace amih {

/// Largest r with r * (r + 1) <= z. Below and at this radius similarity falls strictly with Hamming distance,
/// so Hamming balls can be walked radius by radius.
uint32_t
r_hat(uint32_t z);

/// Best tuple one step farther out: (c, x + y + 1 - c) with c = max(0, x + y + 1 - (p - z)).
std::optional<HammingTuple>
first_anchor(HammingTuple t, uint32_t z, uint32_t p);

/// Next tuple at the same distance: (x + 1, y - 1).
std::optional<HammingTuple>
second_anchor(HammingTuple t, uint32_t z, uint32_t p);

/// Yields every valid tuple for a query of popcount z in non-increasing similarity order (ties by distance,
/// then r1). Radii up to r_hat(z) are walked directly; past that, a priority queue seeded with the best tuple
/// at distance r_hat + 1 expands each popped tuple into its two anchors.
class TupleSequence {
 public:
    enum class Phase { kBall, kAnchor, kDone };

    TupleSequence(uint32_t z, uint32_t p);

    std::optional<HammingTuple>
    next();

    Phase
    phase() const {
        return phase_;
    }
    uint32_t
    z() const {
        return z_;
    }
    uint32_t
    p() const {
        return p_;
    }
    uint32_t
    ball_radius() const {
        return r_hat_;
    }
    uint64_t
    emitted() const {
        return emitted_;
    }
    uint64_t
    total() const {
        return uint64_t(z_ + 1) * (p_ - z_ + 1);
    }

 private:
    struct QueueOrder {
        SimOrder order;
        bool
        operator()(HammingTuple a, HammingTuple b) const {
            // std::priority_queue keeps the "largest" on top; largest = ranks first.
            return order.before(b, a);
        }
    };

    bool
    try_push(std::optional<HammingTuple> t);

    uint32_t z_;
    uint32_t p_;
    uint32_t r_hat_;
    Phase phase_ = Phase::kBall;
    uint32_t radius_ = 0;
    uint32_t cursor_ = 0;  // next r1 to emit at radius_
    uint64_t emitted_ = 0;
    std::priority_queue<HammingTuple, std::vector<HammingTuple>, QueueOrder> queue_;
    std::vector<bool> traversed_;  // indexed r1 * (p - z + 1) + r2
};

/// Lexicographic walk over k-subsets of {0, ..., n-1}, lowest positions first.
class CombinationWalker {
 public:
    CombinationWalker(uint32_t n, uint32_t k);

    const std::vector<uint32_t>&
    current() const {
        return idx_;
    }
    /// Advances to the next subset; false once exhausted (current() is then unspecified).
    bool
    advance();

    void
    reset();

 private:
    uint32_t n_;
    uint32_t k_;
    std::vector<uint32_t> idx_;
};

/// Lazily lists every code at tuple t from a query of up to 64 bits: the outer loop runs over subsets of set
/// bits to clear, the inner loop over subsets of clear bits to set. Subsets are walked in colexicographic order
/// (Gosper's next-combination step) and scattered onto the bit positions with a parallel deposit.
namespace detail {

/// Scatters the low bits of `bits` onto the set positions of `mask`, lowest first.
inline uint64_t
deposit(uint64_t bits, uint64_t mask) {
#ifdef __BMI2__
    return _pdep_u64(bits, mask);
#else
    uint64_t out = 0;
    for (; mask != 0 && bits != 0; mask &= mask - 1, bits >>= 1) {
        if (bits & 1) {
            out |= mask & (~mask + 1);
        }
    }
    return out;
#endif
}

}  // namespace detail

class SubcodeEnumerator {
 public:
    SubcodeEnumerator(uint64_t query, uint32_t width, HammingTuple t);

    /// Writes the next code to `out`; false when done.
    bool
    next(uint64_t& out) {
        if (done_) {
            return false;
        }
        if (!started_) {
            started_ = true;
            cleared_ = query_ ^ detail::deposit(clear_.current, ones_);
        } else if (!set_.advance()) {
            if (!clear_.advance()) {
                done_ = true;
                return false;
            }
            set_.reset();
            cleared_ = query_ ^ detail::deposit(clear_.current, ones_);
        }
        out = cleared_ | detail::deposit(set_.current, zeros_);
        return true;
    }

    /// Calls fn(code) for every code from the start, in next() order, until fn returns false.
    template <typename Fn>
    void
    for_each(Fn&& fn) const {
        Subsets clear = clear_;
        clear.reset();
        do {
            const uint64_t cleared = query_ ^ detail::deposit(clear.current, ones_);
            Subsets set = set_;
            set.reset();
            do {
                if (!fn(cleared | detail::deposit(set.current, zeros_))) {
                    return;
                }
            } while (set.advance());
        } while (clear.advance());
    }

 private:
    struct Subsets {
        uint64_t first = 0;
        uint64_t last = 0;
        uint64_t current = 0;

        Subsets(uint32_t n, uint32_t k);
        bool
        advance() {
            if (current == last) {
                return false;
            }
            const uint64_t r = current + (current & (~current + 1));
            current = (((r ^ current) >> 2) >> std::countr_zero(current)) | r;
            return true;
        }
        void
        reset() {
            current = first;
        }
    };

    uint64_t query_;
    uint64_t ones_;
    uint64_t zeros_;
    Subsets clear_;
    Subsets set_;
    uint64_t cleared_ = 0;
    bool started_ = false;
    bool done_ = false;
};

/// Same walk as SubcodeEnumerator for codes of any length.
class BucketEnumerator {
 public:
    BucketEnumerator(const BinaryCode& query, HammingTuple t);

    std::optional<BinaryCode>
    next();

 private:
    BinaryCode query_;
    std::vector<uint32_t> ones_;
    std::vector<uint32_t> zeros_;
    CombinationWalker clear_;
    CombinationWalker set_;
    bool started_ = false;
    bool done_ = false;
};

/// Eagerly collects a bucket enumeration (tests and small codes).
std::vector<BinaryCode>
enumerate_bucket_indices(const BinaryCode& query, HammingTuple t);

}  // namespace amih
