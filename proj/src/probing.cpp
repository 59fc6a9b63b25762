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

#include "amih/probing.hpp"

#include <algorithm>


namespace amih {

uint32_t
r_hat(uint32_t z) {
    uint64_t lo = 0;
    uint64_t hi = 65536;  // 65536 * 65537 > 2^32
    while (lo < hi) {
        uint64_t mid = (lo + hi + 1) / 2;
        if (mid * (mid + 1) <= z) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return static_cast<uint32_t>(lo);
}

std::optional<HammingTuple>
first_anchor(HammingTuple t, uint32_t z, uint32_t p) {
    uint32_t d = t.distance() + 1;
    if (z > p || d > p) {
        return std::nullopt;
    }
    uint32_t zeros = p - z;
    uint32_t c = d > zeros ? d - zeros : 0;
    if (c > z) {
        return std::nullopt;
    }
    return HammingTuple{c, d - c};
}

std::optional<HammingTuple>
second_anchor(HammingTuple t, uint32_t z, uint32_t /*p*/) {
    if (t.r1 + 1 > z || t.r2 == 0) {
        return std::nullopt;
    }
    return HammingTuple{t.r1 + 1, t.r2 - 1};
}

TupleSequence::TupleSequence(uint32_t z, uint32_t p)
    : z_(z), p_(p), r_hat_(r_hat(z)), queue_(QueueOrder{SimOrder{z}}) {
    if (z == 0) {
        throw InvalidArgument("tuple order is undefined for an all-zero query");
    }
    if (z > p) {
        throw InvalidArgument("query popcount exceeds code length");
    }
    traversed_.assign(static_cast<std::size_t>(z + 1) * (p - z + 1), false);
}

bool
TupleSequence::try_push(std::optional<HammingTuple> t) {
    if (!t || !is_valid(*t, z_, p_)) {
        return false;
    }
    std::size_t slot = static_cast<std::size_t>(t->r1) * (p_ - z_ + 1) + t->r2;
    if (traversed_[slot]) {
        return false;
    }
    traversed_[slot] = true;
    queue_.push(*t);
    return true;
}

std::optional<HammingTuple>
TupleSequence::next() {
    if (phase_ == Phase::kBall) {
        uint32_t zeros = p_ - z_;
        while (radius_ <= r_hat_) {
            uint32_t lo = radius_ > zeros ? radius_ - zeros : 0;
            uint32_t hi = std::min(radius_, z_);
            cursor_ = std::max(cursor_, lo);
            if (cursor_ <= hi) {
                HammingTuple t{cursor_, radius_ - cursor_};
                ++cursor_;
                ++emitted_;
                return t;
            }
            ++radius_;
            cursor_ = 0;
        }
        phase_ = Phase::kAnchor;
        uint32_t d = r_hat_ + 1;
        uint32_t c = d > zeros ? d - zeros : 0;
        try_push(HammingTuple{c, d - std::min(c, d)});
    }
    if (phase_ == Phase::kAnchor) {
        if (queue_.empty()) {
            phase_ = Phase::kDone;
            return std::nullopt;
        }
        HammingTuple top = queue_.top();
        queue_.pop();
        try_push(first_anchor(top, z_, p_));
        try_push(second_anchor(top, z_, p_));
        ++emitted_;
        return top;
    }
    return std::nullopt;
}

CombinationWalker::CombinationWalker(uint32_t n, uint32_t k) : n_(n), k_(k) {
    if (k > n) {
        throw InvalidArgument("cannot choose more positions than available");
    }
    reset();
}

void
CombinationWalker::reset() {
    idx_.resize(k_);
    for (uint32_t i = 0; i < k_; ++i) {
        idx_[i] = i;
    }
}

bool
CombinationWalker::advance() {
    uint32_t i = k_;
    while (i > 0) {
        --i;
        if (idx_[i] < n_ - k_ + i) {
            ++idx_[i];
            for (uint32_t j = i + 1; j < k_; ++j) {
                idx_[j] = idx_[j - 1] + 1;
            }
            return true;
        }
    }
    return false;
}

namespace {

void
split_positions(CodeView code, std::vector<uint32_t>& ones, std::vector<uint32_t>& zeros) {
    for (uint32_t i = 0; i < code.bits; ++i) {
        (code.test(i) ? ones : zeros).push_back(i);
    }
}

}  // namespace

namespace {

uint64_t
low_mask(uint32_t k) {
    return k >= 64 ? ~uint64_t{0} : (uint64_t{1} << k) - 1;
}

}  // namespace

SubcodeEnumerator::Subsets::Subsets(uint32_t n, uint32_t k)
    : first(low_mask(k)), last(k == 0 ? 0 : low_mask(k) << (n - k)), current(first) {
}

namespace {

uint32_t
checked_popcount(uint64_t query, uint32_t width, HammingTuple t) {
    if (width > 64 || (width < 64 && (query >> width) != 0)) {
        throw InvalidArgument("substring query does not fit its width");
    }
    auto z = static_cast<uint32_t>(std::popcount(query));
    check_valid(t, z, width);
    return z;
}

}  // namespace

SubcodeEnumerator::SubcodeEnumerator(uint64_t query, uint32_t width, HammingTuple t)
    : query_(query),
      ones_(query),
      zeros_(~query & low_mask(width)),
      clear_(checked_popcount(query, width, t), t.r1),
      set_(width - static_cast<uint32_t>(std::popcount(query)), t.r2) {
}

BucketEnumerator::BucketEnumerator(const BinaryCode& query, HammingTuple t)
    : query_(query), clear_(query.popcount(), t.r1), set_(query.size() - query.popcount(), t.r2) {
    check_valid(t, query.popcount(), query.size());
    split_positions(query.view(), ones_, zeros_);
}

std::optional<BinaryCode>
BucketEnumerator::next() {
    if (done_) {
        return std::nullopt;
    }
    if (!started_) {
        started_ = true;
    } else if (!set_.advance()) {
        if (!clear_.advance()) {
            done_ = true;
            return std::nullopt;
        }
        set_.reset();
    }
    BinaryCode out = query_;
    for (uint32_t i : clear_.current()) {
        out.set(ones_[i], false);
    }
    for (uint32_t i : set_.current()) {
        out.set(zeros_[i], true);
    }
    return out;
}

std::vector<BinaryCode>
enumerate_bucket_indices(const BinaryCode& query, HammingTuple t) {
    std::vector<BinaryCode> out;
    BucketEnumerator e(query, t);
    while (auto c = e.next()) {
        out.push_back(std::move(*c));
    }
    return out;
}

}  // namespace amih
