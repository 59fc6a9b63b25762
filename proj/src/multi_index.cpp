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

#include "amih/multi_index.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "amih/probing.hpp"

namespace amih {

namespace {

constexpr uint32_t kNone = UINT32_MAX;
// Largest tuple count that gets a flat array of group heads.
constexpr uint64_t kFlatHeads = uint64_t{1} << 16;

}  // namespace

uint32_t
default_m(uint32_t p, uint64_t n) {
    if (n < 2) {
        throw InvalidArgument("default table count needs at least two items");
    }
    if (p == 0) {
        throw InvalidArgument("code length must be positive");
    }
    double m = std::nearbyint(static_cast<double>(p) / std::log2(static_cast<double>(n)));
    auto r = static_cast<uint32_t>(std::clamp(m, 1.0, static_cast<double>(p)));
    return std::max(r, words_for_bits(p));
}

std::vector<Span>
make_spans(uint32_t p, uint32_t m) {
    if (m == 0 || m > p) {
        throw InvalidArgument("table count must lie in [1, p]");
    }
    std::vector<Span> spans(m);
    uint32_t base = p / m;
    uint32_t extra = p % m;
    uint32_t off = 0;
    for (uint32_t s = 0; s < m; ++s) {
        spans[s] = {off, base + (s < extra ? 1u : 0u)};
        off += spans[s].width;
    }
    if (spans.front().width > 64) {
        throw InvalidArgument("substrings wider than 64 bits; use at least " + std::to_string(words_for_bits(p)) +
                              " tables");
    }
    return spans;
}

std::vector<uint64_t>
partition(CodeView code, std::span<const Span> spans) {
    std::vector<uint64_t> out;
    out.reserve(spans.size());
    for (const Span& s : spans) {
        if (s.offset + s.width > code.bits) {
            throw InvalidArgument("span runs past the end of the code");
        }
        out.push_back(extract_bits(code.words, s.offset, s.width));
    }
    return out;
}

CandidateTupleSet
candidate_tuples(HammingTuple bound, uint32_t m) {
    if (m == 0) {
        throw InvalidArgument("table count must be positive");
    }
    CandidateTupleSet set{bound, m, {}};
    const uint32_t radius = bound.distance() / m;
    for (uint32_t d = 0; d <= radius; ++d) {
        for (uint32_t a = 0; a <= std::min(d, bound.r1); ++a) {
            if (d - a <= bound.r2) {
                set.tuples.push_back({a, d - a});
            }
        }
    }
    return set;
}

double
probing_bound(uint32_t p, uint32_t m, HammingTuple bound) {
    if (m == 0 || p == 0) {
        throw InvalidArgument("p and m must be positive");
    }
    const double alpha = static_cast<double>(bound.distance()) / p;
    if (alpha > 0.5) {
        throw InvalidArgument("probing bound needs (r1 + r2) / p <= 1/2");
    }
    const double w = std::ceil(static_cast<double>(p) / m);
    const double h = alpha == 0.0 ? 0.0 : -alpha * std::log2(alpha) - (1 - alpha) * std::log2(1 - alpha);
    return m * std::exp2(w * h);
}

MultiIndex::MultiIndex(CodeStore codes, std::vector<Span> spans, std::vector<BucketTable> tables)
    : codes_(std::move(codes)), spans_(std::move(spans)), tables_(std::move(tables)) {
    if (spans_.size() != tables_.size()) {
        throw InvalidArgument("one table per span required");
    }
    const uint32_t wpc = codes_.words_per_code();
    bucket_codes_.resize(tables_.size());
    for (std::size_t s = 0; s < tables_.size(); ++s) {
        const uint32_t* ids = tables_[s].ids();
        auto& out = bucket_codes_[s];
        out.resize(codes_.size() * wpc);
        for (std::size_t i = 0; i < codes_.size(); ++i) {
            const auto words = codes_[ids[i]].words;
            std::copy(words.begin(), words.end(), out.begin() + i * wpc);
        }
    }
}

std::size_t
MultiIndex::memory_bytes() const {
    std::size_t b = codes_.memory_bytes() + spans_.capacity() * sizeof(Span);
    for (const auto& t : tables_) {
        b += t.memory_bytes();
    }
    for (const auto& c : bucket_codes_) {
        b += c.capacity() * sizeof(uint64_t);
    }
    return b;
}

MultiIndex
build_multi(CodeStore codes, uint32_t m, const MultiBuildOptions& opts) {
    auto spans = make_spans(codes.bits(), m);
    const std::size_t n = codes.size();
    std::vector<BucketTable> tables;
    tables.reserve(m);
    std::vector<uint64_t> keys(n);
    for (const Span& s : spans) {
        for (std::size_t i = 0; i < n; ++i) {
            keys[i] = extract_bits(codes[i].words, s.offset, s.width);
        }
        bool dense = s.width <= opts.dense_max_bits &&
                     (uint64_t{1} << s.width) <= opts.dense_slots_per_item * std::max<uint64_t>(n, 1);
        tables.push_back(
            BucketTable::build(keys, s.width, dense ? BucketTable::Mode::kDense : BucketTable::Mode::kSparse));
    }
    return MultiIndex(std::move(codes), std::move(spans), std::move(tables));
}

void
SearchScratch::prepare(const MultiIndex& index, const BinaryCode& q, uint32_t keep_best) {
    if (q.size() != index.bits()) {
        throw InvalidArgument("query length " + std::to_string(q.size()) + " does not match index length " +
                              std::to_string(index.bits()));
    }
    index_ = &index;
    query_ = q;
    z_ = q.popcount();
    sub_ = partition(q, index.spans());
    const uint32_t m = index.m();
    sub_z_.resize(m);
    probed_.resize(m);
    cuts_.resize(m);
    for (uint32_t s = 0; s < m; ++s) {
        const uint32_t w = index.spans()[s].width;
        sub_z_[s] = static_cast<uint32_t>(std::popcount(sub_[s]));
        probed_[s].assign(static_cast<std::size_t>(sub_z_[s] + 1) * (w - sub_z_[s] + 1), 0);
        const uint32_t off = index.spans()[s].offset;
        const uint64_t mask = w == 64 ? ~uint64_t{0} : (uint64_t{1} << w) - 1;
        cuts_[s] = {off / 64, off % 64, w - sub_z_[s] + 1, off % 64 + w > 64, mask, off < 64 ? mask << off : 0,
                    probed_[s].data()};
    }
    pool_.clear();
    pool_tuples_.clear();
    next_in_group_.clear();
    zeros_stride_ = index.bits() - z_ + 1;
    const uint64_t tuples = uint64_t(z_ + 1) * (index.bits() - z_ + 1);
    head_map_.clear();
    if (tuples <= kFlatHeads) {
        heads_.assign(tuples, kNone);
    } else {
        heads_.clear();
    }
    buckets_probed_ = 0;
    verified_ = 0;
    keep_best_ = keep_best;
    best_.clear();
    cutoff_ = -1.0;
    scores_.clear();
    if (keep_best_ != 0 && tuples <= kFlatHeads) {
        // Similarity up to the common factor 1 / sqrt(z).
        scores_.resize(tuples);
        for (uint32_t r1 = 0; r1 <= z_; ++r1) {
            for (uint32_t r2 = 0; r2 < zeros_stride_; ++r2) {
                const double shared = z_ - r1;
                scores_[r1 * zeros_stride_ + r2] = shared == 0 ? 0.0 : shared / std::sqrt(shared + r2);
            }
        }
    }
}

void
SearchScratch::verify(uint32_t id, const uint64_t* words, uint32_t from_table) {
    const MultiIndex& index = *index_;
    const uint32_t m = index.m();
    // Every (table, tuple) pair other than the one being read was fully read earlier, so the item was pooled
    // already iff one of its other substring tuples is marked.
    if (index.codes().words_per_code() == 1) {
        const uint64_t b = words[0];
        const uint64_t q = query_.words()[0];
        const uint64_t only_q = q & ~b;
        const uint64_t only_b = ~q & b;
        auto marked = [&](uint32_t s) {
            const SpanCut& cut = cuts_[s];
            const auto r1 = static_cast<uint32_t>(std::popcount(only_q & cut.in_place));
            const auto r2 = static_cast<uint32_t>(std::popcount(only_b & cut.in_place));
            return cut.probed[r1 * cut.stride + r2] != 0;
        };
        for (uint32_t s = 0; s < from_table; ++s) {
            if (marked(s)) {
                return;
            }
        }
        for (uint32_t s = from_table + 1; s < m; ++s) {
            if (marked(s)) {
                return;
            }
        }
        add_to_pool(id, {static_cast<uint32_t>(std::popcount(only_q)), static_cast<uint32_t>(std::popcount(only_b))});
        return;
    }
    HammingTuple full{0, 0};
    for (uint32_t s = 0; s < m; ++s) {
        const SpanCut& cut = cuts_[s];
        uint64_t b = words[cut.word] >> cut.shift;
        if (cut.straddles) {
            b |= words[cut.word + 1] << (64 - cut.shift);
        }
        b &= cut.mask;
        const auto r1 = static_cast<uint32_t>(std::popcount(sub_[s] & ~b));
        const auto r2 = static_cast<uint32_t>(std::popcount(~sub_[s] & b));
        full.r1 += r1;
        full.r2 += r2;
        if (s != from_table && cut.probed[r1 * cut.stride + r2]) {
            return;
        }
    }
    add_to_pool(id, full);
}

void
SearchScratch::add_to_pool(uint32_t id, HammingTuple full) {
    ++verified_;
    const uint64_t key = uint64_t(full.r1) * zeros_stride_ + full.r2;
    if (keep_best_ != 0) {
        const SimOrder order{z_};
        auto worse = [&](HammingTuple a, HammingTuple b) { return order.before(a, b); };
        if (best_.size() == keep_best_) {
            if (!scores_.empty() && scores_[key] < cutoff_) {
                return;
            }
            if (order.before(best_.front(), full)) {
                return;
            }
            if (!(full == best_.front())) {
                std::pop_heap(best_.begin(), best_.end(), worse);
                best_.back() = full;
                std::push_heap(best_.begin(), best_.end(), worse);
            }
        } else {
            best_.push_back(full);
            std::push_heap(best_.begin(), best_.end(), worse);
        }
        if (best_.size() == keep_best_ && !scores_.empty()) {
            const HammingTuple top = best_.front();
            cutoff_ = scores_[uint64_t(top.r1) * zeros_stride_ + top.r2] * (1 - 1e-9);
        }
    }
    uint32_t& h = heads_.empty() ? head_map_.try_emplace(key, kNone).first->second : heads_[key];
    next_in_group_.push_back(h);
    h = static_cast<uint32_t>(pool_.size());
    pool_.push_back(id);
    pool_tuples_.push_back(full);
}

namespace {

/// Fixed-capacity FIFO for the probe pipeline.
template <typename T, std::size_t N>
struct Ring {
    T items[N];
    std::size_t head = 0;
    std::size_t tail = 0;

    std::size_t
    size() const {
        return tail - head;
    }
    void
    push(T v) {
        items[tail++ % N] = v;
    }
    T
    pop() {
        return items[head++ % N];
    }
};

}  // namespace

bool
SearchScratch::read_buckets(uint32_t s, HammingTuple t) {
    const MultiIndex& index = *index_;
    const BucketTable& table = index.table(s);
    const uint32_t* offsets = table.dense_offsets();
    const uint32_t* table_ids = table.ids();
    const uint64_t* codes = index.bucket_codes(s);
    const uint32_t wpc = index.codes().words_per_code();

    // Two stages a fixed distance apart, so the cache misses on bucket heads and on bucket contents overlap:
    // key -> id range (ids and codes prefetched) -> verification.
    constexpr std::size_t kKeysAhead = 16;
    constexpr std::size_t kRangesAhead = 8;
    struct Range {
        const uint32_t* begin;
        const uint32_t* end;
    };
    Ring<uint64_t, kKeysAhead> keys;
    Ring<Range, kRangesAhead> ranges;

    auto read = [&](Range r) {
        const uint64_t* words = codes + (r.begin - table_ids) * wpc;
        for (const uint32_t* p = r.begin; p != r.end; ++p, words += wpc) {
            verify(*p, words, s);
        }
    };
    auto take_range = [&](Range r) {
        if (ranges.size() == kRangesAhead) {
            read(ranges.pop());
        }
        if (r.begin != r.end) {
            __builtin_prefetch(r.begin);
            __builtin_prefetch(codes + (r.begin - table_ids) * wpc);
            ranges.push(r);
        }
    };
    auto lookup = [&](uint64_t key) -> Range {
        if (offsets != nullptr) {
            return {table_ids + offsets[key], table_ids + offsets[key + 1]};
        }
        auto found = table.find(key);
        return {found.data(), found.data() + found.size()};
    };
    auto drain = [&] {
        while (keys.size() > 0) {
            take_range(lookup(keys.pop()));
        }
        while (ranges.size() > 0) {
            read(ranges.pop());
        }
    };

    const std::size_t everyone = index.size();
    bool full = false;
    SubcodeEnumerator walk(sub_[s], index.spans()[s].width, t);
    if (offsets != nullptr) {
        const uint64_t* occupied = table.dense_occupancy();
        walk.for_each([&](uint64_t key) {
            ++buckets_probed_;
            if (!((occupied[key / 64] >> (key % 64)) & 1)) {
                return true;
            }
            __builtin_prefetch(offsets + key);
            keys.push(key);
            if (keys.size() == kKeysAhead) {
                const uint64_t k = keys.pop();
                take_range({table_ids + offsets[k], table_ids + offsets[k + 1]});
                if ((buckets_probed_ & 255) == 0 && pool_.size() == everyone) {
                    full = true;
                    return false;
                }
            }
            return true;
        });
    } else {
        walk.for_each([&](uint64_t key) {
            if (keys.size() == kKeysAhead) {
                take_range(lookup(keys.pop()));
                if (pool_.size() == everyone) {
                    full = true;
                    return false;
                }
            }
            table.prefetch(key);
            keys.push(key);
            ++buckets_probed_;
            return true;
        });
    }
    if (!full) {
        drain();
    }
    return pool_.size() != everyone;
}

void
SearchScratch::cover(HammingTuple bound) {
    const MultiIndex& index = *index_;
    if (pool_.size() == index.size()) {
        // Every item is already verified; further probes cannot find anything.
        return;
    }
    for (HammingTuple t : candidate_tuples(bound, index.m()).tuples) {
        for (uint32_t s = 0; s < index.m(); ++s) {
            const uint32_t w = index.spans()[s].width;
            const uint32_t zs = sub_z_[s];
            if (t.r1 > zs || t.r2 > w - zs) {
                continue;
            }
            uint8_t& probed = probed_[s][static_cast<std::size_t>(t.r1) * (w - zs + 1) + t.r2];
            if (probed) {
                continue;
            }
            probed = 1;
            if (!read_buckets(s, t)) {
                return;
            }
        }
    }
}

void
SearchScratch::group(HammingTuple t, std::vector<uint32_t>& out) const {
    out.clear();
    if (t.r1 > z_ || t.r2 > index_->bits() - z_) {
        return;
    }
    const uint64_t key = uint64_t(t.r1) * (index_->bits() - z_ + 1) + t.r2;
    uint32_t at = kNone;
    if (!heads_.empty()) {
        at = heads_[key];
    } else if (auto it = head_map_.find(key); it != head_map_.end()) {
        at = it->second;
    }
    for (; at != kNone; at = next_in_group_[at]) {
        out.push_back(pool_[at]);
    }
}

std::vector<uint32_t>
rnn_amih(const MultiIndex& index, const BinaryCode& q, HammingTuple bound, SearchScratch& scratch) {
    if (!scratch.prepared_for(index, q)) {
        scratch.prepare(index, q);
    }
    check_valid(bound, q.popcount(), q.size());
    scratch.cover(bound);
    std::vector<uint32_t> out;
    auto pool = scratch.pool();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (precedes_or_equal(scratch.tuple_of_pooled(i), bound)) {
            out.push_back(pool[i]);
        }
    }
    std::sort(out.begin(), out.end());
#ifndef NDEBUG
    // Every true near neighbor must have been pooled before filtering.
    std::size_t expected = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        expected += precedes_or_equal(hamming_tuple(q.view(), index.codes()[i]), bound);
    }
    assert(expected == out.size());
#endif
    return out;
}

std::vector<uint32_t>
rnn_amih(const MultiIndex& index, const BinaryCode& q, HammingTuple bound) {
    SearchScratch scratch;
    return rnn_amih(index, q, bound, scratch);
}

SearchResult
knn_amih(const MultiIndex& index, const BinaryCode& q, uint32_t k, SearchScratch& scratch) {
    auto start = std::chrono::steady_clock::now();
    if (q.popcount() == 0) {
        throw InvalidArgument("all-zero query: cosine similarity is undefined");
    }
    if (k == 0) {
        throw InvalidArgument("K must be positive");
    }
    SearchResult res;
    const std::size_t want = std::min<std::size_t>(k, index.size());
    if (want == 0) {
        res.stats.wall_time = std::chrono::steady_clock::now() - start;
        return res;
    }
    scratch.prepare(index, q, static_cast<uint32_t>(want));
    const uint32_t z = q.popcount();
    TupleSequence seq(z, q.size());
    std::vector<uint32_t> group;
    while (res.neighbors.size() < want) {
        auto t = seq.next();
        if (!t) {
            break;
        }
        ++res.stats.tuples_emitted;
        if (seq.phase() != TupleSequence::Phase::kBall) {
            res.stats.entered_anchor_phase = true;
        }
        scratch.cover(*t);
        scratch.group(*t, group);
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
    res.stats.buckets_probed = scratch.buckets_probed();
    res.stats.candidates_checked = scratch.candidates_checked();
    res.stats.wall_time = std::chrono::steady_clock::now() - start;
    return res;
}

SearchResult
knn_amih(const MultiIndex& index, const BinaryCode& q, uint32_t k) {
    SearchScratch scratch;
    return knn_amih(index, q, k, scratch);
}

}  // namespace amih
