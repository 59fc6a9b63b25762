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

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "amih/similarity.hpp"

namespace amih {

struct Neighbor {
    uint32_t id = 0;
    double sim = 0.0;

    bool
    operator==(const Neighbor&) const = default;
};

/// Per-query counters. Buckets and candidates are counted once each per query.
struct QueryStats {
    uint64_t buckets_probed = 0;
    uint64_t candidates_checked = 0;
    uint64_t tuples_emitted = 0;
    bool entered_anchor_phase = false;
    /// Tuple whose class supplied the last returned item; re-query with a larger K to see past it.
    std::optional<HammingTuple> boundary;
    /// Set when a probe budget stopped the search early; the result is then incomplete.
    bool budget_exhausted = false;
    std::chrono::nanoseconds wall_time{0};
};

struct SearchResult {
    std::vector<Neighbor> neighbors;
    QueryStats stats;
};

}  // namespace amih
