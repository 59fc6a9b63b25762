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
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "amih/binary_code.hpp"
#include "amih/query_stats.hpp"

namespace amih {

struct BenchConfig {
    /// Any of "scan", "single", "amih".
    std::vector<std::string> engines{"scan", "amih"};
    std::vector<uint32_t> ks{1};
    /// Dataset prefix lengths; empty means the whole dataset.
    std::vector<uint64_t> sizes;
    CodeStore queries{1};
    /// Substring count for AMIH; default_m per size when unset.
    std::optional<uint32_t> m;
    /// Per-query probe budget for the single-table engine.
    uint64_t single_max_probes = uint64_t{1} << 22;
    /// Worker threads over queries.
    uint32_t threads = 1;
};

struct BenchRow {
    std::string engine;
    uint64_t n = 0;
    uint32_t k = 0;
    double mean_time_ns = 0;
    double mean_buckets_probed = 0;
    double mean_candidates = 0;
    double pct_anchor_phase = 0;
    double speedup_vs_scan = 0;
    double pct_budget_exhausted = 0;
};

/// Counters an unbounded knn_single run would report, derived from a scan: item tuples are histogrammed and
/// bucket counts are summed over the tuple sequence up to the class holding the K-th item.
QueryStats
predict_single_stats(const CodeStore& codes, const BinaryCode& q, uint32_t k);

/// Runs every engine on each dataset prefix and K. Zero queries are skipped. Single-table queries that hit the
/// probe budget report predict_single_stats counters; their time is the time spent until the budget ran out.
std::vector<BenchRow>
run_bench(const CodeStore& data, const BenchConfig& config);

void
write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

/// Worker count from ABC_THREADS, capped by the hardware; 1 when unset or invalid.
uint32_t
threads_from_env();

}  // namespace amih
