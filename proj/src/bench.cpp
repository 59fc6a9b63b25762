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


#include "amih/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include "amih/multi_index.hpp"
#include "amih/probing.hpp"
#include "amih/scan.hpp"
#include "amih/single_index.hpp"

namespace amih {

QueryStats
predict_single_stats(const CodeStore& codes, const BinaryCode& q, uint32_t k) {
    const uint32_t p = codes.bits();
    const uint32_t z = q.popcount();
    if (z == 0) {
        throw InvalidArgument("all-zero query: cosine similarity is undefined");
    }
    if (q.size() != p) {
        throw InvalidArgument("query length does not match the index");
    }
    std::vector<uint64_t> hist(std::size_t(z + 1) * (p - z + 1), 0);
    for (std::size_t i = 0; i < codes.size(); ++i) {
        HammingTuple t = hamming_tuple(q.view(), codes[i]);
        ++hist[std::size_t(t.r1) * (p - z + 1) + t.r2];
    }
    QueryStats stats;
    const uint64_t want = std::min<uint64_t>(k, codes.size());
    uint64_t found = 0;
    TupleSequence seq(z, p);
    while (found < want) {
        auto t = seq.next();
        if (!t) {
            break;
        }
        ++stats.tuples_emitted;
        if (seq.phase() != TupleSequence::Phase::kBall) {
            stats.entered_anchor_phase = true;
        }
        const uint64_t buckets = bucket_count(z, p, *t);
        stats.buckets_probed = buckets > UINT64_MAX - stats.buckets_probed ? UINT64_MAX : stats.buckets_probed + buckets;
        const uint64_t items = hist[std::size_t(t->r1) * (p - z + 1) + t->r2];
        stats.candidates_checked += items;
        if (items > 0) {
            found += items;
            stats.boundary = *t;
        }
    }
    return stats;
}

namespace {

struct Totals {
    double time_ns = 0;
    double buckets = 0;
    double candidates = 0;
    uint64_t anchor = 0;
    uint64_t exhausted = 0;
    uint64_t queries = 0;

    void
    add(const QueryStats& s) {
        time_ns += static_cast<double>(s.wall_time.count());
        buckets += static_cast<double>(s.buckets_probed);
        candidates += static_cast<double>(s.candidates_checked);
        anchor += s.entered_anchor_phase;
        exhausted += s.budget_exhausted;
        ++queries;
    }

    void
    merge(const Totals& o) {
        time_ns += o.time_ns;
        buckets += o.buckets;
        candidates += o.candidates;
        anchor += o.anchor;
        exhausted += o.exhausted;
        queries += o.queries;
    }
};

enum Slot : std::size_t { kScan, kSingle, kAmih, kSlots };
using Slots = std::array<Totals, kSlots>;

/// Splits the query list into contiguous chunks, one per worker, and merges the per-worker totals. fn runs every
/// engine on one query, so slow phases of a shared machine hit all engines alike.
template <typename Fn>
Slots
over_queries(const std::vector<BinaryCode>& queries, uint32_t threads, Fn&& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, queries.size()));
    std::vector<Slots> parts(workers);
    auto work = [&](std::size_t w) {
        const std::size_t lo = queries.size() * w / workers;
        const std::size_t hi = queries.size() * (w + 1) / workers;
        for (std::size_t i = lo; i < hi; ++i) {
            fn(w, queries[i], parts[w]);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work, w);
        }
    }
    Slots all;
    for (const Slots& part : parts) {
        for (std::size_t e = 0; e < kSlots; ++e) {
            all[e].merge(part[e]);
        }
    }
    return all;
}

BenchRow
make_row(const std::string& engine, uint64_t n, uint32_t k, const Totals& t, double scan_time) {
    BenchRow row;
    row.engine = engine;
    row.n = n;
    row.k = k;
    const double q = t.queries == 0 ? 1.0 : static_cast<double>(t.queries);
    row.mean_time_ns = t.time_ns / q;
    row.mean_buckets_probed = t.buckets / q;
    row.mean_candidates = t.candidates / q;
    row.pct_anchor_phase = 100.0 * static_cast<double>(t.anchor) / q;
    row.pct_budget_exhausted = 100.0 * static_cast<double>(t.exhausted) / q;
    row.speedup_vs_scan = row.mean_time_ns > 0 ? scan_time / row.mean_time_ns : 0.0;
    return row;
}

}  // namespace

std::vector<BenchRow>
run_bench(const CodeStore& data, const BenchConfig& config) {
    for (const std::string& e : config.engines) {
        if (e != "scan" && e != "single" && e != "amih") {
            throw InvalidArgument("unknown engine: " + e);
        }
    }
    if (config.queries.size() > 0 && config.queries.bits() != data.bits()) {
        throw InvalidArgument("query length does not match the dataset");
    }
    auto wants = [&](const char* e) {
        return std::find(config.engines.begin(), config.engines.end(), e) != config.engines.end();
    };
    std::vector<uint64_t> sizes = config.sizes;
    if (sizes.empty()) {
        sizes.push_back(data.size());
    }
    for (uint64_t n : sizes) {
        if (n > data.size()) {
            throw InvalidArgument("size exceeds the dataset");
        }
        if (n == 0) {
            throw InvalidArgument("sizes must be positive");
        }
    }
    for (uint32_t k : config.ks) {
        if (k == 0) {
            throw InvalidArgument("K must be positive");
        }
    }
    std::vector<BinaryCode> queries;
    for (std::size_t i = 0; i < config.queries.size(); ++i) {
        BinaryCode q = config.queries.code(i);
        if (q.popcount() > 0) {
            queries.push_back(std::move(q));
        }
    }
    const uint32_t threads = std::max(1u, config.threads);

    std::vector<BenchRow> rows;
    for (uint64_t n : sizes) {
        CodeStore prefix = data.prefix(n);
        std::optional<HashIndex> single;
        if (wants("single")) {
            if (data.bits() > kSingleMaxBits) {
                throw InvalidArgument("single-table engine supports at most 64 bits");
            }
            single.emplace(build_single(prefix));
        }
        std::optional<MultiIndex> multi;
        if (wants("amih")) {
            const uint32_t m = config.m ? *config.m : (n >= 2 ? default_m(data.bits(), n) : words_for_bits(data.bits()));
            multi.emplace(build_multi(prefix, m));
        }
        SingleSearchOptions opts;
        opts.max_probes = config.single_max_probes;
        std::vector<SearchScratch> scratch(threads);
        for (uint32_t k : config.ks) {
            Slots t = over_queries(queries, threads, [&](std::size_t w, const BinaryCode& q, Slots& into) {
                QueryStats s;
                auto start = std::chrono::steady_clock::now();
                auto res = linear_scan_knn(prefix, q, k);
                s.wall_time = std::chrono::steady_clock::now() - start;
                s.candidates_checked = prefix.size();
                into[kScan].add(s);
                if (single) {
                    SearchResult r = knn_single(*single, q, k, opts);
                    if (r.stats.budget_exhausted) {
                        QueryStats predicted = predict_single_stats(prefix, q, k);
                        predicted.wall_time = r.stats.wall_time;
                        predicted.budget_exhausted = true;
                        r.stats = predicted;
                    }
                    into[kSingle].add(r.stats);
                }
                if (multi) {
                    into[kAmih].add(knn_amih(*multi, q, k, scratch[w]).stats);
                }
            });
            const double scan_time = t[kScan].time_ns / std::max<double>(1.0, static_cast<double>(t[kScan].queries));
            if (wants("scan")) {
                rows.push_back(make_row("scan", n, k, t[kScan], scan_time));
            }
            if (single) {
                rows.push_back(make_row("single", n, k, t[kSingle], scan_time));
            }
            if (multi) {
                rows.push_back(make_row("amih", n, k, t[kAmih], scan_time));
            }
        }
    }
    return rows;
}

void
write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "engine,n,K,mean_time_ns,mean_buckets_probed,mean_candidates,pct_anchor_phase,speedup_vs_scan,"
           "pct_budget_exhausted\n";
    char buf[512];
    for (const BenchRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%llu,%u,%.1f,%.3f,%.3f,%.2f,%.3f,%.2f\n", r.engine.c_str(),
                      static_cast<unsigned long long>(r.n), r.k, r.mean_time_ns, r.mean_buckets_probed,
                      r.mean_candidates, r.pct_anchor_phase, r.speedup_vs_scan, r.pct_budget_exhausted);
        out << buf;
    }
}

uint32_t
threads_from_env() {
    const char* env = std::getenv("ABC_THREADS");
    if (env == nullptr) {
        return 1;
    }
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
        return 1;
    }
    const uint32_t hw = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<uint32_t>(std::min<long>(v, hw));
}

}  // namespace amih
