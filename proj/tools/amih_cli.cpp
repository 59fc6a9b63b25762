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


#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "amih/amih.hpp"
#include "json.hpp"

namespace {

using namespace amih;

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

/// Bad flag values; everything thrown by the library while reading or searching counts as a data error.
class UsageError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

/// "-" is standard output.
class Output {
 public:
    explicit Output(const std::string& path) {
        if (path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_) {
                throw std::runtime_error("cannot open " + path + " for writing");
            }
        }
    }

    std::ostream&
    stream() {
        return file_ ? *file_ : std::cout;
    }

    void
    close() {
        stream().flush();
        if (!stream()) {
            throw std::runtime_error("write failed");
        }
    }

 private:
    std::unique_ptr<std::ofstream> file_;
};

struct GenArgs {
    uint64_t n = 0;
    uint32_t p = 0;
    double density = 0.5;
    uint64_t seed = 0;
    std::string out;
};

void
run_gen(const GenArgs& a) {
    if (a.p < 1 || a.p > kMaxBits) {
        throw UsageError("--p must be in [1, 4096]");
    }
    if (!(a.density > 0.0 && a.density < 1.0)) {
        throw UsageError("--density must be in (0, 1)");
    }
    write_dataset(a.out, generate_codes(a.n, a.p, a.density, a.seed));
}

struct BuildArgs {
    std::string dataset;
    std::string engine = "amih";
    std::optional<uint32_t> m;
    bool force = false;
    std::string out;
};

void
run_build(const BuildArgs& a) {
    CodeStore codes = read_dataset(a.dataset);
    const uint32_t p = codes.bits();
    const uint64_t n = codes.size();
    auto start = std::chrono::steady_clock::now();
    std::optional<AnyIndex> index;
    nlohmann::json report;
    if (a.engine == "single") {
        if (a.m) {
            throw UsageError("--m applies to the amih engine only");
        }
        if (p > kSingleMaxBits) {
            throw UsageError("single-table engine supports at most 64 bits");
        }
        if (p > 32 && !a.force) {
            throw UsageError("single-table engine on p > 32 probes exponentially many buckets; pass --force");
        }
        index.emplace(build_single(std::move(codes)));
        report["m"] = 1;
    } else {
        uint32_t m = 0;
        if (a.m) {
            m = *a.m;
            if (m == 0 || m > p || (p + m - 1) / m > 64) {
                throw UsageError("--m must be in [ceil(p/64), p]");
            }
        } else {
            m = n >= 2 ? default_m(p, n) : words_for_bits(p);
        }
        index.emplace(build_multi(std::move(codes), m));
        report["m"] = m;
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    save_snapshot(a.out, *index);

    report["engine"] = a.engine;
    report["n"] = n;
    report["p"] = p;
    report["build_time_ns"] = std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count();
    report["memory_bytes"] = std::visit([](const auto& idx) { return idx.memory_bytes(); }, *index);
    std::cerr << report.dump() << '\n';
}

struct QueryArgs {
    std::string index;
    std::string queries;
    uint32_t k = 10;
    std::string out = "-";
};

std::string
format_sim(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void
write_result(std::ostream& os, std::size_t qid, const SearchResult& res) {
    os << "{\"query_id\":" << qid << ",\"neighbors\":[";
    for (std::size_t i = 0; i < res.neighbors.size(); ++i) {
        os << (i ? "," : "") << "{\"id\":" << res.neighbors[i].id << ",\"sim\":" << format_sim(res.neighbors[i].sim)
           << "}";
    }
    const QueryStats& s = res.stats;
    os << "],\"stats\":{\"buckets_probed\":" << s.buckets_probed << ",\"candidates_checked\":" << s.candidates_checked
       << ",\"tuples_emitted\":" << s.tuples_emitted
       << ",\"entered_anchor_phase\":" << (s.entered_anchor_phase ? "true" : "false")
       << ",\"time_ns\":" << s.wall_time.count() << "}}\n";
}

void
run_query(const QueryArgs& a) {
    if (a.k == 0) {
        throw UsageError("--k must be positive");
    }
    AnyIndex index = load_snapshot(a.index);
    CodeStore queries = read_dataset(a.queries);
    if (queries.bits() != codes_of(index).bits()) {
        throw InvalidArgument("query file has p=" + std::to_string(queries.bits()) + " but the index has p=" +
                              std::to_string(codes_of(index).bits()));
    }
    Output out(a.out);
    SearchScratch scratch;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        BinaryCode q = queries.code(i);
        if (q.popcount() == 0) {
            out.stream() << "{\"query_id\":" << i << ",\"error\":\"all-zero query: cosine similarity is undefined\"}\n";
            continue;
        }
        SearchResult res = std::holds_alternative<HashIndex>(index)
                               ? knn_single(std::get<HashIndex>(index), q, a.k)
                               : knn_amih(std::get<MultiIndex>(index), q, a.k, scratch);
        write_result(out.stream(), i, res);
    }
    out.close();
}

struct BenchArgs {
    std::string input;
    std::vector<std::string> engines{"scan", "amih"};
    std::vector<uint32_t> ks{1, 10, 100};
    std::vector<uint64_t> sizes;
    std::string out = "-";
    std::string queries;
    uint64_t nq = 1000;
    uint64_t seed = 1;
    std::optional<uint32_t> m;
    uint64_t single_budget = uint64_t{1} << 22;
};

void
run_bench_cmd(const BenchArgs& a) {
    std::vector<uint8_t> bytes = read_file(a.input);
    CodeStore data{1};
    std::optional<uint32_t> m = a.m;
    if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, kSnapshotMagic)) {
        AnyIndex index = decode_snapshot(bytes);
        data = codes_of(index);
        if (!m && std::holds_alternative<MultiIndex>(index)) {
            m = std::get<MultiIndex>(index).m();
        }
    } else {
        data = decode_dataset(bytes);
    }
    for (const std::string& e : a.engines) {
        if (e != "scan" && e != "single" && e != "amih") {
            throw UsageError("unknown engine '" + e + "' (expected scan, single or amih)");
        }
    }
    for (uint64_t n : a.sizes) {
        if (n == 0 || n > data.size()) {
            throw UsageError("--sizes entries must be in [1, " + std::to_string(data.size()) + "]");
        }
    }
    for (uint32_t k : a.ks) {
        if (k == 0) {
            throw UsageError("--ks entries must be positive");
        }
    }
    if (m && (*m == 0 || *m > data.bits() || (data.bits() + *m - 1) / *m > 64)) {
        throw UsageError("--m must be in [ceil(p/64), p]");
    }
    if (data.size() == 0) {
        throw InvalidArgument("dataset is empty");
    }

    BenchConfig config;
    config.engines = a.engines;
    config.ks = a.ks;
    config.sizes = a.sizes;
    config.m = m;
    config.single_max_probes = a.single_budget;
    config.threads = threads_from_env();
    config.queries = a.queries.empty() ? generate_codes(a.nq, data.bits(), 0.5, a.seed) : read_dataset(a.queries);
    if (config.queries.bits() != data.bits()) {
        throw InvalidArgument("query file p does not match the dataset");
    }
    auto rows = run_bench(data, config);
    Output out(a.out);
    write_bench_csv(out.stream(), rows);
    out.close();
}

}  // namespace

int
main(int argc, char** argv) {
    CLI::App app{"Angular multi-index hashing over binary codes"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic dataset of random codes");
    gen_cmd->add_option("--n", gen.n, "Number of codes")->required();
    gen_cmd->add_option("--p", gen.p, "Bits per code")->required();
    gen_cmd->add_option("--density", gen.density, "Probability of a 1 bit")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "Output dataset file")->required();

    BuildArgs build;
    auto* build_cmd = app.add_subcommand("build", "Build an index snapshot from a dataset");
    build_cmd->add_option("dataset", build.dataset, "Dataset file")->required();
    build_cmd->add_option("--engine", build.engine, "single or amih")
        ->check(CLI::IsMember({"single", "amih"}))
        ->capture_default_str();
    build_cmd->add_option("--m", build.m, "Number of substrings (amih)");
    build_cmd->add_flag("--force", build.force, "Allow the single-table engine on p > 32");
    build_cmd->add_option("--out", build.out, "Output snapshot file")->required();

    QueryArgs query;
    auto* query_cmd = app.add_subcommand("query", "Answer K nearest neighbor queries as JSON lines");
    query_cmd->add_option("--index", query.index, "Index snapshot")->required();
    query_cmd->add_option("--queries", query.queries, "Dataset file of queries")->required();
    query_cmd->add_option("--k", query.k, "Neighbors per query")->capture_default_str();
    query_cmd->add_option("--out", query.out, "Output file, - for stdout")->capture_default_str();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time engines over dataset prefixes and write CSV");
    bench_cmd->add_option("--index-or-dataset", bench.input, "Dataset or snapshot file")->required();
    bench_cmd->add_option("--engines", bench.engines, "Comma list of scan, single, amih")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--ks", bench.ks, "Comma list of K values")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--sizes", bench.sizes, "Comma list of prefix sizes (default: whole dataset)")
        ->delimiter(',');
    bench_cmd->add_option("--out", bench.out, "Output CSV, - for stdout")->capture_default_str();
    bench_cmd->add_option("--queries", bench.queries, "Dataset file of queries (default: synthetic)");
    bench_cmd->add_option("--nq", bench.nq, "Synthetic query count")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Synthetic query seed")->capture_default_str();
    bench_cmd->add_option("--m", bench.m, "Number of substrings (amih)");
    bench_cmd->add_option("--single-budget", bench.single_budget, "Probe budget per single-table query")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen_cmd) {
            run_gen(gen);
        } else if (*build_cmd) {
            run_build(build);
        } else if (*query_cmd) {
            run_query(query);
        } else if (*bench_cmd) {
            run_bench_cmd(bench);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
