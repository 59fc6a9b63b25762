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


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <optional>
#include <string>

#include "amih/amih.hpp"
#include "amih/io.hpp"

namespace py = pybind11;
using namespace amih;

namespace {

using Words = py::array_t<uint64_t, py::array::c_style | py::array::forcecast>;

// Codes travel as uint64 arrays of shape (n, ceil(p / 64)), bit i of a code in word i / 64 at position i % 64.
CodeStore
store_from(const Words& codes, uint32_t p) {
    if (codes.ndim() != 2) {
        throw InvalidArgument("codes must be a 2-d uint64 array");
    }
    if (static_cast<uint32_t>(codes.shape(1)) != words_for_bits(p)) {
        throw InvalidArgument("codes need ceil(p / 64) words per row");
    }
    return CodeStore(p, std::vector<uint64_t>(codes.data(), codes.data() + codes.size()));
}

Words
words_of(const CodeStore& store) {
    Words out({static_cast<py::ssize_t>(store.size()), static_cast<py::ssize_t>(store.words_per_code())});
    std::memcpy(out.mutable_data(), store.raw().data(), store.raw().size() * sizeof(uint64_t));
    return out;
}

BinaryCode
query_from(const Words& q, uint32_t p) {
    if (q.ndim() != 1 || static_cast<uint32_t>(q.shape(0)) != words_for_bits(p)) {
        throw InvalidArgument("query must be a 1-d uint64 array of ceil(p / 64) words");
    }
    return BinaryCode(std::vector<uint64_t>(q.data(), q.data() + q.size()), p);
}

py::dict
stats_dict(const QueryStats& s) {
    py::dict d;
    d["buckets_probed"] = s.buckets_probed;
    d["candidates_checked"] = s.candidates_checked;
    d["tuples_emitted"] = s.tuples_emitted;
    d["entered_anchor_phase"] = s.entered_anchor_phase;
    d["time_ns"] = s.wall_time.count();
    return d;
}

py::tuple
result_tuple(const SearchResult& r) {
    py::array_t<uint32_t> ids(r.neighbors.size());
    py::array_t<double> sims(r.neighbors.size());
    for (std::size_t i = 0; i < r.neighbors.size(); ++i) {
        ids.mutable_at(i) = r.neighbors[i].id;
        sims.mutable_at(i) = r.neighbors[i].sim;
    }
    return py::make_tuple(ids, sims, stats_dict(r.stats));
}

}  // namespace

PYBIND11_MODULE(_amih, m) {
    m.doc() = "Exact angular nearest neighbor search over binary codes.";
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

    m.def("similarity", [](uint32_t z, uint32_t r1, uint32_t r2) { return similarity(z, {r1, r2}); },
          py::arg("z"), py::arg("r1"), py::arg("r2"));
    m.def(
        "compare_sim",
        [](uint32_t z, std::pair<uint32_t, uint32_t> a, std::pair<uint32_t, uint32_t> b) {
            auto c = compare_sim(z, {a.first, a.second}, {b.first, b.second});
            return c < 0 ? -1 : (c > 0 ? 1 : 0);
        },
        py::arg("z"), py::arg("a"), py::arg("b"));
    m.def(
        "tuple_order",
        [](uint32_t z, uint32_t p) {
            std::vector<std::pair<uint32_t, uint32_t>> out;
            TupleSequence seq(z, p);
            while (auto t = seq.next()) {
                out.emplace_back(t->r1, t->r2);
            }
            return out;
        },
        py::arg("z"), py::arg("p"), "Every (r1, r2) tuple in the order the probing sequence visits them.");
    m.def("default_m", &default_m, py::arg("p"), py::arg("n"));
    m.def(
        "generate_codes",
        [](uint64_t n, uint32_t p, double density, uint64_t seed) {
            return words_of(generate_codes(n, p, density, seed));
        },
        py::arg("n"), py::arg("p"), py::arg("density") = 0.5, py::arg("seed") = 0);
    m.def(
        "read_dataset",
        [](const std::string& path) {
            CodeStore s = read_dataset(path);
            return py::make_tuple(words_of(s), s.bits());
        },
        py::arg("path"), "Returns (codes, p).");
    m.def(
        "write_dataset",
        [](const std::string& path, const Words& codes, uint32_t p) { write_dataset(path, store_from(codes, p)); },
        py::arg("path"), py::arg("codes"), py::arg("p"));
    m.def(
        "linear_scan_knn",
        [](const Words& codes, uint32_t p, const Words& q, uint32_t k) {
            const CodeStore store = store_from(codes, p);
            SearchResult r;
            r.neighbors = linear_scan_knn(store, query_from(q, p), k);
            r.stats.candidates_checked = store.size();
            return result_tuple(r);
        },
        py::arg("codes"), py::arg("p"), py::arg("query"), py::arg("k"));

    py::class_<HashIndex>(m, "HashIndex", "Single hash table addressed by the full code.")
        .def(py::init([](const Words& codes, uint32_t p) { return build_single(store_from(codes, p)); }),
             py::arg("codes"), py::arg("p"))
        .def_property_readonly("p", &HashIndex::bits)
        .def("__len__", &HashIndex::size)
        .def_property_readonly("memory_bytes", &HashIndex::memory_bytes)
        .def(
            "knn",
            [](const HashIndex& index, const Words& q, uint32_t k) {
                const BinaryCode code = query_from(q, index.bits());
                SearchResult r;
                {
                    py::gil_scoped_release unlocked;
                    r = knn_single(index, code, k);
                }
                return result_tuple(r);
            },
            py::arg("query"), py::arg("k"), "Returns (ids, sims, stats).")
        .def(
            "rnn",
            [](const HashIndex& index, const Words& q, uint32_t r1, uint32_t r2) {
                return rnn_tuple_single(index, query_from(q, index.bits()), {r1, r2});
            },
            py::arg("query"), py::arg("r1"), py::arg("r2"))
        .def("save", [](const HashIndex& index, const std::string& path) { save_snapshot(path, AnyIndex(index)); },
             py::arg("path"));

    py::class_<MultiIndex>(m, "MultiIndex", "m substring hash tables over the codes.")
        .def(py::init([](const Words& codes, uint32_t p, std::optional<uint32_t> tables) {
                 CodeStore store = store_from(codes, p);
                 const uint32_t count = tables.value_or(default_m(p, store.size()));
                 return build_multi(std::move(store), count);
             }),
             py::arg("codes"), py::arg("p"), py::arg("m") = py::none())
        .def_property_readonly("p", &MultiIndex::bits)
        .def_property_readonly("m", &MultiIndex::m)
        .def("__len__", &MultiIndex::size)
        .def_property_readonly("memory_bytes", &MultiIndex::memory_bytes)
        .def(
            "knn",
            [](const MultiIndex& index, const Words& q, uint32_t k) {
                const BinaryCode code = query_from(q, index.bits());
                SearchResult r;
                {
                    py::gil_scoped_release unlocked;
                    r = knn_amih(index, code, k);
                }
                return result_tuple(r);
            },
            py::arg("query"), py::arg("k"), "Returns (ids, sims, stats).")
        .def(
            "rnn",
            [](const MultiIndex& index, const Words& q, uint32_t r1, uint32_t r2) {
                return rnn_amih(index, query_from(q, index.bits()), {r1, r2});
            },
            py::arg("query"), py::arg("r1"), py::arg("r2"))
        .def("save", [](const MultiIndex& index, const std::string& path) { save_snapshot(path, AnyIndex(index)); },
             py::arg("path"));

    m.def(
        "load_index",
        [](const std::string& path) -> py::object {
            AnyIndex index = load_snapshot(path);
            if (auto* single = std::get_if<HashIndex>(&index)) {
                return py::cast(std::move(*single));
            }
            return py::cast(std::move(std::get<MultiIndex>(index)));
        },
        py::arg("path"));
}
