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

#include "amih/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <random>

namespace amih {

namespace {

class Writer {
 public:
    void
    bytes(const void* p, std::size_t n) {
        auto b = static_cast<const uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    template <typename T>
    void
    le(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            out_.push_back(static_cast<uint8_t>(static_cast<uint64_t>(v) >> (8 * i)));
        }
    }
    std::vector<uint8_t>&
    buffer() {
        return out_;
    }

 private:
    std::vector<uint8_t> out_;
};

class Reader {
 public:
    explicit Reader(std::span<const uint8_t> in) : in_(in) {
    }
    template <typename T>
    T
    le(const char* what) {
        need(sizeof(T), what);
        uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= uint64_t{in_[pos_ + i]} << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    std::span<const uint8_t>
    take(std::size_t n, const char* what) {
        need(n, what);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t
    remaining() const {
        return in_.size() - pos_;
    }
    std::size_t
    position() const {
        return pos_;
    }

 private:
    void
    need(std::size_t n, const char* what) const {
        if (in_.size() - pos_ < n) {
            throw FormatError(std::string("truncated file while reading ") + what);
        }
    }

    std::span<const uint8_t> in_;
    std::size_t pos_ = 0;
};

void
put_codes(Writer& w, const CodeStore& codes) {
    for (uint64_t word : codes.raw()) {
        w.le(word);
    }
}

CodeStore
get_codes(Reader& r, uint32_t p, uint64_t n) {
    const uint32_t wpc = words_for_bits(p);
    if (wpc != 0 && n > r.remaining() / (8ull * wpc)) {
        throw FormatError("dataset body is shorter than n records");
    }
    std::vector<uint64_t> words(n * wpc);
    for (auto& word : words) {
        word = r.le<uint64_t>("code record");
    }
    try {
        return CodeStore(p, std::move(words));
    } catch (const InvalidArgument& e) {
        throw FormatError(e.what());
    }
}

void
check_magic(Reader& r, const char (&magic)[4], const char* kind) {
    auto m = r.take(4, "magic");
    if (std::memcmp(m.data(), magic, 4) != 0) {
        throw FormatError(std::string("bad magic: not a ") + kind + " file");
    }
}

uint32_t
check_bits_field(uint32_t p) {
    if (p > kMaxBits) {
        throw FormatError("code length " + std::to_string(p) + " exceeds " + std::to_string(kMaxBits));
    }
    return p;
}

}  // namespace

uint64_t
fnv1a64(std::span<const uint8_t> bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<uint8_t>
read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path.string());
    }
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw FormatError("read error on " + path.string());
    }
    return data;
}

void
write_file(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw FormatError("write error on " + path.string());
    }
}

std::vector<uint8_t>
encode_dataset(const CodeStore& codes) {
    Writer w;
    w.bytes(kDatasetMagic, 4);
    w.le<uint32_t>(kDatasetVersion);
    w.le<uint32_t>(codes.bits());
    w.le<uint64_t>(codes.size());
    put_codes(w, codes);
    return std::move(w.buffer());
}

CodeStore
decode_dataset(std::span<const uint8_t> bytes) {
    Reader r(bytes);
    check_magic(r, kDatasetMagic, "dataset");
    if (auto v = r.le<uint32_t>("version"); v != kDatasetVersion) {
        throw FormatError("unsupported dataset version " + std::to_string(v));
    }
    const uint32_t p = check_bits_field(r.le<uint32_t>("p"));
    const uint64_t n = r.le<uint64_t>("n");
    if (p == 0 && n != 0) {
        throw FormatError("zero-length codes");
    }
    CodeStore codes = get_codes(r, p, n);
    if (r.remaining() != 0) {
        throw FormatError("trailing bytes after dataset body");
    }
    return codes;
}

void
write_dataset(const std::filesystem::path& path, const CodeStore& codes) {
    write_file(path, encode_dataset(codes));
}

CodeStore
read_dataset(const std::filesystem::path& path) {
    return decode_dataset(read_file(path));
}

CodeStore
generate_codes(uint64_t n, uint32_t p, double density, uint64_t seed) {
    if (p == 0 || p > kMaxBits) {
        throw InvalidArgument("code length must lie in [1, 4096]");
    }
    if (!(density > 0.0 && density < 1.0)) {
        throw InvalidArgument("density must lie in (0, 1)");
    }
    std::mt19937_64 rng(seed);
    const uint32_t wpc = words_for_bits(p);
    const uint32_t tail = p & 63;
    std::vector<uint64_t> words(n * wpc, 0);
    for (uint64_t i = 0; i < n; ++i) {
        uint64_t* rec = words.data() + i * wpc;
        if (density == 0.5) {
            for (uint32_t j = 0; j < wpc; ++j) {
                rec[j] = rng();
            }
            if (tail != 0) {
                rec[wpc - 1] &= (uint64_t{1} << tail) - 1;
            }
        } else {
            for (uint32_t b = 0; b < p; ++b) {
                // 53 random bits as a uniform double in [0, 1).
                double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                if (u < density) {
                    rec[b >> 6] |= uint64_t{1} << (b & 63);
                }
            }
        }
    }
    return CodeStore(p, std::move(words));
}

const CodeStore&
codes_of(const AnyIndex& index) {
    return std::visit([](const auto& i) -> const CodeStore& { return i.codes(); }, index);
}

std::vector<uint8_t>
encode_snapshot(const AnyIndex& index) {
    const CodeStore& codes = codes_of(index);
    std::vector<Span> spans;
    std::vector<const BucketTable*> tables;
    if (const auto* single = std::get_if<HashIndex>(&index)) {
        spans.push_back({0, single->bits()});
        tables.push_back(&single->table());
    } else {
        const auto& multi = std::get<MultiIndex>(index);
        spans.assign(multi.spans().begin(), multi.spans().end());
        for (uint32_t s = 0; s < multi.m(); ++s) {
            tables.push_back(&multi.table(s));
        }
    }
    Writer w;
    w.bytes(kSnapshotMagic, 4);
    w.le<uint32_t>(kSnapshotVersion);
    w.le<uint32_t>(static_cast<uint32_t>(engine_of(index)));
    w.le<uint32_t>(codes.bits());
    w.le<uint64_t>(codes.size());
    w.le<uint32_t>(static_cast<uint32_t>(spans.size()));
    for (const Span& s : spans) {
        w.le<uint32_t>(s.offset);
        w.le<uint32_t>(s.width);
    }
    std::vector<uint64_t> keys;
    std::vector<uint32_t> counts;
    std::vector<uint32_t> ids;
    for (const BucketTable* t : tables) {
        t->export_parts(keys, counts, ids);
        w.le<uint32_t>(static_cast<uint32_t>(t->mode()));
        w.le<uint64_t>(keys.size());
        for (uint64_t k : keys) {
            w.le(k);
        }
        for (uint32_t c : counts) {
            w.le(c);
        }
        for (uint32_t id : ids) {
            w.le(id);
        }
    }
    put_codes(w, codes);
    w.le<uint64_t>(fnv1a64(w.buffer()));
    return std::move(w.buffer());
}

AnyIndex
decode_snapshot(std::span<const uint8_t> bytes) {
    Reader r(bytes);
    check_magic(r, kSnapshotMagic, "index snapshot");
    if (bytes.size() < 12) {
        throw FormatError("truncated snapshot");
    }
    {
        Reader tail(bytes.subspan(bytes.size() - 8));
        if (tail.le<uint64_t>("checksum") != fnv1a64(bytes.first(bytes.size() - 8))) {
            throw FormatError("snapshot checksum mismatch");
        }
    }
    Reader body(bytes.first(bytes.size() - 8));
    body.take(4, "magic");
    if (auto v = body.le<uint32_t>("version"); v != kSnapshotVersion) {
        throw FormatError("unsupported snapshot version " + std::to_string(v));
    }
    const auto engine = body.le<uint32_t>("engine");
    if (engine > 1) {
        throw FormatError("unknown engine tag " + std::to_string(engine));
    }
    const uint32_t p = check_bits_field(body.le<uint32_t>("p"));
    const uint64_t n = body.le<uint64_t>("n");
    const uint32_t m = body.le<uint32_t>("m");
    if (m == 0 || m > std::max(p, 1u) || (engine == 0 && m != 1)) {
        throw FormatError("bad table count");
    }
    if (n > UINT32_MAX) {
        throw FormatError("too many items");
    }
    std::vector<Span> spans(m);
    for (auto& s : spans) {
        s.offset = body.le<uint32_t>("span offset");
        s.width = body.le<uint32_t>("span width");
    }
    if (engine == 1) {
        if (p == 0 || spans != make_spans(p, m)) {
            throw FormatError("span table does not match the balanced layout");
        }
    } else if (spans[0] != Span{0, p} || p > kSingleMaxBits) {
        throw FormatError("bad single-table span");
    }
    std::vector<BucketTable> tables;
    for (uint32_t s = 0; s < m; ++s) {
        const auto mode = body.le<uint32_t>("table mode");
        if (mode > 1) {
            throw FormatError("unknown table mode");
        }
        const uint64_t k = body.le<uint64_t>("bucket count");
        if (k > n || k * 12 + n * 4 > body.remaining()) {
            throw FormatError("bucket list longer than the file");
        }
        std::vector<uint64_t> keys(k);
        std::vector<uint32_t> counts(k);
        std::vector<uint32_t> ids(n);
        for (auto& x : keys) {
            x = body.le<uint64_t>("bucket key");
        }
        for (auto& x : counts) {
            x = body.le<uint32_t>("bucket size");
        }
        for (auto& x : ids) {
            x = body.le<uint32_t>("item id");
        }
        try {
            tables.push_back(BucketTable::from_parts(spans[s].width, static_cast<BucketTable::Mode>(mode),
                                                     std::move(keys), std::move(counts), std::move(ids)));
        } catch (const InvalidArgument& e) {
            throw FormatError(std::string("corrupt bucket table: ") + e.what());
        }
    }
    CodeStore codes = get_codes(body, p, n);
    if (body.remaining() != 0) {
        throw FormatError("trailing bytes in snapshot body");
    }
    // Buckets hold n ids in total; finding every id in the bucket of its own substring makes them a
    // permutation. Writers keep each bucket ascending.
    for (uint32_t s = 0; s < m; ++s) {
        for (uint64_t i = 0; i < n; ++i) {
            auto bucket = tables[s].find(extract_bits(codes[i].words, spans[s].offset, spans[s].width));
            if (!std::binary_search(bucket.begin(), bucket.end(), static_cast<uint32_t>(i))) {
                throw FormatError("bucket table disagrees with stored codes");
            }
        }
    }
    if (engine == 0) {
        return HashIndex(std::move(codes), std::move(tables[0]));
    }
    return MultiIndex(std::move(codes), std::move(spans), std::move(tables));
}

void
save_snapshot(const std::filesystem::path& path, const AnyIndex& index) {
    write_file(path, encode_snapshot(index));
}

AnyIndex
load_snapshot(const std::filesystem::path& path) {
    return decode_snapshot(read_file(path));
}

}  // namespace amih
