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

#include "amih/binary_code.hpp"

#include <string>

namespace amih {

namespace {

void
check_bits(uint32_t bits) {
    if (bits > kMaxBits) {
        throw InvalidArgument("code length " + std::to_string(bits) + " exceeds the supported maximum of " +
                              std::to_string(kMaxBits));
    }
}

uint64_t
tail_mask(uint32_t bits) {
    uint32_t r = bits & 63;
    return r == 0 ? ~uint64_t{0} : (uint64_t{1} << r) - 1;
}

}  // namespace

BinaryCode::BinaryCode(uint32_t bits) : words_(words_for_bits(bits), 0), bits_(bits) {
    check_bits(bits);
}

BinaryCode::BinaryCode(std::vector<uint64_t> words, uint32_t bits) : words_(std::move(words)), bits_(bits) {
    check_bits(bits);
    if (words_.size() != words_for_bits(bits)) {
        throw InvalidArgument("word count does not match code length");
    }
    if (!words_.empty() && (words_.back() & ~tail_mask(bits)) != 0) {
        throw InvalidArgument("bits set past the end of the code");
    }
}

BinaryCode
BinaryCode::from_string(std::string_view bits) {
    BinaryCode code(static_cast<uint32_t>(bits.size()));
    for (uint32_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            code.set(i);
        } else if (bits[i] != '0') {
            throw InvalidArgument("binary code strings may only contain '0' and '1'");
        }
    }
    return code;
}

BinaryCode
BinaryCode::from_u64(uint64_t value, uint32_t bits) {
    if (bits > 64) {
        throw InvalidArgument("from_u64 supports at most 64 bits");
    }
    if (bits == 0) {
        return BinaryCode(0);
    }
    return BinaryCode(std::vector<uint64_t>{value}, bits);
}

void
BinaryCode::set(uint32_t i, bool value) {
    if (i >= bits_) {
        throw InvalidArgument("bit index out of range");
    }
    uint64_t mask = uint64_t{1} << (i & 63);
    if (value) {
        words_[i >> 6] |= mask;
    } else {
        words_[i >> 6] &= ~mask;
    }
}

std::string
BinaryCode::to_string() const {
    std::string s(bits_, '0');
    for (uint32_t i = 0; i < bits_; ++i) {
        if (test(i)) {
            s[i] = '1';
        }
    }
    return s;
}

CodeStore::CodeStore(uint32_t bits) : bits_(bits), wpc_(words_for_bits(bits)) {
    check_bits(bits);
}

CodeStore::CodeStore(uint32_t bits, std::vector<uint64_t> words) : CodeStore(bits) {
    if (wpc_ == 0 ? !words.empty() : words.size() % wpc_ != 0) {
        throw InvalidArgument("code store size is not a multiple of the record width");
    }
    if (wpc_ != 0) {
        uint64_t stray = ~tail_mask(bits);
        for (std::size_t i = wpc_ - 1; i < words.size(); i += wpc_) {
            if (words[i] & stray) {
                throw InvalidArgument("code " + std::to_string(i / wpc_) + " has bits set past the code length");
            }
        }
    }
    words_ = std::move(words);
}

CodeStore
CodeStore::from_codes(std::span<const BinaryCode> codes) {
    if (codes.empty()) {
        return CodeStore(0);
    }
    CodeStore store(codes.front().size());
    store.words_.reserve(codes.size() * store.wpc_);
    for (const auto& c : codes) {
        store.push_back(c);
    }
    return store;
}

void
CodeStore::push_back(CodeView code) {
    if (code.bits != bits_) {
        throw InvalidArgument("code length " + std::to_string(code.bits) + " does not match dataset length " +
                              std::to_string(bits_));
    }
    words_.insert(words_.end(), code.words.begin(), code.words.end());
}

CodeStore
CodeStore::prefix(std::size_t n) const {
    if (n > size()) {
        throw InvalidArgument("prefix longer than the store");
    }
    return CodeStore(bits_, std::vector<uint64_t>(words_.begin(), words_.begin() + n * wpc_));
}

uint64_t
extract_bits(std::span<const uint64_t> words, uint32_t offset, uint32_t width) {
    if (width == 0) {
        return 0;
    }
    uint32_t w = offset >> 6;
    uint32_t s = offset & 63;
    uint64_t v = words[w] >> s;
    if (s != 0 && s + width > 64) {
        v |= words[w + 1] << (64 - s);
    }
    return width == 64 ? v : v & ((uint64_t{1} << width) - 1);
}

}  // namespace amih
