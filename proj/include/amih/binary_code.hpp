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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace amih {

/// Largest supported code length in bits.
inline constexpr uint32_t kMaxBits = 4096;

inline constexpr uint32_t
words_for_bits(uint32_t bits) {
    return (bits + 63) / 64;
}

/// Thrown for malformed inputs at API boundaries (length mismatches, invalid tuples, zero-norm queries).
class InvalidArgument : public std::invalid_argument {
 public:
    using std::invalid_argument::invalid_argument;
};

/// Non-owning view of a packed code: bit i lives in bit (i % 64) of word (i / 64).
struct CodeView {
    std::span<const uint64_t> words;
    uint32_t bits = 0;

    bool
    test(uint32_t i) const {
        return (words[i >> 6] >> (i & 63)) & 1u;
    }
};

inline uint32_t
popcount(std::span<const uint64_t> words) {
    uint32_t c = 0;
    for (uint64_t w : words) {
        c += static_cast<uint32_t>(std::popcount(w));
    }
    return c;
}

/// Fixed-length bit vector, packed little-endian into 64-bit words. Bits past the length are always zero.
class BinaryCode {
 public:
    BinaryCode() = default;

    explicit BinaryCode(uint32_t bits);

    /// Takes ownership of packed words; rejects a wrong word count or stray bits past `bits`.
    BinaryCode(std::vector<uint64_t> words, uint32_t bits);

    explicit BinaryCode(CodeView view) : BinaryCode(std::vector<uint64_t>(view.words.begin(), view.words.end()), view.bits) {
    }

    /// Parses a string of '0'/'1' characters; character i is bit i.
    static BinaryCode
    from_string(std::string_view bits);

    /// Convenience for codes of at most 64 bits.
    static BinaryCode
    from_u64(uint64_t value, uint32_t bits);

    uint32_t
    size() const {
        return bits_;
    }

    std::span<const uint64_t>
    words() const {
        return words_;
    }

    CodeView
    view() const {
        return {words_, bits_};
    }

    bool
    test(uint32_t i) const {
        return view().test(i);
    }

    void
    set(uint32_t i, bool value = true);

    uint32_t
    popcount() const {
        return amih::popcount(words_);
    }

    std::string
    to_string() const;

    bool
    operator==(const BinaryCode&) const = default;

 private:
    std::vector<uint64_t> words_;
    uint32_t bits_ = 0;
};

inline uint32_t
popcount(const BinaryCode& code) {
    return code.popcount();
}

/// Contiguous storage for n codes of a shared length.
class CodeStore {
 public:
    CodeStore() = default;
    explicit CodeStore(uint32_t bits);
    CodeStore(uint32_t bits, std::vector<uint64_t> words);

    static CodeStore
    from_codes(std::span<const BinaryCode> codes);

    uint32_t
    bits() const {
        return bits_;
    }
    uint32_t
    words_per_code() const {
        return wpc_;
    }
    std::size_t
    size() const {
        return wpc_ == 0 ? 0 : words_.size() / wpc_;
    }
    bool
    empty() const {
        return words_.empty();
    }

    CodeView
    operator[](std::size_t i) const {
        return {std::span<const uint64_t>(words_.data() + i * wpc_, wpc_), bits_};
    }

    BinaryCode
    code(std::size_t i) const {
        return BinaryCode((*this)[i]);
    }

    void
    push_back(CodeView code);
    void
    push_back(const BinaryCode& code) {
        push_back(code.view());
    }

    /// First `n` codes as a new store.
    CodeStore
    prefix(std::size_t n) const;

    const std::vector<uint64_t>&
    raw() const {
        return words_;
    }

    std::size_t
    memory_bytes() const {
        return words_.capacity() * sizeof(uint64_t);
    }

 private:
    uint32_t bits_ = 0;
    uint32_t wpc_ = 0;
    std::vector<uint64_t> words_;
};

/// Bits [offset, offset + width) of a packed code, right-aligned. width <= 64.
uint64_t
extract_bits(std::span<const uint64_t> words, uint32_t offset, uint32_t width);

}  // namespace amih
