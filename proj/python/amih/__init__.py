# Copyright (C) 2026 The AMIH Authors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
# with the License. You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software distributed under the License
# is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
# or implied. See the License for the specific language governing permissions and limitations under the License.

"""Exact angular K nearest neighbor search over binary codes.

Codes are uint64 arrays of shape (n, ceil(p / 64)); bit i lives in word i // 64 at position i % 64.
"""

import numpy as np

from ._amih import (
    FormatError,
    HashIndex,
    MultiIndex,
    compare_sim,
    default_m,
    generate_codes,
    linear_scan_knn,
    load_index,
    read_dataset,
    similarity,
    tuple_order,
    write_dataset,
)

__all__ = [
    "FormatError",
    "HashIndex",
    "MultiIndex",
    "compare_sim",
    "default_m",
    "generate_codes",
    "linear_scan_knn",
    "load_index",
    "pack_bits",
    "read_dataset",
    "similarity",
    "tuple_order",
    "unpack_bits",
    "write_dataset",
]


def pack_bits(bits):
    """0/1 array of shape (n, p) or (p,) to packed uint64 words."""
    bits = np.asarray(bits, dtype=bool)
    single = bits.ndim == 1
    bits = np.atleast_2d(bits)
    n, p = bits.shape
    words = (p + 63) // 64
    padded = np.zeros((n, words * 64), dtype=bool)
    padded[:, :p] = bits
    weights = np.uint64(1) << np.arange(64, dtype=np.uint64)
    out = (padded.reshape(n, words, 64).astype(np.uint64) * weights).sum(axis=2, dtype=np.uint64)
    return out[0] if single else out


def unpack_bits(words, p):
    """Inverse of pack_bits."""
    words = np.asarray(words, dtype=np.uint64)
    single = words.ndim == 1
    words = np.atleast_2d(words)
    shifts = np.arange(64, dtype=np.uint64)
    bits = ((words[:, :, None] >> shifts) & np.uint64(1)).astype(np.uint8).reshape(words.shape[0], -1)[:, :p]
    return bits[0] if single else bits
