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
#include <vector>

#include "amih/binary_code.hpp"
#include "amih/query_stats.hpp"

namespace amih {

/// Exhaustive exact KNN; ranking matches the hash-based engines (similarity, then distance, r1, id).
std::vector<Neighbor>
linear_scan_knn(const CodeStore& codes, const BinaryCode& q, uint32_t k);

/// All valid tuples for (z, p), fully sorted. Test oracle for TupleSequence; p is capped at 24.
std::vector<HammingTuple>
oracle_tuple_order(uint32_t z, uint32_t p);

}  // namespace amih
