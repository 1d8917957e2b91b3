// Copyright 2026 The Trajcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>

namespace trajcast::ad::detail {

// C(m,n) += A(m,k) * B(k,n), all row-major.
void gemm_nn(int m, int k, int n, const double* a, const double* b, double* c);
// C(m,n) += A^T * B with A stored as (k,m).
void gemm_tn(int m, int k, int n, const double* a, const double* b, double* c);
// C(m,n) += A * B^T with B stored as (n,k).
void gemm_nt(int m, int k, int n, const double* a, const double* b, double* c);

// Static partition of [0, n) across the configured worker count; `fn` is
// called as fn(begin, end). Deterministic for any thread count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace trajcast::ad::detail
