// Copyright 2026 The lilac Authors
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

#include "lilac/kernels.hpp"

#include "lilac/embedding.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lilac::kernels {

namespace {

inline void best_in_range(const MatrixView& m, const RowRange& r, const QueryBlock& queries, double* best,
                          std::uint32_t* arg) {
  const std::size_t nq = queries.size();
  for (std::size_t j = 0; j < nq; ++j) {
    best[j] = -std::numeric_limits<double>::infinity();
    arg[j] = kNoRow;
  }
  for (std::uint32_t row = r.begin; row < r.end; ++row) {
    const auto v = m.row(row);
    const double vn = m.norms[row];
    for (std::size_t j = 0; j < nq; ++j) {
      const double s = cosine_with_norms(v, vn, queries.vectors[j], queries.norms[j]);
      if (s > best[j]) {
        best[j] = s;
        arg[j] = row;
      }
    }
  }
}

}  // namespace

namespace serial {

void cosine_scan(const MatrixView& m, std::size_t first, std::span<const float> query, double query_norm,
                 std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = cosine_with_norms(m.row(first + i), m.norms[first + i], query, query_norm);
  }
}

void best_in_ranges(const MatrixView& m, std::span<const RowRange> ranges, const QueryBlock& queries,
                    std::span<double> best, std::span<std::uint32_t> arg) {
  const std::size_t nq = queries.size();
  for (std::size_t g = 0; g < ranges.size(); ++g) {
    best_in_range(m, ranges[g], queries, best.data() + g * nq, arg.data() + g * nq);
  }
}

}  // namespace serial

namespace parallel {

void cosine_scan(const MatrixView& m, std::size_t first, std::span<const float> query, double query_norm,
                 std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto row = first + static_cast<std::size_t>(i);
    out[i] = cosine_with_norms(m.row(row), m.norms[row], query, query_norm);
  }
}

void best_in_ranges(const MatrixView& m, std::span<const RowRange> ranges, const QueryBlock& queries,
                    std::span<double> best, std::span<std::uint32_t> arg) {
  const std::size_t nq = queries.size();
  const auto n = static_cast<std::ptrdiff_t>(ranges.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t g = 0; g < n; ++g) {
    best_in_range(m, ranges[g], queries, best.data() + g * nq, arg.data() + g * nq);
  }
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace lilac::kernels
