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

#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial` is the reference
// implementation and `parallel` is the OpenMP version. Each output element is computed by
// exactly one thread in the same summation order, so both produce bit-identical results.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

namespace lilac::kernels {

/// Row-major embedding matrix with one precomputed L2 norm per row.
struct MatrixView {
  std::span<const float> data;
  std::span<const double> norms;
  std::size_t dim = 0;

  std::size_t rows() const noexcept { return norms.size(); }
  std::span<const float> row(std::size_t i) const noexcept { return data.subspan(i * dim, dim); }
};

/// Query vectors sharing the matrix dimension.
struct QueryBlock {
  std::vector<std::span<const float>> vectors;
  std::vector<double> norms;

  std::size_t size() const noexcept { return vectors.size(); }
};

/// Half-open row range [begin, end).
struct RowRange {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

inline constexpr std::uint32_t kNoRow = std::numeric_limits<std::uint32_t>::max();

namespace serial {

/// out[i] = cosine(row(first + i), query) for i < out.size().
void cosine_scan(const MatrixView& m, std::size_t first, std::span<const float> query, double query_norm,
                 std::span<double> out);

/// For range g and query j: best[g * nq + j] = max cosine over the range's rows, arg[...] = the
/// first row attaining it. Empty ranges yield -inf and kNoRow.
void best_in_ranges(const MatrixView& m, std::span<const RowRange> ranges, const QueryBlock& queries,
                    std::span<double> best, std::span<std::uint32_t> arg);

template <typename In, typename F>
auto map(std::span<const In> in, F&& f) {
  std::vector<std::invoke_result_t<F&, const In&>> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return out;
}

}  // namespace serial

namespace parallel {

void cosine_scan(const MatrixView& m, std::size_t first, std::span<const float> query, double query_norm,
                 std::span<double> out);

void best_in_ranges(const MatrixView& m, std::span<const RowRange> ranges, const QueryBlock& queries,
                    std::span<double> best, std::span<std::uint32_t> arg);

template <typename In, typename F>
auto map(std::span<const In> in, F&& f) {
  std::vector<std::invoke_result_t<F&, const In&>> out(in.size());
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = f(in[i]);
  return out;
}

}  // namespace parallel

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace lilac::kernels
