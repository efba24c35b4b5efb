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

// Serial reference vs OpenMP kernels. Arg(0) is serial, Arg(1) parallel.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "lilac/embedding.hpp"
#include "lilac/kernels.hpp"

using namespace lilac;

namespace {

struct Matrix {
  std::vector<float> data;
  std::vector<double> norms;
  std::size_t dim;

  Matrix(std::size_t rows, std::size_t d) : data(rows * d), norms(rows), dim(d) {
    std::mt19937_64 rng(1);
    for (auto& x : data) x = static_cast<float>(static_cast<double>(rng() % 2001) / 1000.0 - 1.0);
    for (std::size_t r = 0; r < rows; ++r) norms[r] = l2_norm(std::span<const float>(data).subspan(r * d, d));
  }
  kernels::MatrixView view() const { return {data, norms, dim}; }
};

const Matrix& matrix() {
  static const Matrix m(100000, 256);
  return m;
}

void BM_CosineScan(benchmark::State& state) {
  const auto m = matrix().view();
  const auto q = m.row(7);
  std::vector<double> out(m.rows());
  for (auto _ : state) {
    if (state.range(0) == 0) {
      kernels::serial::cosine_scan(m, 0, q, m.norms[7], out);
    } else {
      kernels::parallel::cosine_scan(m, 0, q, m.norms[7], out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m.rows()));
}
BENCHMARK(BM_CosineScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BestInRanges(benchmark::State& state) {
  const auto m = matrix().view();
  std::vector<kernels::RowRange> ranges;
  for (std::uint32_t r = 0; r + 7 <= m.rows(); r += 7) ranges.push_back({r, r + 7});
  kernels::QueryBlock qb;
  for (std::size_t j = 0; j < 3; ++j) {
    qb.vectors.push_back(m.row(j));
    qb.norms.push_back(m.norms[j]);
  }
  std::vector<double> best(ranges.size() * qb.size());
  std::vector<std::uint32_t> arg(best.size());
  for (auto _ : state) {
    if (state.range(0) == 0) {
      kernels::serial::best_in_ranges(m, ranges, qb, best, arg);
    } else {
      kernels::parallel::best_in_ranges(m, ranges, qb, best, arg);
    }
    benchmark::DoNotOptimize(best.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(ranges.size() * 7 * qb.size()));
}
BENCHMARK(BM_BestInRanges)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_HashEmbed(benchmark::State& state) {
  std::vector<EmbedRequest> requests;
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20000; ++i) {
    std::string text;
    for (int w = 0; w < 12; ++w) text += "w" + std::to_string(rng() % 5000) + " ";
    requests.push_back({text, Instruction::none});
  }
  HashEmbedder embedder(256, {}, state.range(0) != 0);
  for (auto _ : state) {
    auto out = embedder.embed(requests);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(requests.size()));
}
BENCHMARK(BM_HashEmbed)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
