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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lilac/decompose.hpp"
#include "lilac/graph.hpp"

namespace lilac {

enum class RetrievalMode : std::uint8_t {
  full,   // decomposition + late-interaction beam traversal
  no_qd,  // coarse top-b reranked by best subcomponent against the whole query
  knn     // coarse nearest neighbours only
};

std::string_view to_string(RetrievalMode m);
std::optional<RetrievalMode> parse_retrieval_mode(std::string_view s);

struct TraversalParams {
  std::size_t beam_width = 30;  // b
  std::size_t iterations = 1;   // n_i
  std::size_t n_ret = 10;
  RetrievalMode mode = RetrievalMode::full;
  bool parallel = true;  // use the OpenMP kernels; results are identical either way
};

inline constexpr std::uint32_t kDummyEndpoint = kernels::kNoRow;
inline constexpr double kOneSidedTolerance = 1e-9;

/// A coarse edge (or a dummy edge on an isolated node) scored against the subqueries.
struct ScoredEdge {
  std::uint32_t a = 0;                     // lower-id endpoint
  std::uint32_t b = kDummyEndpoint;        // higher-id endpoint, or kDummyEndpoint
  double score = 0.0;                      // sum over subqueries of the best subcomponent similarity
  std::vector<std::uint32_t> argmax;       // per subquery: node index of the best subcomponent
  std::optional<std::uint32_t> one_sided;  // endpoint that alone explains the score

  bool dummy() const noexcept { return b == kDummyEndpoint; }
};

struct RankedItem {
  std::string comp_id;
  double score = 0.0;
  double coarse_similarity = 0.0;
  std::vector<std::uint32_t> evidence;  // best-matching subcomponent node per subquery
};

struct StageTimings {
  double seed_ms = 0;
  double traversal_ms = 0;
  double total_ms = 0;
};

struct RankedResult {
  std::vector<RankedItem> items;
  StageTimings timings;
  TraversalParams params;
  bool decomposition_fallback = false;
};

/// Top-`b` layer-0 nodes by cosine to the coarse query embedding; ties by ascending id.
/// Throws Error on an empty graph.
std::vector<std::pair<std::uint32_t, double>> seed_candidates(const LayeredComponentGraph& graph,
                                                              std::span<const float> coarse_query,
                                                              std::size_t b, bool parallel = true);

/// Scores one edge directly from its endpoints' subcomponents. Pass kDummyEndpoint as `beta`
/// for a dummy edge. Endpoints may be given in either order. Throws Error on unknown nodes.
ScoredEdge score_edge(const LayeredComponentGraph& graph, std::uint32_t alpha, std::uint32_t beta,
                      const DecomposedQuery& dq);

/// Id-based convenience overload; `beta` empty means a dummy edge.
ScoredEdge score_edge(const LayeredComponentGraph& graph, std::string_view alpha, std::string_view beta,
                      const DecomposedQuery& dq);

/// Late-interaction beam traversal.
RankedResult traverse(const LayeredComponentGraph& graph, const DecomposedQuery& dq, const TraversalParams& params);

/// Coarse-only ranking of every layer-0 node.
RankedResult retrieve_knn(const LayeredComponentGraph& graph, std::span<const float> coarse_query,
                          std::size_t n_ret, bool parallel = true);

/// Top-`b` coarse nodes rescored by their best subcomponent against the coarse query.
RankedResult retrieve_rerank(const LayeredComponentGraph& graph, std::span<const float> coarse_query,
                             std::size_t b, std::size_t n_ret, bool parallel = true);

/// Dispatches on params.mode.
RankedResult retrieve(const LayeredComponentGraph& graph, const DecomposedQuery& dq, const TraversalParams& params);

}  // namespace lilac
