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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lilac/corpus.hpp"
#include "lilac/embedding.hpp"
#include "lilac/kernels.hpp"
#include "lilac/segmenter.hpp"

namespace lilac {

/// Node type; the first three live in layer 0, the rest in layer 1.
enum class NodeType : std::uint8_t { para, tbl, img, sent, row, obj };

std::string_view to_string(NodeType t);
std::optional<NodeType> parse_node_type(std::string_view s);
constexpr int layer_of(NodeType t) { return t == NodeType::para || t == NodeType::tbl || t == NodeType::img ? 0 : 1; }

enum class EdgeProvenance : std::uint8_t { intra, inter };

std::string_view to_string(EdgeProvenance p);

struct DocInfo {
  std::string doc_id;
  std::string title;

  bool operator==(const DocInfo&) const = default;
};

struct Node {
  std::string id;
  NodeType type = NodeType::para;
  std::string content;
  std::uint32_t doc = 0;  // index into documents(); a subcomponent carries its parent's

  int layer() const { return layer_of(type); }
  bool operator==(const Node&) const = default;
};

/// Undirected coarse edge stored as (lower id, higher id).
struct CoarseEdge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  EdgeProvenance provenance = EdgeProvenance::intra;

  bool operator==(const CoarseEdge&) const = default;
};

struct GraphCounts {
  std::size_t documents = 0;
  std::size_t components = 0;
  std::size_t subcomponents = 0;
  std::size_t e0_intra = 0;
  std::size_t e0_inter = 0;
  std::size_t e_down = 0;

  bool operator==(const GraphCounts&) const = default;
};

struct Manifest {
  int version = 1;
  std::string embedder_id;
  std::size_t dimension = 0;
  HashSeeds seeds;
  std::string corpus_digest;
  GraphCounts counts;

  bool operator==(const Manifest&) const = default;
};

/// Two-layer graph: components (layer 0) with coarse edges, and their subcomponents
/// (layer 1) attached by containment edges. Immutable once assembled; safe to share
/// across query threads.
///
/// Node order: all layer-0 nodes first, then layer-1 nodes grouped by parent in the same
/// order, so the children of a component occupy a contiguous row range.
class LayeredComponentGraph {
 public:
  LayeredComponentGraph() = default;

  /// Validates every structural invariant and builds adjacency. `parents[i]` is the
  /// layer-0 parent of node `coarse_count + i`. Throws IndexFormatError on violation.
  static LayeredComponentGraph assemble(std::vector<DocInfo> documents, std::vector<Node> nodes,
                                        std::vector<CoarseEdge> coarse_edges,
                                        std::vector<std::uint32_t> parents, std::vector<float> embeddings,
                                        Manifest manifest);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t coarse_count() const noexcept { return coarse_count_; }
  std::size_t dimension() const noexcept { return manifest_.dimension; }

  const Node& node(std::uint32_t i) const { return nodes_[i]; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<DocInfo>& documents() const noexcept { return documents_; }
  std::optional<std::uint32_t> find(std::string_view id) const;

  /// Position of a layer-0 node in ascending-id order; used for id tie-breaks.
  std::uint32_t id_rank(std::uint32_t coarse) const { return id_rank_[coarse]; }

  /// Coarse neighbours in ascending id order.
  std::span<const std::uint32_t> adjacency(std::uint32_t coarse) const;
  kernels::RowRange children(std::uint32_t coarse) const { return children_[coarse]; }
  std::uint32_t parent(std::uint32_t fine) const { return parents_[fine - coarse_count_]; }

  std::span<const CoarseEdge> coarse_edges() const noexcept { return coarse_edges_; }
  /// (parent, child) pairs, in node order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> containment_edges() const;

  std::span<const float> embedding(std::uint32_t i) const;
  double norm(std::uint32_t i) const { return norms_[i]; }
  kernels::MatrixView matrix() const { return {embeddings_, norms_, manifest_.dimension}; }
  const std::vector<float>& raw_embeddings() const noexcept { return embeddings_; }

  const Manifest& manifest() const noexcept { return manifest_; }

  /// Coarse neighbour ids of a layer-0 node, ascending. Throws Error for unknown or layer-1 ids.
  std::vector<std::string> neighbors(std::string_view id) const;

  /// Structural equality with bit-exact embedding comparison.
  bool operator==(const LayeredComponentGraph& other) const;

 private:
  std::vector<DocInfo> documents_;
  std::vector<Node> nodes_;
  std::size_t coarse_count_ = 0;
  std::vector<CoarseEdge> coarse_edges_;
  std::vector<std::uint32_t> parents_;
  std::vector<float> embeddings_;
  std::vector<double> norms_;
  Manifest manifest_;

  std::unordered_map<std::string, std::uint32_t> by_id_;
  std::vector<std::uint32_t> id_rank_;
  std::vector<std::uint32_t> adjacency_offsets_;
  std::vector<std::uint32_t> adjacency_;
  std::vector<kernels::RowRange> children_;
};

struct BuildReport {
  GraphCounts counts;
  std::size_t dropped_links = 0;
  std::size_t embedded_nodes = 0;  // progress; equals node count on success
  double node_generation_ms = 0;
  double edge_generation_ms = 0;
  double embedding_generation_ms = 0;
  double total_ms = 0;
};

struct BuildOptions {
  std::size_t embed_batch_size = 512;
};

/// Build aborted by the embedding backend; carries the progress made so far.
class BuildError : public Error {
 public:
  BuildError(const std::string& what, BuildReport partial) : Error(what), partial_(partial) {}
  const BuildReport& partial() const noexcept { return partial_; }

 private:
  BuildReport partial_;
};

struct BuildResult {
  LayeredComponentGraph graph;
  BuildReport report;
};

/// Text the encoder sees for a component: paragraph body, table header joined by " | ",
/// or image caption followed by object labels.
std::string component_content(const Component& c);

BuildResult build_graph(const Corpus& corpus, const LinkMapping& links, Embedder& embedder,
                        const BuildOptions& options = {});

/// Writes `manifest`, `documents`, `nodes`, `edges`, `embeddings.bin` into `dir` (created if missing).
void save_index(const LayeredComponentGraph& graph, const std::string& dir);

/// Throws IndexFormatError on missing, truncated, tampered or inconsistent files.
LayeredComponentGraph load_index(const std::string& dir);

/// Throws ConfigError when the embedder cannot produce vectors comparable to the index.
void check_compatible(const Manifest& manifest, const Embedder& embedder);

}  // namespace lilac
