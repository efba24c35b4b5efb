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

#include "lilac/graph.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <numeric>

namespace lilac {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

NodeType coarse_type(Modality m) {
  switch (m) {
    case Modality::paragraph: return NodeType::para;
    case Modality::table: return NodeType::tbl;
    case Modality::image: return NodeType::img;
  }
  return NodeType::para;
}

NodeType fine_type(Modality m) {
  switch (m) {
    case Modality::paragraph: return NodeType::sent;
    case Modality::table: return NodeType::row;
    case Modality::image: return NodeType::obj;
  }
  return NodeType::sent;
}

Instruction node_instruction(NodeType t) {
  switch (t) {
    case NodeType::para:
    case NodeType::sent: return Instruction::text;
    case NodeType::tbl:
    case NodeType::row: return Instruction::table;
    case NodeType::img:
    case NodeType::obj: return Instruction::image;
  }
  return Instruction::none;
}

}  // namespace

std::string_view to_string(NodeType t) {
  switch (t) {
    case NodeType::para: return "para";
    case NodeType::tbl: return "tbl";
    case NodeType::img: return "img";
    case NodeType::sent: return "sent";
    case NodeType::row: return "row";
    case NodeType::obj: return "obj";
  }
  return "?";
}

std::optional<NodeType> parse_node_type(std::string_view s) {
  for (auto t : {NodeType::para, NodeType::tbl, NodeType::img, NodeType::sent, NodeType::row, NodeType::obj}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::string_view to_string(EdgeProvenance p) { return p == EdgeProvenance::intra ? "intra" : "inter"; }

LayeredComponentGraph LayeredComponentGraph::assemble(std::vector<DocInfo> documents, std::vector<Node> nodes,
                                                      std::vector<CoarseEdge> coarse_edges,
                                                      std::vector<std::uint32_t> parents,
                                                      std::vector<float> embeddings, Manifest manifest) {
  const auto fail = [](const std::string& why) { throw IndexFormatError(why); };

  LayeredComponentGraph g;
  g.documents_ = std::move(documents);
  g.nodes_ = std::move(nodes);
  g.coarse_edges_ = std::move(coarse_edges);
  g.parents_ = std::move(parents);
  g.embeddings_ = std::move(embeddings);
  g.manifest_ = std::move(manifest);

  const std::size_t n = g.nodes_.size();
  const std::size_t d = g.manifest_.dimension;
  if (d == 0) fail("manifest dimension is zero");
  if (n > kernels::kNoRow) fail("too many nodes");

  std::size_t coarse = 0;
  while (coarse < n && g.nodes_[coarse].layer() == 0) ++coarse;
  for (std::size_t i = coarse; i < n; ++i) {
    if (g.nodes_[i].layer() != 1) fail("layer-0 node " + g.nodes_[i].id + " appears after layer-1 nodes");
  }
  g.coarse_count_ = coarse;

  g.by_id_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!g.by_id_.emplace(g.nodes_[i].id, static_cast<std::uint32_t>(i)).second) {
      fail("duplicate node id " + g.nodes_[i].id);
    }
    if (g.nodes_[i].layer() == 0 && g.nodes_[i].doc >= g.documents_.size()) {
      fail("node " + g.nodes_[i].id + " references a missing document");
    }
  }

  if (g.embeddings_.size() != n * d) {
    fail("embedding blob holds " + std::to_string(g.embeddings_.size()) + " floats, expected " +
         std::to_string(n * d));
  }
  g.norms_.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.norms_[i] = l2_norm(g.embedding(static_cast<std::uint32_t>(i)));

  std::vector<std::uint32_t> order(coarse);
  std::iota(order.begin(), order.end(), 0U);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return g.nodes_[a].id < g.nodes_[b].id; });
  g.id_rank_.assign(coarse, 0);
  for (std::uint32_t r = 0; r < coarse; ++r) g.id_rank_[order[r]] = r;

  // Containment: children of each coarse node must be contiguous and in node order.
  if (g.parents_.size() != n - coarse) fail("containment edges do not cover every layer-1 node");
  g.children_.assign(coarse, kernels::RowRange{0, 0});
  std::vector<bool> seen(coarse, false);
  std::uint32_t last_parent = 0;
  for (std::size_t f = 0; f < g.parents_.size(); ++f) {
    const auto p = g.parents_[f];
    const auto row = static_cast<std::uint32_t>(coarse + f);
    if (p >= coarse) fail("containment parent of " + g.nodes_[row].id + " is not a layer-0 node");
    if (f > 0 && p < last_parent) fail("layer-1 nodes are not grouped in parent order");
    if (!seen[p]) {
      seen[p] = true;
      g.children_[p].begin = row;
    }
    g.children_[p].end = row + 1;
    last_parent = p;
  }
  for (std::size_t c = 0; c < coarse; ++c) {
    if (!seen[c]) fail("layer-0 node " + g.nodes_[c].id + " has no layer-1 child");
  }

  // Coarse edges: canonical, unique, no self pairs.
  for (const auto& e : g.coarse_edges_) {
    if (e.u >= coarse || e.v >= coarse) fail("coarse edge endpoint is not a layer-0 node");
    if (e.u == e.v) fail("self pair on " + g.nodes_[e.u].id);
    if (!(g.nodes_[e.u].id < g.nodes_[e.v].id)) {
      fail("coarse edge " + g.nodes_[e.u].id + " - " + g.nodes_[e.v].id + " is not canonical");
    }
  }
  {
    std::vector<std::uint64_t> keys;
    keys.reserve(g.coarse_edges_.size());
    for (const auto& e : g.coarse_edges_) keys.push_back((std::uint64_t{e.u} << 32) | e.v);
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) fail("duplicate coarse edge");
  }

  std::vector<std::uint32_t> degree(coarse, 0);
  for (const auto& e : g.coarse_edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  g.adjacency_offsets_.assign(coarse + 1, 0);
  for (std::size_t c = 0; c < coarse; ++c) g.adjacency_offsets_[c + 1] = g.adjacency_offsets_[c] + degree[c];
  g.adjacency_.assign(g.adjacency_offsets_.back(), 0);
  std::vector<std::uint32_t> fill(g.adjacency_offsets_.begin(), g.adjacency_offsets_.end() - 1);
  for (const auto& e : g.coarse_edges_) {
    g.adjacency_[fill[e.u]++] = e.v;
    g.adjacency_[fill[e.v]++] = e.u;
  }
  for (std::size_t c = 0; c < coarse; ++c) {
    std::sort(g.adjacency_.begin() + g.adjacency_offsets_[c], g.adjacency_.begin() + g.adjacency_offsets_[c + 1],
              [&](std::uint32_t a, std::uint32_t b) { return g.id_rank_[a] < g.id_rank_[b]; });
  }
  return g;
}

std::optional<std::uint32_t> LayeredComponentGraph::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::uint32_t> LayeredComponentGraph::adjacency(std::uint32_t coarse) const {
  return std::span<const std::uint32_t>(adjacency_).subspan(
      adjacency_offsets_[coarse], adjacency_offsets_[coarse + 1] - adjacency_offsets_[coarse]);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> LayeredComponentGraph::containment_edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(parents_.size());
  for (std::size_t f = 0; f < parents_.size(); ++f) {
    out.emplace_back(parents_[f], static_cast<std::uint32_t>(coarse_count_ + f));
  }
  return out;
}

std::span<const float> LayeredComponentGraph::embedding(std::uint32_t i) const {
  const std::size_t d = manifest_.dimension;
  return std::span<const float>(embeddings_).subspan(i * d, d);
}

std::vector<std::string> LayeredComponentGraph::neighbors(std::string_view id) const {
  const auto i = find(id);
  if (!i) throw Error("unknown node id '" + std::string(id) + "'");
  if (*i >= coarse_count_) throw Error("node '" + std::string(id) + "' is not a layer-0 node");
  std::vector<std::string> out;
  for (auto v : adjacency(*i)) out.push_back(nodes_[v].id);
  return out;
}

bool LayeredComponentGraph::operator==(const LayeredComponentGraph& other) const {
  return documents_ == other.documents_ && nodes_ == other.nodes_ && coarse_edges_ == other.coarse_edges_ &&
         parents_ == other.parents_ && manifest_ == other.manifest_ &&
         embeddings_.size() == other.embeddings_.size() &&
         std::memcmp(embeddings_.data(), other.embeddings_.data(), embeddings_.size() * sizeof(float)) == 0;
}

std::string component_content(const Component& c) {
  switch (c.modality) {
    case Modality::paragraph:
      return c.text;
    case Modality::table: {
      std::string out;
      if (c.rows && !c.rows->empty()) {
        for (std::size_t i = 0; i < c.rows->front().size(); ++i) {
          if (i > 0) out += " | ";
          out += c.rows->front()[i];
        }
      }
      return out;
    }
    case Modality::image: {
      std::string out = c.text;
      if (c.objects) {
        for (const auto& o : *c.objects) {
          if (!out.empty()) out.push_back(' ');
          out += o.label;
        }
      }
      return out;
    }
  }
  return {};
}

BuildResult build_graph(const Corpus& corpus, const LinkMapping& links, Embedder& embedder,
                        const BuildOptions& options) {
  const auto t_start = Clock::now();
  BuildReport report;
  report.dropped_links = links.dropped;

  // Node generation: coarse nodes, then each component's subcomponents.
  auto t0 = Clock::now();
  std::vector<DocInfo> docs;
  std::vector<Node> nodes;
  std::vector<std::uint32_t> parents;
  std::unordered_map<std::string, std::uint32_t> coarse_index;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> doc_ranges;  // coarse [begin, end) per doc
  docs.reserve(corpus.documents().size());
  nodes.reserve(corpus.component_count());
  for (const auto& doc : corpus.documents()) {
    const auto doc_idx = static_cast<std::uint32_t>(docs.size());
    docs.push_back({doc.doc_id, doc.title});
    const auto begin = static_cast<std::uint32_t>(nodes.size());
    for (const auto& c : doc.components) {
      coarse_index.emplace(c.comp_id, static_cast<std::uint32_t>(nodes.size()));
      nodes.push_back({c.comp_id, coarse_type(c.modality), component_content(c), doc_idx});
    }
    doc_ranges.emplace_back(begin, static_cast<std::uint32_t>(nodes.size()));
  }
  const auto coarse_count = static_cast<std::uint32_t>(nodes.size());
  for (const auto& doc : corpus.documents()) {
    for (const auto& c : doc.components) {
      const auto parent = coarse_index.at(c.comp_id);
      auto subs = subcomponents(c);
      if (subs.empty()) {
        subs.push_back({child_id(c.comp_id, 0), c.comp_id, SubKind::sentence, nodes[parent].content});
      }
      for (auto& s : subs) {
        nodes.push_back({std::move(s.sub_id), fine_type(c.modality), std::move(s.content), nodes[parent].doc});
        parents.push_back(parent);
      }
    }
  }
  report.counts.documents = docs.size();
  report.counts.components = coarse_count;
  report.counts.subcomponents = nodes.size() - coarse_count;
  report.counts.e_down = parents.size();
  report.node_generation_ms = ms_since(t0);

  // Edge generation: intra-document cliques plus link-driven inter-document edges.
  t0 = Clock::now();
  const auto canonical = [&](std::uint32_t a, std::uint32_t b) {
    return nodes[a].id < nodes[b].id ? std::pair{a, b} : std::pair{b, a};
  };
  std::vector<CoarseEdge> edges;
  for (const auto& [begin, end] : doc_ranges) {
    for (auto i = begin; i < end; ++i) {
      for (auto j = i + 1; j < end; ++j) {
        const auto [u, v] = canonical(i, j);
        edges.push_back({u, v, EdgeProvenance::intra});
      }
    }
  }
  report.counts.e0_intra = edges.size();
  std::vector<std::uint64_t> inter;
  for (const auto& [comp_id, target] : links.pairs) {
    const auto src = coarse_index.find(comp_id);
    const auto* target_doc = corpus.find_document(target);
    if (src == coarse_index.end() || target_doc == nullptr) continue;
    const auto target_idx = static_cast<std::uint32_t>(target_doc - corpus.documents().data());
    if (nodes[src->second].doc == target_idx) continue;  // covered by the clique
    const auto [begin, end] = doc_ranges[target_idx];
    for (auto j = begin; j < end; ++j) {
      const auto [u, v] = canonical(src->second, j);
      inter.push_back((std::uint64_t{u} << 32) | v);
    }
  }
  std::sort(inter.begin(), inter.end());
  inter.erase(std::unique(inter.begin(), inter.end()), inter.end());
  for (auto key : inter) {
    edges.push_back({static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key & 0xFFFFFFFFU),
                     EdgeProvenance::inter});
  }
  report.counts.e0_inter = inter.size();
  report.edge_generation_ms = ms_since(t0);

  // Embedding generation, in batches so a failure can report progress.
  t0 = Clock::now();
  const std::size_t d = embedder.dimension();
  std::vector<float> blob(nodes.size() * d);
  const std::size_t batch = std::max<std::size_t>(1, options.embed_batch_size);
  for (std::size_t start = 0; start < nodes.size(); start += batch) {
    const auto len = std::min(batch, nodes.size() - start);
    std::vector<EmbedRequest> requests;
    requests.reserve(len);
    for (std::size_t i = start; i < start + len; ++i) {
      requests.push_back({nodes[i].content, node_instruction(nodes[i].type)});
    }
    std::vector<Embedding> vectors;
    try {
      vectors = embed_batch(embedder, requests);
    } catch (const EmbeddingBackendError& e) {
      report.embedding_generation_ms = ms_since(t0);
      report.total_ms = ms_since(t_start);
      throw BuildError("embedding failed at node " + std::to_string(start + e.index()) + ": " + e.what(), report);
    }
    for (std::size_t k = 0; k < len; ++k) {
      std::copy(vectors[k].begin(), vectors[k].end(), blob.begin() + static_cast<std::ptrdiff_t>((start + k) * d));
    }
    report.embedded_nodes = start + len;
  }
  report.embedding_generation_ms = ms_since(t0);

  Manifest manifest;
  manifest.embedder_id = embedder.id();
  manifest.dimension = d;
  if (const auto* hash = dynamic_cast<const HashEmbedder*>(&embedder)) manifest.seeds = hash->seeds();
  manifest.corpus_digest = corpus_digest(corpus);
  manifest.counts = report.counts;

  // Assembly builds adjacency; it is accounted to edge generation.
  t0 = Clock::now();
  auto graph = LayeredComponentGraph::assemble(std::move(docs), std::move(nodes), std::move(edges),
                                               std::move(parents), std::move(blob), std::move(manifest));
  report.edge_generation_ms += ms_since(t0);
  report.total_ms = ms_since(t_start);
  return {std::move(graph), report};
}

void check_compatible(const Manifest& manifest, const Embedder& embedder) {
  if (manifest.embedder_id != embedder.id()) {
    throw ConfigError("index was built with embedder '" + manifest.embedder_id + "', configured '" +
                      embedder.id() + "'");
  }
  if (manifest.dimension != embedder.dimension()) {
    throw ConfigError("index dimension " + std::to_string(manifest.dimension) + " != configured " +
                      std::to_string(embedder.dimension()));
  }
  if (const auto* hash = dynamic_cast<const HashEmbedder*>(&embedder)) {
    if (!(hash->seeds() == manifest.seeds)) throw ConfigError("index hash seeds differ from configured seeds");
  }
}

}  // namespace lilac
