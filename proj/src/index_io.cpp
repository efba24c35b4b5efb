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

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lilac/graph.hpp"

namespace lilac {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "lilac-index";

static_assert(sizeof(float) == 4);

std::uint32_t byteswap32(std::uint32_t x) {
  return ((x & 0xFFU) << 24) | ((x & 0xFF00U) << 8) | ((x >> 8) & 0xFF00U) | (x >> 24);
}

std::string encode_floats(const std::vector<float>& values) {
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(values[i]);
    if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
    std::memcpy(bytes.data() + i * 4, &bits, 4);
  }
  return bytes;
}

std::vector<float> decode_floats(const std::string& bytes) {
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + i * 4, 4);
    if constexpr (std::endian::native == std::endian::big) bits = byteswap32(bits);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IndexFormatError("missing index file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& contents) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("short write to " + p.string());
}

std::vector<json> read_records(const fs::path& p) {
  std::istringstream in(read_file(p));
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw IndexFormatError(p.filename().string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

json counts_to_json(const GraphCounts& c) {
  return {{"documents", c.documents},   {"components", c.components}, {"subcomponents", c.subcomponents},
          {"e0_intra", c.e0_intra},     {"e0_inter", c.e0_inter},     {"e_down", c.e_down}};
}

GraphCounts counts_from_json(const json& j) {
  GraphCounts c;
  c.documents = j.at("documents").get<std::size_t>();
  c.components = j.at("components").get<std::size_t>();
  c.subcomponents = j.at("subcomponents").get<std::size_t>();
  c.e0_intra = j.at("e0_intra").get<std::size_t>();
  c.e0_inter = j.at("e0_inter").get<std::size_t>();
  c.e_down = j.at("e_down").get<std::size_t>();
  return c;
}

}  // namespace

void save_index(const LayeredComponentGraph& graph, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root);
  const auto& m = graph.manifest();
  const std::size_t d = m.dimension;

  const auto blob = encode_floats(graph.raw_embeddings());

  json manifest = {{"format", kFormat},
                   {"version", m.version},
                   {"embedder", m.embedder_id},
                   {"dimension", d},
                   {"hash_seeds", {m.seeds.index_seed, m.seeds.sign_seed}},
                   {"corpus_digest", m.corpus_digest},
                   {"node_count", graph.node_count()},
                   {"embeddings_bytes", blob.size()},
                   {"embeddings_digest", to_hex(fnv1a64(blob))},
                   {"counts", counts_to_json(m.counts)}};
  write_file(root / "manifest", manifest.dump(2) + "\n");

  std::string docs;
  for (const auto& doc : graph.documents()) {
    docs += json{{"doc_id", doc.doc_id}, {"title", doc.title}}.dump() + "\n";
  }
  write_file(root / "documents", docs);

  std::string nodes;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto& n = graph.node(static_cast<std::uint32_t>(i));
    json rec = {{"id", n.id},
                {"layer", n.layer()},
                {"type", to_string(n.type)},
                {"content", n.content},
                {"offset", i * d * 4}};
    if (n.layer() == 0) rec["doc"] = graph.documents()[n.doc].doc_id;
    nodes += rec.dump() + "\n";
  }
  write_file(root / "nodes", nodes);

  std::string edges;
  for (const auto& e : graph.coarse_edges()) {
    edges += json{{"e0", {graph.node(e.u).id, graph.node(e.v).id}}, {"provenance", to_string(e.provenance)}}.dump() +
             "\n";
  }
  for (const auto& [p, c] : graph.containment_edges()) {
    edges += json{{"down", {graph.node(p).id, graph.node(c).id}}}.dump() + "\n";
  }
  write_file(root / "edges", edges);

  write_file(root / "embeddings.bin", blob);
}

LayeredComponentGraph load_index(const std::string& dir) {
  const fs::path root(dir);
  try {
    const auto manifest_json = json::parse(read_file(root / "manifest"));
    if (manifest_json.at("format").get<std::string>() != kFormat) throw IndexFormatError("not a lilac index");
    Manifest m;
    m.version = manifest_json.at("version").get<int>();
    if (m.version != 1) throw IndexFormatError("unsupported index version " + std::to_string(m.version));
    m.embedder_id = manifest_json.at("embedder").get<std::string>();
    m.dimension = manifest_json.at("dimension").get<std::size_t>();
    const auto seeds = manifest_json.at("hash_seeds").get<std::vector<std::uint64_t>>();
    if (seeds.size() != 2) throw IndexFormatError("manifest hash_seeds must hold two values");
    m.seeds = {seeds[0], seeds[1]};
    m.corpus_digest = manifest_json.at("corpus_digest").get<std::string>();
    m.counts = counts_from_json(manifest_json.at("counts"));
    const auto node_count = manifest_json.at("node_count").get<std::size_t>();
    const auto blob_bytes = manifest_json.at("embeddings_bytes").get<std::size_t>();
    const auto blob_digest = manifest_json.at("embeddings_digest").get<std::string>();
    const std::size_t d = m.dimension;
    if (d == 0) throw IndexFormatError("manifest dimension is zero");

    std::vector<DocInfo> docs;
    std::unordered_map<std::string, std::uint32_t> doc_index;
    for (const auto& r : read_records(root / "documents")) {
      doc_index.emplace(r.at("doc_id").get<std::string>(), static_cast<std::uint32_t>(docs.size()));
      docs.push_back({r.at("doc_id").get<std::string>(), r.at("title").get<std::string>()});
    }

    std::vector<Node> nodes;
    std::unordered_map<std::string, std::uint32_t> node_index;
    for (const auto& r : read_records(root / "nodes")) {
      Node n;
      n.id = r.at("id").get<std::string>();
      const auto type = parse_node_type(r.at("type").get<std::string>());
      if (!type) throw IndexFormatError("node " + n.id + " has an unknown type");
      n.type = *type;
      if (r.at("layer").get<int>() != n.layer()) throw IndexFormatError("node " + n.id + " layer/type mismatch");
      n.content = r.at("content").get<std::string>();
      if (r.at("offset").get<std::size_t>() != nodes.size() * d * 4) {
        throw IndexFormatError("node " + n.id + " has an inconsistent embedding offset");
      }
      if (n.layer() == 0) {
        const auto it = doc_index.find(r.at("doc").get<std::string>());
        if (it == doc_index.end()) throw IndexFormatError("node " + n.id + " references an unknown document");
        n.doc = it->second;
      }
      node_index.emplace(n.id, static_cast<std::uint32_t>(nodes.size()));
      nodes.push_back(std::move(n));
    }
    if (nodes.size() != node_count) throw IndexFormatError("node file is truncated");

    const auto lookup = [&](const std::string& id) {
      const auto it = node_index.find(id);
      if (it == node_index.end()) throw IndexFormatError("edge references unknown node " + id);
      return it->second;
    };
    std::size_t coarse = 0;
    while (coarse < nodes.size() && nodes[coarse].layer() == 0) ++coarse;
    std::vector<CoarseEdge> edges;
    std::vector<std::uint32_t> parents(nodes.size() - coarse, kernels::kNoRow);
    for (const auto& r : read_records(root / "edges")) {
      if (r.contains("e0")) {
        const auto ends = r.at("e0").get<std::vector<std::string>>();
        if (ends.size() != 2) throw IndexFormatError("e0 record must have two endpoints");
        const auto prov = r.at("provenance").get<std::string>();
        if (prov != "intra" && prov != "inter") throw IndexFormatError("unknown edge provenance " + prov);
        edges.push_back({lookup(ends[0]), lookup(ends[1]),
                         prov == "intra" ? EdgeProvenance::intra : EdgeProvenance::inter});
      } else {
        const auto ends = r.at("down").get<std::vector<std::string>>();
        if (ends.size() != 2) throw IndexFormatError("down record must have two endpoints");
        const auto child = lookup(ends[1]);
        if (child < coarse) throw IndexFormatError("containment child " + ends[1] + " is a layer-0 node");
        auto& slot = parents[child - coarse];
        if (slot != kernels::kNoRow) throw IndexFormatError("node " + ends[1] + " has two parents");
        slot = lookup(ends[0]);
      }
    }
    if (std::find(parents.begin(), parents.end(), kernels::kNoRow) != parents.end()) {
      throw IndexFormatError("a layer-1 node has no containment parent");
    }

    for (std::size_t i = coarse; i < nodes.size(); ++i) {
      const auto p = parents[i - coarse];
      if (p >= coarse) throw IndexFormatError("containment parent of " + nodes[i].id + " is not a layer-0 node");
      nodes[i].doc = nodes[p].doc;
    }

    const auto blob = read_file(root / "embeddings.bin");
    if (blob.size() != blob_bytes || blob.size() != nodes.size() * d * 4) {
      throw IndexFormatError("embeddings.bin holds " + std::to_string(blob.size()) + " bytes, expected " +
                             std::to_string(nodes.size() * d * 4));
    }
    if (to_hex(fnv1a64(blob)) != blob_digest) throw IndexFormatError("embeddings.bin digest mismatch");

    auto graph = LayeredComponentGraph::assemble(std::move(docs), std::move(nodes), std::move(edges),
                                                 std::move(parents), decode_floats(blob), m);
    GraphCounts actual;
    actual.documents = graph.documents().size();
    actual.components = graph.coarse_count();
    actual.subcomponents = graph.node_count() - graph.coarse_count();
    actual.e_down = actual.subcomponents;
    for (const auto& e : graph.coarse_edges()) {
      (e.provenance == EdgeProvenance::intra ? actual.e0_intra : actual.e0_inter) += 1;
    }
    if (!(actual == m.counts)) throw IndexFormatError("manifest counts do not match index contents");
    return graph;
  } catch (const json::exception& e) {
    throw IndexFormatError(std::string("malformed index: ") + e.what());
  }
}

}  // namespace lilac
