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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lilac/graph.hpp"
#include "support/oracles.hpp"

using namespace lilac;
namespace fs = std::filesystem;

namespace {

Corpus fixture() { return load_corpus(std::string(LILAC_TEST_DATA) + "/fixture_corpus.jsonl"); }

nlohmann::json golden() {
  std::ifstream in(std::string(LILAC_TEST_DATA) + "/fixture_golden.json");
  return nlohmann::json::parse(in);
}

BuildResult build(const Corpus& c, std::size_t d = 256) {
  HashEmbedder e(d);
  return build_graph(c, resolve_links(c), e);
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("lilac_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

Document doc(const std::string& id, std::vector<Component> comps) { return {id, id, std::move(comps)}; }

Component para(const std::string& text, std::vector<std::string> links = {}) {
  Component c;
  c.text = text;
  c.links = std::move(links);
  return c;
}

class FailingEmbedder final : public Embedder {
 public:
  std::string id() const override { return "failing"; }
  std::size_t dimension() const override { return 8; }
  std::vector<Embedding> embed(std::span<const EmbedRequest> r) override {
    if (++calls_ > 1) throw EmbeddingBackendError(0, "down");
    return std::vector<Embedding>(r.size(), Embedding(8, 0.5f));
  }

 private:
  int calls_ = 0;
};

}  // namespace

TEST(Graph, FixtureMatchesGolden) {
  const auto g = build(fixture()).graph;
  const auto want = golden();

  ASSERT_EQ(g.coarse_count(), want["coarse"].size());
  for (std::size_t i = 0; i < g.coarse_count(); ++i) {
    const auto& n = g.node(static_cast<std::uint32_t>(i));
    EXPECT_EQ(n.id, want["coarse"][i][0]);
    EXPECT_EQ(to_string(n.type), want["coarse"][i][1].get<std::string>());
    EXPECT_EQ(n.layer(), 0);
  }
  std::set<std::tuple<std::string, std::string, std::string, std::string>> fine, fine_want;
  for (auto i = g.coarse_count(); i < g.node_count(); ++i) {
    const auto& n = g.node(static_cast<std::uint32_t>(i));
    EXPECT_EQ(n.layer(), 1);
    fine.emplace(n.id, std::string(to_string(n.type)), g.node(g.parent(static_cast<std::uint32_t>(i))).id, n.content);
  }
  for (const auto& f : want["fine"]) fine_want.emplace(f[0], f[1], f[2], f[3]);
  EXPECT_EQ(fine, fine_want);

  std::set<std::tuple<std::string, std::string, std::string>> e0, e0_want;
  for (const auto& e : g.coarse_edges()) e0.emplace(g.node(e.u).id, g.node(e.v).id, std::string(to_string(e.provenance)));
  for (const auto& e : want["e0"]) e0_want.emplace(e[0], e[1], e[2]);
  EXPECT_EQ(e0, e0_want);

  for (const auto& [id, nbrs] : want["neighbors"].items()) {
    EXPECT_EQ(g.neighbors(id), nbrs.get<std::vector<std::string>>()) << id;
  }
  const auto& c = g.manifest().counts;
  EXPECT_EQ(c.documents, want["counts"]["documents"]);
  EXPECT_EQ(c.components, want["counts"]["components"]);
  EXPECT_EQ(c.subcomponents, want["counts"]["subcomponents"]);
  EXPECT_EQ(c.e0_intra, want["counts"]["e0_intra"]);
  EXPECT_EQ(c.e0_inter, want["counts"]["e0_inter"]);
  EXPECT_EQ(c.e_down, want["counts"]["e_down"]);
}

TEST(Graph, NeighborErrors) {
  const auto g = build(fixture()).graph;
  EXPECT_THROW(g.neighbors("A/0/0"), Error);
  EXPECT_THROW(g.neighbors("nope"), Error);
}

TEST(Graph, EmbeddingsUseOwnLabel) {
  const auto g = build(fixture()).graph;
  const std::map<NodeType, std::string> label{{NodeType::para, "text"}, {NodeType::tbl, "table"}, {NodeType::img, "image"},
                                              {NodeType::sent, "text"}, {NodeType::row, "table"}, {NodeType::obj, "image"}};
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    const auto& n = g.node(i);
    const auto e = g.embedding(i);
    EXPECT_EQ(std::vector<float>(e.begin(), e.end()), oracle::embed(n.content, label.at(n.type), 256)) << n.id;
  }
  EXPECT_EQ(g.node(*g.find("A/1")).content, "Taj Mahal at dawn minaret dome");
}

TEST(Graph, FourComponentClique) {
  const Corpus c({doc("D", {para("a"), para("b"), para("c"), para("d")})});
  const auto g = build(c).graph;
  EXPECT_EQ(g.manifest().counts.e0_intra, 6u);
  EXPECT_EQ(g.coarse_edges().size(), 6u);
}

TEST(Graph, IsolatedAndPseudoChildren) {
  Component img;
  img.modality = Modality::image;
  img.text = "harbour at night";
  img.objects = std::vector<ObjectAnnotation>{};
  Component tbl;
  tbl.modality = Modality::table;
  tbl.rows = TableRows{{"Port", "Ships"}};
  const Corpus c({doc("I", {img}), doc("T", {tbl}), doc("P", {para("Lonely.")})});
  const auto g = build(c).graph;
  EXPECT_TRUE(g.neighbors("P/0").empty());
  EXPECT_TRUE(g.coarse_edges().empty());
  for (const char* id : {"I/0", "T/0", "P/0"}) {
    const auto u = *g.find(id);
    const auto r = g.children(u);
    ASSERT_EQ(r.end - r.begin, 1u) << id;
    EXPECT_EQ(g.node(r.begin).content, g.node(u).content) << id;
    EXPECT_EQ(g.node(r.begin).layer(), 1);
  }
  EXPECT_EQ(g.node(g.children(*g.find("I/0")).begin).type, NodeType::obj);
  EXPECT_EQ(g.node(g.children(*g.find("T/0")).begin).type, NodeType::row);
}

TEST(Graph, SelfLinksAndDuplicatesCollapse) {
  const Corpus c({doc("A", {para("x", {"A", "B", "B"}), para("y")}), doc("B", {para("z", {"A"})})});
  const auto g = build(c).graph;
  // intra A/0-A/1, inter A/0-B/0 (from both sides), inter A/1-B/0
  EXPECT_EQ(g.manifest().counts.e0_intra, 1u);
  EXPECT_EQ(g.manifest().counts.e0_inter, 2u);
  EXPECT_EQ(g.neighbors("B/0"), (std::vector<std::string>{"A/0", "A/1"}));
}

TEST(Graph, RandomCorporaMatchComprehension) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto docs = oracle::random_documents(rng, 30);
    const Corpus c(docs);
    const auto g = build(c, 64).graph;
    const auto want = oracle::expected_edges(c.documents());
    std::set<std::pair<std::string, std::string>> intra, inter;
    for (const auto& e : g.coarse_edges()) {
      (e.provenance == EdgeProvenance::intra ? intra : inter).emplace(g.node(e.u).id, g.node(e.v).id);
    }
    EXPECT_EQ(intra, want.intra);
    EXPECT_EQ(inter, want.inter);
    for (std::uint32_t u = 0; u < g.coarse_count(); ++u) {
      EXPECT_GE(g.children(u).end - g.children(u).begin, 1u);
      for (auto v : g.adjacency(u)) {
        const auto back = g.adjacency(v);
        EXPECT_NE(std::find(back.begin(), back.end(), u), back.end());
      }
    }
  }
}

TEST(Graph, BuildReportTimings) {
  const auto r = build(fixture()).report;
  EXPECT_GE(r.node_generation_ms, 0);
  EXPECT_GE(r.edge_generation_ms, 0);
  EXPECT_GE(r.embedding_generation_ms, 0);
  EXPECT_LE(r.node_generation_ms + r.edge_generation_ms + r.embedding_generation_ms, r.total_ms + 1e-9);
  EXPECT_EQ(r.embedded_nodes, 8u);
  EXPECT_EQ(r.dropped_links, 0u);
}

TEST(Graph, EmbeddingFailureCarriesProgress) {
  const auto c = fixture();
  FailingEmbedder e;
  BuildOptions o;
  o.embed_batch_size = 3;
  try {
    build_graph(c, resolve_links(c), e, o);
    FAIL();
  } catch (const BuildError& err) {
    EXPECT_EQ(err.partial().embedded_nodes, 3u);
  }
}

TEST(Graph, CompatibilityCheck) {
  const auto g = build(fixture()).graph;
  EXPECT_NO_THROW(check_compatible(g.manifest(), HashEmbedder(256)));
  EXPECT_THROW(check_compatible(g.manifest(), HashEmbedder(128)), ConfigError);
  EXPECT_THROW(check_compatible(g.manifest(), HashEmbedder(256, {1, 2})), ConfigError);
}

TEST(Index, RoundTripFixture) {
  const auto g = build(fixture()).graph;
  const auto dir = scratch("rt");
  save_index(g, dir.string());
  const auto back = load_index(dir.string());
  EXPECT_TRUE(back == g);
  EXPECT_EQ(back.neighbors("B/0"), g.neighbors("B/0"));
  fs::remove_all(dir);
}

namespace {

void rewrite(const fs::path& p, const std::function<void(std::string&)>& edit) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  in.close();
  auto s = ss.str();
  edit(s);
  std::ofstream(p, std::ios::binary | std::ios::trunc) << s;
}

}  // namespace

TEST(Index, TamperingIsDetected) {
  const auto g = build(fixture()).graph;
  const auto base = scratch("tamper");
  const auto fresh = [&](const std::string& name) {
    const auto dir = base / name;
    save_index(g, dir.string());
    return dir;
  };

  auto dir = fresh("truncated");
  fs::resize_file(dir / "embeddings.bin", fs::file_size(dir / "embeddings.bin") - 4);
  EXPECT_THROW(load_index(dir.string()), IndexFormatError);

  dir = fresh("dimension");
  rewrite(dir / "manifest", [](std::string& s) {
    const auto at = s.find("\"dimension\": 256");
    ASSERT_NE(at, std::string::npos);
    s.replace(at, 16, "\"dimension\": 128");
  });
  EXPECT_THROW(load_index(dir.string()), IndexFormatError);

  dir = fresh("bitflip");
  rewrite(dir / "embeddings.bin", [](std::string& s) { s[10] ^= 1; });
  EXPECT_THROW(load_index(dir.string()), IndexFormatError);

  dir = fresh("edges");
  rewrite(dir / "edges", [](std::string& s) { s += "{\"e0\":[\"A/0\",\"Q/9\"],\"provenance\":\"inter\"}\n"; });
  EXPECT_THROW(load_index(dir.string()), IndexFormatError);

  dir = fresh("nodes");
  rewrite(dir / "nodes", [](std::string& s) { s.resize(s.size() / 2); });
  EXPECT_THROW(load_index(dir.string()), IndexFormatError);

  dir = fresh("missing");
  fs::remove(dir / "edges");
  EXPECT_THROW(load_index(dir.string()), IndexFormatError);

  EXPECT_THROW(load_index((base / "absent").string()), IndexFormatError);
  fs::remove_all(base);
}
