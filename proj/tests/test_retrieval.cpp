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

#include <cmath>
#include <random>

#include "lilac/retrieval.hpp"
#include "support/oracles.hpp"

using namespace lilac;

namespace {

constexpr std::size_t kD = 16;

// Assembles a graph from explicit vectors so edge scores can be set by hand.
struct HandGraph {
  struct Coarse {
    std::string id;
    std::vector<float> vec;
    std::vector<std::vector<float>> kids;
  };
  std::vector<Coarse> coarse;
  std::vector<std::pair<std::string, std::string>> edges;

  LayeredComponentGraph build() const {
    std::vector<Node> nodes;
    std::vector<float> blob;
    std::vector<std::uint32_t> parents;
    for (const auto& c : coarse) {
      nodes.push_back({c.id, NodeType::para, c.id, 0});
      blob.insert(blob.end(), c.vec.begin(), c.vec.end());
    }
    for (std::uint32_t p = 0; p < coarse.size(); ++p) {
      for (std::size_t k = 0; k < coarse[p].kids.size(); ++k) {
        nodes.push_back({coarse[p].id + "/" + std::to_string(k), NodeType::sent, "", 0});
        blob.insert(blob.end(), coarse[p].kids[k].begin(), coarse[p].kids[k].end());
        parents.push_back(p);
      }
    }
    const auto index = [&](const std::string& id) {
      for (std::uint32_t i = 0; i < coarse.size(); ++i) {
        if (coarse[i].id == id) return i;
      }
      throw std::logic_error("no node " + id);
    };
    std::vector<CoarseEdge> ce;
    for (const auto& [a, b] : edges) {
      auto u = index(a), v = index(b);
      if (coarse[v].id < coarse[u].id) std::swap(u, v);
      ce.push_back({u, v, EdgeProvenance::intra});
    }
    Manifest m;
    m.embedder_id = "hand";
    m.dimension = kD;
    return LayeredComponentGraph::assemble({{"D", "D"}}, nodes, ce, parents, blob, m);
  }
};

// Unit vector with cosine `c` to axis `axis`, padded on a private axis.
std::vector<float> at(std::size_t axis, double c, std::size_t pad) {
  std::vector<float> v(kD, 0.0f);
  v[axis] = static_cast<float>(c);
  v[pad] = static_cast<float>(std::sqrt(1 - c * c));
  return v;
}

std::vector<float> axis(std::size_t a) {
  std::vector<float> v(kD, 0.0f);
  v[a] = 1;
  return v;
}

DecomposedQuery two_subqueries(std::vector<float> coarse = axis(15)) {
  DecomposedQuery dq;
  dq.query_text = "q";
  dq.coarse_embedding = std::move(coarse);
  dq.subqueries.push_back({"q1", ModalityLabel::text, axis(0)});
  dq.subqueries.push_back({"q2", ModalityLabel::table, axis(1)});
  return dq;
}

LayeredComponentGraph fixture_graph() {
  const auto c = load_corpus(std::string(LILAC_TEST_DATA) + "/fixture_corpus.jsonl");
  HashEmbedder e(256);
  return build_graph(c, resolve_links(c), e).graph;
}

std::vector<std::string> ids(const RankedResult& r) {
  std::vector<std::string> out;
  for (const auto& i : r.items) out.push_back(i.comp_id);
  return out;
}

}  // namespace

TEST(ScoreEdge, OneSidedAlpha) {
  HandGraph h;
  h.coarse.push_back({"a", axis(14), {at(0, 0.9, 2), at(1, 0.7, 3)}});
  h.coarse.push_back({"b", axis(14), {at(0, 0.2, 4), at(1, 0.6, 5)}});
  h.edges = {{"a", "b"}};
  const auto g = h.build();
  const auto e = score_edge(g, "a", "b", two_subqueries());
  EXPECT_NEAR(e.score, 1.6, 1e-6);
  ASSERT_TRUE(e.one_sided.has_value());
  EXPECT_EQ(g.node(*e.one_sided).id, "a");
  EXPECT_EQ(g.node(e.argmax[0]).id, "a/0");
  EXPECT_EQ(g.node(e.argmax[1]).id, "a/1");
}

TEST(ScoreEdge, SplitMaximaNotOneSided) {
  HandGraph h;
  h.coarse.push_back({"a", axis(14), {at(0, 0.9, 2)}});
  h.coarse.push_back({"b", axis(14), {at(1, 0.8, 3)}});
  const auto g = h.build();
  const auto e = score_edge(g, "b", "a", two_subqueries());
  EXPECT_NEAR(e.score, 1.7, 1e-6);
  EXPECT_FALSE(e.one_sided.has_value());
  EXPECT_EQ(g.node(e.a).id, "a");
}

TEST(ScoreEdge, DummyEdgeIsBestOwnSubcomponent) {
  HandGraph h;
  h.coarse.push_back({"solo", axis(14), {at(0, 0.3, 2), at(0, 0.75, 3), at(0, 0.5, 4)}});
  const auto g = h.build();
  auto dq = two_subqueries();
  dq.subqueries.pop_back();
  const auto e = score_edge(g, "solo", "", dq);
  EXPECT_TRUE(e.dummy());
  EXPECT_NEAR(e.score, 0.75, 1e-6);
  EXPECT_EQ(g.node(e.argmax[0]).id, "solo/1");
}

TEST(ScoreEdge, BothQualifyHigherCoarseSurvives) {
  HandGraph h;
  // Identical children: both endpoints alone explain the score.
  h.coarse.push_back({"a", at(15, 0.2, 13), {at(0, 0.5, 2)}});
  h.coarse.push_back({"b", at(15, 0.6, 13), {at(0, 0.5, 3)}});
  h.coarse.push_back({"c", at(15, 0.2, 12), {at(0, 0.5, 4)}});
  const auto g = h.build();
  auto dq = two_subqueries();
  dq.subqueries.pop_back();
  EXPECT_EQ(g.node(*score_edge(g, "a", "b", dq).one_sided).id, "b");
  EXPECT_EQ(g.node(*score_edge(g, "c", "a", dq).one_sided).id, "a");  // equal coarse: lower id
}

TEST(ScoreEdge, UnknownNode) {
  HandGraph h;
  h.coarse.push_back({"a", axis(14), {axis(0)}});
  const auto g = h.build();
  EXPECT_THROW(score_edge(g, "a", "zz", two_subqueries()), Error);
  EXPECT_THROW(score_edge(g, "a/0", "", two_subqueries()), Error);
}

TEST(Seeds, SelfSimilarityAndTies) {
  const auto g = fixture_graph();
  const auto a0 = *g.find("A/0");
  const auto q = g.embedding(a0);
  const auto s = seed_candidates(g, q, 1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].first, a0);
  EXPECT_NEAR(s[0].second, 1.0, 1e-9);
  EXPECT_EQ(seed_candidates(g, q, 50).size(), 3u);

  HandGraph h;
  h.coarse.push_back({"z", axis(3), {axis(0)}});
  h.coarse.push_back({"m", axis(3), {axis(0)}});
  const auto tie = seed_candidates(h.build(), axis(3), 1);
  EXPECT_EQ(h.build().node(tie[0].first).id, "m");
}

TEST(Traverse, FixtureRanksImageDocumentAboveLinker) {
  const auto g = fixture_graph();
  const auto dq = oracle::make_query("minaret Shah Jahan", {{"minaret", ModalityLabel::image}, {"Shah Jahan", ModalityLabel::text}}, 256);
  TraversalParams p;
  p.beam_width = 30;
  p.iterations = 1;
  const auto r = traverse(g, dq, p);
  const auto got = ids(r);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got.back(), "B/0");

  const auto want = oracle::exhaustive_rank(g, dq, 10);
  ASSERT_EQ(want.size(), got.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i], want[i].id);
    EXPECT_NEAR(r.items[i].score, want[i].score, 1e-9);
  }
}

TEST(Traverse, ZeroIterationsReturnsSeeds) {
  const auto g = fixture_graph();
  const auto dq = oracle::make_query("Shah Jahan monuments", {{"Shah Jahan", ModalityLabel::text}}, 256);
  TraversalParams p;
  p.iterations = 0;
  p.n_ret = 2;
  const auto r = traverse(g, dq, p);
  const auto seeds = seed_candidates(g, dq.coarse_embedding, 2);
  ASSERT_EQ(r.items.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(r.items[i].comp_id, g.node(seeds[i].first).id);
}

TEST(Traverse, IsolatedNodeReachable) {
  HandGraph h;
  h.coarse.push_back({"a", at(15, 0.9, 13), {at(0, 0.1, 2)}});
  h.coarse.push_back({"b", at(15, 0.8, 12), {at(0, 0.1, 3)}});
  h.coarse.push_back({"lonely", at(15, 0.5, 11), {at(0, 0.95, 4)}});
  h.edges = {{"a", "b"}};
  const auto g = h.build();
  auto dq = two_subqueries();
  dq.subqueries.pop_back();
  TraversalParams p;
  p.beam_width = 3;
  const auto r = traverse(g, dq, p);
  ASSERT_FALSE(r.items.empty());
  EXPECT_EQ(r.items[0].comp_id, "lonely");
}

TEST(Traverse, SerialEqualsParallelAndDeterministic) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const Corpus c(oracle::random_documents(rng, 20));
    HashEmbedder e(64);
    const auto g = build_graph(c, resolve_links(c), e).graph;
    const auto dq = oracle::make_query("river tower market", {{"river tower", ModalityLabel::text}, {"market", ModalityLabel::table}}, 64);
    for (std::size_t it : {1u, 2u, 3u}) {
      TraversalParams p;
      p.beam_width = 4;
      p.iterations = it;
      p.parallel = true;
      const auto a = traverse(g, dq, p);
      p.parallel = false;
      const auto b = traverse(g, dq, p);
      EXPECT_EQ(ids(a), ids(b));
      EXPECT_EQ(ids(a), ids(traverse(g, dq, p)));
      for (std::size_t i = 0; i < a.items.size(); ++i) EXPECT_EQ(a.items[i].score, b.items[i].score);
    }
  }
}

TEST(Knn, MatchesSeedsAndFindsExactText) {
  const auto g = fixture_graph();
  const auto q = oracle::embed("The Mughal emperor Shah Jahan built many monuments.", "", 256);
  const auto r = retrieve_knn(g, q, 2);
  ASSERT_EQ(r.items.size(), 2u);
  EXPECT_EQ(r.items[0].comp_id, "B/0");
  const auto s = seed_candidates(g, q, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(r.items[i].comp_id, g.node(s[i].first).id);
    EXPECT_EQ(r.items[i].score, s[i].second);
  }

  HandGraph h;
  h.coarse.push_back({"y", axis(3), {axis(0)}});
  h.coarse.push_back({"x", axis(3), {axis(0)}});
  EXPECT_EQ(ids(retrieve_knn(h.build(), axis(3), 2)), (std::vector<std::string>{"x", "y"}));
}

TEST(Rerank, SubcomponentMatchBeatsCoarse) {
  // X: coarse 3/sqrt(27), best sentence 3/sqrt(12). Y: coarse and only sentence 3/sqrt(21). Z unrelated.
  std::vector<Document> docs{{"X", "x", {}}, {"Y", "y", {}}, {"Z", "z", {}}};
  Component cx, cy, cz;
  cx.text = "River tower market. Granite lantern orchard copper meadow.";
  cy.text = "River tower market falcon garden quarry";
  cz.text = "Desert summit canal.";
  docs[0].components.push_back(cx);
  docs[1].components.push_back(cy);
  docs[2].components.push_back(cz);
  const Corpus c(docs);
  HashEmbedder e(256);
  const auto g = build_graph(c, resolve_links(c), e).graph;
  const auto q = oracle::embed("river tower market", "", 256);

  // Hand-computed cosines (no bucket collisions among these tokens at d = 256).
  EXPECT_NEAR(oracle::cos(oracle::embed(cx.text, "text", 256), q), 3 / std::sqrt(27.0), 1e-6);
  EXPECT_NEAR(oracle::cos(oracle::embed("River tower market.", "text", 256), q), 3 / std::sqrt(12.0), 1e-6);
  EXPECT_NEAR(oracle::cos(oracle::embed(cy.text, "text", 256), q), 3 / std::sqrt(21.0), 1e-6);

  EXPECT_EQ(ids(retrieve_knn(g, q, 3))[0], "Y/0");
  const auto r = retrieve_rerank(g, q, 3, 3);
  EXPECT_EQ(ids(r)[0], "X/0");
  EXPECT_NEAR(r.items[0].score, 3 / std::sqrt(12.0), 1e-6);
  EXPECT_NEAR(r.items[1].score, 3 / std::sqrt(21.0), 1e-6);

  auto knn = ids(retrieve_knn(g, q, 3));
  auto rr = ids(r);
  std::sort(knn.begin(), knn.end());
  std::sort(rr.begin(), rr.end());
  EXPECT_EQ(knn, rr);
}

TEST(Rerank, TiesFallBackToCoarse) {
  HandGraph h;
  h.coarse.push_back({"a", at(15, 0.3, 13), {at(15, 0.5, 2)}});
  h.coarse.push_back({"b", at(15, 0.7, 12), {at(15, 0.5, 3)}});
  h.coarse.push_back({"c", at(15, 0.5, 11), {at(15, 0.5, 4)}});
  const auto r = retrieve_rerank(h.build(), axis(15), 3, 3);
  EXPECT_EQ(ids(r), (std::vector<std::string>{"b", "c", "a"}));
}

TEST(Retrieve, DispatchesOnMode) {
  const auto g = fixture_graph();
  const auto dq = oracle::make_query("Shah Jahan", {{"Shah Jahan", ModalityLabel::text}}, 256);
  TraversalParams p;
  p.mode = RetrievalMode::knn;
  EXPECT_EQ(ids(retrieve(g, dq, p)), ids(retrieve_knn(g, dq.coarse_embedding, p.n_ret)));
  p.mode = RetrievalMode::no_qd;
  EXPECT_EQ(ids(retrieve(g, dq, p)), ids(retrieve_rerank(g, dq.coarse_embedding, p.beam_width, p.n_ret)));
  EXPECT_EQ(parse_retrieval_mode("no_qd"), RetrievalMode::no_qd);
  EXPECT_FALSE(parse_retrieval_mode("fast").has_value());
}

TEST(Retrieve, EmptyGraphErrors) {
  LayeredComponentGraph empty;
  EXPECT_THROW(retrieve_knn(empty, std::vector<float>{}, 3), Error);
}
