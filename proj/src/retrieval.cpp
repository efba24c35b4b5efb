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

#include "lilac/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace lilac {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void require_nonempty(const LayeredComponentGraph& graph) {
  if (graph.coarse_count() == 0) throw Error("graph has no layer-0 nodes");
}

void require_dimension(const LayeredComponentGraph& graph, std::span<const float> v) {
  if (v.size() != graph.dimension()) {
    throw Error("query dimension " + std::to_string(v.size()) + " != index dimension " +
                std::to_string(graph.dimension()));
  }
}

/// Cosine of the coarse query against every layer-0 node.
std::vector<double> coarse_scan(const LayeredComponentGraph& graph, std::span<const float> query, bool parallel) {
  std::vector<double> sims(graph.coarse_count());
  const double qn = l2_norm(query);
  if (parallel) {
    kernels::parallel::cosine_scan(graph.matrix(), 0, query, qn, sims);
  } else {
    kernels::serial::cosine_scan(graph.matrix(), 0, query, qn, sims);
  }
  return sims;
}

std::vector<std::uint32_t> top_coarse(const LayeredComponentGraph& graph, const std::vector<double>& sims,
                                      std::size_t k) {
  std::vector<std::uint32_t> all(graph.coarse_count());
  std::iota(all.begin(), all.end(), 0U);
  k = std::min(k, all.size());
  const auto better = [&](std::uint32_t x, std::uint32_t y) {
    if (sims[x] != sims[y]) return sims[x] > sims[y];
    return graph.id_rank(x) < graph.id_rank(y);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
  all.resize(k);
  return all;
}

/// Lazily filled table of the best subcomponent similarity per (component, subquery).
class SubqueryTable {
 public:
  SubqueryTable(const LayeredComponentGraph& graph, const DecomposedQuery& dq, bool parallel)
      : graph_(graph), parallel_(parallel) {
    for (const auto& s : dq.subqueries) {
      require_dimension(graph, s.embedding);
      queries_.vectors.emplace_back(s.embedding);
      queries_.norms.push_back(l2_norm(s.embedding));
    }
    const auto n = graph.coarse_count() * queries_.size();
    best_.assign(n, 0.0);
    arg_.assign(n, kernels::kNoRow);
    ready_.assign(graph.coarse_count(), false);
  }

  std::size_t width() const noexcept { return queries_.size(); }

  void ensure(std::span<const std::uint32_t> nodes) {
    std::vector<std::uint32_t> missing;
    for (auto u : nodes) {
      if (!ready_[u]) {
        ready_[u] = true;
        missing.push_back(u);
      }
    }
    if (missing.empty()) return;
    std::vector<kernels::RowRange> ranges;
    ranges.reserve(missing.size());
    for (auto u : missing) ranges.push_back(graph_.children(u));
    const auto nq = queries_.size();
    std::vector<double> best(missing.size() * nq);
    std::vector<std::uint32_t> arg(missing.size() * nq);
    if (parallel_) {
      kernels::parallel::best_in_ranges(graph_.matrix(), ranges, queries_, best, arg);
    } else {
      kernels::serial::best_in_ranges(graph_.matrix(), ranges, queries_, best, arg);
    }
    for (std::size_t i = 0; i < missing.size(); ++i) {
      std::copy_n(best.begin() + static_cast<std::ptrdiff_t>(i * nq), nq,
                  best_.begin() + static_cast<std::ptrdiff_t>(missing[i] * nq));
      std::copy_n(arg.begin() + static_cast<std::ptrdiff_t>(i * nq), nq,
                  arg_.begin() + static_cast<std::ptrdiff_t>(missing[i] * nq));
    }
  }

  const double* best(std::uint32_t u) const { return best_.data() + u * queries_.size(); }
  const std::uint32_t* arg(std::uint32_t u) const { return arg_.data() + u * queries_.size(); }

 private:
  const LayeredComponentGraph& graph_;
  bool parallel_;
  kernels::QueryBlock queries_;
  std::vector<double> best_;
  std::vector<std::uint32_t> arg_;
  std::vector<bool> ready_;
};

/// Combines the endpoint tables; `a` must be the lower-id endpoint. max over the union of
/// subcomponents equals the max of the per-endpoint maxima, with ties resolved toward `a`.
ScoredEdge combine(const LayeredComponentGraph& graph, const SubqueryTable& table, std::uint32_t a,
                   std::uint32_t b, double coarse_a, double coarse_b) {
  ScoredEdge e;
  e.a = a;
  e.b = b;
  const auto nq = table.width();
  e.argmax.resize(nq);
  const double* ba = table.best(a);
  const std::uint32_t* xa = table.arg(a);
  if (b == kDummyEndpoint) {
    for (std::size_t q = 0; q < nq; ++q) {
      e.score += ba[q];
      e.argmax[q] = xa[q];
    }
    e.one_sided = a;
    return e;
  }
  const double* bb = table.best(b);
  const std::uint32_t* xb = table.arg(b);
  double only_a = 0.0;
  double only_b = 0.0;
  for (std::size_t q = 0; q < nq; ++q) {
    const bool take_b = bb[q] > ba[q];
    e.score += take_b ? bb[q] : ba[q];
    e.argmax[q] = take_b ? xb[q] : xa[q];
    only_a += ba[q];
    only_b += bb[q];
  }
  const bool a_alone = e.score - only_a <= kOneSidedTolerance;
  const bool b_alone = e.score - only_b <= kOneSidedTolerance;
  if (a_alone && b_alone) {
    if (coarse_a != coarse_b) {
      e.one_sided = coarse_a > coarse_b ? a : b;
    } else {
      e.one_sided = graph.id_rank(a) < graph.id_rank(b) ? a : b;
    }
  } else if (a_alone) {
    e.one_sided = a;
  } else if (b_alone) {
    e.one_sided = b;
  }
  return e;
}

std::uint64_t edge_key(const LayeredComponentGraph& graph, std::uint32_t a, std::uint32_t b) {
  const std::uint64_t hi = graph.id_rank(a);
  const std::uint64_t lo = b == kDummyEndpoint ? 0 : std::uint64_t{graph.id_rank(b)} + 1;
  return (hi << 32) | lo;
}

double coarse_similarity(const LayeredComponentGraph& graph, const DecomposedQuery& dq, std::uint32_t u) {
  return cosine_with_norms(graph.embedding(u), graph.norm(u), dq.coarse_embedding, l2_norm(dq.coarse_embedding));
}

std::uint32_t resolve_coarse(const LayeredComponentGraph& graph, std::string_view id) {
  const auto i = graph.find(id);
  if (!i) throw Error("unknown node id '" + std::string(id) + "'");
  if (*i >= graph.coarse_count()) throw Error("node '" + std::string(id) + "' is not a layer-0 node");
  return *i;
}

}  // namespace

std::string_view to_string(RetrievalMode m) {
  switch (m) {
    case RetrievalMode::full: return "full";
    case RetrievalMode::no_qd: return "no_qd";
    case RetrievalMode::knn: return "knn";
  }
  return "?";
}

std::optional<RetrievalMode> parse_retrieval_mode(std::string_view s) {
  if (s == "full") return RetrievalMode::full;
  if (s == "no_qd") return RetrievalMode::no_qd;
  if (s == "knn") return RetrievalMode::knn;
  return std::nullopt;
}

std::vector<std::pair<std::uint32_t, double>> seed_candidates(const LayeredComponentGraph& graph,
                                                              std::span<const float> coarse_query,
                                                              std::size_t b, bool parallel) {
  require_nonempty(graph);
  require_dimension(graph, coarse_query);
  const auto sims = coarse_scan(graph, coarse_query, parallel);
  std::vector<std::pair<std::uint32_t, double>> out;
  for (auto u : top_coarse(graph, sims, b)) out.emplace_back(u, sims[u]);
  return out;
}

ScoredEdge score_edge(const LayeredComponentGraph& graph, std::uint32_t alpha, std::uint32_t beta,
                      const DecomposedQuery& dq) {
  if (alpha >= graph.coarse_count()) throw Error("edge endpoint is not a layer-0 node");
  if (beta != kDummyEndpoint && beta >= graph.coarse_count()) throw Error("edge endpoint is not a layer-0 node");
  if (dq.subqueries.empty()) throw Error("edge scoring needs at least one subquery");
  if (beta != kDummyEndpoint && graph.id_rank(beta) < graph.id_rank(alpha)) std::swap(alpha, beta);
  SubqueryTable table(graph, dq, false);
  std::vector<std::uint32_t> ends{alpha};
  if (beta != kDummyEndpoint) ends.push_back(beta);
  table.ensure(ends);
  const double ca = coarse_similarity(graph, dq, alpha);
  const double cb = beta == kDummyEndpoint ? 0.0 : coarse_similarity(graph, dq, beta);
  return combine(graph, table, alpha, beta, ca, cb);
}

ScoredEdge score_edge(const LayeredComponentGraph& graph, std::string_view alpha, std::string_view beta,
                      const DecomposedQuery& dq) {
  const auto a = resolve_coarse(graph, alpha);
  const auto b = beta.empty() ? kDummyEndpoint : resolve_coarse(graph, beta);
  return score_edge(graph, a, b, dq);
}

RankedResult traverse(const LayeredComponentGraph& graph, const DecomposedQuery& dq, const TraversalParams& params) {
  const auto t_start = Clock::now();
  require_nonempty(graph);
  require_dimension(graph, dq.coarse_embedding);
  if (params.beam_width == 0) throw Error("beam width must be positive");
  if (dq.subqueries.empty()) throw Error("traversal needs at least one subquery");

  RankedResult result;
  result.params = params;
  result.decomposition_fallback = dq.fallback;

  auto t0 = Clock::now();
  const auto sims = coarse_scan(graph, dq.coarse_embedding, params.parallel);
  const auto seeds = top_coarse(graph, sims, params.beam_width);
  result.timings.seed_ms = ms_since(t0);

  t0 = Clock::now();
  if (params.iterations == 0) {
    for (std::size_t i = 0; i < std::min(params.n_ret, seeds.size()); ++i) {
      result.items.push_back({graph.node(seeds[i]).id, sims[seeds[i]], sims[seeds[i]], {}});
    }
    result.timings.traversal_ms = ms_since(t0);
    result.timings.total_ms = ms_since(t_start);
    return result;
  }

  SubqueryTable table(graph, dq, params.parallel);
  std::vector<ScoredEdge> pool;
  std::unordered_set<std::uint64_t> scored;
  std::vector<std::size_t> retained;  // indices into pool
  const auto better_edge = [&](std::size_t x, std::size_t y) {
    if (pool[x].score != pool[y].score) return pool[x].score > pool[y].score;
    return edge_key(graph, pool[x].a, pool[x].b) < edge_key(graph, pool[y].a, pool[y].b);
  };

  std::vector<std::uint32_t> frontier = seeds;
  for (std::size_t t = 1; t <= params.iterations; ++t) {
    if (t > 1) {
      std::vector<std::uint32_t> next;
      for (auto idx : retained) {
        next.push_back(pool[idx].a);
        if (!pool[idx].dummy()) next.push_back(pool[idx].b);
      }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      frontier = std::move(next);
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates;
    std::vector<std::uint32_t> touched;
    for (auto u : frontier) {
      const auto adj = graph.adjacency(u);
      if (adj.empty()) {
        if (scored.insert(edge_key(graph, u, kDummyEndpoint)).second) {
          candidates.emplace_back(u, kDummyEndpoint);
          touched.push_back(u);
        }
        continue;
      }
      for (auto v : adj) {
        const auto [a, b] = graph.id_rank(u) < graph.id_rank(v) ? std::pair{u, v} : std::pair{v, u};
        if (scored.insert(edge_key(graph, a, b)).second) {
          candidates.emplace_back(a, b);
          touched.push_back(a);
          touched.push_back(b);
        }
      }
    }
    table.ensure(touched);
    for (const auto& [a, b] : candidates) {
      pool.push_back(combine(graph, table, a, b, sims[a], b == kDummyEndpoint ? 0.0 : sims[b]));
    }

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto keep = std::min(params.beam_width, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), better_edge);
    order.resize(keep);
    retained = std::move(order);
  }

  // Node score: best retained edge in which the node survives the one-sided rule.
  std::unordered_map<std::uint32_t, std::size_t> best_edge;
  for (auto idx : retained) {
    const auto& e = pool[idx];
    std::vector<std::uint32_t> survivors;
    if (e.one_sided) {
      survivors.push_back(*e.one_sided);
    } else {
      survivors = {e.a, e.b};
    }
    for (auto u : survivors) {
      auto [it, inserted] = best_edge.emplace(u, idx);
      if (!inserted && better_edge(idx, it->second)) it->second = idx;
    }
  }
  std::vector<std::uint32_t> nodes;
  std::vector<double> node_score(graph.coarse_count(), 0.0);
  for (const auto& [u, idx] : best_edge) {
    nodes.push_back(u);
    node_score[u] = pool[idx].score;
  }
  std::sort(nodes.begin(), nodes.end(), [&](std::uint32_t x, std::uint32_t y) {
    if (node_score[x] != node_score[y]) return node_score[x] > node_score[y];
    if (sims[x] != sims[y]) return sims[x] > sims[y];
    return graph.id_rank(x) < graph.id_rank(y);
  });
  for (std::size_t i = 0; i < std::min(params.n_ret, nodes.size()); ++i) {
    const auto u = nodes[i];
    result.items.push_back({graph.node(u).id, node_score[u], sims[u], pool[best_edge.at(u)].argmax});
  }
  result.timings.traversal_ms = ms_since(t0);
  result.timings.total_ms = ms_since(t_start);
  return result;
}

RankedResult retrieve_knn(const LayeredComponentGraph& graph, std::span<const float> coarse_query,
                          std::size_t n_ret, bool parallel) {
  const auto t_start = Clock::now();
  require_nonempty(graph);
  require_dimension(graph, coarse_query);
  RankedResult result;
  result.params.mode = RetrievalMode::knn;
  result.params.n_ret = n_ret;
  result.params.parallel = parallel;
  const auto sims = coarse_scan(graph, coarse_query, parallel);
  for (auto u : top_coarse(graph, sims, n_ret)) result.items.push_back({graph.node(u).id, sims[u], sims[u], {}});
  result.timings.seed_ms = ms_since(t_start);
  result.timings.total_ms = result.timings.seed_ms;
  return result;
}

RankedResult retrieve_rerank(const LayeredComponentGraph& graph, std::span<const float> coarse_query,
                             std::size_t b, std::size_t n_ret, bool parallel) {
  const auto t_start = Clock::now();
  require_nonempty(graph);
  require_dimension(graph, coarse_query);
  RankedResult result;
  result.params.mode = RetrievalMode::no_qd;
  result.params.beam_width = b;
  result.params.n_ret = n_ret;
  result.params.parallel = parallel;

  const auto sims = coarse_scan(graph, coarse_query, parallel);
  const auto top = top_coarse(graph, sims, b);
  result.timings.seed_ms = ms_since(t_start);

  const auto t0 = Clock::now();
  kernels::QueryBlock query;
  query.vectors.emplace_back(coarse_query);
  query.norms.push_back(l2_norm(coarse_query));
  std::vector<kernels::RowRange> ranges;
  for (auto u : top) ranges.push_back(graph.children(u));
  std::vector<double> best(top.size());
  std::vector<std::uint32_t> arg(top.size());
  if (parallel) {
    kernels::parallel::best_in_ranges(graph.matrix(), ranges, query, best, arg);
  } else {
    kernels::serial::best_in_ranges(graph.matrix(), ranges, query, best, arg);
  }
  std::vector<double> sub_score(graph.coarse_count(), 0.0);
  std::vector<std::uint32_t> evidence(graph.coarse_count(), kernels::kNoRow);
  for (std::size_t i = 0; i < top.size(); ++i) {
    sub_score[top[i]] = best[i];
    evidence[top[i]] = arg[i];
  }
  auto order = top;
  std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
    if (sub_score[x] != sub_score[y]) return sub_score[x] > sub_score[y];
    if (sims[x] != sims[y]) return sims[x] > sims[y];
    return graph.id_rank(x) < graph.id_rank(y);
  });
  for (std::size_t i = 0; i < std::min(n_ret, order.size()); ++i) {
    const auto u = order[i];
    result.items.push_back({graph.node(u).id, sub_score[u], sims[u], {evidence[u]}});
  }
  result.timings.traversal_ms = ms_since(t0);
  result.timings.total_ms = ms_since(t_start);
  return result;
}

RankedResult retrieve(const LayeredComponentGraph& graph, const DecomposedQuery& dq, const TraversalParams& params) {
  RankedResult r;
  switch (params.mode) {
    case RetrievalMode::full:
      return traverse(graph, dq, params);
    case RetrievalMode::no_qd:
      r = retrieve_rerank(graph, dq.coarse_embedding, params.beam_width, params.n_ret, params.parallel);
      break;
    case RetrievalMode::knn:
      r = retrieve_knn(graph, dq.coarse_embedding, params.n_ret, params.parallel);
      break;
  }
  r.params = params;
  r.decomposition_fallback = dq.fallback;
  return r;
}

}  // namespace lilac
