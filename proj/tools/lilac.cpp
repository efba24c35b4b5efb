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

// lilac: build, query and evaluate a layered component graph index.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "lilac/config.hpp"
#include "lilac/eval.hpp"
#include "lilac/graph.hpp"
#include "lilac/kernels.hpp"
#include "lilac/retrieval.hpp"
#include "lilac/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lilac;

namespace {

struct Overrides {
  std::optional<std::size_t> b, n_i, n_ret;
  std::optional<std::string> mode, decomposer, embedder;
  std::optional<std::size_t> dimension;
};

void apply(Config& c, const Overrides& o) {
  if (o.b) c.retrieval.beam_width = *o.b;
  if (o.n_i) c.retrieval.iterations = *o.n_i;
  if (o.n_ret) c.retrieval.n_ret = *o.n_ret;
  if (o.mode) {
    const auto m = parse_retrieval_mode(*o.mode);
    if (!m) throw ConfigError("--mode must be full, no_qd or knn");
    c.retrieval.mode = *m;
  }
  if (o.decomposer) c.decomposer.backend = *o.decomposer;
  if (o.embedder) c.embedder.backend = *o.embedder;
  if (o.dimension) c.embedder.dimension = *o.dimension;
  if (c.retrieval.beam_width == 0 || c.retrieval.n_ret == 0) throw ConfigError("--b and --n-ret must be positive");
}

void print_build_report(const BuildReport& r, std::ostream& out) {
  const auto& c = r.counts;
  out << "documents       " << c.documents << '\n'
      << "components      " << c.components << '\n'
      << "subcomponents   " << c.subcomponents << '\n'
      << "e0 intra        " << c.e0_intra << '\n'
      << "e0 inter        " << c.e0_inter << '\n'
      << "e_down          " << c.e_down << '\n'
      << "dropped links   " << r.dropped_links << '\n'
      << std::fixed << std::setprecision(3)
      << "node_generation_ms      " << r.node_generation_ms << '\n'
      << "edge_generation_ms      " << r.edge_generation_ms << '\n'
      << "embedding_generation_ms " << r.embedding_generation_ms << '\n'
      << "total_ms                " << r.total_ms << '\n';
}

int cmd_build(Config& c, bool force) {
  if (c.paths.corpus.empty()) throw ConfigError("no corpus path (--corpus or paths.corpus)");
  if (c.paths.index.empty()) throw ConfigError("no index path (--index or paths.index)");
  if (!fs::exists(c.paths.corpus)) throw Error("corpus '" + c.paths.corpus + "' does not exist");
  if (fs::exists(c.paths.index) && !fs::is_empty(c.paths.index)) {
    if (!force) throw Error("index '" + c.paths.index + "' already exists; pass --force to overwrite");
    fs::remove_all(c.paths.index);
  }
  const auto corpus = load_corpus(c.paths.corpus);
  const auto links = resolve_links(corpus);
  auto embedder = make_embedder(c.embedder);
  BuildResult built;
  try {
    built = build_graph(corpus, links, *embedder);
  } catch (const BuildError& e) {
    std::cerr << "build aborted after " << e.partial().embedded_nodes << " embedded nodes\n";
    throw;
  }
  save_index(built.graph, c.paths.index);
  print_build_report(built.report, std::cout);
  return 0;
}

std::pair<LayeredComponentGraph, std::unique_ptr<Embedder>> open_index(const Config& c) {
  if (c.paths.index.empty()) throw ConfigError("no index path (--index or paths.index)");
  auto graph = load_index(c.paths.index);
  auto embedder = make_embedder(c.embedder);
  check_compatible(graph.manifest(), *embedder);
  return {std::move(graph), std::move(embedder)};
}

int cmd_query(const Config& c, const std::string& text, bool explain) {
  auto [graph, embedder] = open_index(c);
  auto decomposer = make_decomposer(c.decomposer);
  const auto dq = decompose_query(text, *decomposer, *embedder);
  if (dq.fallback) std::cerr << "warning: " << dq.warning << '\n';
  const auto result = retrieve(graph, dq, c.retrieval);

  if (explain) {
    for (std::size_t j = 0; j < dq.subqueries.size(); ++j) {
      std::cout << "subquery " << j << " [" << to_string(dq.subqueries[j].label) << "] " << dq.subqueries[j].text
                << '\n';
    }
  }
  std::size_t rank = 0;
  for (const auto& item : result.items) {
    const auto idx = *graph.find(item.comp_id);
    std::cout << ++rank << '\t' << item.comp_id << '\t' << std::fixed << std::setprecision(6) << item.score << '\t'
              << graph.documents()[graph.node(idx).doc].title << '\n';
    if (!explain) continue;
    for (std::size_t j = 0; j < item.evidence.size(); ++j) {
      if (item.evidence[j] == kDummyEndpoint) continue;
      const auto& sub = graph.node(item.evidence[j]);
      std::cout << "    q" << j << " -> " << sub.id << " \"" << sub.content << "\"\n";
    }
  }
  std::cerr << std::fixed << std::setprecision(3) << "seed_ms " << result.timings.seed_ms << " traversal_ms "
            << result.timings.traversal_ms << " total_ms " << result.timings.total_ms << '\n';
  return 0;
}

std::vector<RunSpec> sweep_runs(const TraversalParams& base, const std::string& sweep) {
  if (sweep.empty()) return {{std::string(to_string(base.mode)), base}};
  const auto eq = sweep.find('=');
  if (eq == std::string::npos) throw ConfigError("--sweep expects key=v1,v2,...");
  const auto key = sweep.substr(0, eq);
  std::vector<RunSpec> runs;
  std::stringstream values(sweep.substr(eq + 1));
  for (std::string v; std::getline(values, v, ',');) {
    if (v.empty()) continue;
    auto p = base;
    if (key == "b" || key == "n_i" || key == "n_ret") {
      std::size_t used = 0;
      const auto n = std::stoull(v, &used);
      if (used != v.size()) throw ConfigError("bad sweep value '" + v + "'");
      if (key == "b") p.beam_width = n;
      if (key == "n_i") p.iterations = n;
      if (key == "n_ret") p.n_ret = n;
      if (p.beam_width == 0 || p.n_ret == 0) throw ConfigError("sweep values for " + key + " must be positive");
    } else if (key == "mode") {
      const auto m = parse_retrieval_mode(v);
      if (!m) throw ConfigError("bad sweep mode '" + v + "'");
      p.mode = *m;
    } else {
      throw ConfigError("--sweep key must be b, n_i, n_ret or mode");
    }
    runs.push_back({key + "=" + v, p});
  }
  if (runs.empty()) throw ConfigError("--sweep lists no values");
  return runs;
}

int cmd_eval(const Config& c, const std::string& sweep, bool timings) {
  if (c.paths.queries.empty()) throw ConfigError("no queries path (--queries or paths.queries)");
  auto [graph, embedder] = open_index(c);
  auto decomposer = make_decomposer(c.decomposer);
  Qrels qrels;
  const auto queries = load_queries(c.paths.queries, &qrels);
  if (!c.paths.qrels.empty()) qrels = load_qrels(c.paths.qrels);

  EvalOptions options;
  options.ks = c.eval_ks;
  options.recall = c.recall;
  options.include_timings = timings;
  const auto runs = sweep_runs(c.retrieval, sweep);
  const auto report = run_benchmark(graph, queries, qrels, runs, *decomposer, *embedder, options);

  if (!c.paths.report.empty()) {
    std::ofstream out(c.paths.report, std::ios::binary);
    out << report_json(report);
    if (!out) throw Error("cannot write report '" + c.paths.report + "'");
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << report_table(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered component graph retrieval"};
  app.require_subcommand(1);

  std::string config_path;
  int jobs = 0;
  Overrides ov;
  std::string corpus, index, queries, qrels, report;
  app.add_option("-c,--config", config_path, "config file");
  app.add_option("-j,--jobs", jobs, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);

  const auto add_retrieval = [&](CLI::App* sub) {
    sub->add_option("--index", index, "index directory");
    sub->add_option("--mode", ov.mode, "full | no_qd | knn");
    sub->add_option("--b", ov.b, "beam width");
    sub->add_option("--n-i", ov.n_i, "traversal iterations");
    sub->add_option("--n-ret", ov.n_ret, "results returned");
    sub->add_option("--decomposer", ov.decomposer, "rule | llm | none");
    sub->add_option("--embedder", ov.embedder, "hash | service");
    sub->add_option("--dimension", ov.dimension, "embedding dimension");
  };

  auto* build = app.add_subcommand("build", "build an index from a corpus file");
  bool force = false;
  build->add_option("--corpus", corpus, "corpus file");
  build->add_option("--index", index, "index directory");
  build->add_option("--embedder", ov.embedder, "hash | service");
  build->add_option("--dimension", ov.dimension, "embedding dimension");
  build->add_flag("--force", force, "overwrite an existing index");

  auto* query = app.add_subcommand("query", "rank components for one query");
  std::string query_text;
  bool explain = false;
  add_retrieval(query);
  query->add_flag("--explain", explain, "show the best subcomponent per subquery");
  query->add_option("text", query_text, "query text")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a queries file against the index");
  std::string sweep, recall;
  bool timings = false;
  add_retrieval(eval);
  eval->add_option("--queries", queries, "queries file");
  eval->add_option("--qrels", qrels, "qrels file (default: gold in the queries file)");
  eval->add_option("--report", report, "report output path");
  eval->add_option("--sweep", sweep, "b=1,2,... | n_i=0,1,2 | mode=full,no_qd,knn");
  eval->add_option("--recall", recall, "coverage | hit")->check(CLI::IsMember({"coverage", "hit"}));
  eval->add_flag("--timings", timings, "include per-query timings in the report");

  auto* gen = app.add_subcommand("gen-synthetic", "write the synthetic multihop benchmark");
  SyntheticOptions gen_opts;
  std::string gen_corpus = "corpus.jsonl", gen_queries = "queries.jsonl";
  gen->add_option("--queries", gen_opts.queries, "number of queries");
  gen->add_option("--documents", gen_opts.documents, "number of documents (default 4 per query)");
  gen->add_option("--seed", gen_opts.seed, "generator seed");
  gen->add_option("--corpus-out", gen_corpus, "corpus output path");
  gen->add_option("--queries-out", gen_queries, "queries output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (jobs > 0) kernels::set_threads(jobs);
    if (*gen) {
      write_synthetic(generate_synthetic(gen_opts), gen_corpus, gen_queries);
      std::cout << "wrote " << gen_corpus << " and " << gen_queries << '\n';
      return 0;
    }

    Config c = config_path.empty() ? Config{} : load_config(config_path);
    apply_environment(c);
    apply(c, ov);
    if (!corpus.empty()) c.paths.corpus = corpus;
    if (!index.empty()) c.paths.index = index;
    if (!queries.empty()) c.paths.queries = queries;
    if (!qrels.empty()) c.paths.qrels = qrels;
    if (!report.empty()) c.paths.report = report;
    if (!recall.empty()) c.recall = recall == "hit" ? RecallMode::hit : RecallMode::coverage;

    if (*build) return cmd_build(c, force);
    if (*query) return cmd_query(c, query_text, explain);
    return cmd_eval(c, sweep, timings);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
