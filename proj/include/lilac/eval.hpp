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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lilac/decompose.hpp"
#include "lilac/graph.hpp"
#include "lilac/retrieval.hpp"

namespace lilac {

struct QueryRecord {
  std::string qid;
  std::string text;
};

struct QrelEntry {
  std::set<std::string> gold;                            // non-empty
  std::optional<std::set<ModalityLabel>> gold_modalities;
};

using Qrels = std::map<std::string, QrelEntry>;

/// Newline-delimited `{qid, text, gold?, gold_modalities?}` records. Records that carry
/// `gold` also populate `qrels` when it is non-null.
std::vector<QueryRecord> load_queries(const std::string& path, Qrels* qrels = nullptr);

/// Newline-delimited `{qid, gold, gold_modalities?}` records.
Qrels load_qrels(const std::string& path);

/// Gold ids that do not name a layer-0 node, formatted `qid: comp_id`.
std::vector<std::string> unknown_gold_ids(const Qrels& qrels, const LayeredComponentGraph& graph);

enum class RecallMode : std::uint8_t {
  coverage,  // |gold ∩ top-k| / |gold|
  hit        // 1 if any gold item is in the top k
};

/// Throws Error on empty gold or k == 0.
double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& gold, std::size_t k,
                   RecallMode mode = RecallMode::coverage);
double mrr_at_k(std::span<const std::string> ranked, const std::set<std::string>& gold, std::size_t k);
double modality_jaccard(const std::set<ModalityLabel>& predicted, const std::set<ModalityLabel>& gold);

/// Sample Pearson correlation; NaN when either side has zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct EvalOptions {
  std::vector<std::size_t> ks{3, 10};
  RecallMode recall = RecallMode::coverage;
  bool include_timings = false;  // timings make reports non-reproducible byte-for-byte
  bool parallel = true;          // evaluate queries concurrently
};

struct QueryOutcome {
  std::string qid;
  std::vector<std::string> ranked;
  std::vector<double> recall;  // parallel to EvalOptions::ks
  std::vector<double> mrr;
  std::optional<double> jaccard;
  bool fallback = false;
  StageTimings timings;
};

struct RunReport {
  std::string label;
  TraversalParams params;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // queries without qrels
  std::vector<double> mean_recall;
  std::vector<double> mean_mrr;
  std::optional<double> mean_jaccard;
  std::size_t fallbacks = 0;
  StageTimings mean_timings;
  std::vector<QueryOutcome> per_query;
};

struct EvalReport {
  EvalOptions options;
  std::vector<std::string> warnings;
  std::vector<RunReport> runs;
};

struct RunSpec {
  std::string label;
  TraversalParams params;
};

/// Decomposes every query once, then evaluates each run. Deterministic for the rule
/// decomposer with the hash embedder.
EvalReport run_benchmark(const LayeredComponentGraph& graph, std::span<const QueryRecord> queries,
                         const Qrels& qrels, std::span<const RunSpec> runs, Decomposer& decomposer,
                         Embedder& embedder, const EvalOptions& options = {});

/// Structured-text report.
std::string report_json(const EvalReport& report);
/// One aligned row per run.
std::string report_table(const EvalReport& report);

}  // namespace lilac
