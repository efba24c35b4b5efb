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

#include "lilac/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace lilac {

using nlohmann::json;

namespace {

std::vector<json> read_records(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw Error(std::string("cannot open ") + what + " file '" + path + "'");
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(n, std::string(what) + ": " + e.what());
    }
  }
  return out;
}

std::optional<QrelEntry> qrel_from(const json& j, const std::string& qid) {
  if (!j.contains("gold")) return std::nullopt;
  QrelEntry e;
  for (const auto& g : j.at("gold").get<std::vector<std::string>>()) e.gold.insert(g);
  if (e.gold.empty()) throw ValidationError("query " + qid + " has an empty gold set");
  if (j.contains("gold_modalities")) {
    std::set<ModalityLabel> mods;
    for (const auto& m : j.at("gold_modalities").get<std::vector<std::string>>()) {
      const auto label = parse_modality_label(m);
      if (!label) throw ValidationError("query " + qid + " has unknown gold modality '" + m + "'");
      mods.insert(*label);
    }
    if (mods.empty()) throw ValidationError("query " + qid + " has an empty gold modality set");
    e.gold_modalities = std::move(mods);
  }
  return e;
}

void check_gold(const std::set<std::string>& gold, std::size_t k) {
  if (gold.empty()) throw Error("gold set is empty");
  if (k == 0) throw Error("k must be >= 1");
}

json timings_json(const StageTimings& t) {
  return {{"seed_ms", t.seed_ms}, {"traversal_ms", t.traversal_ms}, {"total_ms", t.total_ms}};
}

json params_json(const TraversalParams& p) {
  return {{"mode", to_string(p.mode)}, {"b", p.beam_width}, {"n_i", p.iterations}, {"n_ret", p.n_ret}};
}

}  // namespace

std::vector<QueryRecord> load_queries(const std::string& path, Qrels* qrels) {
  std::vector<QueryRecord> out;
  std::set<std::string> seen;
  for (const auto& j : read_records(path, "queries")) {
    try {
      QueryRecord q{j.at("qid").get<std::string>(), j.at("text").get<std::string>()};
      if (!seen.insert(q.qid).second) throw ValidationError("duplicate qid '" + q.qid + "'");
      if (qrels != nullptr) {
        if (auto e = qrel_from(j, q.qid)) (*qrels)[q.qid] = std::move(*e);
      }
      out.push_back(std::move(q));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("queries: ") + e.what());
    }
  }
  return out;
}

Qrels load_qrels(const std::string& path) {
  Qrels out;
  for (const auto& j : read_records(path, "qrels")) {
    try {
      const auto qid = j.at("qid").get<std::string>();
      auto e = qrel_from(j, qid);
      if (!e) throw ValidationError("qrels record for " + qid + " has no gold list");
      out[qid] = std::move(*e);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("qrels: ") + e.what());
    }
  }
  return out;
}

std::vector<std::string> unknown_gold_ids(const Qrels& qrels, const LayeredComponentGraph& graph) {
  std::vector<std::string> out;
  for (const auto& [qid, entry] : qrels) {
    for (const auto& g : entry.gold) {
      const auto idx = graph.find(g);
      if (!idx || *idx >= graph.coarse_count()) out.push_back(qid + ": " + g);
    }
  }
  return out;
}

double recall_at_k(std::span<const std::string> ranked, const std::set<std::string>& gold, std::size_t k,
                   RecallMode mode) {
  check_gold(gold, k);
  std::set<std::string> found;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (gold.contains(ranked[i])) found.insert(ranked[i]);
  }
  if (mode == RecallMode::hit) return found.empty() ? 0.0 : 1.0;
  return static_cast<double>(found.size()) / static_cast<double>(gold.size());
}

double mrr_at_k(std::span<const std::string> ranked, const std::set<std::string>& gold, std::size_t k) {
  check_gold(gold, k);
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    if (gold.contains(ranked[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double modality_jaccard(const std::set<ModalityLabel>& predicted, const std::set<ModalityLabel>& gold) {
  if (gold.empty()) throw Error("gold modality set is empty");
  std::size_t inter = 0;
  for (auto m : predicted) inter += gold.contains(m) ? 1 : 0;
  const std::size_t uni = predicted.size() + gold.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw Error("pearson needs two equal-length samples of size >= 2");
  const auto n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

EvalReport run_benchmark(const LayeredComponentGraph& graph, std::span<const QueryRecord> queries,
                         const Qrels& qrels, std::span<const RunSpec> runs, Decomposer& decomposer,
                         Embedder& embedder, const EvalOptions& options) {
  if (options.ks.empty()) throw ConfigError("at least one cutoff k is required");
  EvalReport report;
  report.options = options;
  for (auto& w : unknown_gold_ids(qrels, graph)) report.warnings.push_back("unknown gold id " + w);

  std::vector<const QueryRecord*> active;
  std::size_t skipped = 0;
  for (const auto& q : queries) {
    if (qrels.contains(q.qid)) {
      active.push_back(&q);
    } else {
      ++skipped;
    }
  }
  if (skipped > 0) report.warnings.push_back(std::to_string(skipped) + " queries have no qrels and were skipped");

  std::vector<DecomposedQuery> decomposed;
  decomposed.reserve(active.size());
  for (const auto* q : active) decomposed.push_back(decompose_query(q->text, decomposer, embedder));

  const std::size_t max_k = *std::max_element(options.ks.begin(), options.ks.end());
  for (const auto& spec : runs) {
    RunReport run;
    run.label = spec.label;
    run.params = spec.params;
    run.skipped = skipped;
    run.per_query.resize(active.size());

    auto params = spec.params;
    params.n_ret = std::max(params.n_ret, max_k);
    params.parallel = !options.parallel;  // one level of parallelism at a time
    std::vector<std::exception_ptr> errors(active.size());

    const auto n = static_cast<std::ptrdiff_t>(active.size());
#pragma omp parallel for schedule(dynamic, 4) if (options.parallel)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        const auto& dq = decomposed[i];
        const auto& entry = qrels.at(active[i]->qid);
        const auto result = retrieve(graph, dq, params);
        QueryOutcome o;
        o.qid = active[i]->qid;
        for (const auto& item : result.items) o.ranked.push_back(item.comp_id);
        for (auto k : options.ks) {
          o.recall.push_back(recall_at_k(o.ranked, entry.gold, k, options.recall));
          o.mrr.push_back(mrr_at_k(o.ranked, entry.gold, k));
        }
        if (entry.gold_modalities) o.jaccard = modality_jaccard(modality_set(dq), *entry.gold_modalities);
        o.fallback = dq.fallback;
        o.timings = result.timings;
        if (o.ranked.size() > max_k) o.ranked.resize(max_k);
        run.per_query[i] = std::move(o);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    run.evaluated = run.per_query.size();
    run.mean_recall.assign(options.ks.size(), 0.0);
    run.mean_mrr.assign(options.ks.size(), 0.0);
    double jaccard_sum = 0;
    std::size_t jaccard_n = 0;
    for (const auto& o : run.per_query) {
      for (std::size_t k = 0; k < options.ks.size(); ++k) {
        run.mean_recall[k] += o.recall[k];
        run.mean_mrr[k] += o.mrr[k];
      }
      if (o.jaccard) {
        jaccard_sum += *o.jaccard;
        ++jaccard_n;
      }
      run.fallbacks += o.fallback ? 1 : 0;
      run.mean_timings.seed_ms += o.timings.seed_ms;
      run.mean_timings.traversal_ms += o.timings.traversal_ms;
      run.mean_timings.total_ms += o.timings.total_ms;
    }
    if (run.evaluated > 0) {
      const auto denom = static_cast<double>(run.evaluated);
      for (auto& v : run.mean_recall) v /= denom;
      for (auto& v : run.mean_mrr) v /= denom;
      run.mean_timings.seed_ms /= denom;
      run.mean_timings.traversal_ms /= denom;
      run.mean_timings.total_ms /= denom;
    }
    if (jaccard_n > 0) run.mean_jaccard = jaccard_sum / static_cast<double>(jaccard_n);
    report.runs.push_back(std::move(run));
  }
  return report;
}

std::string report_json(const EvalReport& report) {
  json runs = json::array();
  for (const auto& run : report.runs) {
    json means = json::object();
    for (std::size_t k = 0; k < report.options.ks.size(); ++k) {
      means["recall@" + std::to_string(report.options.ks[k])] = run.mean_recall[k];
      means["mrr@" + std::to_string(report.options.ks[k])] = run.mean_mrr[k];
    }
    if (run.mean_jaccard) means["modality_jaccard"] = *run.mean_jaccard;

    json per_query = json::array();
    for (const auto& o : run.per_query) {
      json q = {{"qid", o.qid}, {"ranked", o.ranked}};
      for (std::size_t k = 0; k < report.options.ks.size(); ++k) {
        q["recall@" + std::to_string(report.options.ks[k])] = o.recall[k];
        q["mrr@" + std::to_string(report.options.ks[k])] = o.mrr[k];
      }
      if (o.jaccard) q["modality_jaccard"] = *o.jaccard;
      if (o.fallback) q["decomposition_fallback"] = true;
      if (report.options.include_timings) q["timings"] = timings_json(o.timings);
      per_query.push_back(std::move(q));
    }

    json r = {{"label", run.label},
              {"params", params_json(run.params)},
              {"queries_evaluated", run.evaluated},
              {"queries_skipped", run.skipped},
              {"decomposition_fallbacks", run.fallbacks},
              {"means", std::move(means)},
              {"per_query", std::move(per_query)}};
    if (report.options.include_timings) r["mean_timings"] = timings_json(run.mean_timings);
    runs.push_back(std::move(r));
  }
  json out = {{"recall_mode", report.options.recall == RecallMode::coverage ? "coverage" : "hit"},
              {"ks", report.options.ks},
              {"warnings", report.warnings},
              {"runs", std::move(runs)}};
  return out.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
  std::vector<std::string> header{"run", "mode", "b", "n_i", "queries"};
  for (auto k : report.options.ks) header.push_back("R@" + std::to_string(k));
  for (auto k : report.options.ks) header.push_back("MRR@" + std::to_string(k));
  header.push_back("J");
  header.push_back("ms/query");

  const auto fixed = [](double v, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  std::vector<std::vector<std::string>> rows{header};
  for (const auto& run : report.runs) {
    std::vector<std::string> row{run.label, std::string(to_string(run.params.mode)),
                                 std::to_string(run.params.beam_width), std::to_string(run.params.iterations),
                                 std::to_string(run.evaluated)};
    for (auto v : run.mean_recall) row.push_back(fixed(v, 4));
    for (auto v : run.mean_mrr) row.push_back(fixed(v, 4));
    row.push_back(run.mean_jaccard ? fixed(*run.mean_jaccard, 4) : "-");
    row.push_back(fixed(run.mean_timings.total_ms, 3));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << "  ";
      out << (c == 0 ? std::left : std::right) << std::setw(static_cast<int>(width[c])) << row[c];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace lilac
