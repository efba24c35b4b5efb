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
#include <string>
#include <vector>

#include "lilac/corpus.hpp"
#include "lilac/eval.hpp"

namespace lilac {

/// Multihop benchmark: each query names a guild (answered by a bridge paragraph) and a port
/// (answered by a table row in the document the bridge links to). The gold table shares no
/// tokens with the query at the coarse level, so it is reachable only through the link.
struct SyntheticOptions {
  std::size_t queries = 200;
  std::size_t documents = 0;  // 0 means 4 per query; must be >= 3 per query
  std::uint64_t seed = 7;
};

struct SyntheticBenchmark {
  std::vector<Document> documents;
  std::vector<QueryRecord> queries;
  Qrels qrels;
};

SyntheticBenchmark generate_synthetic(const SyntheticOptions& options);

/// Writes the corpus file and a queries file carrying gold and gold_modalities.
void write_synthetic(const SyntheticBenchmark& bench, const std::string& corpus_path,
                     const std::string& queries_path);

}  // namespace lilac
