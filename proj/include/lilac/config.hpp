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
#include <memory>
#include <string>
#include <vector>

#include "lilac/decompose.hpp"
#include "lilac/embedding.hpp"
#include "lilac/eval.hpp"
#include "lilac/retrieval.hpp"

namespace lilac {

struct EmbedderConfig {
  std::string backend = "hash";  // hash | service
  std::size_t dimension = 256;
  HashSeeds seeds;
  std::string service_url;
  std::size_t timeout_ms = 30000;
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
};

struct DecomposerConfig {
  std::string backend = "rule";  // rule | llm | none
  std::string llm_url;
  std::string model;
  std::string api_key_env = "LILAC_LLM_API_KEY";
  std::string decompose_prompt = "prompts/query_decomposition.txt";
  std::string modality_prompt = "prompts/modality_selection.txt";
  std::string replay_path;           // transcript file; empty disables
  std::string replay_mode = "replay";  // replay | record
  std::size_t timeout_ms = 60000;
  std::size_t max_in_flight = 4;
  int retries = 2;
};

struct PathsConfig {
  std::string corpus;
  std::string index;
  std::string queries;
  std::string qrels;  // optional; gold in the queries file is used when empty
  std::string report;
};

struct Config {
  EmbedderConfig embedder;
  DecomposerConfig decomposer;
  TraversalParams retrieval;
  PathsConfig paths;
  std::vector<std::size_t> eval_ks{3, 10};
  RecallMode recall = RecallMode::coverage;
};

/// Parses a structured-text config. Unknown keys and out-of-range values raise ConfigError.
/// Relative paths are resolved against `base_dir` when it is non-empty.
Config parse_config(const std::string& text, const std::string& base_dir = "");
Config load_config(const std::string& path);

/// LILAC_EMBED_URL and LILAC_LLM_URL override the service endpoints when set.
void apply_environment(Config& config);

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config, bool parallel = true);
std::unique_ptr<Decomposer> make_decomposer(const DecomposerConfig& config);

}  // namespace lilac
