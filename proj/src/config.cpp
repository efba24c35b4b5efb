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

#include "lilac/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lilac {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, _] : j.items()) {
    if (!keys.contains(k)) throw ConfigError("unknown config key '" + section + (section.empty() ? "" : ".") + k + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::uint64_t read_seed(const json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    std::size_t used = 0;
    const auto v = std::stoull(s, &used, 0);
    if (used != s.size()) throw ConfigError("bad hash seed '" + s + "'");
    return v;
  }
  throw ConfigError("hash seeds must be unsigned integers or hex strings");
}

std::string resolve(const std::string& path, const std::string& base) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

std::size_t positive(std::size_t v, const char* what) {
  if (v == 0) throw ConfigError(std::string(what) + " must be positive");
  return v;
}

}  // namespace

Config parse_config(const std::string& text, const std::string& base_dir) {
  Config c;
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid: ") + e.what());
  }
  try {
    check_keys(root, "", {"embedder", "decomposer", "retrieval", "paths", "eval"});

    if (root.contains("embedder")) {
      const auto& e = root["embedder"];
      check_keys(e, "embedder",
                 {"backend", "dimension", "seeds", "service_url", "timeout_ms", "batch_size", "max_in_flight"});
      read(e, "backend", c.embedder.backend);
      read(e, "dimension", c.embedder.dimension);
      read(e, "service_url", c.embedder.service_url);
      read(e, "timeout_ms", c.embedder.timeout_ms);
      read(e, "batch_size", c.embedder.batch_size);
      read(e, "max_in_flight", c.embedder.max_in_flight);
      if (e.contains("seeds")) {
        const auto& s = e["seeds"];
        if (!s.is_array() || s.size() != 2) throw ConfigError("embedder.seeds must hold two values");
        c.embedder.seeds = {read_seed(s[0]), read_seed(s[1])};
      }
    }
    if (c.embedder.backend != "hash" && c.embedder.backend != "service") {
      throw ConfigError("embedder.backend must be hash or service");
    }
    if (c.embedder.dimension < 8) throw ConfigError("embedder.dimension must be >= 8");
    positive(c.embedder.batch_size, "embedder.batch_size");
    positive(c.embedder.max_in_flight, "embedder.max_in_flight");

    if (root.contains("decomposer")) {
      const auto& d = root["decomposer"];
      check_keys(d, "decomposer",
                 {"backend", "llm_url", "model", "api_key_env", "decompose_prompt", "modality_prompt", "replay_path",
                  "replay_mode", "timeout_ms", "max_in_flight", "retries"});
      read(d, "backend", c.decomposer.backend);
      read(d, "llm_url", c.decomposer.llm_url);
      read(d, "model", c.decomposer.model);
      read(d, "api_key_env", c.decomposer.api_key_env);
      read(d, "decompose_prompt", c.decomposer.decompose_prompt);
      read(d, "modality_prompt", c.decomposer.modality_prompt);
      read(d, "replay_path", c.decomposer.replay_path);
      read(d, "replay_mode", c.decomposer.replay_mode);
      read(d, "timeout_ms", c.decomposer.timeout_ms);
      read(d, "max_in_flight", c.decomposer.max_in_flight);
      read(d, "retries", c.decomposer.retries);
    }
    if (c.decomposer.backend != "rule" && c.decomposer.backend != "llm" && c.decomposer.backend != "none") {
      throw ConfigError("decomposer.backend must be rule, llm or none");
    }
    if (c.decomposer.replay_mode != "replay" && c.decomposer.replay_mode != "record") {
      throw ConfigError("decomposer.replay_mode must be replay or record");
    }
    if (c.decomposer.retries < 0) throw ConfigError("decomposer.retries must be >= 0");
    positive(c.decomposer.max_in_flight, "decomposer.max_in_flight");

    if (root.contains("retrieval")) {
      const auto& r = root["retrieval"];
      check_keys(r, "retrieval", {"b", "n_i", "n_ret", "mode"});
      read(r, "b", c.retrieval.beam_width);
      read(r, "n_i", c.retrieval.iterations);
      read(r, "n_ret", c.retrieval.n_ret);
      if (r.contains("mode")) {
        const auto m = parse_retrieval_mode(r["mode"].get<std::string>());
        if (!m) throw ConfigError("retrieval.mode must be full, no_qd or knn");
        c.retrieval.mode = *m;
      }
    }
    positive(c.retrieval.beam_width, "retrieval.b");
    positive(c.retrieval.n_ret, "retrieval.n_ret");

    if (root.contains("paths")) {
      const auto& p = root["paths"];
      check_keys(p, "paths", {"corpus", "index", "queries", "qrels", "report"});
      read(p, "corpus", c.paths.corpus);
      read(p, "index", c.paths.index);
      read(p, "queries", c.paths.queries);
      read(p, "qrels", c.paths.qrels);
      read(p, "report", c.paths.report);
    }

    if (root.contains("eval")) {
      const auto& e = root["eval"];
      check_keys(e, "eval", {"k", "recall"});
      read(e, "k", c.eval_ks);
      if (e.contains("recall")) {
        const auto r = e["recall"].get<std::string>();
        if (r == "coverage") {
          c.recall = RecallMode::coverage;
        } else if (r == "hit") {
          c.recall = RecallMode::hit;
        } else {
          throw ConfigError("eval.recall must be coverage or hit");
        }
      }
    }
    if (c.eval_ks.empty()) throw ConfigError("eval.k must not be empty");
    for (auto k : c.eval_ks) positive(k, "eval.k entries");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  for (auto* p : {&c.paths.corpus, &c.paths.index, &c.paths.queries, &c.paths.qrels, &c.paths.report,
                  &c.decomposer.decompose_prompt, &c.decomposer.modality_prompt, &c.decomposer.replay_path}) {
    *p = resolve(*p, base_dir);
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::path(path).parent_path().string());
}

void apply_environment(Config& config) {
  if (const char* v = std::getenv("LILAC_EMBED_URL"); v != nullptr && *v != '\0') config.embedder.service_url = v;
  if (const char* v = std::getenv("LILAC_LLM_URL"); v != nullptr && *v != '\0') config.decomposer.llm_url = v;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config, bool parallel) {
  if (config.backend == "hash") return std::make_unique<HashEmbedder>(config.dimension, config.seeds, parallel);
  if (config.service_url.empty()) throw ConfigError("embedder.service_url is required for the service backend");
  ServiceOptions o;
  o.base_url = config.service_url;
  o.dimension = config.dimension;
  o.timeout = std::chrono::milliseconds(config.timeout_ms);
  o.batch_size = config.batch_size;
  o.max_in_flight = config.max_in_flight;
  return std::make_unique<ServiceEmbedder>(o);
}

std::unique_ptr<Decomposer> make_decomposer(const DecomposerConfig& config) {
  if (config.backend == "rule") return std::make_unique<RuleDecomposer>();
  if (config.backend == "none") return std::make_unique<WholeQueryDecomposer>();

  auto templates = PromptTemplates::load(config.decompose_prompt, config.modality_prompt);
  std::shared_ptr<ChatClient> client;
  if (!config.replay_path.empty() && config.replay_mode == "replay") {
    client = std::make_shared<ReplayChatClient>(config.replay_path);
  } else {
    if (config.llm_url.empty()) throw ConfigError("decomposer.llm_url is required for the llm backend");
    ChatOptions o;
    o.base_url = config.llm_url;
    o.model = config.model;
    o.timeout = std::chrono::milliseconds(config.timeout_ms);
    o.retries = config.retries;
    o.max_in_flight = static_cast<int>(config.max_in_flight);
    if (const char* key = std::getenv(config.api_key_env.c_str()); key != nullptr) o.api_key = key;
    client = std::make_shared<HttpChatClient>(o);
    if (!config.replay_path.empty()) client = std::make_shared<RecordingChatClient>(client, config.replay_path);
  }
  return std::make_unique<LlmDecomposer>(std::move(client), std::move(templates));
}

}  // namespace lilac
