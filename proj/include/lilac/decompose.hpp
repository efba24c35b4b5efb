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

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lilac/common.hpp"
#include "lilac/embedding.hpp"
#include "lilac/llm_client.hpp"

namespace lilac {

inline constexpr std::size_t kMaxSubqueries = 5;

struct Subquery {
  std::string text;
  ModalityLabel label = ModalityLabel::text;
  Embedding embedding;  // embedded with `label` as instruction
};

struct DecomposedQuery {
  std::string query_text;
  Embedding coarse_embedding;  // instruction none
  std::vector<Subquery> subqueries;  // 1..kMaxSubqueries
  bool fallback = false;             // llm backend degraded to rules
  std::string warning;
};

/// Keyword heuristics: numeric/tabular cues -> table, visual cues -> image, else text.
ModalityLabel classify_modality(std::string_view subquery);

/// Splits on top-level commas, "and", "as well as", and before "which" / "that <verb>".
/// Pieces shorter than two words are merged back; the tail beyond five pieces is merged
/// into the fifth. Never returns an empty list for a non-empty query.
std::vector<std::string> rule_split(std::string_view query);

struct LabeledSubquery {
  std::string text;
  ModalityLabel label = ModalityLabel::text;

  bool operator==(const LabeledSubquery&) const = default;
};

struct Decomposition {
  std::vector<LabeledSubquery> subqueries;
  bool fallback = false;
  std::string warning;
};

class Decomposer {
 public:
  virtual ~Decomposer() = default;
  virtual std::string name() const = 0;
  virtual Decomposition decompose(std::string_view query) = 0;
};

class RuleDecomposer final : public Decomposer {
 public:
  std::string name() const override { return "rule"; }
  Decomposition decompose(std::string_view query) override;
};

/// The whole query as a single rule-classified subquery.
class WholeQueryDecomposer final : public Decomposer {
 public:
  std::string name() const override { return "none"; }
  Decomposition decompose(std::string_view query) override;
};

struct PromptTemplates {
  std::string decompose;  // contains {question}
  std::string modality;   // contains {subquery}

  static PromptTemplates load(const std::string& decompose_path, const std::string& modality_path);
};

std::string render_prompt(std::string_view tmpl, std::string_view placeholder, std::string_view value);

/// Parses the decomposition reply: a JSON array of strings, possibly wrapped in prose or
/// code fences. Empty entries are dropped and the list is truncated to kMaxSubqueries.
/// Returns nullopt when no usable list is present.
std::optional<std::vector<std::string>> parse_subquery_list(std::string_view reply);

/// Parses a single-line modality reply.
std::optional<ModalityLabel> parse_modality_reply(std::string_view reply);

/// Two prompt round-trips per query; any failure degrades to RuleDecomposer output with
/// `fallback` set.
class LlmDecomposer final : public Decomposer {
 public:
  LlmDecomposer(std::shared_ptr<ChatClient> client, PromptTemplates templates);
  std::string name() const override { return "llm"; }
  Decomposition decompose(std::string_view query) override;

 private:
  std::shared_ptr<ChatClient> client_;
  PromptTemplates templates_;
  RuleDecomposer rules_;
};

/// Runs the decomposer and embeds the coarse query (instruction none) and every subquery
/// (its own label as instruction). Throws Error on an empty query.
DecomposedQuery decompose_query(std::string_view query, Decomposer& decomposer, Embedder& embedder);

std::set<ModalityLabel> modality_set(const DecomposedQuery& dq);

}  // namespace lilac
