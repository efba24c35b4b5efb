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

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lilac/common.hpp"

namespace lilac {

using TableRows = std::vector<std::vector<std::string>>;

struct ObjectAnnotation {
  std::string label;
  std::array<int, 4> bbox{};  // x1, y1, x2, y2 in pixels

  bool operator==(const ObjectAnnotation&) const = default;
};

struct Component {
  std::string comp_id;  // `<doc_id>/<index>`
  Modality modality = Modality::paragraph;
  std::string text;     // paragraph body or image caption
  std::optional<TableRows> rows;                       // tables only, rows[0] is the header
  std::optional<std::vector<ObjectAnnotation>> objects;  // images only
  std::vector<std::string> links;                      // target doc_ids
  std::optional<std::string> image_ref;

  bool operator==(const Component&) const = default;
};

struct Document {
  std::string doc_id;
  std::string title;
  std::vector<Component> components;

  bool operator==(const Document&) const = default;
};

/// Validated, immutable collection of documents with id lookups.
class Corpus {
 public:
  Corpus() = default;
  /// Validates every invariant and assigns comp_ids. Throws ValidationError.
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const noexcept { return documents_; }
  std::size_t component_count() const noexcept { return component_count_; }

  const Document* find_document(std::string_view doc_id) const;
  const Component* find_component(std::string_view comp_id) const;

  bool operator==(const Corpus& other) const { return documents_ == other.documents_; }

 private:
  std::vector<Document> documents_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::size_t component_count_ = 0;
};

/// Reads newline-delimited document records. Blank lines are skipped.
/// Throws ParseError (with line number) or ValidationError.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::string& path);

/// Writes the corpus in the same record format parse_corpus reads.
void serialize_corpus(const Corpus& corpus, std::ostream& out);
std::string serialize_corpus(const Corpus& corpus);

/// FNV-1a digest of the canonical serialization, hex encoded.
std::string corpus_digest(const Corpus& corpus);

struct LinkMapping {
  std::vector<std::pair<std::string, std::string>> pairs;  // (comp_id, target doc_id), sorted, unique
  std::size_t dropped = 0;                                  // dangling targets removed
};

LinkMapping resolve_links(const Corpus& corpus);

}  // namespace lilac
