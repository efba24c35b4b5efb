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

#include <string>
#include <string_view>
#include <vector>

#include "lilac/common.hpp"
#include "lilac/corpus.hpp"

namespace lilac {

enum class SubKind : std::uint8_t { sentence, row_segment, object };

std::string_view to_string(SubKind k);

struct Subcomponent {
  std::string sub_id;  // `<comp_id>/<k>`
  std::string parent;  // comp_id
  SubKind kind = SubKind::sentence;
  std::string content;

  bool operator==(const Subcomponent&) const = default;
};

/// Rule-based sentence splitter. A boundary follows a token ending in `.`, `!` or `?`
/// (optionally followed by closing quotes/brackets) when the next token starts with an
/// uppercase letter or digit, unless the token is a known abbreviation or an initial.
/// Whitespace runs are collapsed; joining the output with single spaces reproduces the
/// whitespace-normalized input.
std::vector<std::string> split_sentences(std::string_view text);

/// Renders `h1: v1 | h2: v2 | ...` for a data row.
std::string render_row(const std::vector<std::string>& header, const std::vector<std::string>& row);

/// One row segment per data row. Throws ValidationError naming the row index on arity mismatch.
std::vector<Subcomponent> segment_table(std::string_view comp_id, const TableRows& rows);

/// One object subcomponent per annotation; content is the label.
std::vector<Subcomponent> extract_objects(const Component& image);

/// Dispatches on modality. Ids are `<comp_id>/0..k-1`.
std::vector<Subcomponent> subcomponents(const Component& component);

}  // namespace lilac
