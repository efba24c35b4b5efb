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

#include "lilac/segmenter.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace lilac {

namespace {

constexpr std::array<std::string_view, 26> kAbbreviations = {
    "mr",  "mrs", "ms",   "dr",  "prof", "sr",  "jr",  "st",  "mt",  "vs",  "etc", "inc", "ltd",
    "co",  "corp", "no",  "fig", "gen",  "col", "lt",  "sgt", "capt", "gov", "rev", "approx", "dept"};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// "e.g", "u.s", single initials like "J".
bool is_dotted_initialism(std::string_view core) {
  if (core.empty()) return false;
  for (std::size_t i = 0; i < core.size(); ++i) {
    const bool letter = std::isalpha(static_cast<unsigned char>(core[i])) != 0;
    if (i % 2 == 0 ? !letter : core[i] != '.') return false;
  }
  return true;
}

bool is_abbreviation(std::string_view core) {
  if (is_dotted_initialism(core)) return true;
  const auto l = lower(core);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), l) != kAbbreviations.end();
}

bool ends_sentence(std::string_view token) {
  std::size_t end = token.size();
  while (end > 0 && is_closer(token[end - 1])) --end;
  if (end == 0 || !is_terminator(token[end - 1])) return false;
  if (token[end - 1] != '.') return true;
  // A '.' after other terminators ("?!." etc.) still ends the sentence.
  std::size_t core_end = end;
  while (core_end > 0 && is_terminator(token[core_end - 1])) --core_end;
  if (core_end + 1 < end) return true;
  std::size_t core_begin = 0;
  while (core_begin < core_end && is_opener(token[core_begin])) ++core_begin;
  return !is_abbreviation(token.substr(core_begin, core_end - core_begin));
}

bool starts_sentence(std::string_view token) {
  std::size_t i = 0;
  while (i < token.size() && is_opener(token[i])) ++i;
  if (i == token.size()) return false;
  const auto c = static_cast<unsigned char>(token[i]);
  return std::isupper(c) || std::isdigit(c);
}

}  // namespace

std::string_view to_string(SubKind k) {
  switch (k) {
    case SubKind::sentence: return "sentence";
    case SubKind::row_segment: return "row_segment";
    case SubKind::object: return "object";
  }
  return "?";
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }

  std::vector<std::string> sentences;
  std::string current;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (!current.empty()) current.push_back(' ');
    current.append(tokens[t]);
    const bool last = t + 1 == tokens.size();
    if (last || (ends_sentence(tokens[t]) && starts_sentence(tokens[t + 1]))) {
      sentences.push_back(std::move(current));
      current.clear();
    }
  }
  return sentences;
}

std::string render_row(const std::vector<std::string>& header, const std::vector<std::string>& row) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c > 0) out += " | ";
    out += header[c];
    out += ": ";
    out += row[c];
  }
  return out;
}

std::vector<Subcomponent> segment_table(std::string_view comp_id, const TableRows& rows) {
  std::vector<Subcomponent> out;
  if (rows.empty()) return out;
  const auto& header = rows.front();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw ValidationError("table " + std::string(comp_id) + ": row " + std::to_string(r) + " has " +
                            std::to_string(rows[r].size()) + " cells, header has " +
                            std::to_string(header.size()));
    }
    const std::size_t k = out.size();
    out.push_back({child_id(comp_id, k), std::string(comp_id), SubKind::row_segment,
                   render_row(header, rows[r])});
  }
  return out;
}

std::vector<Subcomponent> extract_objects(const Component& image) {
  std::vector<Subcomponent> out;
  if (!image.objects) return out;
  for (const auto& o : *image.objects) {
    const std::size_t k = out.size();
    out.push_back({child_id(image.comp_id, k), image.comp_id, SubKind::object, o.label});
  }
  return out;
}

std::vector<Subcomponent> subcomponents(const Component& component) {
  switch (component.modality) {
    case Modality::paragraph: {
      std::vector<Subcomponent> out;
      for (auto& s : split_sentences(component.text)) {
        const std::size_t k = out.size();
        out.push_back({child_id(component.comp_id, k), component.comp_id, SubKind::sentence, std::move(s)});
      }
      return out;
    }
    case Modality::table:
      return segment_table(component.comp_id, component.rows.value_or(TableRows{}));
    case Modality::image:
      return extract_objects(component);
  }
  return {};
}

}  // namespace lilac
