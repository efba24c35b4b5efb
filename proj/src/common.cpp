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

#include "lilac/common.hpp"

#include <charconv>
#include <cstdio>

namespace lilac {

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::paragraph: return "paragraph";
    case Modality::table: return "table";
    case Modality::image: return "image";
  }
  return "?";
}

std::string_view to_string(ModalityLabel m) {
  switch (m) {
    case ModalityLabel::text: return "text";
    case ModalityLabel::table: return "table";
    case ModalityLabel::image: return "image";
  }
  return "?";
}

std::optional<Modality> parse_modality(std::string_view s) {
  if (s == "paragraph") return Modality::paragraph;
  if (s == "table") return Modality::table;
  if (s == "image") return Modality::image;
  return std::nullopt;
}

std::optional<ModalityLabel> parse_modality_label(std::string_view s) {
  if (s == "text") return ModalityLabel::text;
  if (s == "table") return ModalityLabel::table;
  if (s == "image") return ModalityLabel::image;
  return std::nullopt;
}

ModalityLabel label_of(Modality m) {
  switch (m) {
    case Modality::paragraph: return ModalityLabel::text;
    case Modality::table: return ModalityLabel::table;
    case Modality::image: return ModalityLabel::image;
  }
  return ModalityLabel::text;
}

std::string child_id(std::string_view parent, std::size_t index) {
  std::string out(parent);
  out.push_back('/');
  out += std::to_string(index);
  return out;
}

std::optional<std::pair<std::string, std::size_t>> split_child_id(std::string_view id) {
  const auto slash = id.rfind('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == id.size()) return std::nullopt;
  std::size_t index = 0;
  const char* first = id.data() + slash + 1;
  const char* last = id.data() + id.size();
  auto [ptr, ec] = std::from_chars(first, last, index);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return std::make_pair(std::string(id.substr(0, slash)), index);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace lilac
