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

#include "lilac/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace lilac {

using nlohmann::json;

namespace {

bool has_visible_text(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return !std::isspace(c); });
}

void validate_component(const Component& c) {
  const auto fail = [&](const std::string& why) {
    throw ValidationError("component " + c.comp_id + ": " + why);
  };
  switch (c.modality) {
    case Modality::paragraph:
      if (c.rows || c.objects) fail("paragraph carries a table or image payload");
      if (!has_visible_text(c.text)) fail("paragraph text is empty");
      if (c.image_ref) fail("paragraph carries an image_ref");
      break;
    case Modality::table:
      if (c.objects) fail("table carries an image payload");
      if (!c.text.empty()) fail("table carries a text payload");
      if (!c.rows || c.rows->empty()) fail("table has no header row");
      if ((*c.rows)[0].empty()) fail("table header row has no columns");
      if (c.image_ref) fail("table carries an image_ref");
      break;
    case Modality::image:
      if (c.rows) fail("image carries a table payload");
      if (!c.objects) fail("image has no objects list");
      for (std::size_t i = 0; i < c.objects->size(); ++i) {
        const auto& o = (*c.objects)[i];
        if (o.label.empty()) fail("object " + std::to_string(i) + " has an empty label");
        if (!(o.bbox[0] < o.bbox[2] && o.bbox[1] < o.bbox[3])) {
          fail("object " + std::to_string(i) + " has a degenerate bounding box");
        }
      }
      break;
  }
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         std::size_t line, std::string_view where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(line, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
T get_field(const json& obj, const char* key, std::size_t line) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(line, std::string("field '") + key + "': " + e.what());
  }
}

Component parse_component(const json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "component is not an object");
  reject_unknown_keys(j, {"type", "text", "rows", "objects", "caption", "links", "image_ref"}, line,
                      "component");
  Component c;
  const auto type = get_field<std::string>(j, "type", line);
  const auto modality = parse_modality(type);
  if (!modality) throw ParseError(line, "unknown component type '" + type + "'");
  c.modality = *modality;

  if (j.contains("text")) c.text = get_field<std::string>(j, "text", line);
  if (j.contains("caption")) {
    if (c.modality != Modality::image) {
      throw ParseError(line, "'caption' is only valid on image components");
    }
    if (j.contains("text")) throw ParseError(line, "image has both 'text' and 'caption'");
    c.text = get_field<std::string>(j, "caption", line);
  }
  if (j.contains("rows")) c.rows = get_field<TableRows>(j, "rows", line);
  if (j.contains("objects")) {
    const auto& arr = j.at("objects");
    if (!arr.is_array()) throw ParseError(line, "'objects' is not a list");
    std::vector<ObjectAnnotation> objects;
    for (const auto& o : arr) {
      if (!o.is_object()) throw ParseError(line, "object annotation is not an object");
      reject_unknown_keys(o, {"label", "bbox"}, line, "object annotation");
      ObjectAnnotation a;
      a.label = get_field<std::string>(o, "label", line);
      const auto box = get_field<std::vector<int>>(o, "bbox", line);
      if (box.size() != 4) throw ParseError(line, "bbox must have four integers");
      std::copy(box.begin(), box.end(), a.bbox.begin());
      objects.push_back(std::move(a));
    }
    c.objects = std::move(objects);
  }
  if (j.contains("links")) c.links = get_field<std::vector<std::string>>(j, "links", line);
  if (j.contains("image_ref")) c.image_ref = get_field<std::string>(j, "image_ref", line);
  return c;
}

json component_to_json(const Component& c) {
  json j;
  j["type"] = to_string(c.modality);
  switch (c.modality) {
    case Modality::paragraph:
      j["text"] = c.text;
      break;
    case Modality::table:
      j["rows"] = c.rows.value_or(TableRows{});
      break;
    case Modality::image: {
      json objs = json::array();
      for (const auto& o : c.objects.value_or(std::vector<ObjectAnnotation>{})) {
        objs.push_back({{"label", o.label}, {"bbox", o.bbox}});
      }
      j["objects"] = std::move(objs);
      if (!c.text.empty()) j["caption"] = c.text;
      if (c.image_ref) j["image_ref"] = *c.image_ref;
      break;
    }
  }
  if (!c.links.empty()) j["links"] = c.links;
  return j;
}

}  // namespace

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  for (std::size_t d = 0; d < documents_.size(); ++d) {
    auto& doc = documents_[d];
    if (doc.doc_id.empty()) throw ValidationError("document " + std::to_string(d) + " has an empty doc_id");
    if (!doc_index_.emplace(doc.doc_id, d).second) {
      throw ValidationError("duplicate doc_id '" + doc.doc_id + "'");
    }
    if (doc.components.empty()) throw ValidationError("document " + doc.doc_id + " has no components");
    for (std::size_t i = 0; i < doc.components.size(); ++i) {
      auto& c = doc.components[i];
      const auto expected = child_id(doc.doc_id, i);
      if (c.comp_id.empty()) {
        c.comp_id = expected;
      } else if (c.comp_id != expected) {
        throw ValidationError("component " + c.comp_id + " is at position " + expected);
      }
      validate_component(c);
    }
    component_count_ += doc.components.size();
  }
}

const Document* Corpus::find_document(std::string_view doc_id) const {
  const auto it = doc_index_.find(std::string(doc_id));
  return it == doc_index_.end() ? nullptr : &documents_[it->second];
}

const Component* Corpus::find_component(std::string_view comp_id) const {
  const auto parts = split_child_id(comp_id);
  if (!parts) return nullptr;
  const auto* doc = find_document(parts->first);
  if (doc == nullptr || parts->second >= doc->components.size()) return nullptr;
  return &doc->components[parts->second];
}

Corpus parse_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> first_seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!has_visible_text(text)) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("malformed record: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line, "record is not an object");
    reject_unknown_keys(j, {"doc_id", "title", "components"}, line, "document");
    Document doc;
    doc.doc_id = get_field<std::string>(j, "doc_id", line);
    if (j.contains("title")) doc.title = get_field<std::string>(j, "title", line);
    const auto& comps = j.contains("components") ? j.at("components") : json::array();
    if (!comps.is_array()) throw ParseError(line, "'components' is not a list");
    for (const auto& cj : comps) doc.components.push_back(parse_component(cj, line));
    if (!first_seen.emplace(doc.doc_id, line).second) {
      throw ValidationError("duplicate doc_id '" + doc.doc_id + "' on line " + std::to_string(line) +
                            " (first on line " + std::to_string(first_seen[doc.doc_id]) + ")");
    }
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return parse_corpus(in);
}

void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& doc : corpus.documents()) {
    json j;
    j["doc_id"] = doc.doc_id;
    j["title"] = doc.title;
    json comps = json::array();
    for (const auto& c : doc.components) comps.push_back(component_to_json(c));
    j["components"] = std::move(comps);
    out << j.dump() << '\n';
  }
}

std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  serialize_corpus(corpus, out);
  return out.str();
}

std::string corpus_digest(const Corpus& corpus) {
  return to_hex(fnv1a64(serialize_corpus(corpus)));
}

LinkMapping resolve_links(const Corpus& corpus) {
  std::set<std::pair<std::string, std::string>> pairs;
  LinkMapping mapping;
  for (const auto& doc : corpus.documents()) {
    for (const auto& c : doc.components) {
      for (const auto& target : c.links) {
        if (corpus.find_document(target) == nullptr) {
          ++mapping.dropped;
          continue;
        }
        pairs.emplace(c.comp_id, target);
      }
    }
  }
  mapping.pairs.assign(pairs.begin(), pairs.end());
  return mapping;
}

}  // namespace lilac
