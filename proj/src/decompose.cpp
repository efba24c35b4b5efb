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

#include "lilac/decompose.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lilac {

namespace {

constexpr std::array<std::string_view, 7> kTableCues = {"how many", "total",  "percentage", "percent",
                                                        "per year", "rate",   "number of"};
constexpr std::array<std::string_view, 9> kImageCues = {"look like", "looks like", "color",   "colour", "logo",
                                                        "photo",     "depicted",   "wearing", "pictured"};
constexpr std::array<std::string_view, 12> kAuxiliaries = {"is",  "was",  "are",   "were",  "has",  "have",
                                                           "had", "can",  "could", "will",  "does", "did"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Phrase match on word boundaries within already-lowercased text.
bool contains_phrase(std::string_view text, std::string_view phrase) {
  for (auto pos = text.find(phrase); pos != std::string_view::npos; pos = text.find(phrase, pos + 1)) {
    const bool left = pos == 0 || !is_word_char(text[pos - 1]);
    const auto end = pos + phrase.size();
    const bool right = end == text.size() || !is_word_char(text[end]);
    if (left && right) return true;
  }
  return false;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string bare(std::string_view word) {
  std::string out;
  for (char c : word) {
    if (is_word_char(c)) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool verb_like(std::string_view word) {
  if (word.empty() || std::isupper(static_cast<unsigned char>(word.front()))) return false;
  const auto w = bare(word);
  if (std::find(kAuxiliaries.begin(), kAuxiliaries.end(), w) != kAuxiliaries.end()) return true;
  return w.size() > 3 && w.ends_with("ed");
}

struct Piece {
  std::vector<std::string> words;
  std::string joiner;  // text that separated this piece from the previous one
};

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace

ModalityLabel classify_modality(std::string_view subquery) {
  const auto text = lower(subquery);
  for (auto cue : kTableCues) {
    if (contains_phrase(text, cue)) return ModalityLabel::table;
  }
  for (auto cue : kImageCues) {
    if (contains_phrase(text, cue)) return ModalityLabel::image;
  }
  return ModalityLabel::text;
}

std::vector<std::string> rule_split(std::string_view query) {
  std::vector<std::string> words;
  {
    std::istringstream in{std::string(query)};
    for (std::string w; in >> w;) words.push_back(w);
  }
  if (words.empty()) return {};

  std::vector<Piece> pieces(1);
  int depth = 0;
  bool in_quote = false;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    const auto lw = bare(w);
    const bool top = depth == 0 && !in_quote;
    auto& cur = pieces.back();

    if (top && lw == "and" && w.size() == 3) {
      pieces.push_back({{}, " and "});
      continue;
    }
    if (top && lw == "as" && i + 2 < words.size() && lower(words[i + 1]) == "well" && lower(words[i + 2]) == "as") {
      pieces.push_back({{}, " as well as "});
      i += 2;
      continue;
    }
    if (top && !cur.words.empty() &&
        (lw == "which" || (lw == "that" && i + 1 < words.size() && verb_like(words[i + 1])))) {
      pieces.push_back({{}, " "});
    }

    for (char c : w) {
      if (c == '(' || c == '[') ++depth;
      if ((c == ')' || c == ']') && depth > 0) --depth;
      if (c == '"') in_quote = !in_quote;
    }
    if (depth == 0 && !in_quote && w.size() > 1 && w.back() == ',') {
      pieces.back().words.push_back(w.substr(0, w.size() - 1));
      pieces.push_back({{}, ", "});
    } else {
      pieces.back().words.push_back(w);
    }
  }

  // Merge pieces that are too short to stand alone into a neighbour, restoring the joiner.
  std::vector<std::pair<std::string, std::string>> parts;  // (joiner, text)
  for (const auto& p : pieces) parts.emplace_back(p.joiner, join(p.words));
  const auto word_count = [](const std::string& s) {
    std::istringstream in(s);
    std::size_t n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
  };
  for (std::size_t i = 0; i < parts.size() && parts.size() > 1;) {
    if (word_count(parts[i].second) >= 2) {
      ++i;
      continue;
    }
    if (i == 0) {
      parts[1].second = parts[0].second + parts[1].first + parts[1].second;
      parts[1].first = parts[0].first;
    } else {
      parts[i - 1].second += parts[i].first + parts[i].second;
    }
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(i));
    i = 0;
  }

  std::vector<std::string> out;
  for (const auto& [joiner, text] : parts) {
    if (out.size() < kMaxSubqueries) {
      out.push_back(text);
    } else {
      out.back() += joiner + text;
    }
  }
  for (auto& s : out) s = trim(s);
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  if (out.empty()) out.push_back(trim(query));
  return out;
}

Decomposition RuleDecomposer::decompose(std::string_view query) {
  Decomposition d;
  for (auto& piece : rule_split(query)) {
    const auto label = classify_modality(piece);
    d.subqueries.push_back({std::move(piece), label});
  }
  return d;
}

Decomposition WholeQueryDecomposer::decompose(std::string_view query) {
  Decomposition d;
  auto text = trim(query);
  const auto label = classify_modality(text);
  d.subqueries.push_back({std::move(text), label});
  return d;
}

PromptTemplates PromptTemplates::load(const std::string& decompose_path, const std::string& modality_path) {
  const auto read = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open prompt template '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  PromptTemplates t{read(decompose_path), read(modality_path)};
  if (t.decompose.find("{question}") == std::string::npos) {
    throw ConfigError("decomposition template lacks a {question} placeholder");
  }
  if (t.modality.find("{subquery}") == std::string::npos) {
    throw ConfigError("modality template lacks a {subquery} placeholder");
  }
  return t;
}

std::string render_prompt(std::string_view tmpl, std::string_view placeholder, std::string_view value) {
  std::string out;
  std::size_t pos = 0;
  for (auto hit = tmpl.find(placeholder); hit != std::string_view::npos; hit = tmpl.find(placeholder, pos)) {
    out.append(tmpl.substr(pos, hit - pos));
    out.append(value);
    pos = hit + placeholder.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

std::optional<std::vector<std::string>> parse_subquery_list(std::string_view reply) {
  const auto open = reply.find('[');
  const auto close = reply.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply.substr(open, close - open + 1));
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (!j.is_array()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) return std::nullopt;
    auto s = trim(item.get<std::string>());
    if (!s.empty()) out.push_back(std::move(s));
  }
  if (out.empty()) return std::nullopt;
  if (out.size() > kMaxSubqueries) out.resize(kMaxSubqueries);
  return out;
}

std::optional<ModalityLabel> parse_modality_reply(std::string_view reply) {
  std::istringstream in{std::string(reply)};
  for (std::string line; std::getline(in, line);) {
    std::string cleaned;
    for (char c : line) {
      if (std::isalpha(static_cast<unsigned char>(c))) cleaned.push_back(static_cast<char>(std::tolower(c)));
      else if (!std::isspace(static_cast<unsigned char>(c)) && c != '`' && c != '"' && c != '\'' && c != '.') {
        cleaned.push_back(c);
      }
    }
    if (cleaned.empty()) continue;
    return parse_modality_label(cleaned);
  }
  return std::nullopt;
}

LlmDecomposer::LlmDecomposer(std::shared_ptr<ChatClient> client, PromptTemplates templates)
    : client_(std::move(client)), templates_(std::move(templates)) {
  if (!client_) throw ConfigError("LLM decomposer needs a chat client");
}

Decomposition LlmDecomposer::decompose(std::string_view query) {
  const auto degrade = [&](const std::string& why) {
    auto d = rules_.decompose(query);
    d.fallback = true;
    d.warning = "llm decomposition failed (" + why + "); used rule backend";
    return d;
  };
  try {
    const auto reply = client_->complete(render_prompt(templates_.decompose, "{question}", query));
    const auto parts = parse_subquery_list(reply);
    if (!parts) return degrade("unparseable subquery list");
    Decomposition d;
    for (const auto& part : *parts) {
      const auto label_reply = client_->complete(render_prompt(templates_.modality, "{subquery}", part));
      const auto label = parse_modality_reply(label_reply);
      if (!label) return degrade("unparseable modality label");
      d.subqueries.push_back({part, *label});
    }
    return d;
  } catch (const Error& e) {
    return degrade(e.what());
  }
}

DecomposedQuery decompose_query(std::string_view query, Decomposer& decomposer, Embedder& embedder) {
  const auto text = trim(query);
  if (text.empty()) throw Error("query is empty");
  auto d = decomposer.decompose(text);
  if (d.subqueries.empty()) d.subqueries.push_back({text, classify_modality(text)});
  if (d.subqueries.size() > kMaxSubqueries) d.subqueries.resize(kMaxSubqueries);

  std::vector<EmbedRequest> requests;
  requests.push_back({text, Instruction::none});
  for (const auto& s : d.subqueries) requests.push_back({s.text, instruction_for(s.label)});
  auto vectors = embed_batch(embedder, requests);

  DecomposedQuery dq;
  dq.query_text = text;
  dq.coarse_embedding = std::move(vectors[0]);
  for (std::size_t i = 0; i < d.subqueries.size(); ++i) {
    dq.subqueries.push_back({std::move(d.subqueries[i].text), d.subqueries[i].label, std::move(vectors[i + 1])});
  }
  dq.fallback = d.fallback;
  dq.warning = std::move(d.warning);
  return dq;
}

std::set<ModalityLabel> modality_set(const DecomposedQuery& dq) {
  std::set<ModalityLabel> out;
  for (const auto& s : dq.subqueries) out.insert(s.label);
  return out;
}

}  // namespace lilac
