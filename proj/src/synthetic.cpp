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

#include "lilac/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

namespace lilac {

namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "v", "z", "br", "tr", "kl"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};

// Engine output only; the standard distributions are not portable across library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  bool chance(unsigned percent) { return below(100) < percent; }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

class Namer {
 public:
  explicit Namer(Rng& rng) : rng_(rng) {}

  // Fresh pseudo-word; never an English query word since every syllable ends in a vowel.
  std::string word(std::size_t syllables) {
    for (;;) {
      std::string w;
      for (std::size_t i = 0; i < syllables; ++i) {
        w += kOnsets[rng_.below(std::size(kOnsets))];
        w += kVowels[rng_.below(std::size(kVowels))];
      }
      if (used_.insert(w).second) return w;
    }
  }
  std::string name(std::size_t syllables) {
    auto w = word(syllables);
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

std::string sentence(Rng& rng, const std::vector<std::string>& vocab, std::size_t min_words) {
  const auto n = min_words + rng.below(4);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) s += ' ';
    s += vocab[rng.below(vocab.size())];
  }
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s + ".";
}

Component paragraph(std::string text) {
  Component c;
  c.modality = Modality::paragraph;
  c.text = std::move(text);
  return c;
}

Component table(TableRows rows) {
  Component c;
  c.modality = Modality::table;
  c.rows = std::move(rows);
  return c;
}

Component image(std::string caption, const std::vector<std::string>& labels) {
  Component c;
  c.modality = Modality::image;
  c.text = std::move(caption);
  std::vector<ObjectAnnotation> objects;
  int x = 0;
  for (const auto& l : labels) {
    objects.push_back({l, {x, 0, x + 20, 30}});
    x += 25;
  }
  c.objects = std::move(objects);
  return c;
}

std::string count(Rng& rng) { return std::to_string(3 + rng.below(60)); }

}  // namespace

SyntheticBenchmark generate_synthetic(const SyntheticOptions& options) {
  if (options.queries == 0) throw ConfigError("synthetic benchmark needs at least one query");
  const std::size_t docs = options.documents == 0 ? 4 * options.queries : options.documents;
  if (docs < 3 * options.queries) {
    throw ConfigError("synthetic benchmark needs at least 3 documents per query (" +
                      std::to_string(3 * options.queries) + ")");
  }

  Rng rng(options.seed);
  Namer namer(rng);
  std::vector<std::string> vocab;
  for (int i = 0; i < 400; ++i) vocab.push_back(namer.word(2 + rng.below(2)));
  const std::vector<std::string> seasons{"spring", "summer", "autumn", "winter"};

  // Shuffled ids so that planted roles carry no id-order signal.
  std::vector<std::size_t> order(docs);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<Document> slots(docs);
  for (std::size_t i = 0; i < docs; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "d%05zu", order[i]);
    slots[i].doc_id = buf;
  }

  SyntheticBenchmark out;
  std::size_t next = 0;
  for (std::size_t q = 0; q < options.queries; ++q) {
    const auto guild = namer.name(2) + " " + namer.name(2);
    const auto port = namer.name(2) + " " + namer.name(3);
    auto& bridge = slots[next++];
    auto& target = slots[next++];
    auto& decoy = slots[next++];

    bridge.title = guild + " Guild";
    auto intro = paragraph("The " + guild + " guild was founded by " + namer.name(2) + " " + namer.name(3) + ". " +
                           sentence(rng, vocab, 5));
    intro.links.push_back(target.doc_id);
    bridge.components.push_back(std::move(intro));
    bridge.components.push_back(paragraph(sentence(rng, vocab, 6) + " " + sentence(rng, vocab, 4)));

    target.title = namer.name(2) + " harbour";
    target.components.push_back(paragraph(sentence(rng, vocab, 5)));
    TableRows rows{{"Port", "Arrivals", "Season"}};
    const std::size_t gold_row = rng.below(3);
    for (std::size_t r = 0; r < 3; ++r) {
      rows.push_back({r == gold_row ? port : namer.name(2) + " " + namer.name(3), count(rng) + " ships docked",
                      seasons[rng.below(seasons.size())]});
    }
    target.components.push_back(table(std::move(rows)));
    target.components.push_back(image(sentence(rng, vocab, 3), {"crane", "pier"}));

    decoy.title = namer.name(2) + " traders";
    decoy.components.push_back(
        paragraph("Traders of the " + guild + " guild often sailed past " + port + ". " + sentence(rng, vocab, 5)));
    decoy.components.push_back(table({{"Port", "Cargo"}, {port, vocab[rng.below(vocab.size())]},
                                      {namer.name(2) + " " + namer.name(3), vocab[rng.below(vocab.size())]}}));

    QueryRecord record{"q" + std::to_string(q), "Who founded the " + guild + " guild and how many ships docked at " + port};
    out.qrels[record.qid] = QrelEntry{{target.doc_id + "/1"}, std::set<ModalityLabel>{ModalityLabel::text, ModalityLabel::table}};
    out.queries.push_back(std::move(record));
  }

  for (; next < docs; ++next) {
    auto& doc = slots[next];
    doc.title = namer.name(2);
    const auto parts = 1 + rng.below(4);
    for (std::size_t p = 0; p < parts; ++p) {
      const auto kind = rng.below(10);
      if (kind < 6) {
        std::string text = sentence(rng, vocab, 4);
        for (auto extra = rng.below(3); extra > 0; --extra) text += " " + sentence(rng, vocab, 4);
        doc.components.push_back(paragraph(std::move(text)));
      } else if (kind < 8) {
        TableRows rows{{namer.name(2), namer.name(2)}};
        for (auto r = rng.below(4); r > 0; --r) rows.push_back({vocab[rng.below(vocab.size())], count(rng)});
        doc.components.push_back(table(std::move(rows)));
      } else {
        std::vector<std::string> labels;
        for (auto o = rng.below(3); o > 0; --o) labels.push_back(vocab[rng.below(vocab.size())]);
        doc.components.push_back(image(labels.empty() || rng.chance(50) ? sentence(rng, vocab, 3) : "", labels));
      }
    }
    if (rng.chance(30)) doc.components.front().links.push_back(slots[rng.below(docs)].doc_id);
  }

  std::sort(slots.begin(), slots.end(), [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  out.documents = std::move(slots);
  return out;
}

void write_synthetic(const SyntheticBenchmark& bench, const std::string& corpus_path,
                     const std::string& queries_path) {
  const Corpus corpus(bench.documents);
  std::ofstream c(corpus_path, std::ios::binary);
  if (!c) throw Error("cannot write '" + corpus_path + "'");
  serialize_corpus(corpus, c);

  std::ofstream q(queries_path, std::ios::binary);
  if (!q) throw Error("cannot write '" + queries_path + "'");
  for (const auto& rec : bench.queries) {
    nlohmann::json j = {{"qid", rec.qid}, {"text", rec.text}};
    if (const auto it = bench.qrels.find(rec.qid); it != bench.qrels.end()) {
      j["gold"] = it->second.gold;
      if (it->second.gold_modalities) {
        std::vector<std::string> mods;
        for (auto m : *it->second.gold_modalities) mods.emplace_back(to_string(m));
        j["gold_modalities"] = mods;
      }
    }
    q << j.dump() << '\n';
  }
  if (!c || !q) throw Error("write failed");
}

}  // namespace lilac
