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

#include <gtest/gtest.h>

#include <sstream>

#include "lilac/corpus.hpp"

using namespace lilac;

namespace {

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

const char* kThree =
    R"({"doc_id":"A","title":"Taj","components":[)"
    R"({"type":"paragraph","text":"The Taj Mahal has four minarets."},)"
    R"({"type":"image","caption":"at dawn","objects":[{"label":"minaret","bbox":[0,0,10,40]},{"label":"dome","bbox":[12,0,30,25]}]},)"
    R"({"type":"table","rows":[["Deployment","Personnel"],["Kosovo","1"],["Afghanistan","29"]],"links":["B"]}]})"
    "\n"
    R"({"doc_id":"B","title":"Other","components":[{"type":"paragraph","text":"Hello there.","links":["A","Z"]}]})"
    "\n";

}  // namespace

TEST(Corpus, SmallestCorpus) {
  const auto c = parse(R"({"doc_id":"A","title":"t","components":[{"type":"paragraph","text":"x"}]})");
  ASSERT_EQ(c.documents().size(), 1u);
  EXPECT_EQ(c.documents()[0].components[0].comp_id, "A/0");
  EXPECT_EQ(c.component_count(), 1u);
}

TEST(Corpus, ModalitiesInOrder) {
  const auto c = parse(kThree);
  const auto& comps = c.documents()[0].components;
  ASSERT_EQ(comps.size(), 3u);
  EXPECT_EQ(comps[0].modality, Modality::paragraph);
  EXPECT_EQ(comps[1].modality, Modality::image);
  EXPECT_EQ(comps[2].modality, Modality::table);
  EXPECT_EQ(comps[1].objects->size(), 2u);
  EXPECT_EQ(comps[1].text, "at dawn");
  EXPECT_EQ(comps[2].rows->size(), 3u);
  ASSERT_NE(c.find_component("A/2"), nullptr);
  EXPECT_EQ(c.find_component("A/9"), nullptr);
}

TEST(Corpus, EmptyTableRowsNamesComponent) {
  try {
    parse(R"({"doc_id":"A","title":"t","components":[{"type":"paragraph","text":"x"},{"type":"table","rows":[]}]})");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("A/1"), std::string::npos) << e.what();
  }
}

TEST(Corpus, MalformedRecordCarriesLine) {
  try {
    parse(std::string(R"({"doc_id":"A","title":"t","components":[{"type":"paragraph","text":"x"}]})") + "\n\n{oops");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Corpus, DuplicateDocId) {
  const std::string rec = R"({"doc_id":"A","title":"t","components":[{"type":"paragraph","text":"x"}]})";
  EXPECT_THROW(parse(rec + "\n" + rec), ValidationError);
}

TEST(Corpus, PayloadMismatch) {
  EXPECT_THROW(parse(R"({"doc_id":"A","title":"t","components":[{"type":"paragraph","rows":[["a"]]}]})"), Error);
  EXPECT_THROW(parse(R"({"doc_id":"A","title":"t","components":[{"type":"image","text":"x"}]})"), Error);
  EXPECT_THROW(parse(R"({"doc_id":"A","title":"t","components":[{"type":"image","objects":[{"label":"","bbox":[0,0,1,1]}]}]})"),
               ValidationError);
  EXPECT_THROW(parse(R"({"doc_id":"A","title":"t","components":[{"type":"image","objects":[{"label":"x","bbox":[5,0,1,1]}]}]})"),
               ValidationError);
  EXPECT_THROW(parse(R"({"doc_id":"A","title":"t","components":[]})"), ValidationError);
  EXPECT_THROW(parse(R"({"doc_id":"A","title":"t","components":[{"type":"video"}]})"), ParseError);
  EXPECT_THROW(parse(R"({"doc_id":"A","title":"t","extra":1,"components":[{"type":"paragraph","text":"x"}]})"), ParseError);
}

TEST(Corpus, ImageWithoutObjectsIsEmptyList) {
  const auto c = parse(R"({"doc_id":"A","title":"t","components":[{"type":"image","objects":[]}]})");
  EXPECT_TRUE(c.documents()[0].components[0].objects->empty());
}

TEST(Corpus, SerializeRoundTrip) {
  const auto c = parse(kThree);
  const auto text = serialize_corpus(c);
  const auto again = parse(text);
  EXPECT_EQ(c, again);
  EXPECT_EQ(serialize_corpus(again), text);
  EXPECT_EQ(corpus_digest(c), corpus_digest(again));
}

TEST(Links, ResolvesExisting) {
  const auto m = resolve_links(parse(kThree));
  const std::vector<std::pair<std::string, std::string>> want{{"A/2", "B"}, {"B/0", "A"}};
  EXPECT_EQ(m.pairs, want);
  EXPECT_EQ(m.dropped, 1u);
}

TEST(Links, DanglingDropped) {
  const auto m = resolve_links(
      parse(R"({"doc_id":"B","title":"t","components":[{"type":"paragraph","text":"x","links":["Z"]}]})"));
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_EQ(m.dropped, 1u);
}

TEST(Links, SelfLinkRetained) {
  const auto m = resolve_links(
      parse(R"({"doc_id":"B","title":"t","components":[{"type":"paragraph","text":"x","links":["B"]}]})"));
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0].second, "B");
}
