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

#include <filesystem>
#include <fstream>
#include <atomic>
#include <thread>

#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "lilac/decompose.hpp"
#include "lilac/llm_client.hpp"
#include "support/oracles.hpp"

using namespace lilac;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> texts(const Decomposition& d) {
  std::vector<std::string> out;
  for (const auto& s : d.subqueries) out.push_back(s.text);
  return out;
}

std::vector<ModalityLabel> labels(const Decomposition& d) {
  std::vector<ModalityLabel> out;
  for (const auto& s : d.subqueries) out.push_back(s.label);
  return out;
}

class ScriptedClient final : public ChatClient {
 public:
  explicit ScriptedClient(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const std::string& prompt) override {
    prompts.push_back(prompt);
    if (next_ >= replies_.size()) throw Error("script exhausted");
    return replies_[next_++];
  }
  std::vector<std::string> prompts;

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
};

PromptTemplates templates() { return {"Q: {question}", "S: {subquery}"}; }

}  // namespace

TEST(Classify, Cues) {
  EXPECT_EQ(classify_modality("what percentage of personnel are in Mali"), ModalityLabel::table);
  EXPECT_EQ(classify_modality("what does the Taj Mahal look like"), ModalityLabel::image);
  EXPECT_EQ(classify_modality("who commissioned the Taj Mahal"), ModalityLabel::text);
  EXPECT_EQ(classify_modality("How many ships"), ModalityLabel::table);
  EXPECT_EQ(classify_modality("the colorful decorate"), ModalityLabel::text);  // whole words only
  EXPECT_EQ(classify_modality("what is the logo color"), ModalityLabel::image);
}

TEST(RuleSplit, ConjunctionFixture) {
  RuleDecomposer r;
  const auto d = r.decompose("Who commissioned the Taj Mahal and how many minarets does it have");
  EXPECT_EQ(texts(d), (std::vector<std::string>{"Who commissioned the Taj Mahal", "how many minarets does it have"}));
  EXPECT_EQ(labels(d), (std::vector<ModalityLabel>{ModalityLabel::text, ModalityLabel::table}));
  EXPECT_FALSE(d.fallback);
}

TEST(RuleSplit, NoSplitPoint) {
  RuleDecomposer r;
  const auto d = r.decompose("Capital of France");
  EXPECT_EQ(texts(d), std::vector<std::string>{"Capital of France"});
  EXPECT_EQ(labels(d), std::vector<ModalityLabel>{ModalityLabel::text});
}

TEST(RuleSplit, MarkersAndMerging) {
  EXPECT_EQ(rule_split("the team that played the final, the stadium it used as well as its logo color"),
            (std::vector<std::string>{"the team", "that played the final", "the stadium it used", "its logo color"}));
  // "that" followed by a non-verb stays attached.
  EXPECT_EQ(rule_split("the team that won the cup"), std::vector<std::string>{"the team that won the cup"});
  EXPECT_EQ(rule_split("the city which hosts the fair"), (std::vector<std::string>{"the city", "which hosts the fair"}));
  EXPECT_EQ(rule_split("the book that Mary wrote"), std::vector<std::string>{"the book that Mary wrote"});
  // Single-word pieces are folded into a neighbour.
  EXPECT_EQ(rule_split("salt and pepper prices"), std::vector<std::string>{"salt and pepper prices"});
  // Conjunctions inside parentheses or quotes do not split.
  EXPECT_EQ(rule_split("the film \"Pride and Prejudice\" director"),
            std::vector<std::string>{"the film \"Pride and Prejudice\" director"});
}

TEST(RuleSplit, CappedAtFive) {
  const auto parts = rule_split("aa bb and cc dd and ee ff and gg hh and ii jj and kk ll and mm nn");
  ASSERT_EQ(parts.size(), kMaxSubqueries);
  EXPECT_EQ(parts.back(), "ii jj and kk ll and mm nn");
}

TEST(WholeQuery, SingleSubquery) {
  WholeQueryDecomposer w;
  const auto d = w.decompose("  how many minarets and who built it ");
  EXPECT_EQ(texts(d), std::vector<std::string>{"how many minarets and who built it"});
  EXPECT_EQ(labels(d), std::vector<ModalityLabel>{ModalityLabel::table});
}

TEST(Llm, ParsesListAndLabels) {
  auto client = std::make_shared<ScriptedClient>(std::vector<std::string>{
      "Sure:\n```json\n[\"Who commissioned the Taj Mahal\", \"What does it look like\"]\n```", "text", " Image.\n"});
  LlmDecomposer d(client, templates());
  const auto out = d.decompose("Who commissioned the Taj Mahal and what does it look like");
  EXPECT_FALSE(out.fallback);
  EXPECT_EQ(texts(out), (std::vector<std::string>{"Who commissioned the Taj Mahal", "What does it look like"}));
  EXPECT_EQ(labels(out), (std::vector<ModalityLabel>{ModalityLabel::text, ModalityLabel::image}));
  ASSERT_EQ(client->prompts.size(), 3u);
  EXPECT_EQ(client->prompts[0], "Q: Who commissioned the Taj Mahal and what does it look like");
  EXPECT_EQ(client->prompts[2], "S: What does it look like");
}

TEST(Llm, GarbageFallsBackToRules) {
  const std::string q = "Who commissioned the Taj Mahal and how many minarets does it have";
  RuleDecomposer rules;
  for (const std::vector<std::string>& script :
       {std::vector<std::string>{"no list here"}, std::vector<std::string>{"[\"a b\"]", "banana"},
        std::vector<std::string>{}, std::vector<std::string>{"[1, 2]"}}) {
    LlmDecomposer d(std::make_shared<ScriptedClient>(script), templates());
    const auto out = d.decompose(q);
    EXPECT_TRUE(out.fallback);
    EXPECT_FALSE(out.warning.empty());
    EXPECT_EQ(texts(out), texts(rules.decompose(q)));
    EXPECT_EQ(labels(out), labels(rules.decompose(q)));
  }
}

TEST(Llm, ClampsToFive) {
  const auto parsed = parse_subquery_list("[\"a\",\"b\",\"\",\"c\",\"d\",\"e\",\"f\",\"g\"]");
  ASSERT_TRUE(parsed.has_value());
  EXPECT_EQ(*parsed, (std::vector<std::string>{"a", "b", "c", "d", "e"}));
  EXPECT_FALSE(parse_subquery_list("[]").has_value());
  EXPECT_EQ(parse_modality_reply("\n  `table`\nextra"), ModalityLabel::table);
  EXPECT_FALSE(parse_modality_reply("chart").has_value());
}

TEST(Prompts, ShippedTemplatesLoad) {
  const auto t = PromptTemplates::load(std::string(LILAC_SOURCE_DIR) + "/prompts/query_decomposition.txt",
                                       std::string(LILAC_SOURCE_DIR) + "/prompts/modality_selection.txt");
  EXPECT_NE(render_prompt(t.decompose, "{question}", "XYZ").find("XYZ"), std::string::npos);
  EXPECT_EQ(render_prompt("a {x} b {x}", "{x}", "1"), "a 1 b 1");
}

TEST(DecomposeQuery, EmbeddingsAndInstructions) {
  RuleDecomposer r;
  HashEmbedder e(256);
  const auto dq = decompose_query("Who commissioned the Taj Mahal and how many minarets does it have", r, e);
  EXPECT_EQ(dq.coarse_embedding,
            oracle::embed("Who commissioned the Taj Mahal and how many minarets does it have", "", 256));
  ASSERT_EQ(dq.subqueries.size(), 2u);
  EXPECT_EQ(dq.subqueries[0].embedding, oracle::embed("Who commissioned the Taj Mahal", "text", 256));
  EXPECT_EQ(dq.subqueries[1].embedding, oracle::embed("how many minarets does it have", "table", 256));
  EXPECT_EQ(modality_set(dq), (std::set<ModalityLabel>{ModalityLabel::text, ModalityLabel::table}));
  EXPECT_THROW(decompose_query("   ", r, e), Error);
}

TEST(ModalitySet, Unions) {
  DecomposedQuery dq;
  for (auto l : {ModalityLabel::text, ModalityLabel::table, ModalityLabel::text}) dq.subqueries.push_back({"x", l, {}});
  EXPECT_EQ(modality_set(dq), (std::set<ModalityLabel>{ModalityLabel::text, ModalityLabel::table}));
  dq.subqueries = {{"x", ModalityLabel::image, {}}};
  EXPECT_EQ(modality_set(dq), std::set<ModalityLabel>{ModalityLabel::image});
  dq.subqueries.assign(5, {"x", ModalityLabel::text, {}});
  EXPECT_EQ(modality_set(dq), std::set<ModalityLabel>{ModalityLabel::text});
}

namespace {

class FakeChat {
 public:
  explicit FakeChat(int fail_first) : fail_first_(fail_first) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = nlohmann::json::parse(req.body);
      last_model = body["model"];
      last_temperature = body["temperature"];
      if (calls_++ < fail_first_) {
        res.status = 500;
        return;
      }
      const std::string prompt = body["messages"][0]["content"];
      const std::string reply = prompt.starts_with("Q:") ? "[\"who built it\", \"how many towers\"]"
                                                         : (prompt.find("towers") != std::string::npos ? "table" : "text");
      res.set_content(nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", reply}}}}}}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeChat() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int calls() const { return calls_; }
  std::string last_model;
  double last_temperature = -1;

 private:
  int fail_first_;
  std::atomic<int> calls_{0};
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

ChatOptions chat_options(const std::string& url, int retries) {
  ChatOptions o;
  o.base_url = url;
  o.model = "m1";
  o.retries = retries;
  o.timeout = std::chrono::milliseconds(2000);
  return o;
}

}  // namespace

TEST(HttpChat, RoundTripWithRetries) {
  FakeChat server(1);
  auto client = std::make_shared<HttpChatClient>(chat_options(server.url(), 2));
  LlmDecomposer d(client, templates());
  const auto out = d.decompose("who built it and how many towers");
  EXPECT_FALSE(out.fallback) << out.warning;
  EXPECT_EQ(texts(out), (std::vector<std::string>{"who built it", "how many towers"}));
  EXPECT_EQ(labels(out), (std::vector<ModalityLabel>{ModalityLabel::text, ModalityLabel::table}));
  EXPECT_EQ(server.last_model, "m1");
  EXPECT_EQ(server.last_temperature, 0.0);
  EXPECT_EQ(server.calls(), 4);
}

TEST(HttpChat, TransportFailureFallsBack) {
  FakeChat server(100);
  LlmDecomposer d(std::make_shared<HttpChatClient>(chat_options(server.url(), 1)), templates());
  const auto out = d.decompose("who built it and how many towers");
  EXPECT_TRUE(out.fallback);
  EXPECT_EQ(server.calls(), 2);

  LlmDecomposer dead(std::make_shared<HttpChatClient>(chat_options("http://127.0.0.1:1/v1", 0)), templates());
  EXPECT_TRUE(dead.decompose("x y and z w").fallback);
}

TEST(Replay, RecordThenReplayIsDeterministic) {
  const auto path = fs::temp_directory_path() / ("lilac_replay_" + std::to_string(::getpid()) + ".jsonl");
  fs::remove(path);
  Decomposition recorded;
  {
    FakeChat server(0);
    auto rec = std::make_shared<RecordingChatClient>(std::make_shared<HttpChatClient>(chat_options(server.url(), 0)),
                                                     path.string());
    recorded = LlmDecomposer(rec, templates()).decompose("who built it and how many towers");
  }
  auto replay = std::make_shared<ReplayChatClient>(path.string());
  EXPECT_EQ(replay->size(), 3u);
  const auto again = LlmDecomposer(replay, templates()).decompose("who built it and how many towers");
  EXPECT_EQ(texts(again), texts(recorded));
  EXPECT_EQ(labels(again), labels(recorded));
  EXPECT_FALSE(again.fallback);
  // Unknown prompt in replay mode degrades instead of failing.
  EXPECT_TRUE(LlmDecomposer(replay, templates()).decompose("something else entirely").fallback);
  fs::remove(path);
}
