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

#include "lilac/llm_client.hpp"

#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace lilac {

using nlohmann::json;

HttpChatClient::HttpChatClient(ChatOptions options)
    : options_(std::move(options)), in_flight_(std::max(1, std::min(options_.max_in_flight, 1024))) {
  const auto scheme = options_.base_url.find("://");
  if (options_.base_url.empty() || scheme == std::string::npos) {
    throw ConfigError("LLM base URL must look like http://host[:port][/prefix]");
  }
  const auto slash = options_.base_url.find('/', scheme + 3);
  origin_ = options_.base_url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : options_.base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
}

std::string HttpChatClient::complete(const std::string& prompt) {
  json body = {{"model", options_.model},
               {"temperature", options_.temperature},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  const auto payload = body.dump();

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 << attempt));
    httplib::Client client(origin_);
    const auto secs = options_.timeout.count() / 1000;
    const auto usecs = (options_.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error("chat endpoint returned status " + std::to_string(res->status));
    }
    try {
      return json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(std::string("malformed chat response: ") + e.what());
    }
  }
  throw Error("chat endpoint unavailable after retries: " + last_error);
}

ReplayChatClient::ReplayChatClient(const std::string& transcript_path) {
  std::ifstream in(transcript_path);
  if (!in) throw ConfigError("cannot open replay transcript '" + transcript_path + "'");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      responses_[j.at("prompt").get<std::string>()] = j.at("response").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(n, std::string("replay transcript: ") + e.what());
    }
  }
}

std::string ReplayChatClient::complete(const std::string& prompt) {
  const auto it = responses_.find(prompt);
  if (it == responses_.end()) throw Error("prompt not present in replay transcript");
  return it->second;
}

RecordingChatClient::RecordingChatClient(std::shared_ptr<ChatClient> inner, std::string transcript_path)
    : inner_(std::move(inner)), path_(std::move(transcript_path)) {}

std::string RecordingChatClient::complete(const std::string& prompt) {
  auto response = inner_->complete(prompt);
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  out << json{{"prompt", prompt}, {"response", response}}.dump() << '\n';
  return response;
}

}  // namespace lilac
