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

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

#include "lilac/common.hpp"

namespace lilac {

/// Single-turn chat completion. Implementations throw Error on transport failure.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

struct ChatOptions {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1
  std::string model;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60000};
  int retries = 2;
  int max_in_flight = 4;
  std::string api_key;  // sent as a bearer token when non-empty
};

/// Chat-completions style HTTP client: POST `<base_url>/chat/completions`.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(ChatOptions options);
  std::string complete(const std::string& prompt) override;

 private:
  ChatOptions options_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // path prefix including /chat/completions
  std::counting_semaphore<1024> in_flight_;
};

/// Answers prompts from a transcript of {"prompt", "response"} records.
/// Unknown prompts raise Error, which callers treat like a transport failure.
class ReplayChatClient final : public ChatClient {
 public:
  explicit ReplayChatClient(const std::string& transcript_path);
  std::string complete(const std::string& prompt) override;
  std::size_t size() const noexcept { return responses_.size(); }

 private:
  std::map<std::string, std::string> responses_;
};

/// Forwards to `inner` and appends every exchange to a transcript file.
class RecordingChatClient final : public ChatClient {
 public:
  RecordingChatClient(std::shared_ptr<ChatClient> inner, std::string transcript_path);
  std::string complete(const std::string& prompt) override;

 private:
  std::shared_ptr<ChatClient> inner_;
  std::string path_;
  std::mutex mutex_;
};

}  // namespace lilac
