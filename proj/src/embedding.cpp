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

#include "lilac/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>

#include <httplib.h>
#include <json.hpp>

#include "lilac/kernels.hpp"

namespace lilac {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

void add_token(std::vector<double>& acc, std::string_view token, const HashSeeds& seeds) {
  const auto bucket = mix64(fnv1a64(token, seeds.index_seed)) % acc.size();
  const bool negative = (mix64(fnv1a64(token, seeds.sign_seed)) >> 63) != 0;
  acc[bucket] += negative ? -1.0 : 1.0;
}

}  // namespace

std::string_view to_string(Instruction i) {
  switch (i) {
    case Instruction::none: return "";
    case Instruction::text: return "text";
    case Instruction::table: return "table";
    case Instruction::image: return "image";
  }
  return "";
}

Instruction instruction_for(ModalityLabel label) {
  switch (label) {
    case ModalityLabel::text: return Instruction::text;
    case ModalityLabel::table: return Instruction::table;
    case ModalityLabel::image: return Instruction::image;
  }
  return Instruction::none;
}

std::vector<std::string> tokenize(std::string_view content) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : content) {
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Embedding hash_embed(const EmbedRequest& request, std::size_t dimension, const HashSeeds& seeds) {
  if (dimension < 8) throw Error("hash embedding dimension must be >= 8");
  std::vector<double> acc(dimension, 0.0);
  if (request.instruction != Instruction::none) {
    add_token(acc, "mod:" + std::string(to_string(request.instruction)), seeds);
  }
  for (const auto& token : tokenize(request.content)) add_token(acc, token, seeds);

  double sq = 0.0;
  for (double x : acc) sq += x * x;
  Embedding out(dimension, 0.0f);
  if (sq == 0.0) return out;
  const double inv = 1.0 / std::sqrt(sq);
  for (std::size_t i = 0; i < dimension; ++i) out[i] = static_cast<float>(acc[i] * inv);
  return out;
}

double dot(std::span<const float> u, std::span<const float> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += static_cast<double>(u[i]) * static_cast<double>(v[i]);
  return s;
}

double l2_norm(std::span<const float> u) { return std::sqrt(dot(u, u)); }

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                std::to_string(v.size()) + ")");
  }
  return cosine_with_norms(u, l2_norm(u), v, l2_norm(v));
}

void normalize(Embedding& v) {
  const double n = l2_norm(v);
  if (n == 0.0) return;
  for (auto& x : v) x = static_cast<float>(x / n);
}

HashEmbedder::HashEmbedder(std::size_t dimension, HashSeeds seeds, bool parallel)
    : dimension_(dimension), seeds_(seeds), parallel_(parallel) {
  if (dimension_ < 8) throw ConfigError("hash embedder dimension must be >= 8");
}

std::string HashEmbedder::id() const { return "hash-v1"; }

std::vector<Embedding> HashEmbedder::embed(std::span<const EmbedRequest> requests) {
  const auto one = [this](const EmbedRequest& r) { return hash_embed(r, dimension_, seeds_); };
  return parallel_ ? kernels::parallel::map(requests, one)
                   : kernels::serial::map(requests, one);
}

ServiceEmbedder::ServiceEmbedder(ServiceOptions options) : options_(std::move(options)) {
  if (options_.base_url.empty()) throw ConfigError("embedding service URL is empty");
  if (options_.dimension == 0) throw ConfigError("embedding service dimension must be positive");
  options_.batch_size = std::max<std::size_t>(1, options_.batch_size);
  options_.max_in_flight = std::max<std::size_t>(1, options_.max_in_flight);
}

std::string ServiceEmbedder::id() const { return "service"; }

std::vector<Embedding> ServiceEmbedder::embed_chunk(std::span<const EmbedRequest> requests,
                                                    std::size_t offset) const {
  nlohmann::json body;
  auto& items = body["items"] = nlohmann::json::array();
  for (const auto& r : requests) {
    items.push_back({{"content", r.content}, {"instruction", std::string(to_string(r.instruction))}});
  }

  httplib::Client client(options_.base_url);
  const auto secs = options_.timeout.count() / 1000;
  const auto usecs = (options_.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  auto res = client.Post("/embed", body.dump(), "application/json");
  if (!res) throw EmbeddingBackendError(offset, "transport failure: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw EmbeddingBackendError(offset, "service returned status " + std::to_string(res->status));
  }

  std::vector<Embedding> out;
  try {
    const auto reply = nlohmann::json::parse(res->body);
    out = reply.at("vectors").get<std::vector<Embedding>>();
  } catch (const nlohmann::json::exception& e) {
    throw EmbeddingBackendError(offset, std::string("malformed service response: ") + e.what());
  }
  if (out.size() != requests.size()) {
    throw EmbeddingBackendError(offset + std::min(out.size(), requests.size()),
                                "service returned " + std::to_string(out.size()) + " vectors for " +
                                    std::to_string(requests.size()) + " requests");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() != options_.dimension) {
      throw EmbeddingBackendError(offset + i, "dimension " + std::to_string(out[i].size()) +
                                                  ", expected " + std::to_string(options_.dimension));
    }
    normalize(out[i]);
  }
  return out;
}

std::vector<Embedding> ServiceEmbedder::embed(std::span<const EmbedRequest> requests) {
  std::vector<Embedding> out(requests.size());
  const std::size_t batch = options_.batch_size;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s < requests.size(); s += batch) starts.push_back(s);

  // Waves of at most max_in_flight concurrent batches; results are placed by offset.
  for (std::size_t w = 0; w < starts.size(); w += options_.max_in_flight) {
    std::vector<std::pair<std::size_t, std::future<std::vector<Embedding>>>> wave;
    for (std::size_t k = w; k < std::min(starts.size(), w + options_.max_in_flight); ++k) {
      const auto start = starts[k];
      const auto len = std::min(batch, requests.size() - start);
      wave.emplace_back(start, std::async(std::launch::async, [this, requests, start, len] {
                          return embed_chunk(requests.subspan(start, len), start);
                        }));
    }
    for (auto& [start, fut] : wave) {
      auto vectors = fut.get();
      std::move(vectors.begin(), vectors.end(), out.begin() + static_cast<std::ptrdiff_t>(start));
    }
  }
  return out;
}

std::vector<Embedding> embed_batch(Embedder& backend, std::span<const EmbedRequest> requests) {
  auto out = backend.embed(requests);
  if (out.size() != requests.size()) {
    throw EmbeddingBackendError(std::min(out.size(), requests.size()),
                                "backend returned " + std::to_string(out.size()) + " vectors for " +
                                    std::to_string(requests.size()) + " requests");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() != backend.dimension()) {
      throw EmbeddingBackendError(i, "dimension " + std::to_string(out[i].size()) + ", expected " +
                                         std::to_string(backend.dimension()));
    }
    const double n = l2_norm(out[i]);
    if (n != 0.0 && std::abs(n - 1.0) > 1e-6) normalize(out[i]);
  }
  return out;
}

}  // namespace lilac
