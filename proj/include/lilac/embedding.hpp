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
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lilac/common.hpp"

namespace lilac {

/// Dense vector; either all-zero or unit L2 norm.
using Embedding = std::vector<float>;

/// Instruction passed to the encoder. `none` is used for the coarse query embedding.
enum class Instruction : std::uint8_t { none, text, table, image };

std::string_view to_string(Instruction i);
Instruction instruction_for(ModalityLabel label);

struct EmbedRequest {
  std::string content;
  Instruction instruction = Instruction::none;
};

struct HashSeeds {
  std::uint64_t index_seed = 0x9E3779B97F4A7C15ULL;
  std::uint64_t sign_seed = 0xC2B2AE3D27D4EB4FULL;

  bool operator==(const HashSeeds&) const = default;
};

/// Lowercase ASCII-alphanumeric runs; bytes >= 0x80 are kept inside tokens.
std::vector<std::string> tokenize(std::string_view content);

/// Deterministic feature-hash encoder. Each token (plus `mod:<label>` when an instruction is
/// given) adds +-1 at `hash(token) mod d`; the sum is L2-normalized. No tokens -> zero vector.
Embedding hash_embed(const EmbedRequest& request, std::size_t dimension, const HashSeeds& seeds = {});

double dot(std::span<const float> u, std::span<const float> v);
double l2_norm(std::span<const float> u);

/// dot / (|u| |v|); zero if either vector is zero. Throws Error on dimension mismatch.
double cosine(std::span<const float> u, std::span<const float> v);

/// Same value as cosine() given precomputed norms.
inline double cosine_with_norms(std::span<const float> u, double norm_u, std::span<const float> v,
                                double norm_v) {
  if (norm_u == 0.0 || norm_v == 0.0) return 0.0;
  return dot(u, v) / (norm_u * norm_v);
}

/// Scales to unit norm in place; zero vectors are left untouched.
void normalize(Embedding& v);

/// Encoder interface f(content; instruction).
class Embedder {
 public:
  virtual ~Embedder() = default;
  /// Identifies the backend and its configuration; written to index manifests.
  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  /// Output order matches input order.
  virtual std::vector<Embedding> embed(std::span<const EmbedRequest> requests) = 0;
};

class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 256, HashSeeds seeds = {}, bool parallel = true);

  std::string id() const override;
  std::size_t dimension() const override { return dimension_; }
  const HashSeeds& seeds() const noexcept { return seeds_; }
  std::vector<Embedding> embed(std::span<const EmbedRequest> requests) override;

 private:
  std::size_t dimension_;
  HashSeeds seeds_;
  bool parallel_;
};

struct ServiceOptions {
  std::string base_url;  // e.g. http://127.0.0.1:8080
  std::size_t dimension = 256;
  std::chrono::milliseconds timeout{30000};
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
};

/// Client for an external `/embed` service. Vectors are re-normalized on receipt.
class ServiceEmbedder final : public Embedder {
 public:
  explicit ServiceEmbedder(ServiceOptions options);

  std::string id() const override;
  std::size_t dimension() const override { return options_.dimension; }
  std::vector<Embedding> embed(std::span<const EmbedRequest> requests) override;

 private:
  std::vector<Embedding> embed_chunk(std::span<const EmbedRequest> requests, std::size_t offset) const;

  ServiceOptions options_;
};

/// Runs a backend and enforces the Embedding invariants on its output.
/// Throws EmbeddingBackendError on count or dimension mismatch.
std::vector<Embedding> embed_batch(Embedder& backend, std::span<const EmbedRequest> requests);

}  // namespace lilac
