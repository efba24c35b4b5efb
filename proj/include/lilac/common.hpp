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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace lilac {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record; carries the 1-based line number of the record.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Embedding backend failure; `index` is the position of the offending request.
class EmbeddingBackendError : public Error {
 public:
  EmbeddingBackendError(std::size_t index, const std::string& what)
      : Error("embedding request " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class IndexFormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Modality : std::uint8_t { paragraph, table, image };

/// Label attached to a subquery and used as the embedding instruction.
enum class ModalityLabel : std::uint8_t { text, table, image };

std::string_view to_string(Modality m);
std::string_view to_string(ModalityLabel m);
std::optional<Modality> parse_modality(std::string_view s);
std::optional<ModalityLabel> parse_modality_label(std::string_view s);

/// The label a component of modality `m` is embedded with.
ModalityLabel label_of(Modality m);

/// `<parent>/<index>`
std::string child_id(std::string_view parent, std::size_t index);

/// Splits `<parent>/<index>` at the last '/'. Returns nullopt if the suffix is not a number.
std::optional<std::pair<std::string, std::size_t>> split_child_id(std::string_view id);

/// 64-bit FNV-1a, optionally seeded by xoring the offset basis.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

std::string to_hex(std::uint64_t v);

}  // namespace lilac
