// Copyright 2026 The residual-reach Authors
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

// Small structured key-value text format shared by chain descriptions and
// experiment configs. Grammar (see docs/file_formats.md):
//
//   document := item*
//   item     := '[' IDENT ']'                 section header (top level only)
//             | IDENT '=' value
//             | IDENT '{' item* '}'           block
//   value    := NUMBER | STRING | IDENT | '[' (value (',' value)*)? ']'
//
// '#' starts a comment that runs to the end of the line.

#ifndef REACH_KVTEXT_H_
#define REACH_KVTEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace reach {

struct KvLocation {
  int line = 1;
  std::size_t offset = 0;
};

struct KvValue {
  enum class Kind { kNumber, kString, kArray };
  Kind kind = Kind::kNumber;
  double number = 0.0;
  std::string text;  // string/identifier payload, or the raw number token
  std::vector<KvValue> items;
  KvLocation where;

  // Accessors throw ParseError pointing at `where`.
  double as_number() const;
  const std::string& as_string() const;
  std::vector<double> as_numbers(std::size_t expected = 0) const;
  bool as_bool() const;
};

struct KvEntry {
  std::string key;
  KvLocation where;
  bool is_block = false;
  KvValue value;                  // when !is_block
  std::vector<KvEntry> children;  // when is_block

  const KvEntry* find(std::string_view k) const;
};

struct KvDocument {
  // Section headers become blocks holding the entries that follow them.
  std::vector<KvEntry> entries;

  const KvEntry* find(std::string_view k) const;
};

KvDocument parse_kv(std::string_view text);

}  // namespace reach

#endif  // REACH_KVTEXT_H_
