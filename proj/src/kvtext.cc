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

#include "reach/kvtext.h"

#include <cctype>
#include <charconv>
#include <cmath>

#include "reach/errors.h"

namespace reach {
namespace {

[[noreturn]] void fail_at(const KvLocation& at, const std::string& why) {
  throw ParseError(at.line, at.offset, why);
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  KvDocument document() {
    KvDocument doc;
    KvEntry* section = nullptr;
    for (;;) {
      skip_space();
      if (eof()) break;
      if (peek() == '[') {
        KvLocation at = here();
        ++pos_;
        skip_space();
        KvEntry block;
        block.where = at;
        block.key = ident();
        block.is_block = true;
        skip_space();
        expect(']');
        doc.entries.push_back(std::move(block));
        section = &doc.entries.back();
        continue;
      }
      KvEntry e = item();
      if (section) {
        section->children.push_back(std::move(e));
      } else {
        doc.entries.push_back(std::move(e));
      }
    }
    return doc;
  }

 private:
  KvEntry item() {
    KvEntry e;
    e.where = here();
    e.key = ident();
    skip_space();
    if (eof()) fail("expected '=' or '{' after '" + e.key + "'");
    if (peek() == '=') {
      ++pos_;
      skip_space();
      e.value = value();
    } else if (peek() == '{') {
      ++pos_;
      e.is_block = true;
      for (;;) {
        skip_space();
        if (eof()) fail("unterminated block '" + e.key + "'");
        if (peek() == '}') {
          ++pos_;
          break;
        }
        e.children.push_back(item());
      }
    } else {
      fail(std::string("expected '=' or '{', found '") + peek() + "'");
    }
    return e;
  }

  KvValue value() {
    KvValue v;
    v.where = here();
    if (eof()) fail("expected a value");
    char c = peek();
    if (c == '[') {
      ++pos_;
      v.kind = KvValue::Kind::kArray;
      skip_space();
      if (!eof() && peek() == ']') {
        ++pos_;
        return v;
      }
      for (;;) {
        skip_space();
        v.items.push_back(value());
        skip_space();
        if (eof()) fail_at(v.where, "unterminated array");
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ']') {
          ++pos_;
          break;
        }
        fail(std::string("expected ',' or ']', found '") + peek() + "'");
      }
      return v;
    }
    if (c == '"') {
      ++pos_;
      v.kind = KvValue::Kind::kString;
      while (!eof() && peek() != '"') {
        if (peek() == '\n') fail("newline in string");
        v.text.push_back(s_[pos_++]);
      }
      expect('"');
      return v;
    }
    if (c == '-' || c == '+' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                        peek() == '.' || peek() == '-' || peek() == '+')) {
        ++pos_;
      }
      v.kind = KvValue::Kind::kNumber;
      v.text = std::string(s_.substr(start, pos_ - start));
      const char* first = v.text.data();
      if (!v.text.empty() && v.text[0] == '+') ++first;
      const char* last = v.text.data() + v.text.size();
      auto [ptr, ec] = std::from_chars(first, last, v.number);
      if (ec != std::errc() || ptr != last || !std::isfinite(v.number)) {
        pos_ = start;
        fail("malformed number '" + v.text + "'");
      }
      return v;
    }
    v.kind = KvValue::Kind::kString;
    v.text = ident();
    return v;
  }

  std::string ident() {
    if (eof() || !(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_')) {
      fail(eof() ? "expected identifier, found end of input"
                 : std::string("expected identifier, found '") + peek() + "'");
    }
    std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                      peek() == '_' || peek() == '.' || peek() == '-' ||
                      peek() == '/')) {
      ++pos_;
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  KvLocation here() const {
    KvLocation loc;
    loc.offset = pos_;
    loc.line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
      if (s_[i] == '\n') ++loc.line;
    }
    return loc;
  }

  [[noreturn]] void fail(const std::string& why) const {
    KvLocation loc = here();
    throw ParseError(loc.line, loc.offset, why);
  }

  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

double KvValue::as_number() const {
  if (kind != Kind::kNumber) fail_at(where, "expected a number");
  return number;
}

const std::string& KvValue::as_string() const {
  if (kind != Kind::kString) fail_at(where, "expected a string");
  return text;
}

std::vector<double> KvValue::as_numbers(std::size_t expected) const {
  if (kind != Kind::kArray) fail_at(where, "expected an array of numbers");
  if (expected != 0 && items.size() != expected) {
    fail_at(where, "expected " + std::to_string(expected) + " numbers, found " +
                       std::to_string(items.size()));
  }
  std::vector<double> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.as_number());
  return out;
}

bool KvValue::as_bool() const {
  if (kind == Kind::kString) {
    if (text == "true" || text == "on" || text == "yes") return true;
    if (text == "false" || text == "off" || text == "no") return false;
  }
  if (kind == Kind::kNumber && (number == 0.0 || number == 1.0)) {
    return number != 0.0;
  }
  fail_at(where, "expected a boolean");
}

const KvEntry* KvEntry::find(std::string_view k) const {
  for (const auto& c : children) {
    if (c.key == k) return &c;
  }
  return nullptr;
}

const KvEntry* KvDocument::find(std::string_view k) const {
  for (const auto& c : entries) {
    if (c.key == k) return &c;
  }
  return nullptr;
}

KvDocument parse_kv(std::string_view text) { return Parser(text).document(); }

}  // namespace reach
