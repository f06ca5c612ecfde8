// Copyright 2026 The Scrub Authors.
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

#include "scrub/tokenize.h"

#include <string>

#include "scrub/error.h"

namespace scrub {
namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_punct(unsigned char c) {
  return c < 0x80 && ((c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
                      (c >= '[' && c <= '`') || (c >= '{' && c <= '~'));
}

// Non-ASCII bytes count as word characters so UTF-8 text stays intact.
bool is_word(unsigned char c) { return !is_space(c) && !is_punct(c); }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (text.substr(i, kMaskToken.size()) == kMaskToken) {
      flush();
      tokens.emplace_back(kMaskToken);
      i += kMaskToken.size() - 1;
    } else if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      const bool joiner = (c == '\'' || c == '-') && !word.empty() &&
                          i + 1 < text.size() &&
                          is_word(static_cast<unsigned char>(text[i + 1])) &&
                          text.substr(i + 1, kMaskToken.size()) != kMaskToken;
      if (joiner) {
        word.push_back(static_cast<char>(c));
      } else {
        flush();
        tokens.emplace_back(1, static_cast<char>(c));
      }
    } else {
      word.push_back(static_cast<char>(c));
    }
  }
  flush();
  return tokens;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += token;
  }
  return out;
}

std::vector<std::string> mask_at(std::span<const std::string> tokens,
                                 std::size_t position) {
  if (position < 1 || position > tokens.size()) {
    throw ValidationError("mask_at: position " + std::to_string(position) +
                          " outside [1, " + std::to_string(tokens.size()) +
                          "]");
  }
  std::vector<std::string> out(tokens.begin(), tokens.end());
  out[position - 1] = std::string(kMaskToken);
  return out;
}

}  // namespace scrub
