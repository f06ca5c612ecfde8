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

#ifndef SCRUB_TOKENIZE_H_
#define SCRUB_TOKENIZE_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scrub {

inline constexpr std::string_view kMaskToken = "[MASK]";

// Word-level tokenizer shared by the masker, the lexicon scorer and the toy
// encoder. Splits on whitespace; every ASCII punctuation character becomes
// its own token, except apostrophes and hyphens with an alphanumeric (or
// non-ASCII) character on both sides. "[MASK]" is always one token.
std::vector<std::string> tokenize(std::string_view text);

// Joins with single spaces. tokenize(detokenize(tokenize(t))) == tokenize(t).
std::string detokenize(std::span<const std::string> tokens);

// Copy of `tokens` with the token at 1-based `position` replaced by
// "[MASK]". Throws ValidationError when position is outside [1, n].
std::vector<std::string> mask_at(std::span<const std::string> tokens,
                                 std::size_t position);

}  // namespace scrub

#endif  // SCRUB_TOKENIZE_H_
