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

#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "generators.h"
#include "scrub/error.h"
#include "scrub/hash.h"
#include "scrub/random.h"
#include "scrub/tokenize.h"

namespace scrub {
namespace {

using Tokens = std::vector<std::string>;

TEST(Fnv1a64, PublishedVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Sha256, PublishedVectors) {
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.gaussian();
    EXPECT_EQ(x, b.gaussian());
    differs |= x != c.gaussian();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformIndexStaysInRange) {
  Rng rng(7);
  std::set<std::size_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto k = rng.uniform_index(5);
    ASSERT_LT(k, 5u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(Rng, GaussianMomentsAreStandard) {
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Tokenize, KeepsContractionsTogether) {
  EXPECT_EQ(tokenize("but hillary's a liar"),
            (Tokens{"but", "hillary's", "a", "liar"}));
}

TEST(Tokenize, EmptyInput) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("  \t\n ").empty());
}

TEST(Tokenize, DetachesPunctuation) {
  EXPECT_EQ(tokenize("a,b"), (Tokens{"a", ",", "b"}));
  EXPECT_EQ(tokenize("(wow)!"), (Tokens{"(", "wow", ")", "!"}));
  EXPECT_EQ(tokenize("'quoted'"), (Tokens{"'", "quoted", "'"}));
  EXPECT_EQ(tokenize("well-known co-op"), (Tokens{"well-known", "co-op"}));
  EXPECT_EQ(tokenize("end -"), (Tokens{"end", "-"}));
}

TEST(Tokenize, MaskIsAtomic) {
  EXPECT_EQ(tokenize("a [MASK], b"), (Tokens{"a", "[MASK]", ",", "b"}));
  EXPECT_EQ(tokenize("x[MASK]y"), (Tokens{"x", "[MASK]", "y"}));
  EXPECT_EQ(tokenize("[mask]"), (Tokens{"[", "mask", "]"}));
}

TEST(Tokenize, NonAsciiBytesAreWordCharacters) {
  EXPECT_EQ(tokenize("caf\xc3\xa9 na\xc3\xafve"),
            (Tokens{"caf\xc3\xa9", "na\xc3\xafve"}));
}

TEST(Tokenize, DetokenizeRoundTrips) {
  testing::Gen gen(5);
  const std::vector<std::string> pieces = {
      "word", "it's", ",", "[MASK]", "x-y", "!", "\"", "caf\xc3\xa9", "-", "'"};
  for (int c = 0; c < testing::kPropertyCases; ++c) {
    std::string text;
    const int n = gen.integer(0, 12);
    for (int i = 0; i < n; ++i) {
      text += gen.word(pieces);
      text += gen.integer(0, 1) ? " " : "  ";
    }
    const Tokens once = tokenize(text);
    EXPECT_EQ(tokenize(detokenize(once)), once) << text;
  }
}

TEST(MaskAt, ReplacesOneBasedPosition) {
  const Tokens fox = {"The", "quick", "brown", "fox", "jumps"};
  EXPECT_EQ(mask_at(fox, 1),
            (Tokens{"[MASK]", "quick", "brown", "fox", "jumps"}));
  EXPECT_EQ(mask_at(fox, 2),
            (Tokens{"The", "[MASK]", "brown", "fox", "jumps"}));
  EXPECT_EQ(fox[0], "The");
}

TEST(MaskAt, SingleToken) {
  EXPECT_EQ(mask_at(Tokens{"hi"}, 1), (Tokens{"[MASK]"}));
}

TEST(MaskAt, OutOfRangeThrows) {
  const Tokens t = {"a", "b"};
  EXPECT_THROW(mask_at(t, 0), ValidationError);
  EXPECT_THROW(mask_at(t, 3), ValidationError);
  EXPECT_THROW(mask_at(Tokens{}, 1), ValidationError);
}

}  // namespace
}  // namespace scrub
