# Copyright 2026 The Scrub Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes toy_encoder_golden.json from a from-scratch reimplementation of
the toy encoder (64-bit Mersenne Twister, splitmix finalizer, FNV-1a,
Box-Muller). Shares no code with the C++ library."""

import json
import math
import re
import sys

M64 = (1 << 64) - 1


class MT19937_64:
    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & M64
        for i in range(1, 312):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & M64
        self.index = 312

    def _twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(312):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % 312] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.index = 0

    def next(self):
        if self.index >= 312:
            self._twist()
        y = self.mt[self.index]
        self.index += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & M64


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & M64
    return h


def mix64(x):
    x = (x + 0x9E3779B97F4A7C15) & M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & M64
    return x ^ (x >> 31)


def gaussians(rng, n):
    out = []
    while len(out) < n:
        while True:
            u1 = (rng.next() >> 11) * 2.0**-53
            if u1 > 0.0:
                break
        u2 = (rng.next() >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        a = 2.0 * math.pi * u2
        out += [r * math.cos(a), r * math.sin(a)]
    return out[:n]


def token_vector(token, dim, seed):
    if token == "[MASK]":
        return [0.0] * dim
    rng = MT19937_64(mix64(fnv1a64(token.encode()) ^ mix64(seed)))
    v = gaussians(rng, dim)
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def encode(text, dim, seed):
    # Whitespace-separated ASCII words only; enough for the fixture texts.
    assert re.fullmatch(r"[a-z ]*", text)
    s = [0.0] * dim
    for tok in text.split():
        s = [a + b for a, b in zip(s, token_vector(tok, dim, seed))]
    n = math.sqrt(sum(x * x for x in s))
    return [x / n for x in s] if n > 0 else s


def main(path):
    dim, seed = 64, 7
    texts = ["a b", "a c", "hello world"]
    vectors = {t: encode(t, dim, seed) for t in texts}
    ab, ac = vectors["a b"], vectors["a c"]
    cos = sum(x * y for x, y in zip(ab, ac))
    with open(path, "w") as f:
        json.dump({"dim": dim, "seed": seed,
                   "first_draws_seed_42": [MT19937_64(42).next()
                                           for _ in range(1)],
                   "vectors": vectors, "cosine_ab_ac": cos}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "toy_encoder_golden.json")
