#!/usr/bin/env python3
# Copyright 2026 The tagsmc Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Plain-Python evaluation of the cluster sharing score on the frozen 4-image,
# 3-tag block used in test_sharing.cpp. Prints the expected score matrix.
from fractions import Fraction as F

tags = [[1, 0, 1],
        [1, 1, 0],
        [0, 1, 0],
        [1, 0, 0]]
s = {(0, 1): F(9, 10), (0, 2): F(1, 10), (0, 3): F(4, 10),
     (1, 2): F(5, 10), (1, 3): F(2, 10), (2, 3): F(7, 10)}
n_neighbors = 2
w = (F(1, 2), F(3, 10), F(1, 5))
n, m = len(tags), len(tags[0])


def sim(i, j):
    return s[(min(i, j), max(i, j))]


local = [[F(0)] * m for _ in range(n)]
for i in range(n):
    others = sorted((j for j in range(n) if j != i), key=lambda j: (-sim(i, j), j))[:n_neighbors]
    total = sum(sim(i, j) for j in others)
    for t in range(m):
        local[i][t] = sum(sim(i, j) * tags[j][t] for j in others) / total

count = [sum(tags[i][t] for i in range(n)) for t in range(m)]
pair = [[sum(tags[i][a] * tags[i][b] for i in range(n)) for b in range(m)] for a in range(m)]
cooc = [[F(0)] * m for _ in range(n)]
for i in range(n):
    for t in range(m):
        vals = [F(pair[t][u] + 1, count[u] + 2) for u in range(m) if u != t and tags[i][u]]
        cooc[i][t] = max(vals) if vals else F(0)
freq = [[F(count[t], n) for t in range(m)] for _ in range(n)]


def normalize(a):
    flat = [x for row in a for x in row]
    lo, hi = min(flat), max(flat)
    if hi == lo:
        return a
    return [[(x - lo) / (hi - lo) for x in row] for row in a]


local, cooc, freq = normalize(local), normalize(cooc), normalize(freq)
score = [[(w[0] * local[i][t] + w[1] * cooc[i][t] + w[2] * freq[i][t]) / sum(w)
          for t in range(m)] for i in range(n)]
for row in score:
    print(", ".join(f"{float(x):.17g}" for x in row))
