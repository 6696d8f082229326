// Copyright 2026 The tagsmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include "doctest.h"

#include "tagsmc/error.hpp"
#include "tagsmc/sharing.hpp"

using namespace tagsmc;

namespace {

Eigen::MatrixXd frozen_sims() {
  Eigen::MatrixXd s(4, 4);
  s << 0.0, 0.9, 0.1, 0.4,
       0.9, 0.0, 0.5, 0.2,
       0.1, 0.5, 0.0, 0.7,
       0.4, 0.2, 0.7, 0.0;
  return s;
}

Eigen::MatrixXd frozen_tags() {
  Eigen::MatrixXd t(4, 3);
  t << 1, 0, 1,
       1, 1, 0,
       0, 1, 0,
       1, 0, 0;
  return t;
}

ClusterAssignment one_cluster(int n) {
  ClusterAssignment c;
  c.labels.assign(static_cast<std::size_t>(n), 0);
  c.k = 1;
  return c;
}

}  // namespace

TEST_CASE("frozen 4-image block matches the hand evaluation") {
  // Expected values printed by tests/oracles/sharing_scores.py.
  Eigen::MatrixXd want(4, 3);
  want << 1, 0.62615384615384617, 0.17999999999999999,
          0.74642857142857144, 0.45857142857142857, 0.50142857142857145,
          0.92500000000000004, 0.30833333333333335, 0.1125,
          0.38181818181818183, 0.59818181818181815, 0.36181818181818182;
  SharingConfig cfg;
  cfg.n_neighbors = 2;
  const Eigen::MatrixXd got = score_tags_in_cluster(frozen_tags(), frozen_sims(), cfg);
  CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("identical rows vote fully for each other") {
  Eigen::MatrixXd t(2, 3);
  t << 1, 0, 1, 1, 0, 1;
  Eigen::MatrixXd s(2, 2);
  s << 0, 0.8, 0.8, 0;
  SharingConfig cfg;
  cfg.w_local = 1.0;
  cfg.w_cooc = 0.0;
  cfg.w_freq = 0.0;
  const Eigen::MatrixXd sc = score_tags_in_cluster(t, s, cfg);
  CHECK(sc(0, 0) == 1.0);
  CHECK(sc(1, 2) == 1.0);
  CHECK(sc(0, 1) == 0.0);
}

TEST_CASE("singleton cluster scores come from co-occurrence and frequency only") {
  Eigen::MatrixXd t(1, 3);
  t << 1, 0, 1;
  const Eigen::MatrixXd s = Eigen::MatrixXd::Zero(1, 1);
  SharingConfig cfg;
  const Eigen::MatrixXd full = score_tags_in_cluster(t, s, cfg);
  cfg.w_local = 0.0;
  const Eigen::MatrixXd no_local = score_tags_in_cluster(t, s, cfg);
  // Without neighbors the local block is constant zero, so only the weight sum differs.
  CHECK((full * 1.0 - no_local * (0.5 / 1.0)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("unreachable confidence leaves the matrix unchanged") {
  const TagMatrix tags(4, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {3, 0, 1.0}});
  SharingConfig cfg;
  cfg.min_confidence = 1.1;
  const auto out = share_tags(tags, one_cluster(4), SimilarityGraph(frozen_sims()), cfg);
  CHECK(out == tags);
}

TEST_CASE("a close neighbor passes its tag on at the local score") {
  const TagMatrix tags(2, 2, {{0, 1, 1.0}});
  Eigen::MatrixXd s(2, 2);
  s << 0, 0.95, 0.95, 0;
  SharingConfig cfg;
  cfg.w_local = 1.0;
  cfg.w_cooc = 0.0;
  cfg.w_freq = 0.0;
  const Eigen::MatrixXd local = score_tags_in_cluster(tags.dense(), s, cfg);
  const auto out = share_tags(tags, one_cluster(2), SimilarityGraph(s), cfg);
  CHECK(out.value(1, 1) == local(1, 1));
  CHECK(out.value(1, 1) == 1.0);
  CHECK(out.value(0, 1) == 1.0);
}

TEST_CASE("added entries respect the per-image budget") {
  const TagMatrix tags(3, 4, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(3, 3, 0.5);
  s.diagonal().setZero();
  SharingConfig cfg;
  cfg.max_added_per_image = 2;
  cfg.min_confidence = 0.0;
  const auto out = share_tags(tags, one_cluster(3), SimilarityGraph(s), cfg);
  CHECK(out.nnz() >= 3);
  CHECK(out.nnz() <= 9);
}

TEST_CASE("sharing properties on random clustered input") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u;
  const Index n = 30, m = 10;
  std::vector<Triplet> e;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (u(rng) < 0.2) e.emplace_back(i, j, u(rng) < 0.7 ? 1.0 : 0.6);
    }
  }
  const TagMatrix tags(n, m, e);
  Eigen::MatrixXd s(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) s(i, j) = s(j, i) = i == j ? 0.0 : u(rng);
  }
  ClusterAssignment c;
  c.k = 3;
  for (Index i = 0; i < n; ++i) c.labels.push_back(static_cast<int>(i % 3));
  SharingConfig cfg;
  cfg.min_confidence = 0.3;
  const SimilarityGraph g(s);

  const auto out = share_tags(tags, c, g, cfg);
  for (const auto& t : tags.triplets()) CHECK(out.value(t.row(), t.col()) == t.value());
  for (const auto& t : out.triplets()) {
    CHECK(t.value() > 0.0);
    CHECK(t.value() <= 1.0);
  }
  CHECK(out.nnz() >= tags.nnz());
  CHECK(share_tags(tags, c, g, cfg) == out);
  CHECK(share_tags(tags, c, g, cfg, 4) == out);

  // Editing cluster 0 must not move rows of clusters 1 and 2.
  std::vector<Triplet> e2;
  for (const auto& t : tags.triplets()) {
    if (t.row() % 3 != 0) e2.push_back(t);
  }
  e2.emplace_back(0, 0, 1.0);
  e2.emplace_back(3, 5, 1.0);
  const auto out2 = share_tags(TagMatrix(n, m, e2), c, g, cfg);
  for (Index i = 0; i < n; ++i) {
    if (i % 3 != 0) CHECK(out2.row_dense(i) == out.row_dense(i));
  }
}

TEST_CASE("sharing config validation") {
  SharingConfig cfg;
  cfg.w_local = cfg.w_cooc = cfg.w_freq = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.n_neighbors = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  const TagMatrix tags(3, 2);
  CHECK_THROWS_AS(share_tags(tags, one_cluster(2), SimilarityGraph(Eigen::MatrixXd::Zero(3, 3)),
                             SharingConfig{}),
                  DimensionError);
}
