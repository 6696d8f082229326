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

#include "tagsmc/sharing.hpp"

#include <algorithm>
#include <numeric>

#include "parallel.hpp"
#include "tagsmc/error.hpp"

namespace tagsmc {

void SharingConfig::validate() const {
  if (n_neighbors < 1) throw ConfigError("sharing.n_neighbors", "must be >= 1");
  if (w_local < 0.0) throw ConfigError("sharing.w_local", "must be >= 0");
  if (w_cooc < 0.0) throw ConfigError("sharing.w_cooc", "must be >= 0");
  if (w_freq < 0.0) throw ConfigError("sharing.w_freq", "must be >= 0");
  if (!(w_local + w_cooc + w_freq > 0.0)) {
    throw ConfigError("sharing.w_local", "weights must not all be zero");
  }
  if (max_added_per_image < 0) throw ConfigError("sharing.max_added_per_image", "must be >= 0");
  if (!(min_confidence >= 0.0)) throw ConfigError("sharing.min_confidence", "must be >= 0");
}

namespace {

void minmax_normalize(Eigen::MatrixXd& m) {
  if (m.size() == 0) return;
  const double lo = m.minCoeff();
  const double hi = m.maxCoeff();
  if (hi > lo) m = (m.array() - lo) / (hi - lo);
}

}  // namespace

Eigen::MatrixXd score_tags_in_cluster(const Eigen::MatrixXd& tags, const Eigen::MatrixXd& sims,
                                      const SharingConfig& config) {
  config.validate();
  const Index n = tags.rows();
  const Index n_tags = tags.cols();
  if (n == 0) throw ValueError("cluster is empty");
  if (sims.rows() != n || sims.cols() != n) {
    throw DimensionError("cluster similarity block does not match cluster size");
  }
  const Eigen::MatrixXd has = (tags.array() > 0.0).cast<double>();

  Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n, n_tags);
  if (n > 1) {
    std::vector<Index> others;
    for (Index i = 0; i < n; ++i) {
      others.clear();
      for (Index j = 0; j < n; ++j) {
        if (j != i) others.push_back(j);
      }
      const auto keep = std::min<std::size_t>(others.size(), config.n_neighbors);
      std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(keep),
                        others.end(), [&](Index a, Index b) {
                          if (sims(i, a) != sims(i, b)) return sims(i, a) > sims(i, b);
                          return a < b;
                        });
      others.resize(keep);
      double total = 0.0;
      for (Index j : others) total += sims(i, j);
      for (Index j : others) {
        const double w = total > 0.0 ? sims(i, j) / total : 1.0 / static_cast<double>(keep);
        local.row(i) += w * tags.row(j);
      }
    }
  }

  // Cluster-local counts: n(t) on the diagonal, n(t, t') off it.
  const Eigen::MatrixXd counts = has.transpose() * has;
  Eigen::MatrixXd cooc = Eigen::MatrixXd::Zero(n, n_tags);
  for (Index i = 0; i < n; ++i) {
    for (Index tp = 0; tp < n_tags; ++tp) {
      if (has(i, tp) == 0.0) continue;
      const double denom = counts(tp, tp) + 2.0;
      for (Index t = 0; t < n_tags; ++t) {
        if (t == tp) continue;
        cooc(i, t) = std::max(cooc(i, t), (counts(t, tp) + 1.0) / denom);
      }
    }
  }

  Eigen::MatrixXd freq(n, n_tags);
  freq.rowwise() = counts.diagonal().transpose() / static_cast<double>(n);

  minmax_normalize(local);
  minmax_normalize(cooc);
  minmax_normalize(freq);
  const double wsum = config.w_local + config.w_cooc + config.w_freq;
  Eigen::MatrixXd score =
      (config.w_local * local + config.w_cooc * cooc + config.w_freq * freq) / wsum;
  return score.cwiseMax(0.0).cwiseMin(1.0);
}

TagMatrix share_tags(const TagMatrix& tags, const ClusterAssignment& clusters,
                     const SimilarityGraph& image_sims, const SharingConfig& config,
                     int threads) {
  config.validate();
  const Index n = tags.n_images();
  if (static_cast<Index>(clusters.labels.size()) != n || image_sims.size() != n) {
    throw DimensionError("tag matrix, cluster labels and similarity graph disagree in size");
  }
  int k = clusters.k;
  for (int l : clusters.labels) {
    if (l < 0) throw ValueError("negative cluster label");
    k = std::max(k, l + 1);
  }
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) members[clusters.labels[i]].push_back(i);

  const Eigen::MatrixXd dense = tags.dense();
  std::vector<std::vector<Triplet>> added(static_cast<std::size_t>(k));
  detail::parallel_for(members.size(), threads, [&](std::size_t c) {
    const auto& rows = members[c];
    if (rows.empty()) return;
    const auto m = static_cast<Index>(rows.size());
    Eigen::MatrixXd block(m, tags.n_tags());
    Eigen::MatrixXd sims(m, m);
    for (Index a = 0; a < m; ++a) {
      block.row(a) = dense.row(rows[a]);
      for (Index b = 0; b < m; ++b) sims(a, b) = image_sims.weight(rows[a], rows[b]);
    }
    const Eigen::MatrixXd score = score_tags_in_cluster(block, sims, config);
    for (Index a = 0; a < m; ++a) {
      std::vector<Index> cand;
      for (Index t = 0; t < tags.n_tags(); ++t) {
        if (block(a, t) == 0.0 && score(a, t) > 0.0 && score(a, t) >= config.min_confidence) {
          cand.push_back(t);
        }
      }
      const auto keep = std::min<std::size_t>(cand.size(), config.max_added_per_image);
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(),
                        [&](Index x, Index y) {
                          if (score(a, x) != score(a, y)) return score(a, x) > score(a, y);
                          return x < y;
                        });
      for (std::size_t q = 0; q < keep; ++q) added[c].emplace_back(rows[a], cand[q], score(a, cand[q]));
    }
  });

  std::vector<Triplet> entries = tags.triplets();
  for (const auto& part : added) entries.insert(entries.end(), part.begin(), part.end());
  return TagMatrix(n, tags.n_tags(), entries);
}

}  // namespace tagsmc
