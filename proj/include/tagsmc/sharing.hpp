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

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tagsmc/subspace.hpp"
#include "tagsmc/tagmat.hpp"

namespace tagsmc {

struct SharingConfig {
  int n_neighbors = 10;
  double w_local = 0.5;  ///< similarity-weighted vote of the nearest neighbors
  double w_cooc = 0.3;   ///< co-occurrence with tags the image already has
  double w_freq = 0.2;   ///< tag frequency inside the cluster
  int max_added_per_image = 5;
  double min_confidence = 0.5;

  void validate() const;
};

/**
 * Candidate scores for every (image, tag) of one cluster.
 *
 * `tags` holds the cluster's rows (images x all tags) and `sims` the
 * similarities among those images. Three signals are computed per entry:
 *
 *  - local: sum_j s_ij O_jt / sum_j s_ij over the n_neighbors most similar
 *    other images j (uniform weights if all similarities are zero; 0 for a
 *    singleton cluster);
 *  - co-occurrence: max over tags t' != t held by image i of
 *    (n(t,t') + 1) / (n(t') + 2), counts taken within the cluster;
 *  - frequency: n(t) / cluster size.
 *
 * Each signal is min-max normalized over the block (left as is when constant)
 * and the result is the weighted mean w_l*local + w_c*cooc + w_f*freq over
 * (w_l + w_c + w_f). Counts treat any positive entry as annotated.
 */
Eigen::MatrixXd score_tags_in_cluster(const Eigen::MatrixXd& tags, const Eigen::MatrixXd& sims,
                                      const SharingConfig& config);

/**
 * Densifies `tags` by adding, per image, up to max_added_per_image of the
 * highest-scoring zero positions whose score is at least min_confidence.
 * Existing entries are never modified. `threads` > 1 scores clusters concurrently.
 */
TagMatrix share_tags(const TagMatrix& tags, const ClusterAssignment& clusters,
                     const SimilarityGraph& image_sims, const SharingConfig& config,
                     int threads = 1);

}  // namespace tagsmc
