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

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "tagsmc/dataset.hpp"
#include "tagsmc/subspace.hpp"
#include "tagsmc/tagmat.hpp"

// Synthetic data generators and diagnostics used to check the solvers at desk scale.
namespace tagsmc::testkit {

struct SubspaceInstance {
  FeatureMatrix points;               // unit-norm rows, grouped by subspace
  std::vector<int> labels;
  std::vector<Eigen::MatrixXd> bases;  // ambient x dim, orthonormal columns
  double noise_sigma = 0;
};

/// Points drawn from k random linear subspaces, plus isotropic noise, then unit-normalized.
SubspaceInstance gen_union_of_subspaces(int k, int dim_subspace, int dim_ambient,
                                        int n_per_subspace, double noise_sigma,
                                        std::uint64_t seed);

struct PreservingRate {
  double rate = 0;
  int excluded_rows = 0;  // rows of Z with no mass
};

/// Average over rows of (|z| mass on same-label points) / (total |z| mass).
/// Throws ValueError if every row is zero.
PreservingRate subspace_preserving_rate(const Eigen::MatrixXd& z, const std::vector<int>& labels);

/// Best agreement fraction over one-to-one matchings of predicted to true labels.
double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

struct PlantedAnnotation {
  FeatureMatrix v;
  FeatureMatrix t;
  Eigen::MatrixXd p_star;  // f_i x r
  Eigen::MatrixXd q_star;  // f_t x r
  Eigen::MatrixXd scores;  // V P* Q*^T T^T, scaled so the maximum is 1
  TagMatrix o_raw{1, 1};   // `scores` as a tag matrix
  TagMatrix o_star{1, 1};  // binary: top ceil(density * n_tags) entries per image
};

/**
 * Planted low-rank annotation. All factors are drawn half-normal (|N(0,1)|),
 * so every score is positive and can be scaled into (0,1] without leaving the
 * model class.
 */
PlantedAnnotation gen_planted_annotation(int n_images, int n_tags, int f_i, int f_t, int r,
                                         double density, std::uint64_t seed);

/// Parameters for a clustered image/tag collection with topic-structured tags.
struct TaggedBundleSpec {
  int n_clusters = 5;
  int images_per_cluster = 100;
  int n_tags = 50;
  int tags_per_topic = 8;
  double topic_prob_min = 0.7;   // per-tag inclusion probability inside its topic
  double topic_prob_max = 0.95;
  double background_prob = 0.02;
  int subspace_dim = 4;
  int image_dim = 50;
  int tag_dim = 16;
  double image_noise = 0.02;
  double tag_noise = 0.3;
  std::uint64_t seed = 7;
};

/// A bundle whose `tags` and `ground_truth` are both the clean annotation.
DatasetBundle gen_tagged_bundle(const TaggedBundleSpec& spec);

/// Cluster of each image in a bundle made by gen_tagged_bundle.
std::vector<int> tagged_bundle_labels(const TaggedBundleSpec& spec);

}  // namespace tagsmc::testkit
