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

#include "tagsmc/tagmat.hpp"

namespace tagsmc {

/// Settings for the sparse self-representation solver.
struct SscConfig {
  double mu = 5.0;               ///< weight of the squared error term
  int max_iters = 3000;
  double tol = 1e-6;             ///< stopping tolerance on all constraint residuals
  double penalty_init = 1.0;
  double penalty_growth = 1.05;
  double penalty_max = 1e8;
  bool normalize_rows = true;    ///< unit-norm image features before solving

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/**
 * Solution of  min |Z|_1 + mu |E|_F^2  s.t.  X = X Z^T + E, diag(Z) = 0, Z 1 = 1,
 * where X = V^T stores one image per column.
 *
 * `z` is n x n with row i holding the coefficients of image i. `e` is f x n.
 */
struct SelfRepresentation {
  Eigen::MatrixXd z;
  Eigen::MatrixXd e;
  double reconstruction_residual = 0;  ///< |X - X Z^T - E|_F / |X|_F
  double affine_residual = 0;          ///< max_i |sum_j z_ij - 1|
  double split_residual = 0;           ///< max entry of the internal splitting gap
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  ///< |Z|_1 + mu |E|^2 per iteration
};

struct ClusterAssignment {
  std::vector<int> labels;
  int k = 0;
  double inertia = 0;           ///< k-means objective on the spectral embedding
  int empty_cluster_repairs = 0;
  int unrepaired_empty_clusters = 0;
};

struct SpectralOptions {
  int restarts = 10;
  int max_kmeans_iters = 300;
};

/// Throws ValueError if there are fewer than two images.
SelfRepresentation ssc_solve(const FeatureMatrix& images, const SscConfig& config);

/// A = |Z| + |Z^T|.
SimilarityGraph affinity(const SelfRepresentation& rep);
SimilarityGraph affinity(const Eigen::MatrixXd& z);

/**
 * Labels from k-means on the row-normalized bottom-k eigenvectors of
 * I - D^{-1/2} A D^{-1/2}. Deterministic for a given seed.
 */
ClusterAssignment spectral_cluster(const SimilarityGraph& affinity, int k, std::uint64_t seed,
                                   const SpectralOptions& options = {});

/// Largest gap among the first k_max eigenvalues of the normalized Laplacian.
int estimate_k_eigengap(const SimilarityGraph& affinity, int k_max);

/// Lloyd's k-means with farthest-point seeding; rows of `points` are samples.
ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                         const SpectralOptions& options = {});

}  // namespace tagsmc
