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
#include <random>

#include <Eigen/Dense>

#include "tagsmc/oracle.hpp"
#include "tagsmc/refine.hpp"

namespace fixtures {

/// Owns everything a RefineInputs view points at.
struct RefineInstance {
  tagsmc::TagMatrix tags{1, 1};
  tagsmc::FeatureMatrix v;
  tagsmc::FeatureMatrix t;
  tagsmc::GraphLaplacian l_v;
  tagsmc::GraphLaplacian l_s;

  tagsmc::RefineInputs inputs() const { return {tags, v, t, l_v, l_s}; }

  tagsmc::oracle::DenseProblem dense(const tagsmc::RefineConfig& cfg) const {
    return {tags.dense(), v.data(), t.data(), l_v.matrix(), l_s.matrix(),
            cfg.lambda1, cfg.lambda2, cfg.mu};
  }
};

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng);
  return m;
}

inline Eigen::MatrixXd random_weights(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) w(i, j) = w(j, i) = u(rng);
  }
  return w;
}

/// Random tags (mix of 1 and fractional confidences), Gaussian features and
/// Laplacians of random nonnegative graphs.
inline RefineInstance random_instance(Eigen::Index n_images, Eigen::Index n_tags, Eigen::Index f_i,
                                      Eigen::Index f_t, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  std::vector<tagsmc::Triplet> e;
  for (Eigen::Index i = 0; i < n_images; ++i) {
    for (Eigen::Index j = 0; j < n_tags; ++j) {
      if (u(rng) < density) e.emplace_back(i, j, u(rng) < 0.6 ? 1.0 : 0.1 + 0.8 * u(rng));
    }
  }
  RefineInstance r;
  r.tags = tagsmc::TagMatrix(n_images, n_tags, e);
  r.v = tagsmc::FeatureMatrix(gaussian(n_images, f_i, rng));
  r.t = tagsmc::FeatureMatrix(gaussian(n_tags, f_t, rng));
  r.l_v = tagsmc::graph_laplacian(random_weights(n_images, rng));
  r.l_s = tagsmc::graph_laplacian(random_weights(n_tags, rng));
  return r;
}

inline tagsmc::FactorPair random_factors(Eigen::Index f_i, Eigen::Index f_t, Eigen::Index r,
                                         std::mt19937_64& rng) {
  return {gaussian(f_i, r, rng), gaussian(f_t, r, rng)};
}

/// Elementwise max of |a - b| / max(1, |b|).
inline double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return ((a - b).array().abs() / b.array().abs().max(1.0)).maxCoeff();
}

}  // namespace fixtures
