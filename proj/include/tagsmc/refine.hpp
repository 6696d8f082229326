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

struct RefineConfig {
  int rank = 10;
  double lambda1 = 1.0;   ///< Frobenius penalty on both factors (trace-norm surrogate)
  double lambda2 = 0.1;   ///< weight of both Laplacian smoothness terms
  double mu = 0.4;        ///< discount on unannotated positions, in [0,1)
  int outer_iters = 20;
  int cg_iters = 50;
  double cg_tol = 1e-6;   ///< CG stops when |r| <= cg_tol |r_0|
  double rel_tol = 1e-6;  ///< stop alternating when the objective changes less than this, relatively
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

/// Scores are O_hat = V P Q^T T^T, so P is f_i x r and Q is f_t x r.
struct FactorPair {
  Eigen::MatrixXd p;
  Eigen::MatrixXd q;
};

enum class FreeFactor { kP, kQ };

/**
 * Per-entry loss weights: 1 on annotated positions, 1 - mu on the rest (Omega).
 */
class WeightMask {
 public:
  WeightMask(const TagMatrix& tags, double mu);
  double weight(Index image, Index tag) const;
  Eigen::MatrixXd dense() const;
  double mu() const { return mu_; }

 private:
  const TagMatrix* tags_;
  double mu_;
};

/// Everything the objective depends on besides the factors.
struct RefineInputs {
  const TagMatrix& tags;
  const FeatureMatrix& v;        // N_i x f_i
  const FeatureMatrix& t;        // N_t x f_t
  const GraphLaplacian& l_v;     // over images, N_i x N_i
  const GraphLaplacian& l_s;     // over tags, N_t x N_t
};

/**
 * sum_ij w_ij (O - O_hat)_ij^2 + lambda1/2 (|P|^2 + |Q|^2)
 *   + lambda2 [tr(O_hat^T L_v O_hat) + tr(O_hat L_s O_hat^T)]
 *
 * Evaluated through f x f and r x r Gram products; O_hat is never formed.
 */
double objective(const RefineInputs& in, const FactorPair& factors, const RefineConfig& config);

/// Gradient of `objective` with respect to the free factor.
Eigen::MatrixXd gradient(const RefineInputs& in, const FactorPair& factors, FreeFactor free,
                         const RefineConfig& config);

/// sum_ij w_ij (O - O_hat)_ij^2 with weights from WeightMask.
double weighted_loss(const TagMatrix& tags, const Eigen::MatrixXd& scores, double mu);
/// |O - O_hat|_F^2 - mu |U_Omega(O - O_hat)|_F^2, with U_Omega zeroing annotated positions.
double complex_error_loss(const TagMatrix& tags, const Eigen::MatrixXd& scores, double mu);

struct SolveResult {
  FactorPair factors;
  /// Objective at the start and after every half-step (P then Q).
  std::vector<double> objective_trace;
  int outer_iterations = 0;
  bool converged = false;  ///< relative objective change fell below rel_tol
};

/// Seeded Gaussian factors with entries scaled by 1/sqrt(rank).
FactorPair initial_factors(Index f_i, Index f_t, const RefineConfig& config);

/**
 * Alternating minimization: each half-step minimizes the convex quadratic in
 * one factor by conjugate gradient, warm-started from the current value, so
 * the objective never increases. Throws SolverError if CG meets negative
 * curvature.
 */
SolveResult solve_alternating(const RefineInputs& in, const RefineConfig& config);
SolveResult solve_alternating(const RefineInputs& in, const RefineConfig& config,
                              FactorPair start);

/// V P Q^T T^T.
Eigen::MatrixXd predict(const FeatureMatrix& v, const FeatureMatrix& t, const FactorPair& factors);

struct RefineOutput {
  Eigen::MatrixXd scores;  ///< raw O_hat, used for ranking
  TagMatrix tags{1, 1};    ///< O_hat clamped to [0,1]
  SolveResult solve;
};

RefineOutput refine(const RefineInputs& in, const RefineConfig& config);

}  // namespace tagsmc
