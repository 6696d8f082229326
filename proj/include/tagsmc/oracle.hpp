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

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

// Straightforward dense reference computations. They share no code with the
// optimized solvers and exist to check them on small instances.
namespace tagsmc::oracle {

struct DenseProblem {
  Eigen::MatrixXd o;    // N_i x N_t, zero means unannotated
  Eigen::MatrixXd v;    // N_i x f_i
  Eigen::MatrixXd t;    // N_t x f_t
  Eigen::MatrixXd l_v;  // N_i x N_i
  Eigen::MatrixXd l_s;  // N_t x N_t
  double lambda1 = 0;
  double lambda2 = 0;
  double mu = 0;
};

/// Entry-by-entry evaluation of the refinement objective.
double objective(const DenseProblem& pb, const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);

/// Closed-form gradients, assembled from the explicit score matrix.
Eigen::MatrixXd gradient_p(const DenseProblem& pb, const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);
Eigen::MatrixXd gradient_q(const DenseProblem& pb, const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);

/// Central differences of f at x with step h, one coordinate at a time.
Eigen::MatrixXd finite_difference(const std::function<double(const Eigen::MatrixXd&)>& f,
                                  const Eigen::MatrixXd& x, double h);

/// Exact minimizer over P (resp. Q) for mu = 0, via the dense Kronecker normal equations.
Eigen::MatrixXd exact_step_p(const DenseProblem& pb, const Eigen::MatrixXd& q);
Eigen::MatrixXd exact_step_q(const DenseProblem& pb, const Eigen::MatrixXd& p);

struct BruteForceScore {
  double ap = 0;
  double ar = 0;
  std::vector<double> precision;
  std::vector<double> recall;
};

/// Full stable sort of every row; images with empty truth are skipped.
BruteForceScore ap_ar(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& truth, std::size_t n);

}  // namespace tagsmc::oracle
