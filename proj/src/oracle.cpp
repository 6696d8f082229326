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

#include "tagsmc/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace tagsmc::oracle {

namespace {

Eigen::MatrixXd weights(const DenseProblem& pb) {
  Eigen::MatrixXd w(pb.o.rows(), pb.o.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = pb.o(i, j) != 0.0 ? 1.0 : 1.0 - pb.mu;
  }
  return w;
}

// dObjective/dO_hat without the factor regularizer.
Eigen::MatrixXd score_gradient(const DenseProblem& pb, const Eigen::MatrixXd& hat) {
  const Eigen::MatrixXd w = weights(pb);
  Eigen::MatrixXd g(hat.rows(), hat.cols());
  for (Eigen::Index i = 0; i < hat.rows(); ++i) {
    for (Eigen::Index j = 0; j < hat.cols(); ++j) g(i, j) = w(i, j) * (hat(i, j) - pb.o(i, j));
  }
  g += pb.lambda2 * pb.l_v * hat + pb.lambda2 * hat * pb.l_s;
  return 2.0 * g;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return k;
}

// argmin_F |O - X F B^T|^2 + l1/2 |F|^2 + l2 [tr(B F^T X^T Lx X F B^T) + tr(X F B^T Lb B F^T X^T)]
Eigen::MatrixXd exact_step(const Eigen::MatrixXd& o, const Eigen::MatrixXd& x,
                           const Eigen::MatrixXd& b, const Eigen::MatrixXd& lx,
                           const Eigen::MatrixXd& lb, double lambda1, double lambda2) {
  const Eigen::MatrixXd btb = b.transpose() * b;
  const Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::MatrixXd h = 2.0 * kron(btb, xtx) + 2.0 * lambda2 * kron(btb, x.transpose() * lx * x) +
                      2.0 * lambda2 * kron(b.transpose() * lb * b, xtx);
  h.diagonal().array() += lambda1;
  const Eigen::MatrixXd rhs_m = 2.0 * x.transpose() * o * b;
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(rhs_m.data(), rhs_m.size());
  const Eigen::VectorXd sol = h.ldlt().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(sol.data(), x.cols(), b.cols());
}

}  // namespace

double objective(const DenseProblem& pb, const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd hat = pb.v * p * q.transpose() * pb.t.transpose();
  const Eigen::MatrixXd w = weights(pb);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < hat.rows(); ++i) {
    for (Eigen::Index j = 0; j < hat.cols(); ++j) {
      const double d = pb.o(i, j) - hat(i, j);
      loss += w(i, j) * d * d;
    }
  }
  const double reg = 0.5 * pb.lambda1 * (p.squaredNorm() + q.squaredNorm());
  const double visual = (hat.transpose() * pb.l_v * hat).trace();
  const double semantic = (hat * pb.l_s * hat.transpose()).trace();
  return loss + reg + pb.lambda2 * (visual + semantic);
}

Eigen::MatrixXd gradient_p(const DenseProblem& pb, const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd hat = pb.v * p * q.transpose() * pb.t.transpose();
  return pb.v.transpose() * score_gradient(pb, hat) * pb.t * q + pb.lambda1 * p;
}

Eigen::MatrixXd gradient_q(const DenseProblem& pb, const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  const Eigen::MatrixXd hat = pb.v * p * q.transpose() * pb.t.transpose();
  return pb.t.transpose() * score_gradient(pb, hat).transpose() * pb.v * p + pb.lambda1 * q;
}

Eigen::MatrixXd finite_difference(const std::function<double(const Eigen::MatrixXd&)>& f,
                                  const Eigen::MatrixXd& x, double h) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  Eigen::MatrixXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double orig = probe.data()[k];
    probe.data()[k] = orig + h;
    const double up = f(probe);
    probe.data()[k] = orig - h;
    const double down = f(probe);
    probe.data()[k] = orig;
    g.data()[k] = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd exact_step_p(const DenseProblem& pb, const Eigen::MatrixXd& q) {
  return exact_step(pb.o, pb.v, pb.t * q, pb.l_v, pb.l_s, pb.lambda1, pb.lambda2);
}

Eigen::MatrixXd exact_step_q(const DenseProblem& pb, const Eigen::MatrixXd& p) {
  return exact_step(pb.o.transpose(), pb.t, pb.v * p, pb.l_s, pb.l_v, pb.lambda1, pb.lambda2);
}

BruteForceScore ap_ar(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& truth, std::size_t n) {
  BruteForceScore out;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    std::set<Eigen::Index> relevant;
    for (Eigen::Index j = 0; j < truth.cols(); ++j) {
      if (truth(i, j) != 0.0) relevant.insert(j);
    }
    if (relevant.empty()) continue;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.cols()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return scores(i, a) > scores(i, b); });
    std::size_t hits = 0;
    for (std::size_t k = 0; k < std::min(n, order.size()); ++k) hits += relevant.count(order[k]);
    out.precision.push_back(static_cast<double>(hits) / static_cast<double>(n));
    out.recall.push_back(static_cast<double>(hits) / static_cast<double>(relevant.size()));
  }
  double sp = 0.0, sr = 0.0;
  for (std::size_t k = 0; k < out.precision.size(); ++k) {
    sp += out.precision[k];
    sr += out.recall[k];
  }
  out.ap = sp / static_cast<double>(out.precision.size());
  out.ar = sr / static_cast<double>(out.recall.size());
  return out;
}

}  // namespace tagsmc::oracle
