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

#include "tagsmc/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "tagsmc/error.hpp"

namespace tagsmc {

void SscConfig::validate() const {
  if (!(mu > 0.0)) throw ConfigError("ssc.mu", "must be > 0");
  if (max_iters < 1) throw ConfigError("ssc.max_iters", "must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("ssc.tol", "must be > 0");
  if (!(penalty_init > 0.0)) throw ConfigError("ssc.penalty_init", "must be > 0");
  if (!(penalty_growth > 1.0)) throw ConfigError("ssc.penalty_growth", "must be > 1");
  if (!(penalty_max >= penalty_init)) {
    throw ConfigError("ssc.penalty_max", "must be >= penalty_init");
  }
}

namespace {

double soft(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

// ADMM on the split A = C: A carries the least-squares and affine terms, C the
// l1 term and the zero diagonal. In C = Z^T layout, column j represents image j.
//
//   A <- (X^T X + 1 1^T + I)^{-1} [X^T (X - E + Y1/rho) + 1 (1^T - y2/rho) + C - Y3/rho]
//   E <- (rho (X - X A) + Y1) / (2 mu + rho)
//   C <- shrink(A + Y3/rho, 1/rho), diag(C) <- 0
//
// The system matrix does not depend on rho, so it is factored once.
SelfRepresentation ssc_solve(const FeatureMatrix& images, const SscConfig& config) {
  config.validate();
  const Index n = images.n_rows();
  if (n < 2) throw ValueError("subspace clustering needs at least two images");

  const Eigen::MatrixXd x =
      (config.normalize_rows ? images.row_normalized() : images).data().transpose();
  const Index f = x.rows();
  const double x_norm = x.norm();
  if (x_norm == 0.0) throw ValueError("image features are all zero");

  const Eigen::MatrixXd gram = x.transpose() * x;
  Eigen::MatrixXd system = gram;
  system.array() += 1.0;
  system.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) throw SolverError("self-representation system is singular");

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd c_prev = c;
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(f, n);
  Eigen::MatrixXd y1 = Eigen::MatrixXd::Zero(f, n);
  Eigen::RowVectorXd y2 = Eigen::RowVectorXd::Zero(n);
  Eigen::MatrixXd y3 = Eigen::MatrixXd::Zero(n, n);
  double rho = config.penalty_init;

  SelfRepresentation rep;
  rep.objective_trace.reserve(static_cast<std::size_t>(config.max_iters));

  for (int it = 1; it <= config.max_iters; ++it) {
    Eigen::MatrixXd rhs = x.transpose() * (x - e + y1 / rho);
    rhs.rowwise() += (Eigen::RowVectorXd::Ones(n) - y2 / rho);
    rhs += c - y3 / rho;
    a = llt.solve(rhs);

    const Eigen::MatrixXd xa = x * a;
    e = (rho * (x - xa) + y1) / (2.0 * config.mu + rho);

    c_prev.swap(c);
    c = (a + y3 / rho).unaryExpr([t = 1.0 / rho](double v) { return soft(v, t); });
    c.diagonal().setZero();

    const Eigen::MatrixXd r1 = x - xa - e;
    const Eigen::RowVectorXd r2 = a.colwise().sum() - Eigen::RowVectorXd::Ones(n);
    const Eigen::MatrixXd r3 = a - c;
    y1 += rho * r1;
    y2 += rho * r2;
    y3 += rho * r3;

    rep.objective_trace.push_back(c.cwiseAbs().sum() + config.mu * e.squaredNorm());
    rep.iterations = it;

    rep.reconstruction_residual = (x - x * c - e).norm() / x_norm;
    rep.affine_residual = (c.colwise().sum().array() - 1.0).abs().maxCoeff();
    rep.split_residual = r3.cwiseAbs().maxCoeff();
    const double change = (c - c_prev).cwiseAbs().maxCoeff();
    if (rep.reconstruction_residual <= config.tol && rep.affine_residual <= config.tol &&
        rep.split_residual <= config.tol && change <= config.tol) {
      rep.converged = true;
      break;
    }
    rho = std::min(config.penalty_growth * rho, config.penalty_max);
  }

  rep.z = c.transpose();
  rep.e = std::move(e);
  return rep;
}

SimilarityGraph affinity(const Eigen::MatrixXd& z) {
  if (z.rows() != z.cols()) throw DimensionError("coefficient matrix must be square");
  Eigen::MatrixXd abs_z = z.cwiseAbs();
  Eigen::MatrixXd a = abs_z + abs_z.transpose();
  a.diagonal().setZero();
  return SimilarityGraph(std::move(a));
}

SimilarityGraph affinity(const SelfRepresentation& rep) { return affinity(rep.z); }

namespace {

// Ascending eigen-decomposition of the symmetric normalized Laplacian.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> normalized_laplacian_eigen(
    const SimilarityGraph& graph) {
  const Eigen::MatrixXd& w = graph.weights();
  const Index n = w.rows();
  Eigen::VectorXd inv_sqrt_deg = w.rowwise().sum();
  for (Index i = 0; i < n; ++i) {
    inv_sqrt_deg(i) = inv_sqrt_deg(i) > 0.0 ? 1.0 / std::sqrt(inv_sqrt_deg(i)) : 0.0;
  }
  Eigen::MatrixXd l = -(inv_sqrt_deg.asDiagonal() * w * inv_sqrt_deg.asDiagonal());
  l.diagonal().array() += 1.0;
  l = 0.5 * (l + l.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
  if (es.info() != Eigen::Success) throw SolverError("eigensolver failed on normalized Laplacian");
  return es;
}

struct KmeansRun {
  std::vector<int> labels;
  double inertia = 0;
  int repairs = 0;
  int unrepaired = 0;
};

KmeansRun lloyd(const Eigen::MatrixXd& pts, int k, Index first, int max_iters) {
  const Index n = pts.rows();
  Eigen::MatrixXd centers(k, pts.cols());
  centers.row(0) = pts.row(first);
  Eigen::VectorXd min_d2 = (pts.rowwise() - pts.row(first)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    Index far = 0;
    min_d2.maxCoeff(&far);
    centers.row(c) = pts.row(far);
    min_d2 = min_d2.cwiseMin((pts.rowwise() - pts.row(far)).rowwise().squaredNorm());
  }

  KmeansRun run;
  run.labels.assign(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd dist(n);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      (centers.rowwise() - pts.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (run.labels[i] != static_cast<int>(best)) {
        run.labels[i] = static_cast<int>(best);
        changed = true;
      }
    }

    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (int l : run.labels) ++counts[l];
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      if (run.repairs >= 3) continue;
      // Move the point farthest from its own centroid into the empty cluster.
      for (Index i = 0; i < n; ++i) dist(i) = (pts.row(i) - centers.row(run.labels[i])).squaredNorm();
      Index far = 0;
      dist.maxCoeff(&far);
      if (counts[run.labels[far]] <= 1) continue;
      --counts[run.labels[far]];
      run.labels[far] = c;
      counts[c] = 1;
      ++run.repairs;
      changed = true;
    }

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, pts.cols());
    for (Index i = 0; i < n; ++i) sums.row(run.labels[i]) += pts.row(i);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    }
    if (!changed) break;
  }

  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int l : run.labels) ++counts[l];
  run.unrepaired = static_cast<int>(std::count(counts.begin(), counts.end(), Index{0}));
  run.inertia = 0.0;
  for (Index i = 0; i < n; ++i) run.inertia += (pts.row(i) - centers.row(run.labels[i])).squaredNorm();
  return run;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                         const SpectralOptions& options) {
  const Index n = points.rows();
  if (k < 1) throw ValueError("number of clusters must be >= 1");
  if (k > n) throw ValueError("number of clusters exceeds number of points");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);

  ClusterAssignment best;
  best.k = k;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    KmeansRun run = lloyd(points, k, pick(rng), options.max_kmeans_iters);
    if (run.inertia < best.inertia) {
      best.labels = std::move(run.labels);
      best.inertia = run.inertia;
      best.empty_cluster_repairs = run.repairs;
      best.unrepaired_empty_clusters = run.unrepaired;
    }
  }
  return best;
}

ClusterAssignment spectral_cluster(const SimilarityGraph& affinity, int k, std::uint64_t seed,
                                   const SpectralOptions& options) {
  const Index n = affinity.size();
  if (k < 1) throw ValueError("number of clusters must be >= 1");
  if (k > n) throw ValueError("number of clusters exceeds number of images");
  if (k == 1) {
    ClusterAssignment one;
    one.k = 1;
    one.labels.assign(static_cast<std::size_t>(n), 0);
    return one;
  }
  const auto es = normalized_laplacian_eigen(affinity);
  Eigen::MatrixXd embed = es.eigenvectors().leftCols(k);
  for (Index i = 0; i < n; ++i) {
    const double norm = embed.row(i).norm();
    if (norm > 0.0) embed.row(i) /= norm;
  }
  return kmeans(embed, k, seed, options);
}

int estimate_k_eigengap(const SimilarityGraph& affinity, int k_max) {
  const Index n = affinity.size();
  if (k_max < 1 || k_max >= n) throw ValueError("eigengap search range must be in [1, n)");
  const Eigen::VectorXd ev = normalized_laplacian_eigen(affinity).eigenvalues();
  int best_k = 1;
  double best_gap = -1.0;
  for (int k = 1; k <= k_max; ++k) {
    const double gap = ev(k) - ev(k - 1);
    if (gap > best_gap) {
      best_gap = gap;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace tagsmc
