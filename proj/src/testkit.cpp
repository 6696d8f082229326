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

#include "tagsmc/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/QR>

#include "tagsmc/error.hpp"

namespace tagsmc::testkit {

namespace {

Eigen::MatrixXd gaussian(Index rows, Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> nd(0.0, sd);
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  }
  return m;
}

Eigen::MatrixXd half_normal(Index rows, Index cols, std::mt19937_64& rng) {
  return gaussian(rows, cols, rng).cwiseAbs();
}

Eigen::MatrixXd orthonormal_basis(Index ambient, Index dim, std::mt19937_64& rng) {
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(ambient, dim, rng));
  return qr.householderQ() * Eigen::MatrixXd::Identity(ambient, dim);
}

// Minimum-cost perfect matching on a square matrix (rows to columns).
std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n);
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

SubspaceInstance gen_union_of_subspaces(int k, int dim_subspace, int dim_ambient,
                                        int n_per_subspace, double noise_sigma,
                                        std::uint64_t seed) {
  if (k < 1 || dim_subspace < 1 || dim_subspace >= dim_ambient || n_per_subspace < 1 ||
      noise_sigma < 0.0) {
    throw ValueError("invalid union-of-subspaces parameters");
  }
  std::mt19937_64 rng(seed);
  SubspaceInstance inst;
  inst.noise_sigma = noise_sigma;
  Eigen::MatrixXd pts(static_cast<Index>(k) * n_per_subspace, dim_ambient);
  for (int c = 0; c < k; ++c) {
    inst.bases.push_back(orthonormal_basis(dim_ambient, dim_subspace, rng));
    const Eigen::MatrixXd coeffs = gaussian(dim_subspace, n_per_subspace, rng);
    pts.middleRows(static_cast<Index>(c) * n_per_subspace, n_per_subspace) =
        (inst.bases.back() * coeffs).transpose();
    for (int i = 0; i < n_per_subspace; ++i) inst.labels.push_back(c);
  }
  if (noise_sigma > 0.0) pts += gaussian(pts.rows(), pts.cols(), rng, noise_sigma);
  inst.points = FeatureMatrix(std::move(pts)).row_normalized();
  return inst;
}

PreservingRate subspace_preserving_rate(const Eigen::MatrixXd& z, const std::vector<int>& labels) {
  if (z.rows() != z.cols() || z.rows() != static_cast<Index>(labels.size())) {
    throw DimensionError("coefficient matrix and labels disagree in size");
  }
  PreservingRate out;
  double sum = 0.0;
  int counted = 0;
  for (Index i = 0; i < z.rows(); ++i) {
    double total = 0.0, inside = 0.0;
    for (Index j = 0; j < z.cols(); ++j) {
      const double a = std::abs(z(i, j));
      total += a;
      if (labels[j] == labels[i]) inside += a;
    }
    if (total == 0.0) {
      ++out.excluded_rows;
      continue;
    }
    sum += inside / total;
    ++counted;
  }
  if (counted == 0) throw ValueError("every coefficient row is zero");
  out.rate = sum / counted;
  return out;
}

double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DimensionError("label vectors differ in length");
  if (predicted.empty()) throw ValueError("empty labelings");
  const int kp = *std::max_element(predicted.begin(), predicted.end()) + 1;
  const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
  if (*std::min_element(predicted.begin(), predicted.end()) < 0 ||
      *std::min_element(truth.begin(), truth.end()) < 0) {
    throw ValueError("labels must be nonnegative");
  }
  const int k = std::max(kp, kt);
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < truth.size(); ++i) overlap(predicted[i], truth[i]) += 1.0;

  double best = 0.0;
  if (k <= 8) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double agree = 0.0;
      for (int c = 0; c < k; ++c) agree += overlap(c, perm[c]);
      best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const std::vector<int> match = hungarian(-overlap);
    for (int c = 0; c < k; ++c) best += overlap(c, match[c]);
  }
  return best / static_cast<double>(truth.size());
}

PlantedAnnotation gen_planted_annotation(int n_images, int n_tags, int f_i, int f_t, int r,
                                         double density, std::uint64_t seed) {
  if (n_images < 1 || n_tags < 1 || f_i < 1 || f_t < 1 || r < 1 || r > std::min(f_i, f_t) ||
      !(density > 0.0 && density <= 1.0)) {
    throw ValueError("invalid planted-annotation parameters");
  }
  std::mt19937_64 rng(seed);
  PlantedAnnotation pa;
  pa.v = FeatureMatrix(half_normal(n_images, f_i, rng));
  pa.t = FeatureMatrix(half_normal(n_tags, f_t, rng));
  pa.p_star = half_normal(f_i, r, rng);
  pa.q_star = half_normal(f_t, r, rng);
  Eigen::MatrixXd s = pa.v.data() * pa.p_star * pa.q_star.transpose() * pa.t.data().transpose();
  const double peak = s.maxCoeff();
  pa.p_star /= peak;
  pa.scores = pa.v.data() * pa.p_star * pa.q_star.transpose() * pa.t.data().transpose();
  pa.scores = pa.scores.cwiseMin(1.0);
  pa.o_raw = TagMatrix::from_dense_clamped(pa.scores);

  const auto keep = static_cast<std::size_t>(std::ceil(density * n_tags - 1e-12));
  std::vector<Triplet> entries;
  const auto top = top_n_tags(pa.scores, keep);
  for (Index i = 0; i < n_images; ++i) {
    for (Index j : top[i]) entries.emplace_back(i, j, 1.0);
  }
  pa.o_star = TagMatrix(n_images, n_tags, entries);
  return pa;
}

std::vector<int> tagged_bundle_labels(const TaggedBundleSpec& spec) {
  std::vector<int> labels;
  for (int c = 0; c < spec.n_clusters; ++c) {
    for (int i = 0; i < spec.images_per_cluster; ++i) labels.push_back(c);
  }
  return labels;
}

DatasetBundle gen_tagged_bundle(const TaggedBundleSpec& spec) {
  const int topic_tags = spec.n_clusters * spec.tags_per_topic;
  if (spec.n_clusters < 1 || spec.images_per_cluster < 1 || spec.tags_per_topic < 1 ||
      topic_tags > spec.n_tags || spec.subspace_dim < 1 ||
      spec.n_clusters * (spec.subspace_dim + 1) > spec.image_dim || spec.tag_dim < 1) {
    throw ValueError("invalid tagged-bundle parameters");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index n_images = static_cast<Index>(spec.n_clusters) * spec.images_per_cluster;

  // Tag t belongs to topic owner[t] (or -1 for background), in shuffled order.
  std::vector<int> owner(static_cast<std::size_t>(spec.n_tags), -1);
  for (int t = 0; t < topic_tags; ++t) owner[t] = t / spec.tags_per_topic;
  std::shuffle(owner.begin(), owner.end(), rng);
  std::vector<double> prob(static_cast<std::size_t>(spec.n_tags));
  for (auto& p : prob) p = spec.topic_prob_min + (spec.topic_prob_max - spec.topic_prob_min) * unit(rng);

  // Each cluster lives on an affine subspace: offset + basis * coefficients.
  Eigen::MatrixXd v(n_images, spec.image_dim);
  for (int c = 0; c < spec.n_clusters; ++c) {
    const Eigen::MatrixXd basis = orthonormal_basis(spec.image_dim, spec.subspace_dim + 1, rng);
    const Eigen::VectorXd offset = basis.col(0);
    const Eigen::MatrixXd span = basis.rightCols(spec.subspace_dim);
    const Eigen::MatrixXd coeffs = gaussian(spec.subspace_dim, spec.images_per_cluster, rng, 0.5);
    Eigen::MatrixXd block = (span * coeffs).colwise() + offset;
    v.middleRows(static_cast<Index>(c) * spec.images_per_cluster, spec.images_per_cluster) =
        block.transpose();
  }
  v += gaussian(v.rows(), v.cols(), rng, spec.image_noise);

  Eigen::MatrixXd topic_centers = gaussian(spec.n_clusters, spec.tag_dim, rng);
  Eigen::MatrixXd t(spec.n_tags, spec.tag_dim);
  for (int j = 0; j < spec.n_tags; ++j) {
    const Eigen::RowVectorXd jitter = gaussian(1, spec.tag_dim, rng, spec.tag_noise);
    t.row(j) = owner[j] >= 0 ? Eigen::RowVectorXd(topic_centers.row(owner[j]) + jitter)
                             : Eigen::RowVectorXd(gaussian(1, spec.tag_dim, rng));
  }

  std::vector<Triplet> entries;
  const std::vector<int> labels = tagged_bundle_labels(spec);
  for (Index i = 0; i < n_images; ++i) {
    std::size_t before = entries.size();
    for (int j = 0; j < spec.n_tags; ++j) {
      const double p = owner[j] == labels[i] ? prob[j] : owner[j] < 0 ? spec.background_prob : 0.0;
      if (unit(rng) < p) entries.emplace_back(i, j, 1.0);
    }
    if (entries.size() == before) {
      // Guarantee at least one tag: the most probable tag of the image's topic.
      int best = -1;
      for (int j = 0; j < spec.n_tags; ++j) {
        if (owner[j] == labels[i] && (best < 0 || prob[j] > prob[best])) best = j;
      }
      entries.emplace_back(i, best, 1.0);
    }
  }

  DatasetBundle b;
  b.tags = TagMatrix(n_images, spec.n_tags, entries);
  b.ground_truth = b.tags;
  b.image_features = FeatureMatrix(std::move(v));
  b.tag_features = FeatureMatrix(std::move(t));
  for (Index i = 0; i < n_images; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "img%05ld", static_cast<long>(i));
    b.image_ids.emplace_back(buf);
  }
  for (int j = 0; j < spec.n_tags; ++j) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "tag%03d", j);
    b.tag_names.emplace_back(buf);
  }
  b.validate();
  return b;
}

}  // namespace tagsmc::testkit
