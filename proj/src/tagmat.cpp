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

#include "tagsmc/tagmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tagsmc/error.hpp"

namespace tagsmc {

namespace {

constexpr double kSymmetryTol = 1e-12;

void require_positive_shape(Index rows, Index cols, const char* what) {
  if (rows < 1 || cols < 1) {
    std::ostringstream os;
    os << what << " must be at least 1x1, got " << rows << "x" << cols;
    throw DimensionError(os.str());
  }
}

}  // namespace

TagMatrix::TagMatrix(Index n_images, Index n_tags) : m_(n_images, n_tags) {
  require_positive_shape(n_images, n_tags, "tag matrix");
}

TagMatrix::TagMatrix(Index n_images, Index n_tags, const std::vector<Triplet>& entries)
    : m_(n_images, n_tags) {
  require_positive_shape(n_images, n_tags, "tag matrix");
  for (const auto& t : entries) {
    if (t.row() < 0 || t.row() >= n_images || t.col() < 0 || t.col() >= n_tags) {
      std::ostringstream os;
      os << "tag entry (" << t.row() << "," << t.col() << ") outside " << n_images << "x"
         << n_tags;
      throw DimensionError(os.str());
    }
  }
  m_.setFromTriplets(entries.begin(), entries.end());
  validate();
}

TagMatrix::TagMatrix(SparseRowMatrix m) : m_(std::move(m)) {
  require_positive_shape(m_.rows(), m_.cols(), "tag matrix");
  validate();
}

void TagMatrix::validate() {
  for (Index k = 0; k < m_.outerSize(); ++k) {
    for (SparseRowMatrix::InnerIterator it(m_, k); it; ++it) {
      const double v = it.value();
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        std::ostringstream os;
        os << "tag confidence at (" << it.row() << "," << it.col() << ") is " << v
           << ", expected a finite value in [0,1]";
        throw ValueError(os.str());
      }
    }
  }
  m_.prune(0.0, 0.0);
  m_.makeCompressed();
}

TagMatrix TagMatrix::from_dense_clamped(const Eigen::MatrixXd& scores) {
  if (!scores.allFinite()) throw ValueError("score matrix contains non-finite values");
  std::vector<Triplet> entries;
  for (Index i = 0; i < scores.rows(); ++i) {
    for (Index j = 0; j < scores.cols(); ++j) {
      const double v = std::clamp(scores(i, j), 0.0, 1.0);
      if (v > 0.0) entries.emplace_back(i, j, v);
    }
  }
  return TagMatrix(scores.rows(), scores.cols(), entries);
}

Eigen::VectorXd TagMatrix::row_dense(Index image) const {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(n_tags());
  for (SparseRowMatrix::InnerIterator it(m_, image); it; ++it) row(it.col()) = it.value();
  return row;
}

std::vector<Triplet> TagMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(m_.nonZeros()));
  for (Index k = 0; k < m_.outerSize(); ++k) {
    for (SparseRowMatrix::InnerIterator it(m_, k); it; ++it) {
      out.emplace_back(it.row(), it.col(), it.value());
    }
  }
  return out;
}

bool TagMatrix::operator==(const TagMatrix& other) const {
  if (n_images() != other.n_images() || n_tags() != other.n_tags() || nnz() != other.nnz()) {
    return false;
  }
  const auto a = triplets();
  const auto b = other.triplets();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].row() != b[k].row() || a[k].col() != b[k].col() || a[k].value() != b[k].value()) {
      return false;
    }
  }
  return true;
}

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd data) : data_(std::move(data)) {
  require_positive_shape(data_.rows(), data_.cols(), "feature matrix");
  if (!data_.allFinite()) throw ValueError("feature matrix contains non-finite values");
}

FeatureMatrix FeatureMatrix::row_normalized() const {
  Eigen::MatrixXd out = data_;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm == 0.0) {
      throw ValueError("feature row " + std::to_string(i) + " has zero norm");
    }
    out.row(i) /= norm;
  }
  return FeatureMatrix(std::move(out));
}

SimilarityGraph::SimilarityGraph(Eigen::MatrixXd weights) : w_(std::move(weights)) {
  if (w_.rows() != w_.cols()) throw DimensionError("similarity graph must be square");
  if (!w_.allFinite()) throw ValueError("similarity graph contains non-finite weights");
  for (Index i = 0; i < w_.rows(); ++i) {
    if (w_(i, i) != 0.0) {
      throw ValueError("similarity graph has nonzero diagonal at node " + std::to_string(i));
    }
    for (Index j = 0; j < i; ++j) {
      if (std::abs(w_(i, j) - w_(j, i)) > kSymmetryTol) {
        throw ValueError("similarity graph is not symmetric at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      }
    }
  }
  if ((w_.array() < 0.0).any()) throw ValueError("similarity graph has negative weights");
}

SimilarityGraph SimilarityGraph::restricted(const std::vector<Index>& nodes) const {
  const auto n = static_cast<Index>(nodes.size());
  Eigen::MatrixXd sub(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) sub(a, b) = w_(nodes[a], nodes[b]);
  }
  return SimilarityGraph(std::move(sub));
}

SimilarityGraph cosine_similarity_graph(const FeatureMatrix& features, Rectification mode) {
  const FeatureMatrix unit = features.row_normalized();
  Eigen::MatrixXd g = unit.data() * unit.data().transpose();
  const Index n = g.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      // Average the two products so the result is symmetric bit for bit.
      double c = std::clamp(0.5 * (g(i, j) + g(j, i)), -1.0, 1.0);
      c = mode == Rectification::kClamp ? std::max(c, 0.0) : 0.5 * (1.0 + c);
      g(i, j) = c;
      g(j, i) = c;
    }
    g(i, i) = 0.0;
  }
  return SimilarityGraph(std::move(g));
}

GraphLaplacian graph_laplacian(const Eigen::MatrixXd& weights) {
  if (weights.rows() != weights.cols()) throw DimensionError("graph weights must be square");
  for (Index i = 0; i < weights.rows(); ++i) {
    for (Index j = 0; j < i; ++j) {
      if (std::abs(weights(i, j) - weights(j, i)) > kSymmetryTol) {
        throw ValueError("cannot build a Laplacian from an asymmetric graph");
      }
    }
  }
  Eigen::MatrixXd l = -weights;
  l.diagonal().setZero();
  // Degrees exclude any self loop, so each row of L sums to zero.
  l.diagonal() = -l.rowwise().sum();
  return GraphLaplacian(std::move(l));
}

GraphLaplacian graph_laplacian(const SimilarityGraph& graph) {
  return graph_laplacian(graph.weights());
}

std::vector<Index> top_n_indices(const Eigen::Ref<const Eigen::VectorXd>& scores, std::size_t n) {
  if (n == 0) throw ValueError("top-n cutoff must be at least 1");
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const std::size_t keep = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    [&](Index a, Index b) {
                      if (scores(a) != scores(b)) return scores(a) > scores(b);
                      return a < b;
                    });
  order.resize(keep);
  return order;
}

std::vector<std::vector<Index>> top_n_tags(const TagMatrix& tags, std::size_t n) {
  std::vector<std::vector<Index>> out;
  out.reserve(static_cast<std::size_t>(tags.n_images()));
  for (Index i = 0; i < tags.n_images(); ++i) out.push_back(top_n_indices(tags.row_dense(i), n));
  return out;
}

std::vector<std::vector<Index>> top_n_tags(const Eigen::MatrixXd& scores, std::size_t n) {
  std::vector<std::vector<Index>> out;
  out.reserve(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    const Eigen::VectorXd row = scores.row(i).transpose();
    out.push_back(top_n_indices(row, n));
  }
  return out;
}

}  // namespace tagsmc
