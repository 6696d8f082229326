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
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace tagsmc {

using Index = Eigen::Index;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/**
 * Sparse image x tag matrix of annotation confidences.
 *
 * Rows are images, columns are tags. Every stored value is finite and lies in
 * [0,1]; absent entries mean 0. Explicit zeros are dropped on construction so
 * that the stored pattern is exactly the annotated set.
 */
class TagMatrix {
 public:
  TagMatrix(Index n_images, Index n_tags);
  /// Duplicate triplets are summed before validation.
  TagMatrix(Index n_images, Index n_tags, const std::vector<Triplet>& entries);
  explicit TagMatrix(SparseRowMatrix m);

  /// Keeps entries whose clamped value is > 0. Non-finite input throws.
  static TagMatrix from_dense_clamped(const Eigen::MatrixXd& scores);

  Index n_images() const { return m_.rows(); }
  Index n_tags() const { return m_.cols(); }
  Index nnz() const { return m_.nonZeros(); }

  double value(Index image, Index tag) const { return m_.coeff(image, tag); }
  bool annotated(Index image, Index tag) const { return m_.coeff(image, tag) > 0.0; }

  const SparseRowMatrix& matrix() const { return m_; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(m_); }
  Eigen::VectorXd row_dense(Index image) const;
  std::vector<Triplet> triplets() const;

  bool operator==(const TagMatrix& other) const;

 private:
  void validate();
  SparseRowMatrix m_;
};

/// Dense row-major feature vectors (one row per image or per tag).
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  explicit FeatureMatrix(Eigen::MatrixXd data);

  Index n_rows() const { return data_.rows(); }
  Index dim() const { return data_.cols(); }
  const Eigen::MatrixXd& data() const { return data_; }

  /// Copy with every row scaled to unit Euclidean norm; zero rows throw.
  FeatureMatrix row_normalized() const;

 private:
  Eigen::MatrixXd data_;
};

/// Symmetric nonnegative weight matrix with a zero diagonal.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  /// Throws ValueError unless symmetric (1e-12), zero-diagonal, finite and nonnegative.
  explicit SimilarityGraph(Eigen::MatrixXd weights);

  Index size() const { return w_.rows(); }
  const Eigen::MatrixXd& weights() const { return w_; }
  double weight(Index i, Index j) const { return w_(i, j); }

  /// Induced subgraph on `nodes`, in the given order.
  SimilarityGraph restricted(const std::vector<Index>& nodes) const;

 private:
  Eigen::MatrixXd w_;
};

/// L = diag(G 1) - G.
class GraphLaplacian {
 public:
  GraphLaplacian() = default;
  explicit GraphLaplacian(Eigen::MatrixXd l) : l_(std::move(l)) {}

  Index size() const { return l_.rows(); }
  const Eigen::MatrixXd& matrix() const { return l_; }

 private:
  Eigen::MatrixXd l_;
};

/// How negative cosines are mapped into [0,1].
enum class Rectification {
  kClamp,  ///< max(cos, 0)
  kShift,  ///< (1 + cos) / 2
};

/// Pairwise cosine similarity between rows, rectified, with a zero diagonal.
/// Throws ValueError when any row has zero norm.
SimilarityGraph cosine_similarity_graph(const FeatureMatrix& features,
                                        Rectification mode = Rectification::kClamp);

/// Throws ValueError if `weights` is not symmetric to 1e-12.
GraphLaplacian graph_laplacian(const Eigen::MatrixXd& weights);
GraphLaplacian graph_laplacian(const SimilarityGraph& graph);

/// Indices of the n highest-scoring entries of `scores`, ties by ascending index.
std::vector<Index> top_n_indices(const Eigen::Ref<const Eigen::VectorXd>& scores, std::size_t n);

/// Per-image top-n tag indices (see top_n_indices for ordering).
std::vector<std::vector<Index>> top_n_tags(const TagMatrix& tags, std::size_t n);
std::vector<std::vector<Index>> top_n_tags(const Eigen::MatrixXd& scores, std::size_t n);

}  // namespace tagsmc
