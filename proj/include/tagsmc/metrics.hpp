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
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "tagsmc/tagmat.hpp"

namespace tagsmc {

/// Precision and recall over each image's top-n tags, averaged over images.
struct EvalReport {
  std::size_t n = 0;
  double ap = 0;
  double ar = 0;
  std::vector<double> per_image_precision;  // only evaluated images
  std::vector<double> per_image_recall;
  std::vector<Index> evaluated_images;
  std::size_t excluded_images = 0;  // rows with empty ground truth
};

/// Empty ground-truth rows are skipped by default; `kCountAsZero` keeps them
/// with precision = recall = 0.
enum class EmptyTruthPolicy { kExclude, kCountAsZero };

/**
 * AP@n and AR@n of `scores` against the binary `truth`.
 *
 * precision@n = hits / n and recall@n = hits / |truth row|, where the top n
 * are taken with ties broken by ascending tag index. Throws ValueError when
 * every truth row is empty (under kExclude), DimensionError on shape mismatch.
 */
EvalReport ap_ar_at_n(const Eigen::MatrixXd& scores, const TagMatrix& truth, std::size_t n,
                      EmptyTruthPolicy policy = EmptyTruthPolicy::kExclude);
EvalReport ap_ar_at_n(const TagMatrix& predicted, const TagMatrix& truth, std::size_t n,
                      EmptyTruthPolicy policy = EmptyTruthPolicy::kExclude);

/// Restricts evaluation to the listed images (e.g. a validation split).
EvalReport ap_ar_at_n(const Eigen::MatrixXd& scores, const TagMatrix& truth, std::size_t n,
                      const std::vector<Index>& images,
                      EmptyTruthPolicy policy = EmptyTruthPolicy::kExclude);

struct NoiseSpec {
  double missing_rate = 0;     ///< fraction of true entries deleted
  double inaccurate_rate = 0;  ///< spurious entries added, as a fraction of true entries
  std::uint64_t seed = 0;

  void validate() const;
};

/**
 * Deletes floor(missing_rate * nnz) uniformly chosen true entries and sets
 * floor(inaccurate_rate * nnz) uniformly chosen zero positions to 1.
 * Added positions are always zeros of `truth`, so no position changes twice.
 */
TagMatrix inject_noise(const TagMatrix& truth, const NoiseSpec& spec);

/// Writes `key: value` lines (`ap@5: ...`, `ar@5: ...`, ...).
void write_eval_report(const std::filesystem::path& path, const std::vector<EvalReport>& reports);
/// Per-image CSV: image,n,precision,recall.
void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports);
/// Parses the `key: value` file back into (n, ap, ar) reports without per-image data.
std::vector<EvalReport> read_eval_report(const std::filesystem::path& path);

}  // namespace tagsmc
