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
#include <string>
#include <vector>

#include "json.hpp"

#include "tagsmc/dataset.hpp"
#include "tagsmc/metrics.hpp"
#include "tagsmc/refine.hpp"
#include "tagsmc/sharing.hpp"
#include "tagsmc/subspace.hpp"

namespace tagsmc {

/// Which image similarity drives neighbor voting during tag sharing.
enum class NeighborSource { kAffinity, kCosine };

struct TuneGrid {
  std::vector<int> rank{5, 10};
  std::vector<double> lambda1{0.1, 1.0};
  std::vector<double> lambda2{0.0, 0.1};
  std::vector<double> mu{0.0, 0.2, 0.4, 0.6, 0.8};
  double validation_fraction = 0.3;
  std::uint64_t validation_seed = 11;
  std::size_t eval_n = 5;
};

struct PipelineConfig {
  std::filesystem::path manifest;
  std::filesystem::path output_dir = "out";

  SscConfig ssc;
  int k = 5;
  std::uint64_t cluster_seed = 3;
  bool eigengap = false;  ///< choose k by eigengap instead of using `k`
  int eigengap_max = 20;

  SharingConfig sharing;
  NeighborSource neighbors = NeighborSource::kAffinity;

  Rectification rectification = Rectification::kClamp;
  RefineConfig refine;

  std::vector<std::size_t> eval_n{2, 5, 10};
  EmptyTruthPolicy empty_truth = EmptyTruthPolicy::kExclude;

  TuneGrid tune;
  int threads = 1;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& config);
/// Unknown keys and wrongly typed values raise ConfigError with the dotted key path.
PipelineConfig config_from_json(const nlohmann::json& j);
/// Applies `section.key=value` overrides; the value is parsed as JSON, else taken as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

struct ClusterStage {
  SelfRepresentation rep;
  SimilarityGraph affinity;
  ClusterAssignment assignment;
};

ClusterStage run_cluster(const DatasetBundle& bundle, const PipelineConfig& config);

/// Uses the SSC affinity or the rectified cosine graph, per `config.neighbors`.
TagMatrix run_share(const DatasetBundle& bundle, const ClusterStage& clusters,
                    const PipelineConfig& config);
TagMatrix run_share(const DatasetBundle& bundle, const std::vector<int>& labels,
                    const SimilarityGraph& affinity, const PipelineConfig& config);

/// Refines `tags` with Laplacians from cosine graphs of the bundle's features.
RefineOutput run_refine(const DatasetBundle& bundle, const TagMatrix& tags,
                        const PipelineConfig& config);

std::vector<EvalReport> run_eval(const Eigen::MatrixXd& scores, const TagMatrix& truth,
                                 const PipelineConfig& config);

struct PipelineResult {
  ClusterStage clusters;
  TagMatrix completed{1, 1};
  RefineOutput refined;
  std::vector<EvalReport> reports;  // empty without ground truth
};

PipelineResult run_pipeline(const DatasetBundle& bundle, const PipelineConfig& config);

struct TuneRow {
  int rank = 0;
  double lambda1 = 0;
  double lambda2 = 0;
  double mu = 0;
  double ap = 0;
};

struct TuneResult {
  std::vector<TuneRow> rows;  ///< grid order: rank, lambda1, lambda2, mu (innermost)
  TuneRow best;               ///< highest validation AP; earliest grid point on ties
  std::vector<Index> validation_images;
};

/// Grid search of the refinement parameters on a seeded validation subset of
/// images with ground truth. Completion runs once and is shared by every grid point.
TuneResult tune(const DatasetBundle& bundle, const PipelineConfig& config);
TuneResult tune(const DatasetBundle& bundle, const TagMatrix& completed,
                const PipelineConfig& config);

}  // namespace tagsmc
