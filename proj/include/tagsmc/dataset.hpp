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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tagsmc/tagmat.hpp"

namespace tagsmc {

/**
 * Everything the pipeline reads for one collection.
 *
 * Manifest files are plain `key = value` lines (`#` starts a comment). Keys:
 *
 *     tags           = <coordinate .mtx, images x tags, values in [0,1]>
 *     image_features = <array .mtx, images x f_i>
 *     tag_features   = <array .mtx, tags x f_t>
 *     image_ids      = <text, one id per line>
 *     tag_names      = <text, one name per line>
 *     ground_truth   = <coordinate .mtx, optional>
 *
 * Relative paths are resolved against the manifest's directory.
 */
struct DatasetBundle {
  TagMatrix tags{1, 1};
  FeatureMatrix image_features;
  FeatureMatrix tag_features;
  std::vector<std::string> image_ids;
  std::vector<std::string> tag_names;
  std::optional<TagMatrix> ground_truth;

  /// Throws DimensionError when the shapes disagree.
  void validate() const;
};

struct ManifestPaths {
  std::filesystem::path tags;
  std::filesystem::path image_features;
  std::filesystem::path tag_features;
  std::filesystem::path image_ids;
  std::filesystem::path tag_names;
  std::optional<std::filesystem::path> ground_truth;
};

ManifestPaths read_manifest(const std::filesystem::path& manifest_path);
DatasetBundle load_dataset(const std::filesystem::path& manifest_path);

/// Writes the component files plus `manifest.txt` into `dir`; returns the manifest path.
std::filesystem::path save_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir);

std::vector<std::string> read_id_list(const std::filesystem::path& path);
void write_id_list(const std::filesystem::path& path, const std::vector<std::string>& ids);

}  // namespace tagsmc
