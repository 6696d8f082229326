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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tagsmc/tagmat.hpp"

// Matrix Market reader/writer. Only the subset needed here is supported:
// `matrix array real general` for dense data and
// `matrix coordinate {real,integer,pattern} {general,symmetric}` for sparse data.
// Values are written with 17 significant digits, so a write/read cycle is exact.
namespace tagsmc::mm {

struct Coordinate {
  Index rows = 0;
  Index cols = 0;
  std::vector<Triplet> entries;
};

Eigen::MatrixXd read_dense(const std::filesystem::path& path);
void write_dense(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                 const std::string& comment = {});

Coordinate read_coordinate(const std::filesystem::path& path);
void write_coordinate(const std::filesystem::path& path, Index rows, Index cols,
                      const std::vector<Triplet>& entries, const std::string& comment = {});

/// Coordinate file to TagMatrix (values validated against [0,1]).
TagMatrix read_tags(const std::filesystem::path& path);
void write_tags(const std::filesystem::path& path, const TagMatrix& tags,
                const std::string& comment = {});

/// Dense matrix written in coordinate format, keeping entries with |v| > 0.
void write_sparse_of(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                     const std::string& comment = {});

}  // namespace tagsmc::mm
