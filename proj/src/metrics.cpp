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

#include "tagsmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "tagsmc/error.hpp"

namespace tagsmc {

namespace {

EvalReport evaluate_rows(const Eigen::MatrixXd& scores, const TagMatrix& truth, std::size_t n,
                         const std::vector<Index>& images, EmptyTruthPolicy policy) {
  if (scores.rows() != truth.n_images() || scores.cols() != truth.n_tags()) {
    throw DimensionError("prediction and ground truth shapes differ");
  }
  if (n == 0) throw ValueError("evaluation cutoff must be at least 1");
  EvalReport r;
  r.n = n;
  const auto& m = truth.matrix();
  for (Index i : images) {
    if (i < 0 || i >= truth.n_images()) throw DimensionError("evaluation image out of range");
    const Index n_true = m.row(i).nonZeros();
    if (n_true == 0) {
      ++r.excluded_images;
      if (policy == EmptyTruthPolicy::kExclude) continue;
      r.evaluated_images.push_back(i);
      r.per_image_precision.push_back(0.0);
      r.per_image_recall.push_back(0.0);
      continue;
    }
    const Eigen::VectorXd row = scores.row(i).transpose();
    std::size_t hits = 0;
    for (Index t : top_n_indices(row, n)) {
      if (truth.annotated(i, t)) ++hits;
    }
    r.evaluated_images.push_back(i);
    r.per_image_precision.push_back(static_cast<double>(hits) / static_cast<double>(n));
    r.per_image_recall.push_back(static_cast<double>(hits) / static_cast<double>(n_true));
  }
  if (r.evaluated_images.empty()) throw ValueError("every ground-truth row is empty");
  const double count = static_cast<double>(r.evaluated_images.size());
  r.ap = std::accumulate(r.per_image_precision.begin(), r.per_image_precision.end(), 0.0) / count;
  r.ar = std::accumulate(r.per_image_recall.begin(), r.per_image_recall.end(), 0.0) / count;
  return r;
}

}  // namespace

EvalReport ap_ar_at_n(const Eigen::MatrixXd& scores, const TagMatrix& truth, std::size_t n,
                      EmptyTruthPolicy policy) {
  std::vector<Index> all(static_cast<std::size_t>(truth.n_images()));
  std::iota(all.begin(), all.end(), Index{0});
  return evaluate_rows(scores, truth, n, all, policy);
}

EvalReport ap_ar_at_n(const TagMatrix& predicted, const TagMatrix& truth, std::size_t n,
                      EmptyTruthPolicy policy) {
  return ap_ar_at_n(predicted.dense(), truth, n, policy);
}

EvalReport ap_ar_at_n(const Eigen::MatrixXd& scores, const TagMatrix& truth, std::size_t n,
                      const std::vector<Index>& images, EmptyTruthPolicy policy) {
  return evaluate_rows(scores, truth, n, images, policy);
}

void NoiseSpec::validate() const {
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0)) {
    throw ConfigError("noise.missing_rate", "must be in [0,1]");
  }
  if (!(inaccurate_rate >= 0.0 && inaccurate_rate <= 1.0)) {
    throw ConfigError("noise.inaccurate_rate", "must be in [0,1]");
  }
}

TagMatrix inject_noise(const TagMatrix& truth, const NoiseSpec& spec) {
  spec.validate();
  std::vector<Triplet> entries = truth.triplets();
  for (const auto& t : entries) {
    if (t.value() != 1.0) throw ValueError("noise injection expects a binary tag matrix");
  }
  const auto n_entries = entries.size();
  const auto n_missing = static_cast<std::size_t>(std::floor(spec.missing_rate * n_entries));
  const auto n_spurious = static_cast<std::size_t>(std::floor(spec.inaccurate_rate * n_entries));
  const auto n_cells = static_cast<std::size_t>(truth.n_images() * truth.n_tags());
  const std::size_t n_zero = n_cells - n_entries;
  if (n_spurious > n_zero) {
    throw ValueError("inaccurate_rate asks for " + std::to_string(n_spurious) +
                     " spurious tags but only " + std::to_string(n_zero) + " empty positions exist");
  }

  std::mt19937_64 rng(spec.seed);
  std::shuffle(entries.begin(), entries.end(), rng);
  entries.erase(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(n_missing));

  // Enumerate zero cells by linear index and take a uniform sample without replacement.
  std::vector<std::size_t> zeros;
  zeros.reserve(n_zero);
  const auto& m = truth.matrix();
  for (Index i = 0; i < truth.n_images(); ++i) {
    SparseRowMatrix::InnerIterator it(m, i);
    for (Index j = 0; j < truth.n_tags(); ++j) {
      if (it && it.col() == j) {
        ++it;
        continue;
      }
      zeros.push_back(static_cast<std::size_t>(i * truth.n_tags() + j));
    }
  }
  std::vector<std::size_t> picked;
  picked.reserve(n_spurious);
  std::sample(zeros.begin(), zeros.end(), std::back_inserter(picked), n_spurious, rng);
  for (std::size_t cell : picked) {
    entries.emplace_back(static_cast<Index>(cell) / truth.n_tags(),
                         static_cast<Index>(cell) % truth.n_tags(), 1.0);
  }
  return TagMatrix(truth.n_images(), truth.n_tags(), entries);
}

void write_eval_report(const std::filesystem::path& path, const std::vector<EvalReport>& reports) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out.precision(17);
  if (!reports.empty()) {
    out << "images_evaluated: " << reports.front().evaluated_images.size() << '\n';
    out << "images_excluded: " << reports.front().excluded_images << '\n';
  }
  for (const auto& r : reports) {
    out << "ap@" << r.n << ": " << r.ap << '\n';
    out << "ar@" << r.n << ": " << r.ar << '\n';
  }
}

void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out.precision(17);
  out << "image,n,precision,recall\n";
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.evaluated_images.size(); ++k) {
      out << r.evaluated_images[k] << ',' << r.n << ',' << r.per_image_precision[k] << ','
          << r.per_image_recall[k] << '\n';
    }
  }
}

std::vector<EvalReport> read_eval_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::map<std::size_t, EvalReport> by_n;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    const auto at = key.find('@');
    if (at == std::string::npos) continue;
    const std::string metric = key.substr(0, at);
    const std::size_t n = std::stoul(key.substr(at + 1));
    const double value = std::stod(line.substr(colon + 1));
    auto& r = by_n[n];
    r.n = n;
    if (metric == "ap") {
      r.ap = value;
    } else if (metric == "ar") {
      r.ar = value;
    } else {
      throw FormatError(path.string() + ": unknown metric '" + metric + "'");
    }
  }
  std::vector<EvalReport> out;
  for (auto& [n, r] : by_n) out.push_back(std::move(r));
  return out;
}

}  // namespace tagsmc
