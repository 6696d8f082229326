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

#include "tagsmc/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "tagsmc/error.hpp"
#include "tagsmc/mmio.hpp"

namespace tagsmc {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw FormatError("missing file: " + p.string());
}

}  // namespace

void DatasetBundle::validate() const {
  std::ostringstream os;
  if (tags.n_images() != image_features.n_rows()) {
    os << "tag matrix has " << tags.n_images() << " images but image features have "
       << image_features.n_rows() << " rows";
  } else if (tags.n_images() != static_cast<Index>(image_ids.size())) {
    os << "tag matrix has " << tags.n_images() << " images but " << image_ids.size()
       << " image ids";
  } else if (tags.n_tags() != tag_features.n_rows()) {
    os << "tag matrix has " << tags.n_tags() << " tags but tag features have "
       << tag_features.n_rows() << " rows";
  } else if (tags.n_tags() != static_cast<Index>(tag_names.size())) {
    os << "tag matrix has " << tags.n_tags() << " tags but " << tag_names.size()
       << " tag names";
  } else if (ground_truth && (ground_truth->n_images() != tags.n_images() ||
                              ground_truth->n_tags() != tags.n_tags())) {
    os << "ground truth is " << ground_truth->n_images() << "x" << ground_truth->n_tags()
       << " but tag matrix is " << tags.n_images() << "x" << tags.n_tags();
  }
  if (!os.str().empty()) throw DimensionError(os.str());
}

ManifestPaths read_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw FormatError("missing manifest: " + manifest_path.string());
  const fs::path base = manifest_path.parent_path();
  std::map<std::string, fs::path> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(manifest_path.string() + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const fs::path value = trim(line.substr(eq + 1));
    static const char* kKeys[] = {"tags",      "image_features", "tag_features",
                                  "image_ids", "tag_names",      "ground_truth"};
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw FormatError(manifest_path.string() + ":" + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
    kv[key] = value.is_absolute() ? value : base / value;
  }
  auto get = [&](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw FormatError(manifest_path.string() + ": missing key '" + key + "'");
    }
    return it->second;
  };
  ManifestPaths p{get("tags"), get("image_features"), get("tag_features"), get("image_ids"),
                  get("tag_names"), std::nullopt};
  if (auto it = kv.find("ground_truth"); it != kv.end()) p.ground_truth = it->second;
  return p;
}

std::vector<std::string> read_id_list(const fs::path& path) {
  require_file(path);
  std::ifstream in(path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(line);
  }
  while (!ids.empty() && ids.back().empty()) ids.pop_back();
  return ids;
}

void write_id_list(const fs::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& id : ids) out << id << '\n';
}

DatasetBundle load_dataset(const fs::path& manifest_path) {
  const ManifestPaths p = read_manifest(manifest_path);
  for (const auto& f : {p.tags, p.image_features, p.tag_features, p.image_ids, p.tag_names}) {
    require_file(f);
  }
  if (p.ground_truth) require_file(*p.ground_truth);

  DatasetBundle b;
  b.tags = mm::read_tags(p.tags);
  b.image_features = FeatureMatrix(mm::read_dense(p.image_features));
  b.tag_features = FeatureMatrix(mm::read_dense(p.tag_features));
  b.image_ids = read_id_list(p.image_ids);
  b.tag_names = read_id_list(p.tag_names);
  if (p.ground_truth) b.ground_truth = mm::read_tags(*p.ground_truth);
  b.validate();
  return b;
}

fs::path save_dataset(const DatasetBundle& bundle, const fs::path& dir) {
  bundle.validate();
  fs::create_directories(dir);
  mm::write_tags(dir / "tags.mtx", bundle.tags);
  mm::write_dense(dir / "image_features.mtx", bundle.image_features.data());
  mm::write_dense(dir / "tag_features.mtx", bundle.tag_features.data());
  write_id_list(dir / "image_ids.txt", bundle.image_ids);
  write_id_list(dir / "tag_names.txt", bundle.tag_names);
  if (bundle.ground_truth) mm::write_tags(dir / "ground_truth.mtx", *bundle.ground_truth);

  const fs::path manifest = dir / "manifest.txt";
  std::ofstream out(manifest);
  if (!out) throw FormatError("cannot write " + manifest.string());
  out << "# tagsmc dataset manifest\n"
      << "tags = tags.mtx\n"
      << "image_features = image_features.mtx\n"
      << "tag_features = tag_features.mtx\n"
      << "image_ids = image_ids.txt\n"
      << "tag_names = tag_names.txt\n";
  if (bundle.ground_truth) out << "ground_truth = ground_truth.mtx\n";
  return manifest;
}

}  // namespace tagsmc
