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

#include "tagsmc/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tagsmc/error.hpp"

namespace tagsmc::mm {

namespace {

struct Header {
  std::string format;    // array | coordinate
  std::string field;     // real | integer | pattern
  std::string symmetry;  // general | symmetric
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

Header read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty file");
  std::istringstream hs(line);
  std::string banner, object;
  Header h;
  hs >> banner >> object >> h.format >> h.field >> h.symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
    throw FormatError(path.string() + ": missing %%MatrixMarket matrix header");
  }
  h.format = lower(h.format);
  h.field = lower(h.field);
  h.symmetry = lower(h.symmetry);
  if (h.format != "array" && h.format != "coordinate") {
    throw FormatError(path.string() + ": unsupported format '" + h.format + "'");
  }
  if (h.field != "real" && h.field != "integer" && h.field != "double" &&
      !(h.field == "pattern" && h.format == "coordinate")) {
    throw FormatError(path.string() + ": unsupported field '" + h.field + "'");
  }
  if (h.symmetry != "general" && h.symmetry != "symmetric") {
    throw FormatError(path.string() + ": unsupported symmetry '" + h.symmetry + "'");
  }
  return h;
}

// Next line that is neither blank nor a comment.
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '%') continue;
    return true;
  }
  return false;
}

double parse_value(const std::string& token, const std::filesystem::path& path) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw FormatError(path.string() + ": bad numeric value '" + token + "'");
  }
  if (!std::isfinite(v)) throw ValueError(path.string() + ": non-finite value '" + token + "'");
  return v;
}

void write_header(std::ostream& out, const char* format, const std::string& comment) {
  out << "%%MatrixMarket matrix " << format << " real general\n";
  if (!comment.empty()) {
    std::istringstream cs(comment);
    std::string line;
    while (std::getline(cs, line)) out << "% " << line << '\n';
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Eigen::MatrixXd read_dense(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path);
  if (h.format != "array") throw FormatError(path.string() + ": expected array format");
  std::string line;
  if (!next_data_line(in, line)) throw FormatError(path.string() + ": missing size line");
  std::istringstream ss(line);
  Index rows = 0, cols = 0;
  if (!(ss >> rows >> cols) || rows < 0 || cols < 0) {
    throw FormatError(path.string() + ": bad size line '" + line + "'");
  }
  Eigen::MatrixXd m(rows, cols);
  const bool sym = h.symmetry == "symmetric";
  if (sym && rows != cols) throw FormatError(path.string() + ": symmetric matrix must be square");
  std::string token;
  // Column-major; symmetric files store only the lower triangle.
  for (Index j = 0; j < cols; ++j) {
    for (Index i = sym ? j : 0; i < rows; ++i) {
      if (!(in >> token)) throw FormatError(path.string() + ": too few values");
      m(i, j) = parse_value(token, path);
      if (sym) m(j, i) = m(i, j);
    }
  }
  if (in >> token) throw FormatError(path.string() + ": trailing values after matrix data");
  return m;
}

void write_dense(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                 const std::string& comment) {
  auto out = open_out(path);
  write_header(out, "array", comment);
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) out << fmt(m(i, j)) << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

Coordinate read_coordinate(const std::filesystem::path& path) {
  auto in = open_in(path);
  const Header h = read_header(in, path);
  if (h.format != "coordinate") throw FormatError(path.string() + ": expected coordinate format");
  std::string line;
  if (!next_data_line(in, line)) throw FormatError(path.string() + ": missing size line");
  std::istringstream ss(line);
  Coordinate c;
  long long nnz = 0;
  if (!(ss >> c.rows >> c.cols >> nnz) || c.rows < 0 || c.cols < 0 || nnz < 0) {
    throw FormatError(path.string() + ": bad size line '" + line + "'");
  }
  const bool pattern = h.field == "pattern";
  const bool sym = h.symmetry == "symmetric";
  c.entries.reserve(static_cast<std::size_t>(sym ? 2 * nnz : nnz));
  for (long long k = 0; k < nnz; ++k) {
    if (!next_data_line(in, line)) throw FormatError(path.string() + ": too few entries");
    std::istringstream es(line);
    long long i = 0, j = 0;
    std::string token;
    if (!(es >> i >> j)) throw FormatError(path.string() + ": bad entry '" + line + "'");
    double v = 1.0;
    if (!pattern) {
      if (!(es >> token)) throw FormatError(path.string() + ": missing value in '" + line + "'");
      v = parse_value(token, path);
    }
    if (i < 1 || i > c.rows || j < 1 || j > c.cols) {
      throw DimensionError(path.string() + ": entry index out of range in '" + line + "'");
    }
    c.entries.emplace_back(i - 1, j - 1, v);
    if (sym && i != j) c.entries.emplace_back(j - 1, i - 1, v);
  }
  if (next_data_line(in, line)) throw FormatError(path.string() + ": trailing entries");
  return c;
}

void write_coordinate(const std::filesystem::path& path, Index rows, Index cols,
                      const std::vector<Triplet>& entries, const std::string& comment) {
  auto out = open_out(path);
  write_header(out, "coordinate", comment);
  out << rows << ' ' << cols << ' ' << entries.size() << '\n';
  for (const auto& t : entries) {
    out << t.row() + 1 << ' ' << t.col() + 1 << ' ' << fmt(t.value()) << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

TagMatrix read_tags(const std::filesystem::path& path) {
  Coordinate c = read_coordinate(path);
  try {
    return TagMatrix(c.rows, c.cols, c.entries);
  } catch (const ValueError& e) {
    throw ValueError(path.string() + ": " + e.what());
  }
}

void write_tags(const std::filesystem::path& path, const TagMatrix& tags,
                const std::string& comment) {
  write_coordinate(path, tags.n_images(), tags.n_tags(), tags.triplets(), comment);
}

void write_sparse_of(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                     const std::string& comment) {
  std::vector<Triplet> entries;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) entries.emplace_back(i, j, m(i, j));
    }
  }
  write_coordinate(path, m.rows(), m.cols(), entries, comment);
}

}  // namespace tagsmc::mm
