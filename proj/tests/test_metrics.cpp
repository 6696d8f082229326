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

#include <filesystem>
#include <random>

#include "doctest.h"

#include "tagsmc/error.hpp"
#include "tagsmc/metrics.hpp"
#include "tagsmc/oracle.hpp"

using namespace tagsmc;

namespace {

TagMatrix random_binary(Index n, Index m, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u;
  std::vector<Triplet> e;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (u(rng) < density) e.emplace_back(i, j, 1.0);
    }
  }
  return TagMatrix(n, m, e);
}

}  // namespace

TEST_CASE("perfect predictions score 1") {
  std::vector<Triplet> e;
  for (Index i = 0; i < 5; ++i) {
    for (Index j = i; j < i + 3; ++j) e.emplace_back(i, j, 1.0);
  }
  const TagMatrix t(5, 8, e);
  const auto r = ap_ar_at_n(t, t, 3);
  CHECK(r.ap == 1.0);
  CHECK(r.ar == 1.0);
}

TEST_CASE("set arithmetic example") {
  // truth {a,b,c}; top-2 is {a,d}.
  const TagMatrix truth(1, 4, {{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}});
  Eigen::MatrixXd s(1, 4);
  s << 0.9, 0.1, 0.2, 0.8;
  const auto r = ap_ar_at_n(s, truth, 2);
  CHECK(r.ap == 0.5);
  CHECK(r.ar == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("empty truth rows are excluded or counted as zero") {
  const TagMatrix truth(3, 3, {{0, 0, 1.0}, {2, 1, 1.0}});
  const Eigen::MatrixXd s = truth.dense();
  const auto ex = ap_ar_at_n(s, truth, 1);
  CHECK(ex.excluded_images == 1);
  CHECK(ex.evaluated_images == std::vector<Index>{0, 2});
  CHECK(ex.ap == 1.0);
  const auto zero = ap_ar_at_n(s, truth, 1, EmptyTruthPolicy::kCountAsZero);
  CHECK(zero.ap == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(ap_ar_at_n(s, TagMatrix(3, 3), 1), ValueError);
  CHECK_THROWS_AS(ap_ar_at_n(Eigen::MatrixXd::Zero(2, 3), truth, 1), DimensionError);
}

TEST_CASE("scores match the brute-force scorer") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const TagMatrix truth = random_binary(50, 20, 0.15, rng);
    Eigen::MatrixXd s(50, 20);
    for (Index k = 0; k < s.size(); ++k) s.data()[k] = std::round(g(rng) * 4.0) / 4.0;  // forces ties
    for (std::size_t n : {1, 3, 5, 20}) {
      const auto r = ap_ar_at_n(s, truth, n);
      const auto b = oracle::ap_ar(s, truth.dense(), n);
      CHECK(r.ap == b.ap);
      CHECK(r.ar == b.ar);
      CHECK(r.per_image_precision == b.precision);
    }
  }
}

TEST_CASE("ranking metrics are invariant to monotone transforms") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const TagMatrix truth = random_binary(30, 12, 0.2, rng);
  Eigen::MatrixXd s(30, 12);
  for (Index k = 0; k < s.size(); ++k) s.data()[k] = g(rng);
  const Eigen::MatrixXd t = (s.array() * 0.5).exp() * 3.0 + 1.0;
  const auto a = ap_ar_at_n(s, truth, 4);
  const auto b = ap_ar_at_n(t, truth, 4);
  CHECK(a.ap == b.ap);
  CHECK(a.ar == b.ar);
}

TEST_CASE("recall is 1 once n covers every tag") {
  std::mt19937_64 rng(6);
  const TagMatrix truth = random_binary(20, 8, 0.3, rng);
  Eigen::MatrixXd s = truth.dense();
  s.array() += 0.01;
  CHECK(ap_ar_at_n(s, truth, 8).ar == 1.0);
}

TEST_CASE("noise injection counts and determinism") {
  std::mt19937_64 rng(7);
  const TagMatrix truth = random_binary(40, 25, 0.2, rng);
  const Index nnz = truth.nnz();

  CHECK(inject_noise(truth, {0.0, 0.0, 1}) == truth);
  CHECK(inject_noise(truth, {1.0, 0.0, 1}).nnz() == 0);

  const NoiseSpec spec{0.3, 0.3, 42};
  const TagMatrix noisy = inject_noise(truth, spec);
  const auto removed = static_cast<Index>(std::floor(0.3 * static_cast<double>(nnz)));
  const auto added = static_cast<Index>(std::floor(0.3 * static_cast<double>(nnz)));
  Index lost = 0, gained = 0;
  for (Index i = 0; i < truth.n_images(); ++i) {
    for (Index j = 0; j < truth.n_tags(); ++j) {
      lost += truth.annotated(i, j) && !noisy.annotated(i, j);
      gained += !truth.annotated(i, j) && noisy.annotated(i, j);
    }
  }
  CHECK(lost == removed);
  CHECK(gained == added);
  CHECK(noisy.nnz() == nnz - removed + added);
  CHECK(inject_noise(truth, spec) == noisy);
  CHECK_FALSE(inject_noise(truth, {0.3, 0.3, 43}) == noisy);

  CHECK_THROWS_AS(inject_noise(truth, {1.5, 0.0, 1}), ConfigError);
  const TagMatrix full(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}});
  CHECK_THROWS_AS(inject_noise(full, {0.0, 0.9, 1}), ValueError);
  CHECK_THROWS_AS(inject_noise(TagMatrix(1, 2, {{0, 0, 0.5}}), {0.1, 0.0, 1}), ValueError);
}

TEST_CASE("eval report round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "tagsmc_test_eval";
  std::filesystem::create_directories(dir);
  const TagMatrix truth(2, 3, {{0, 0, 1.0}, {1, 2, 1.0}});
  std::vector<EvalReport> reps{ap_ar_at_n(truth, truth, 1), ap_ar_at_n(truth, truth, 2)};
  write_eval_report(dir / "r.txt", reps);
  write_eval_csv(dir / "r.csv", reps);
  const auto back = read_eval_report(dir / "r.txt");
  REQUIRE(back.size() == 2);
  CHECK(back[0].n == 1);
  CHECK(back[0].ap == reps[0].ap);
  CHECK(back[1].ar == reps[1].ar);
  CHECK(std::filesystem::file_size(dir / "r.csv") > 0);
}
