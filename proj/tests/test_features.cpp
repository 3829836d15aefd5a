// Copyright 2026, The mmwave-recog Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mmw/error.hpp"
#include "mmw/features.hpp"

using namespace mmw;

namespace {

// Independent per-column moments.
double column_mean(const std::vector<FeatureRow>& rows, std::size_t c) {
  double s = 0.0;
  for (const auto& r : rows) s += r[c];
  return s / static_cast<double>(rows.size());
}

double column_std(const std::vector<FeatureRow>& rows, std::size_t c) {
  const double m = column_mean(rows, c);
  double s = 0.0;
  for (const auto& r : rows) s += (r[c] - m) * (r[c] - m);
  return std::sqrt(s / static_cast<double>(rows.size()));
}

RadarFrame random_frame(std::mt19937_64& rng, std::size_t points) {
  std::normal_distribution<double> n(0.0, 2.0);
  RadarFrame f;
  for (std::size_t p = 0; p < points; ++p) f.points.push_back({n(rng), n(rng), n(rng), 10 + n(rng), 4 + n(rng)});
  return f;
}

}  // namespace

TEST_CASE("feature layout") {
  const FeatureSchema schema;
  CHECK(schema.dimension() == kFeatureDim);
  const auto names = schema.column_names();
  REQUIRE(names.size() == 16);
  CHECK(names[0] == "mean_x");
  CHECK(names[5] == "std_x");
  CHECK(names[14] == "min_noise");
  CHECK(names[15] == "count");
}

TEST_CASE("single-point frame statistics") {
  RadarFrame f;
  f.points.push_back({1, 2, 3, 10, 5});
  const auto row = frame_features(f);
  const FeatureRow expected{1, 2, 3, 10, 5, 0, 0, 0, 0, 0, 1, 2, 3, 10, 5, 1};
  CHECK(row == expected);
}

TEST_CASE("empty frame gives zeros") { CHECK(frame_features(RadarFrame{}) == FeatureRow(16, 0.0)); }

TEST_CASE("two points use the population std") {
  RadarFrame f;
  f.points.push_back({1, 0, 0, 7, 2});
  f.points.push_back({3, 0, 0, 7, 2});
  const auto row = frame_features(f);
  CHECK(row[0] == 2.0);
  CHECK(row[5] == 1.0);
  CHECK(row[10] == 1.0);
  CHECK(row[6] == 0.0);
  CHECK(row[15] == 2.0);
}

TEST_CASE("alternative schema") {
  FeatureSchema s;
  s.statistics = {Statistic::Max, Statistic::Variance};
  s.include_count = false;
  RadarFrame f;
  f.points.push_back({1, 0, 0, 7, 2});
  f.points.push_back({3, 0, 0, 9, 2});
  const auto row = frame_features(f, s);
  REQUIRE(row.size() == 10);
  CHECK(row[0] == 3.0);
  CHECK(row[3] == 9.0);
  CHECK(row[5] == 1.0);
  CHECK(row[8] == 1.0);
}

TEST_CASE("property: frame_features is invariant under point permutation") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_frame(rng, 1 + rng() % 12);
    const auto a = frame_features(f);
    std::shuffle(f.points.begin(), f.points.end(), rng);
    const auto b = frame_features(f);
    for (std::size_t c = 0; c < a.size(); ++c) CHECK(b[c] == doctest::Approx(a[c]).epsilon(1e-12));
  }
}

TEST_CASE("scaler examples") {
  const std::vector<FeatureRow> rows{{1.0, 5.0}, {3.0, 5.0}};
  const auto p = fit_scaler(rows);
  CHECK(p.mean == std::vector<double>{2.0, 5.0});
  CHECK(p.std == std::vector<double>{1.0, 0.0});
  CHECK(apply_scaler(p, {3.0, 5.0}) == FeatureRow{1.0, 0.0});
  CHECK(apply_scaler(p, {2.0, 5.0}) == FeatureRow{0.0, 0.0});

  const std::vector<FeatureRow> constant{{5.0}, {5.0}, {5.0}};
  const auto q = fit_scaler(constant);
  CHECK(q.mean[0] == 5.0);
  CHECK(q.std[0] == 0.0);
  CHECK(std::isfinite(apply_scaler(q, {6.0})[0]));
  CHECK_THROWS_AS(fit_scaler(std::vector<FeatureRow>{}), EmptyInputError);
  CHECK_THROWS_AS(apply_scaler(p, {1.0}), ShapeError);
}

TEST_CASE("property: fitted scaler standardizes its own rows") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n_rows = 2 + rng() % 60;
    const std::size_t dim = 1 + rng() % 16;
    std::vector<double> loc(dim), scale(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      loc[c] = u(rng);
      scale[c] = (c % 5 == 4) ? 0.0 : std::exp(u(rng) / 10);  // some constant columns
    }
    std::vector<FeatureRow> rows(n_rows, FeatureRow(dim));
    for (auto& r : rows)
      for (std::size_t c = 0; c < dim; ++c) r[c] = loc[c] + scale[c] * n(rng);
    const auto p = fit_scaler(rows);
    std::vector<FeatureRow> scaled;
    for (const auto& r : rows) scaled.push_back(apply_scaler(p, r));
    for (std::size_t c = 0; c < dim; ++c) {
      CHECK(std::abs(column_mean(scaled, c)) < 1e-9);
      if (column_std(rows, c) > p.epsilon) CHECK(std::abs(column_std(scaled, c) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("window counts") {
  auto rows_of = [](std::size_t n) {
    std::vector<FeatureRow> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(FeatureRow(16, static_cast<double>(i)));
    return rows;
  };
  CHECK(make_windows(rows_of(49)).size() == 10);
  CHECK(make_windows(rows_of(40)).size() == 1);
  CHECK_THROWS_AS(make_windows(rows_of(39)), TooFewRowsError);
  CHECK(make_windows(rows_of(50), 40, 5).size() == 3);
  CHECK(window_starts(50, 40, 5) == std::vector<std::size_t>{0, 5, 10});
  const auto w = make_windows(rows_of(40));
  CHECK(w[0].flat.size() == kWindowLength);
}

TEST_CASE("property: window count, overlap and flattening") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 40 + rng() % 80;
    std::vector<FeatureRow> rows;
    std::normal_distribution<double> g;
    for (std::size_t i = 0; i < n; ++i) {
      FeatureRow r(16);
      for (auto& v : r) v = g(rng);
      rows.push_back(r);
    }
    const auto w = make_windows(rows);
    REQUIRE(w.size() == n - 39);
    const std::size_t k = rng() % (w.size());
    CHECK(w[k].unflatten() == std::vector<FeatureRow>(rows.begin() + static_cast<long>(k),
                                                      rows.begin() + static_cast<long>(k + 40)));
    CHECK(WindowFrame::flatten(w[k].unflatten()).flat == w[k].flat);
    if (k + 1 < w.size()) {
      // adjacent windows share rows k+1 .. k+39
      CHECK(std::equal(w[k].flat.begin() + 16, w[k].flat.end(), w[k + 1].flat.begin()));
      CHECK_FALSE(std::equal(w[k].flat.begin(), w[k].flat.begin() + 16, w[k + 1].flat.begin()));
    }
  }
}

TEST_CASE("feature csv") {
  const std::vector<FeatureRow> rows{FeatureRow(16, 0.5), FeatureRow(16, -1.0)};
  const auto text = feature_csv(rows);
  CHECK(text.rfind("row_index,f0,f1,", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("\n1,-1,") != std::string::npos);
}
