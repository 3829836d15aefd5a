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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mmw/datamodel.hpp"

namespace mmw {

inline constexpr std::size_t kChannels = 5;  // x, y, z, snr, noise
inline constexpr std::size_t kFeatureDim = 16;
inline constexpr std::size_t kWindowRows = 40;
inline constexpr std::size_t kWindowLength = kWindowRows * kFeatureDim;  // 640

/// Per-frame statistical summary, one row of a window.
using FeatureRow = std::vector<double>;

enum class Statistic { Mean, Std, Min, Max, Variance };

/// Which per-channel statistics make up a FeatureRow. Layout is
/// statistic-major: all five channels of the first statistic, then the
/// next statistic, and the point count last when enabled.
struct FeatureSchema {
  std::vector<Statistic> statistics{Statistic::Mean, Statistic::Std, Statistic::Min};
  bool include_count = true;

  std::size_t dimension() const { return statistics.size() * kChannels + (include_count ? 1 : 0); }
  std::vector<std::string> column_names() const;
};

/// Population statistics over the frame's points. An empty frame yields the
/// zero row so the row cadence is preserved.
FeatureRow frame_features(const RadarFrame& frame, const FeatureSchema& schema = {});
std::vector<FeatureRow> recording_features(const Recording& frames, const FeatureSchema& schema = {});

struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> std;
  double epsilon = 1e-8;

  std::size_t dimension() const { return mean.size(); }
  bool fitted() const { return !mean.empty(); }
};

/// Per-column mean and population std. Throws EmptyInputError on no rows.
ScalerParams fit_scaler(std::span<const FeatureRow> rows);
/// out[c] = (row[c] - mean[c]) / max(std[c], epsilon)
FeatureRow apply_scaler(const ScalerParams& params, const FeatureRow& row);
void apply_scaler_inplace(const ScalerParams& params, std::span<double> row);

/// `rows` consecutive feature rows flattened row-major: flat[cols*r + c].
struct WindowFrame {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> flat;

  std::span<const double> row(std::size_t r) const { return {flat.data() + r * cols, cols}; }
  std::vector<FeatureRow> unflatten() const;
  static WindowFrame flatten(std::span<const FeatureRow> rows);
};

/// Start offsets of the windows make_windows would produce for `n_rows` rows.
std::vector<std::size_t> window_starts(std::size_t n_rows, std::size_t window = kWindowRows,
                                       std::size_t stride = 1);

/// Sliding windows over one recording's rows. Count is
/// floor((N - window) / stride) + 1; throws TooFewRowsError when N < window.
std::vector<WindowFrame> make_windows(std::span<const FeatureRow> rows, std::size_t window = kWindowRows,
                                      std::size_t stride = 1);

/// Model input with its class and provenance.
struct LabeledExample {
  std::vector<double> input;  // flattened window, or a single feature row
  std::size_t label = 0;
  DomainTag domain;
  std::size_t recording = 0;  // index into the originating collection
};

/// Feature dump: header `row_index,f0..f15`, one line per row.
std::string feature_csv(std::span<const FeatureRow> rows);

}  // namespace mmw
