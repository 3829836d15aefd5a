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

#include "mmw/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "mmw/error.hpp"
#include "mmw/textfmt.hpp"

namespace mmw {

namespace {

std::array<double, kChannels> channels_of(const PointDetection& p) { return {p.x, p.y, p.z, p.snr, p.noise}; }

const char* stat_name(Statistic s) {
  switch (s) {
    case Statistic::Mean: return "mean";
    case Statistic::Std: return "std";
    case Statistic::Min: return "min";
    case Statistic::Max: return "max";
    case Statistic::Variance: return "var";
  }
  return "?";
}

}  // namespace

std::vector<std::string> FeatureSchema::column_names() const {
  static constexpr const char* kChannelNames[kChannels] = {"x", "y", "z", "snr", "noise"};
  std::vector<std::string> out;
  for (auto s : statistics)
    for (const char* ch : kChannelNames) out.push_back(std::string(stat_name(s)) + "_" + ch);
  if (include_count) out.emplace_back("count");
  return out;
}

FeatureRow frame_features(const RadarFrame& frame, const FeatureSchema& schema) {
  FeatureRow row(schema.dimension(), 0.0);
  const auto& pts = frame.points;
  if (pts.empty()) return row;

  const double n = static_cast<double>(pts.size());
  std::array<double, kChannels> mean{}, min{}, max{}, var{};
  min.fill(std::numeric_limits<double>::infinity());
  max.fill(-std::numeric_limits<double>::infinity());
  for (const auto& p : pts) {
    const auto v = channels_of(p);
    for (std::size_t c = 0; c < kChannels; ++c) {
      mean[c] += v[c];
      min[c] = std::min(min[c], v[c]);
      max[c] = std::max(max[c], v[c]);
    }
  }
  for (auto& m : mean) m /= n;
  // two-pass variance; the point lists are short
  for (const auto& p : pts) {
    const auto v = channels_of(p);
    for (std::size_t c = 0; c < kChannels; ++c) var[c] += (v[c] - mean[c]) * (v[c] - mean[c]);
  }
  for (auto& s : var) s /= n;

  std::size_t k = 0;
  for (auto stat : schema.statistics) {
    for (std::size_t c = 0; c < kChannels; ++c) {
      switch (stat) {
        case Statistic::Mean: row[k++] = mean[c]; break;
        case Statistic::Std: row[k++] = std::sqrt(var[c]); break;
        case Statistic::Min: row[k++] = min[c]; break;
        case Statistic::Max: row[k++] = max[c]; break;
        case Statistic::Variance: row[k++] = var[c]; break;
      }
    }
  }
  if (schema.include_count) row[k] = n;
  return row;
}

std::vector<FeatureRow> recording_features(const Recording& frames, const FeatureSchema& schema) {
  std::vector<FeatureRow> rows;
  rows.reserve(frames.size());
  for (const auto& f : frames) rows.push_back(frame_features(f, schema));
  return rows;
}

ScalerParams fit_scaler(std::span<const FeatureRow> rows) {
  if (rows.empty()) throw EmptyInputError("fit_scaler: no rows");
  const std::size_t dim = rows.front().size();
  ScalerParams p;
  p.mean.assign(dim, 0.0);
  p.std.assign(dim, 0.0);
  for (const auto& r : rows) {
    if (r.size() != dim) throw ShapeError("fit_scaler row", dim, r.size());
    for (std::size_t c = 0; c < dim; ++c) p.mean[c] += r[c];
  }
  const double n = static_cast<double>(rows.size());
  for (auto& m : p.mean) m /= n;
  // residual correction; exact for constant columns
  std::vector<double> residual(dim, 0.0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < dim; ++c) residual[c] += r[c] - p.mean[c];
  for (std::size_t c = 0; c < dim; ++c) p.mean[c] += residual[c] / n;
  for (const auto& r : rows)
    for (std::size_t c = 0; c < dim; ++c) p.std[c] += (r[c] - p.mean[c]) * (r[c] - p.mean[c]);
  for (auto& s : p.std) s = std::sqrt(s / n);
  return p;
}

void apply_scaler_inplace(const ScalerParams& params, std::span<double> row) {
  if (row.size() != params.dimension()) throw ShapeError("apply_scaler", params.dimension(), row.size());
  for (std::size_t c = 0; c < row.size(); ++c)
    row[c] = (row[c] - params.mean[c]) / std::max(params.std[c], params.epsilon);
}

FeatureRow apply_scaler(const ScalerParams& params, const FeatureRow& row) {
  FeatureRow out = row;
  apply_scaler_inplace(params, out);
  return out;
}

std::vector<FeatureRow> WindowFrame::unflatten() const {
  std::vector<FeatureRow> out;
  out.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto s = row(r);
    out.emplace_back(s.begin(), s.end());
  }
  return out;
}

WindowFrame WindowFrame::flatten(std::span<const FeatureRow> rows) {
  WindowFrame w;
  w.rows = rows.size();
  w.cols = rows.empty() ? 0 : rows.front().size();
  w.flat.reserve(w.rows * w.cols);
  for (const auto& r : rows) {
    if (r.size() != w.cols) throw ShapeError("WindowFrame::flatten row", w.cols, r.size());
    w.flat.insert(w.flat.end(), r.begin(), r.end());
  }
  return w;
}

std::vector<std::size_t> window_starts(std::size_t n_rows, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0) throw ConfigError("window and stride must be positive");
  if (n_rows < window) throw TooFewRowsError(n_rows, window);
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s + window <= n_rows; s += stride) starts.push_back(s);
  return starts;
}

std::vector<WindowFrame> make_windows(std::span<const FeatureRow> rows, std::size_t window, std::size_t stride) {
  std::vector<WindowFrame> out;
  for (auto s : window_starts(rows.size(), window, stride)) out.push_back(WindowFrame::flatten(rows.subspan(s, window)));
  return out;
}

std::string feature_csv(std::span<const FeatureRow> rows) {
  const std::size_t dim = rows.empty() ? kFeatureDim : rows.front().size();
  std::string out = "row_index";
  for (std::size_t c = 0; c < dim; ++c) out += ",f" + std::to_string(c);
  out += '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += std::to_string(i);
    for (double v : rows[i]) out += "," + format_roundtrip(v);
    out += '\n';
  }
  return out;
}

}  // namespace mmw
