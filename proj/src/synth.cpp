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

#include "mmw/synth.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "mmw/error.hpp"
#include "mmw/random.hpp"

namespace mmw {

bool SynthDomainSpec::is_identity() const {
  for (std::size_t c = 0; c < kChannels; ++c)
    if (affine_scale[c] != 1.0 || affine_offset[c] != 0.0) return false;
  return noise_inflation == 1.0 && clutter_rate == 0.0;
}

LabelSet SynthSuite::labels() const {
  LabelSet ls;
  for (const auto& c : classes) ls.add(c.name);
  return ls;
}

const SynthDomainSpec& SynthSuite::domain(const DomainTag& tag) const {
  for (const auto& d : domains)
    if (d.domain == tag) return d;
  throw MissingDomainError(tag.str());
}

namespace {

PointDetection draw_point(Rng& rng, const ChannelVec& mean, const ChannelVec& std) {
  ChannelVec v{};
  for (std::size_t c = 0; c < kChannels; ++c) v[c] = std::normal_distribution<double>(mean[c], std[c])(rng);
  return {v[0], v[1], v[2], v[3], v[4]};
}

std::size_t draw_count(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  return static_cast<std::size_t>(std::poisson_distribution<long>(mean)(rng));
}

}  // namespace

Recording generate_recording(const SynthClassSpec& cls, const SynthDomainSpec& dom, std::size_t n_frames,
                             std::uint64_t seed, const ClutterSpec& clutter) {
  Rng rng(seed);
  ChannelVec mean{}, std{};
  for (std::size_t c = 0; c < kChannels; ++c) {
    mean[c] = dom.affine_scale[c] * cls.channel_means[c] + dom.affine_offset[c];
    std[c] = dom.noise_inflation * cls.channel_stds[c];
  }
  Recording rec;
  rec.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    RadarFrame f;
    f.frame_index = static_cast<std::int64_t>(i);
    f.timestamp = static_cast<double>(i) / kFrameRateHz;
    const std::size_t n = draw_count(rng, cls.point_count_mean);
    const std::size_t k = draw_count(rng, dom.clutter_rate);
    f.points.reserve(n + k);
    for (std::size_t p = 0; p < n; ++p) f.points.push_back(draw_point(rng, mean, std));
    for (std::size_t p = 0; p < k; ++p) f.points.push_back(draw_point(rng, clutter.means, clutter.stds));
    rec.push_back(std::move(f));
  }
  return rec;
}

SynthSuite default_suite() {
  SynthSuite s;
  //                name             count  x     y      z      snr   noise     std x  y     z     snr  noise
  s.classes = {
      {"dime",          6.0, {0.18, 0.00, -0.02, 9.0, 4.0}, {0.04, 0.05, 0.03, 2.0, 1.0}},
      {"quarter",       7.0, {0.18, 0.01, -0.02, 11.0, 4.2}, {0.04, 0.05, 0.03, 2.2, 1.0}},
      {"lead pencil",   5.0, {0.20, 0.03, -0.01, 7.0, 3.6}, {0.05, 0.08, 0.03, 1.8, 1.0}},
      {"plastic sheet", 9.0, {0.17, -0.02, -0.03, 6.0, 3.2}, {0.06, 0.07, 0.04, 1.5, 0.9}},
      {"wood",         11.0, {0.19, 0.00, 0.00, 13.0, 4.8}, {0.05, 0.06, 0.04, 2.5, 1.1}},
  };
  auto dom = [](Ambience a, double placement, ChannelVec scale, ChannelVec offset, double inflation,
                double clutter) {
    SynthDomainSpec d;
    d.domain = {a, placement, RadarState::Static};
    d.affine_scale = scale;
    d.affine_offset = offset;
    d.noise_inflation = inflation;
    d.clutter_rate = clutter;
    return d;
  };
  // Shift grows sunny -> lablight -> night and 7 in -> 53 in.
  s.domains = {
      dom(Ambience::Sunny, 7, {1, 1, 1, 1, 1}, {0, 0, 0, 0, 0}, 1.0, 0.0),
      dom(Ambience::Lablight, 7, {1, 1, 1, 0.95, 1}, {0, 0, 0, -0.5, 0.4}, 1.05, 0.2),
      dom(Ambience::Night, 7, {1, 1, 1, 0.9, 1}, {0.02, 0, 0, -1.0, 0.8}, 1.1, 0.4),
      dom(Ambience::Sunny, 53, {1, 1, 1, 0.9, 1}, {0.10, 0, 0.03, -1.5, 0.3}, 1.15, 0.3),
      dom(Ambience::Lablight, 53, {1, 1, 1, 0.85, 1}, {0.10, 0, 0.03, -2.0, 0.7}, 1.2, 0.5),
      dom(Ambience::Night, 53, {1, 1, 1, 0.8, 1}, {0.12, 0, 0.03, -2.5, 1.1}, 1.25, 0.7),
  };
  return s;
}

SynthSuite distance_suite() {
  SynthSuite s = default_suite();
  auto dyn = [](SynthDomainSpec d, double distance) {
    d.domain.placement = distance;
    d.domain.radar_state = RadarState::Dynamic;
    return d;
  };
  // 84 in plays the role of the near placement, 42 in the shifted one.
  std::vector<SynthDomainSpec> doms;
  for (std::size_t i = 0; i < 3; ++i) doms.push_back(dyn(s.domains[i], 84));
  for (std::size_t i = 3; i < 6; ++i) {
    auto d = dyn(s.domains[i], 42);
    d.affine_offset[0] = -d.affine_offset[0] * 0.5;
    doms.push_back(d);
  }
  s.domains = std::move(doms);
  return s;
}

SynthSuite suite_by_name(std::string_view name) {
  if (name == "default") return default_suite();
  if (name == "distance") return distance_suite();
  throw ConfigError("unknown synthetic suite '" + std::string(name) + "' (expected default or distance)");
}

LabeledFrameCollection generate_collection(const SynthSuite& suite, std::size_t n_frames, std::uint64_t seed,
                                           std::size_t recordings_per_cell) {
  LabeledFrameCollection out;
  out.labels = suite.labels();
  for (const auto& d : suite.domains) {
    for (std::size_t c = 0; c < suite.classes.size(); ++c) {
      for (std::size_t r = 0; r < recordings_per_cell; ++r) {
        const auto stream = derive_seed(derive_seed(seed, c), d.domain.str() + "#" + std::to_string(r));
        LabeledRecording rec;
        rec.frames = generate_recording(suite.classes[c], d, n_frames, stream, suite.clutter);
        rec.label = c;
        rec.domain = d.domain;
        rec.source = "synthetic:" + suite.classes[c].name + "@" + d.domain.str() + "#" + std::to_string(r);
        out.recordings.push_back(std::move(rec));
      }
    }
  }
  return out;
}

namespace {

std::string file_stem(const std::string& cls, const DomainTag& d) {
  std::string s;
  for (char ch : cls) s += (ch == ' ' || ch == '/') ? '_' : ch;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", d.placement);
  s += "__" + std::string(to_string(d.ambience)) + "_" + buf;
  if (d.radar_state == RadarState::Dynamic) s += "_dynamic";
  return s;
}

}  // namespace

DatasetManifest write_dataset(const LabeledFrameCollection& data, const std::filesystem::path& dir) {
  DatasetManifest m;
  std::vector<std::string> used;
  for (const auto& rec : data.recordings) {
    const auto& cls = data.labels.name_of(rec.label);
    const std::string stem = file_stem(cls, rec.domain);
    std::size_t dup = 0;
    for (const auto& u : used) dup += u == stem;
    used.push_back(stem);
    const std::string file = stem + (dup ? "_r" + std::to_string(dup) : "") + ".csv";
    write_file(dir / file, write_points_csv(rec.frames));
    m.entries.push_back({file, cls, rec.domain});
  }
  write_file(dir / "manifest.json", manifest_json(m));
  return m;
}

std::vector<std::size_t> centroid_classify(std::span<const FeatureRow> train, std::span<const std::size_t> labels,
                                           std::size_t num_classes, std::span<const FeatureRow> test) {
  if (train.size() != labels.size()) throw DataError("centroid_classify: rows/labels length mismatch");
  const std::size_t dim = train.empty() ? 0 : train.front().size();
  std::vector<std::vector<double>> centroid(num_classes, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> count(num_classes, 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (labels[i] >= num_classes) throw DataError("centroid_classify: label out of range");
    for (std::size_t c = 0; c < dim; ++c) centroid[labels[i]][c] += train[i][c];
    ++count[labels[i]];
  }
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (count[k] == 0) throw DataError("centroid_classify: class " + std::to_string(k) + " has no training rows");
    for (auto& v : centroid[k]) v /= static_cast<double>(count[k]);
  }
  std::vector<std::size_t> out;
  out.reserve(test.size());
  for (const auto& row : test) {
    if (row.size() != dim) throw ShapeError("centroid_classify test row", dim, row.size());
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < num_classes; ++k) {
      double d = 0.0;
      for (std::size_t c = 0; c < dim; ++c) d += (row[c] - centroid[k][c]) * (row[c] - centroid[k][c]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace mmw
