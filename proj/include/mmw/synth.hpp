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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmw/datamodel.hpp"
#include "mmw/features.hpp"
#include "mmw/ingest.hpp"

namespace mmw {

using ChannelVec = std::array<double, kChannels>;  // x, y, z, snr, noise

/// Gaussian point model of one object class.
struct SynthClassSpec {
  std::string name;
  double point_count_mean = 8.0;
  ChannelVec channel_means{};
  ChannelVec channel_stds{1, 1, 1, 1, 1};
};

/// Affine distortion of the class model plus spurious clutter points.
struct SynthDomainSpec {
  DomainTag domain;
  ChannelVec affine_scale{1, 1, 1, 1, 1};
  ChannelVec affine_offset{};
  double noise_inflation = 1.0;
  double clutter_rate = 0.0;  // mean spurious points per frame

  bool is_identity() const;
};

/// Broad background distribution the clutter points are drawn from.
struct ClutterSpec {
  ChannelVec means{1.2, 0.0, 0.0, 4.0, 6.0};
  ChannelVec stds{0.6, 0.6, 0.3, 2.5, 1.5};
};

struct SynthSuite {
  std::vector<SynthClassSpec> classes;
  std::vector<SynthDomainSpec> domains;
  ClutterSpec clutter;

  LabelSet labels() const;
  /// Throws MissingDomainError.
  const SynthDomainSpec& domain(const DomainTag& tag) const;
};

/// Frame i has index i and timestamp i / 10 Hz. Point count ~ Poisson(mean),
/// channels ~ Normal(scale * mean + offset, inflation * std), plus
/// Poisson(clutter_rate) clutter points. Pure function of its arguments.
Recording generate_recording(const SynthClassSpec& cls, const SynthDomainSpec& dom, std::size_t n_frames,
                             std::uint64_t seed, const ClutterSpec& clutter = {});

/// Five classes named after the static objects, six static domains
/// {sunny, lablight, night} x {7, 53} in; sunny/7 is the identity domain.
SynthSuite default_suite();

/// Same classes with six dynamic-radar domains {sunny, lablight, night} x
/// {84, 42} in, matching the cross-distance grid.
SynthSuite distance_suite();

/// "default" or "distance"; throws ConfigError.
SynthSuite suite_by_name(std::string_view name);

/// One recording per (class, domain), each on its own stream derived from
/// (seed, class, domain). Recordings are ordered domain-major.
LabeledFrameCollection generate_collection(const SynthSuite& suite, std::size_t n_frames, std::uint64_t seed,
                                           std::size_t recordings_per_cell = 1);

/// Writes the collection as point CSVs plus manifest.json under `dir`, in the
/// ingest format. Returns the manifest.
DatasetManifest write_dataset(const LabeledFrameCollection& data, const std::filesystem::path& dir);

/// Nearest class centroid (Euclidean) with ties to the lower class index.
/// Throws DataError when some class in [0, num_classes) has no training row.
std::vector<std::size_t> centroid_classify(std::span<const FeatureRow> train, std::span<const std::size_t> labels,
                                           std::size_t num_classes, std::span<const FeatureRow> test);

}  // namespace mmw
