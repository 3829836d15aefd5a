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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mmw {

/// Rows per second of radar output. Windowing counts rows, never seconds;
/// this constant is only used when timestamps have to be synthesized.
inline constexpr double kFrameRateHz = 10.0;

/// One reflection point reported by the radar.
struct PointDetection {
  double x = 0.0;  // m, radial component
  double y = 0.0;  // m
  double z = 0.0;  // m
  double snr = 0.0;    // dB
  double noise = 0.0;  // dB
};

/// One radar scan. `points` may be empty.
struct RadarFrame {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;  // s
  std::vector<PointDetection> points;
};

using Recording = std::vector<RadarFrame>;

/// Bijection between class names and dense indices [0, size()).
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(const std::vector<std::string>& names);

  /// Registers `name` if new; returns its index either way.
  std::size_t add(const std::string& name);
  /// Throws UnknownLabelError for unregistered names.
  std::size_t index_of(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws std::out_of_range for indices >= size().
  const std::string& name_of(std::size_t index) const;

  std::size_t size() const noexcept { return names_.size(); }
  bool empty() const noexcept { return names_.empty(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool operator==(const LabelSet& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline std::size_t label_to_index(const LabelSet& labels, std::string_view name) {
  return labels.index_of(name);
}
inline const std::string& index_to_label(const LabelSet& labels, std::size_t index) {
  return labels.name_of(index);
}

enum class Ambience { Sunny, Lablight, Night };
enum class RadarState { Static, Dynamic };

std::string_view to_string(Ambience a);
std::string_view to_string(RadarState s);
/// Throw DataError on unrecognized names.
Ambience parse_ambience(std::string_view text);
RadarState parse_radar_state(std::string_view text);

/// Collection condition of a recording. `placement` is the radar height in
/// inches when static and the radar-to-object distance when dynamic.
struct DomainTag {
  Ambience ambience = Ambience::Sunny;
  double placement = 7.0;
  RadarState radar_state = RadarState::Static;

  bool operator==(const DomainTag&) const = default;
  /// Canonical text form: "sunny/7" or "night/84/dynamic".
  std::string str() const;
  /// Table form used in markdown reports: "Sunny(7)".
  std::string pretty() const;
};

/// Parses the canonical form produced by DomainTag::str(). Throws ConfigError.
DomainTag parse_domain(std::string_view text);

/// A recording together with its class and collection condition.
struct LabeledRecording {
  Recording frames;
  std::size_t label = 0;
  DomainTag domain;
  std::string source;  // file name or synthetic identifier
};

struct LabeledFrameCollection {
  LabelSet labels;
  std::vector<LabeledRecording> recordings;

  /// Distinct domains in first-appearance order.
  std::vector<DomainTag> domains() const;
  bool has_domain(const DomainTag& d) const;
  /// Recordings of one domain, in collection order.
  std::vector<const LabeledRecording*> of_domain(const DomainTag& d) const;
};

// --- validation -------------------------------------------------------------

enum class FindingKind { NonMonotoneIndex, DecreasingTimestamp, NonFinite };

struct ValidationFinding {
  FindingKind kind;
  std::size_t frame_position = 0;           // 0-based position in the recording
  std::optional<std::size_t> point;         // set for point-level findings
  std::string field;                        // e.g. "snr", "timestamp", "frame_index"
  std::string message;

  bool operator==(const ValidationFinding&) const = default;
};

using ValidationReport = std::vector<ValidationFinding>;

/// Lists every violated recording invariant. Empty iff the recording is valid.
ValidationReport validate_recording(const Recording& frames);

}  // namespace mmw
