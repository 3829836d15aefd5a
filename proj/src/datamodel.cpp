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

#include "mmw/datamodel.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mmw/error.hpp"

namespace mmw {

LabelSet::LabelSet(const std::vector<std::string>& names) {
  for (const auto& n : names) {
    if (find(n)) throw InconsistentLabelsetError("duplicate label '" + n + "'");
    add(n);
  }
}

std::size_t LabelSet::add(const std::string& name) {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  const std::size_t idx = names_.size();
  names_.push_back(name);
  index_.emplace(name, idx);
  return idx;
}

std::optional<std::size_t> LabelSet::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LabelSet::index_of(std::string_view name) const {
  if (auto idx = find(name)) return *idx;
  throw UnknownLabelError(std::string(name));
}

const std::string& LabelSet::name_of(std::size_t index) const {
  if (index >= names_.size())
    throw std::out_of_range("label index " + std::to_string(index) + " out of range");
  return names_[index];
}

std::string_view to_string(Ambience a) {
  switch (a) {
    case Ambience::Sunny: return "sunny";
    case Ambience::Lablight: return "lablight";
    case Ambience::Night: return "night";
  }
  return "?";
}

std::string_view to_string(RadarState s) { return s == RadarState::Static ? "static" : "dynamic"; }

Ambience parse_ambience(std::string_view text) {
  if (text == "sunny") return Ambience::Sunny;
  if (text == "lablight") return Ambience::Lablight;
  if (text == "night") return Ambience::Night;
  throw DataError("unknown ambience '" + std::string(text) + "'");
}

RadarState parse_radar_state(std::string_view text) {
  if (text == "static") return RadarState::Static;
  if (text == "dynamic") return RadarState::Dynamic;
  throw DataError("unknown radar_state '" + std::string(text) + "'");
}

namespace {

std::string format_placement(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

}  // namespace

std::string DomainTag::str() const {
  std::string s = std::string(to_string(ambience)) + "/" + format_placement(placement);
  if (radar_state == RadarState::Dynamic) s += "/dynamic";
  return s;
}

std::string DomainTag::pretty() const {
  std::string name(to_string(ambience));
  name[0] = static_cast<char>(name[0] - 'a' + 'A');
  return name + "(" + format_placement(placement) + ")";
}

DomainTag parse_domain(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto slash = text.find('/', start);
    parts.push_back(text.substr(start, slash == std::string_view::npos ? slash : slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  if (parts.size() < 2 || parts.size() > 3)
    throw ConfigError("domain '" + std::string(text) + "' is not of the form ambience/placement[/state]");
  DomainTag tag;
  try {
    tag.ambience = parse_ambience(parts[0]);
    if (parts.size() == 3) tag.radar_state = parse_radar_state(parts[2]);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  double placement = 0.0;
  const auto* first = parts[1].data();
  const auto* last = first + parts[1].size();
  auto [ptr, ec] = std::from_chars(first, last, placement);
  if (ec != std::errc{} || ptr != last || !(placement > 0.0) || !std::isfinite(placement))
    throw ConfigError("domain '" + std::string(text) + "' has an invalid placement");
  tag.placement = placement;
  return tag;
}

std::vector<DomainTag> LabeledFrameCollection::domains() const {
  std::vector<DomainTag> out;
  for (const auto& r : recordings) {
    bool seen = false;
    for (const auto& d : out) seen = seen || d == r.domain;
    if (!seen) out.push_back(r.domain);
  }
  return out;
}

bool LabeledFrameCollection::has_domain(const DomainTag& d) const {
  for (const auto& r : recordings)
    if (r.domain == d) return true;
  return false;
}

std::vector<const LabeledRecording*> LabeledFrameCollection::of_domain(const DomainTag& d) const {
  std::vector<const LabeledRecording*> out;
  for (const auto& r : recordings)
    if (r.domain == d) out.push_back(&r);
  return out;
}

ValidationReport validate_recording(const Recording& frames) {
  ValidationReport report;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (i > 0 && f.frame_index <= frames[i - 1].frame_index) {
      report.push_back({FindingKind::NonMonotoneIndex, i, std::nullopt, "frame_index",
                        "frame_index " + std::to_string(f.frame_index) + " does not exceed previous " +
                            std::to_string(frames[i - 1].frame_index)});
    }
    if (!std::isfinite(f.timestamp)) {
      report.push_back({FindingKind::NonFinite, i, std::nullopt, "timestamp", "timestamp is not finite"});
    } else if (i > 0 && std::isfinite(frames[i - 1].timestamp) && f.timestamp < frames[i - 1].timestamp) {
      report.push_back({FindingKind::DecreasingTimestamp, i, std::nullopt, "timestamp",
                        "timestamp decreases relative to previous frame"});
    }
    for (std::size_t p = 0; p < f.points.size(); ++p) {
      const auto& pt = f.points[p];
      const std::pair<const char*, double> fields[] = {
          {"x", pt.x}, {"y", pt.y}, {"z", pt.z}, {"snr", pt.snr}, {"noise", pt.noise}};
      for (const auto& [name, value] : fields) {
        if (!std::isfinite(value))
          report.push_back({FindingKind::NonFinite, i, p, name, std::string(name) + " is not finite"});
      }
    }
  }
  return report;
}

}  // namespace mmw
