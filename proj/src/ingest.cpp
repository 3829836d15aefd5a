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

#include "mmw/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mmw/error.hpp"
#include "mmw/random.hpp"
#include "mmw/textfmt.hpp"

namespace mmw {

namespace {

constexpr const char* kColumns[] = {"frame_id", "timestamp_s", "point_id", "x_m",         "y_m",
                                    "z_m",      "snr_db",      "noise_db", "points_count"};
constexpr std::size_t kNumColumns = 9;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_real(std::string_view field, std::size_t line, const char* column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc{} || ptr != last)
    throw ParseError(line, column, "non-numeric field '" + std::string(field) + "'");
  return v;
}

std::int64_t parse_int(std::string_view field, std::size_t line, const char* column) {
  std::int64_t v = 0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc{} || ptr != last)
    throw ParseError(line, column, "non-numeric field '" + std::string(field) + "'");
  return v;
}

struct PendingFrame {
  RadarFrame frame;
  std::int64_t declared_count = -1;
  std::size_t first_line = 0;
  bool sentinel = false;
};

}  // namespace

Recording parse_points_csv(std::string_view text) {
  std::map<std::int64_t, PendingFrame> frames;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (!have_header) {
      if (line != kPointsCsvHeader) throw ParseError(line_no, "", "unexpected header");
      have_header = true;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != kNumColumns)
      throw ParseError(line_no, "", "expected " + std::to_string(kNumColumns) + " fields, got " +
                                        std::to_string(f.size()));

    const auto frame_id = parse_int(f[0], line_no, kColumns[0]);
    const double ts = parse_real(f[1], line_no, kColumns[1]);
    const auto point_id = parse_int(f[2], line_no, kColumns[2]);
    const auto count = parse_int(f[8], line_no, kColumns[8]);

    auto [it, inserted] = frames.try_emplace(frame_id);
    auto& pf = it->second;
    if (inserted) {
      pf.frame.frame_index = frame_id;
      pf.frame.timestamp = ts;
      pf.declared_count = count;
      pf.first_line = line_no;
    } else if (pf.sentinel || point_id < 0) {
      throw ParseError(line_no, "", "empty-frame sentinel mixed with points in frame " + std::to_string(frame_id));
    }

    if (point_id < 0) {
      if (point_id != -1 || count != 0) throw ParseError(line_no, "", "malformed empty-frame sentinel");
      for (std::size_t c = 3; c < 8; ++c)
        if (!f[c].empty()) throw ParseError(line_no, kColumns[c], "sentinel row must leave numeric fields blank");
      pf.sentinel = true;
      continue;
    }
    PointDetection p;
    p.x = parse_real(f[3], line_no, kColumns[3]);
    p.y = parse_real(f[4], line_no, kColumns[4]);
    p.z = parse_real(f[5], line_no, kColumns[5]);
    p.snr = parse_real(f[6], line_no, kColumns[6]);
    p.noise = parse_real(f[7], line_no, kColumns[7]);
    pf.frame.points.push_back(p);
  }

  Recording out;
  out.reserve(frames.size());
  for (auto& [id, pf] : frames) {
    if (!pf.sentinel && pf.declared_count != static_cast<std::int64_t>(pf.frame.points.size()))
      throw ParseError(pf.first_line, kColumns[8], "points_count disagrees with rows of frame " + std::to_string(id));
    out.push_back(std::move(pf.frame));
  }
  return out;
}

std::string write_points_csv(const Recording& frames) {
  std::string out = kPointsCsvHeader;
  out += '\n';
  for (const auto& f : frames) {
    const std::string prefix = std::to_string(f.frame_index) + "," + format_roundtrip(f.timestamp) + ",";
    if (f.points.empty()) {
      out += prefix + "-1,,,,,,0\n";
      continue;
    }
    const std::string count = std::to_string(f.points.size());
    for (std::size_t i = 0; i < f.points.size(); ++i) {
      const auto& p = f.points[i];
      out += prefix + std::to_string(i) + "," + format_roundtrip(p.x) + "," + format_roundtrip(p.y) + "," +
             format_roundtrip(p.z) + "," + format_roundtrip(p.snr) + "," + format_roundtrip(p.noise) + "," + count +
             "\n";
    }
  }
  return out;
}

DatasetManifest parse_manifest(std::string_view json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw DataError(std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.schema_version = doc.at("schema_version").get<int>();
    if (m.schema_version != DatasetManifest::kSchemaVersion)
      throw VersionMismatchError(m.schema_version, DatasetManifest::kSchemaVersion);
    for (const auto& e : doc.at("entries")) {
      ManifestEntry entry;
      entry.file = e.at("file").get<std::string>();
      entry.cls = e.at("class").get<std::string>();
      entry.domain.ambience = parse_ambience(e.at("ambience").get<std::string>());
      entry.domain.placement = e.at("placement").get<double>();
      entry.domain.radar_state = parse_radar_state(e.at("radar_state").get<std::string>());
      if (!(entry.domain.placement > 0.0)) throw DataError("manifest placement must be positive");
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string manifest_json(const DatasetManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = manifest.schema_version;
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json j;
    j["file"] = e.file;
    j["class"] = e.cls;
    j["ambience"] = std::string(to_string(e.domain.ambience));
    j["placement"] = e.domain.placement;
    j["radar_state"] = std::string(to_string(e.domain.radar_state));
    doc["entries"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingFileError(path.string());
  return parse_manifest(read_file(path));
}

LabeledFrameCollection assemble_dataset(const DatasetManifest& manifest, const std::filesystem::path& root) {
  LabeledFrameCollection out;
  std::map<std::string, const ManifestEntry*> by_file;
  for (const auto& e : manifest.entries) {
    auto [it, inserted] = by_file.emplace(e.file, &e);
    if (!inserted) {
      const auto& prev = *it->second;
      if (prev.cls != e.cls || !(prev.domain == e.domain))
        throw InconsistentLabelsetError("file '" + e.file + "' listed with conflicting class or domain ('" +
                                        prev.cls + "' vs '" + e.cls + "')");
      continue;  // exact duplicate entry; read once
    }
    const auto path = root / e.file;
    if (!std::filesystem::exists(path)) throw MissingFileError(path.string());
  }
  by_file.clear();
  for (const auto& e : manifest.entries) {
    if (!by_file.emplace(e.file, &e).second) continue;
    LabeledRecording rec;
    rec.frames = parse_points_csv(read_file(root / e.file));
    rec.label = out.labels.add(e.cls);
    rec.domain = e.domain;
    rec.source = e.file;
    out.recordings.push_back(std::move(rec));
  }
  return out;
}

std::vector<std::size_t> stratified_counts(std::span<const std::size_t> class_counts, double ratio) {
  const std::size_t k = class_counts.size();
  std::vector<std::size_t> counts(k);
  std::vector<double> frac(k);
  double total = 0.0;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double q = ratio * static_cast<double>(class_counts[c]);
    const double fl = std::floor(q + 1e-9);
    counts[c] = static_cast<std::size_t>(fl);
    frac[c] = std::max(0.0, q - fl);
    total += q;
    assigned += counts[c];
  }
  const auto target = static_cast<std::size_t>(std::llround(total));
  std::size_t remainder = target > assigned ? target - assigned : 0;
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; i < k && remainder > 0; ++i) {
    const std::size_t c = order[i];
    if (frac[c] <= 0.0 || counts[c] >= class_counts[c]) continue;
    ++counts[c];
    --remainder;
  }
  return counts;
}

SplitIndices stratified_split_indices(std::span<const std::size_t> labels, std::size_t num_classes, double ratio,
                                      std::uint64_t seed, const LabelSet* names) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  std::vector<std::vector<std::size_t>> members(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw ShapeError("stratified_split label out of range");
    members[labels[i]].push_back(i);
  }
  std::vector<std::size_t> sizes(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    sizes[c] = members[c].size();
    if (sizes[c] < 2)
      throw ClassTooSmallError(names && c < names->size() ? names->name_of(c) : "#" + std::to_string(c));
  }
  const auto counts = stratified_counts(sizes, ratio);
  Rng rng(seed);
  SplitIndices out;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& m = members[c];
    std::shuffle(m.begin(), m.end(), rng);
    out.train.insert(out.train.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(counts[c]));
    out.test.insert(out.test.end(), m.begin() + static_cast<std::ptrdiff_t>(counts[c]), m.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::size_t> stratified_sample_indices(std::span<const std::size_t> labels, std::size_t num_classes,
                                                   double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("sample fraction must lie in [0, 1]");
  std::vector<std::vector<std::size_t>> members(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw ShapeError("stratified_sample label out of range");
    members[labels[i]].push_back(i);
  }
  std::vector<std::size_t> sizes(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) sizes[c] = members[c].size();
  const auto counts = stratified_counts(sizes, fraction);
  Rng rng(seed);
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& m = members[c];
    std::shuffle(m.begin(), m.end(), rng);
    out.insert(out.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(counts[c]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

SplitResult stratified_split(const std::vector<LabeledExample>& examples, double ratio, std::uint64_t seed,
                             const LabelSet& labels) {
  std::vector<std::size_t> y;
  y.reserve(examples.size());
  for (const auto& e : examples) y.push_back(e.label);
  const auto idx = stratified_split_indices(y, labels.size(), ratio, seed, &labels);
  SplitResult out;
  out.seed = seed;
  out.ratio = ratio;
  for (auto i : idx.train) out.train.push_back(examples[i]);
  for (auto i : idx.test) out.test.push_back(examples[i]);
  return out;
}

}  // namespace mmw
