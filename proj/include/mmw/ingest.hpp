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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmw/datamodel.hpp"
#include "mmw/features.hpp"

namespace mmw {

inline constexpr const char* kPointsCsvHeader =
    "frame_id,timestamp_s,point_id,x_m,y_m,z_m,snr_db,noise_db,points_count";

/// Parses one recording's point CSV. Frames are ordered by frame_id; an empty
/// frame is a sentinel row with point_id -1, points_count 0 and blank x..noise.
/// Throws ParseError with a 1-based line number (and column for bad fields).
Recording parse_points_csv(std::string_view text);

/// Inverse of parse_points_csv; numbers are written at round-trip precision.
std::string write_points_csv(const Recording& frames);

struct ManifestEntry {
  std::string file;
  std::string cls;
  DomainTag domain;
};

struct DatasetManifest {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  std::vector<ManifestEntry> entries;
};

/// Throws DataError on malformed JSON, unknown enum values or a wrong version.
DatasetManifest parse_manifest(std::string_view json_text);
std::string manifest_json(const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Reads every referenced file relative to `root`. Labels are registered in
/// manifest order. Throws MissingFileError or InconsistentLabelsetError.
LabeledFrameCollection assemble_dataset(const DatasetManifest& manifest, const std::filesystem::path& root);

/// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file, creating parent directories; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

// --- stratified split -------------------------------------------------------

/// Per-class train counts: floor(ratio * n_c) for every class, then the
/// remaining round(ratio * N) - sum(floor) slots go to the classes with the
/// largest fractional parts, ties broken by lower class index.
std::vector<std::size_t> stratified_counts(std::span<const std::size_t> class_counts, double ratio);

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Splits positions [0, labels.size()) per class with a seeded shuffle inside
/// each class. Throws ClassTooSmallError for classes with fewer than 2 members
/// (named through `names` when given) and ConfigError for ratio outside (0, 1).
SplitIndices stratified_split_indices(std::span<const std::size_t> labels, std::size_t num_classes, double ratio,
                                      std::uint64_t seed, const LabelSet* names = nullptr);

/// Seeded per-class sample of stratified_counts(class sizes, fraction)
/// members, any class size allowed. Fraction in [0, 1]; returns ascending
/// positions.
std::vector<std::size_t> stratified_sample_indices(std::span<const std::size_t> labels, std::size_t num_classes,
                                                   double fraction, std::uint64_t seed);

struct SplitResult {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> test;
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

SplitResult stratified_split(const std::vector<LabeledExample>& examples, double ratio, std::uint64_t seed,
                             const LabelSet& labels);

}  // namespace mmw
