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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmw/datamodel.hpp"
#include "mmw/features.hpp"
#include "mmw/models.hpp"
#include "mmw/training.hpp"

namespace mmw {

enum class Method { Fcl, Cnn, Uda, Ssda10, Ssda20 };

/// Report order.
inline constexpr std::array<Method, 5> kAllMethods{Method::Fcl, Method::Cnn, Method::Uda, Method::Ssda10,
                                                    Method::Ssda20};

std::string_view to_string(Method m);  // "FCL", "CNN", "UDA", "SSDA10", "SSDA20"
/// Case-insensitive; throws ConfigError.
Method parse_method(std::string_view text);
bool is_adaptation(Method m);
ModelKind model_kind(Method m);
/// Revealed target fraction: 0 for UDA, 0.1 / 0.2 for the SSDA variants.
double labeled_fraction(Method m);

enum class Precision { Float, Double };
std::string_view to_string(Precision p);
/// "float" or "double"; throws ConfigError.
Precision parse_precision(std::string_view text);

struct PipelineConfig {
  double split_ratio = 0.7;
  std::size_t window = kWindowRows;
  std::size_t stride = 1;
  bool split_by_recording = false;
  FeatureSchema schema;
  std::size_t cnn_channels = 1;
  Precision precision = Precision::Float;  // training arithmetic
};

/// Standardized train/test examples of one domain.
struct PreparedDomain {
  ExampleSet train;
  ExampleSet test;
};

struct PreparedExperiment {
  ModelKind kind = ModelKind::Cnn;
  LabelSet labels;
  ScalerParams scaler;  // fitted on source training rows only
  PreparedDomain source;
  PreparedDomain target;  // same as source when the domains coincide
};

/// Features, windows (CNN) or single rows (FCL), stratified split of both
/// domains and the train-only scaler. Each domain is split with a seed
/// derived from (seed, domain). Throws MissingDomainError, TooFewRowsError
/// and ClassTooSmallError.
PreparedExperiment prepare_experiment(const LabeledFrameCollection& data, const DomainTag& source,
                                      const DomainTag& target, ModelKind kind, const PipelineConfig& pipeline,
                                      std::uint64_t seed);

template <typename T>
struct MethodResult {
  TrainRun<T> run;
  double test_f1 = 0.0;
};

enum class Regime { Supervised, Uda, Ssda };

/// Builds the experiment's model kind from `model_seed`, trains it under
/// `regime` and scores micro-F1 on the target test split. Adaptation regimes
/// see the target training split as unlabeled data; SSDA additionally
/// reveals `fraction` of its labels.
template <typename T>
MethodResult<T> train_and_score(const PreparedExperiment& exp, Regime regime, double fraction,
                                const TrainConfig& cfg, std::uint64_t model_seed, const PipelineConfig& pipeline = {});

/// train_and_score with the method's model kind, regime and fraction.
template <typename T>
MethodResult<T> run_method(const PreparedExperiment& exp, Method method, const TrainConfig& cfg,
                           std::uint64_t model_seed, const PipelineConfig& pipeline = {});

struct GridRow {
  DomainTag train_domain;
  DomainTag test_domain;
  std::vector<Method> methods;
  bool allow_same_domain_adaptation = false;
};

struct ExperimentGrid {
  std::vector<GridRow> rows;
  std::vector<std::uint64_t> seeds{0, 1, 2};

  /// Throws ConfigError for adaptation methods on same-domain rows (unless
  /// overridden), duplicate methods in a row or an empty seed list.
  void validate() const;
};

/// Preset grids: "cross-height" (6 static rows, 53 <-> 7 in),
/// "cross-distance" (6 dynamic rows, 84 <-> 42 in), "cross-ambience" (for
/// each static height every ordered ambience pair), "same-ambience" (the six
/// static in-domain rows with FCL and CNN). Throws ConfigError.
ExperimentGrid preset_grid(std::string_view name);

struct ReportCell {
  Method method = Method::Cnn;
  double f1_mean = 0.0;
  std::vector<double> f1_per_seed;
};

struct ReportRow {
  DomainTag train_domain;
  DomainTag test_domain;
  std::vector<ReportCell> cells;  // in kAllMethods order

  const ReportCell* find(Method m) const;
};

struct ReportTable {
  std::vector<std::uint64_t> seeds;
  std::vector<ReportRow> rows;

  bool operator==(const ReportTable& other) const;
};

/// Trains and scores every (row, method, seed). Cells run on `parallelism`
/// worker threads; results are independent of the thread count.
ReportTable run_grid(const ExperimentGrid& grid, const LabeledFrameCollection& data, const TrainConfig& cfg,
                     const PipelineConfig& pipeline = {}, std::size_t parallelism = 1);

enum class ReportFormat { Csv, Json, Markdown };
ReportFormat parse_report_format(std::string_view text);

std::string emit_report(const ReportTable& table, ReportFormat format);
/// Reads the JSON form produced by emit_report. Throws DataError.
ReportTable parse_report_json(std::string_view text);

}  // namespace mmw
