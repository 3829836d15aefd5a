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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmw/models.hpp"

namespace mmw {

/// Row-major matrix of model inputs without labels.
struct SampleMatrix {
  std::size_t dim = 0;
  std::vector<double> values;

  std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
  bool empty() const { return size() == 0; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  void push_back(std::span<const double> x);
};

struct ExampleSet {
  SampleMatrix samples;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  void push_back(std::span<const double> x, std::size_t label);
  ExampleSet subset(std::span<const std::size_t> indices) const;
};

/// Labeled source data plus target data whose labels are not reachable
/// except for the `revealed` stratified subset (empty for UDA).
struct DomainPair {
  ExampleSet source;
  SampleMatrix target;
  ExampleSet revealed;
  double revealed_fraction = 0.0;
};

/// Builds a DomainPair, revealing round(fraction * n_c) target examples per
/// class (stratified remainder rule, seeded shuffle). Fraction must lie in
/// [0, 1]; throws ConfigError otherwise.
DomainPair make_domain_pair(ExampleSet source, const ExampleSet& target, double fraction, std::size_t num_classes,
                            std::uint64_t seed);

inline constexpr std::size_t kSourceDomain = 0;
inline constexpr std::size_t kTargetDomain = 1;

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  double grl_lambda = 1.0;

  /// Throws ConfigError. A learning rate of 0 is accepted (frozen run).
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double object_loss = 0.0;
  std::optional<double> domain_loss;  // adversarial runs only
  double train_f1 = 0.0;              // running micro-F1 over the epoch's object batches
};

template <typename T>
struct TrainRun {
  TrainConfig config;
  std::vector<EpochRecord> history;
  BasicModel<T> model;
};

/// History CSV: `epoch,object_loss,domain_loss,train_f1`.
std::string history_csv(const std::vector<EpochRecord>& history);

// --- single step ----------------------------------------------------------------

/// One sample of a training step. Object-labeled items contribute to the
/// mean object loss, domain-labeled items to the mean domain loss.
struct StepItem {
  std::span<const double> x;
  std::optional<std::size_t> object_label;
  std::optional<std::size_t> domain_label;
};

template <typename T>
struct ModelGrads {
  nn::Grads<T> extractor;
  nn::Grads<T> recognizer;
  nn::Grads<T> domain_head;

  static ModelGrads zeros(const BasicModel<T>& m);
  void zero();
};

struct StepStats {
  double object_loss = 0.0;  // mean over object items
  double domain_loss = 0.0;  // mean over domain items
  std::size_t object_items = 0;
  std::size_t domain_items = 0;
  std::size_t correct = 0;   // argmax hits among object items
};

/// Reusable buffers for compute_gradients.
template <typename T>
struct StepWorkspace {
  ModelTapes<T> tapes;
  std::vector<T> probs;
  std::vector<T> dlogits;
  std::vector<T> grad_feat;
  std::vector<T> grad_feat_dc;
};

/// Gradients of L_or (mean over object items) + L_dc (mean over domain items)
/// with the domain head's gradient reversal applied on the way into the
/// extractor. Accumulates into `grads`, which the caller zeroes.
template <typename T>
StepStats compute_gradients(const BasicModel<T>& model, std::span<const StepItem> items, ModelGrads<T>& grads,
                            StepWorkspace<T>& ws);

/// theta <- theta - mu * g for every group. The domain head is updated only
/// when `update_domain_head` is set.
template <typename T>
void apply_gradients(BasicModel<T>& model, const ModelGrads<T>& grads, double mu, bool update_domain_head);

// --- regimes --------------------------------------------------------------------

/// Object-loss training of extractor and recognizer; the domain head is untouched.
/// Per epoch: seeded shuffle, ceil(n / batch) batches. Throws EmptyInputError.
template <typename T>
TrainRun<T> train_supervised(BasicModel<T> model, const ExampleSet& data, const TrainConfig& cfg);

/// Domain-adversarial training with unlabeled target data. Each step pairs a
/// source batch (the supervised schedule) with an equally sized target batch
/// from an independent cyclic iterator. Requires a domain head.
template <typename T>
TrainRun<T> train_uda(BasicModel<T> model, const DomainPair& pair, const TrainConfig& cfg);

/// As train_uda, but the object batch also carries a batch drawn from the
/// revealed target subset. Throws ConfigError unless 0 < fraction <= 1.
template <typename T>
TrainRun<T> train_ssda(BasicModel<T> model, const DomainPair& pair, const TrainConfig& cfg);

// --- checkpoint -----------------------------------------------------------------

inline constexpr int kCheckpointVersion = 1;

template <typename T>
std::string checkpoint_json(const BasicModel<T>& model);
/// Throws VersionMismatchError or CorruptFileError (byte offset of the fault).
template <typename T>
BasicModel<T> parse_checkpoint(std::string_view text);

template <typename T>
void save_checkpoint(const BasicModel<T>& model, const std::filesystem::path& path);
/// Adds IoError to parse_checkpoint's errors.
template <typename T>
BasicModel<T> load_checkpoint(const std::filesystem::path& path);

}  // namespace mmw
