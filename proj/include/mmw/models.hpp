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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmw/datamodel.hpp"
#include "mmw/features.hpp"
#include "mmw/nn.hpp"

namespace mmw {

enum class ModelKind { Fcl, Cnn };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view text);

/// The three disjoint parameter groups updated by adversarial training.
enum class ParamGroup { FeatureExtractor, ObjectRecognizer, DomainClassifier };

/// Shape knobs for build_cnn. The defaults give the reference network:
/// three kernel-20 stride-2 convolutions taking 640 -> 311 -> 146 -> 64.
struct CnnOptions {
  std::size_t input_length = kWindowLength;
  std::size_t kernel = 20;
  std::size_t stride = 2;
  std::size_t conv_layers = 3;
  std::size_t channels = 1;
};

/// Feature extractor feeding an object recognizer and an optional
/// domain classifier. Both heads end in logits; softmax is applied by
/// forward() and by the loss.
template <typename T>
struct BasicModel {
  ModelKind kind = ModelKind::Cnn;
  nn::Stack<T> extractor;
  nn::Stack<T> recognizer;
  nn::Stack<T> domain_head;  // empty when the model has no domain classifier
  ScalerParams scaler;
  LabelSet labels;

  std::size_t input_size() const { return extractor.input_size(); }
  std::size_t feature_size() const { return extractor.output_size(); }
  std::size_t num_classes() const { return recognizer.output_size(); }
  bool has_domain_head() const { return !domain_head.layers.empty(); }

  nn::Stack<T>& group(ParamGroup g) {
    return g == ParamGroup::FeatureExtractor ? extractor : g == ParamGroup::ObjectRecognizer ? recognizer : domain_head;
  }
  const nn::Stack<T>& group(ParamGroup g) const {
    return g == ParamGroup::FeatureExtractor ? extractor : g == ParamGroup::ObjectRecognizer ? recognizer : domain_head;
  }

  std::size_t parameter_count() const {
    return extractor.parameter_count() + recognizer.parameter_count() + domain_head.parameter_count();
  }

  void set_grl_lambda(double lambda) { domain_head.set_grl_lambda(lambda); }

  template <typename U>
  BasicModel<U> cast() const {
    BasicModel<U> m;
    m.kind = kind;
    m.extractor = extractor.template cast<U>();
    m.recognizer = recognizer.template cast<U>();
    m.domain_head = domain_head.template cast<U>();
    m.scaler = scaler;
    m.labels = labels;
    return m;
  }
};

using Model = BasicModel<float>;
using ModelD = BasicModel<double>;

/// dense(d,16) ReLU dense(16,16) ReLU | dense(16,C). The first two dense
/// layers form the feature extractor; with `domain_head` a
/// GRL dense(16,16) ReLU dense(16,2) classifier is attached.
template <typename T>
BasicModel<T> build_fcl(std::size_t input_dim, std::size_t num_classes, std::uint64_t seed, bool domain_head = false);

/// conv(K,S) ReLU x3 | dense(64,32) ReLU dense(32,16) ReLU dense(16,C)
/// | GRL dense(64,32) ReLU dense(32,2).
template <typename T>
BasicModel<T> build_cnn(std::size_t num_classes, std::uint64_t seed, const CnnOptions& options = {});

/// Conv output lengths of the extractor, first layer first.
template <typename T>
std::vector<std::size_t> conv_lengths(const BasicModel<T>& model);

/// Widths along a head: input width, then every dense output width.
template <typename T>
std::vector<std::size_t> head_widths(const nn::Stack<T>& head);

template <typename T>
struct ForwardResult {
  std::vector<T> class_probs;
  std::vector<T> domain_probs;  // empty without a domain head
  std::vector<T> features;
};

/// Reusable per-thread activations for forward passes.
template <typename T>
struct ModelTapes {
  nn::Tape<T> extractor;
  nn::Tape<T> recognizer;
  nn::Tape<T> domain;
};

/// Both heads are evaluated from one extractor pass. Throws ShapeError when
/// x does not match the model input.
template <typename T>
ForwardResult<T> forward(const BasicModel<T>& model, std::span<const double> x);

template <typename T>
ForwardResult<T> forward(const BasicModel<T>& model, std::span<const double> x, ModelTapes<T>& tapes);

}  // namespace mmw
