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

#include <doctest.h>

#include <numeric>
#include <random>

#include "mmw/error.hpp"
#include "mmw/models.hpp"

using namespace mmw;

namespace {

std::vector<double> random_input(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

template <typename T>
double sum(const std::vector<T>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST_CASE("cnn shapes") {
  const auto m = build_cnn<float>(5, 0);
  CHECK(m.kind == ModelKind::Cnn);
  CHECK(m.input_size() == 640);
  CHECK(conv_lengths(m) == std::vector<std::size_t>{311, 146, 64});
  CHECK(m.feature_size() == 64);
  CHECK(head_widths(m.recognizer) == std::vector<std::size_t>{64, 32, 16, 5});
  CHECK(head_widths(m.domain_head) == std::vector<std::size_t>{64, 32, 2});
  CHECK(std::holds_alternative<nn::GradReversal>(m.domain_head.layers.front()));
  CHECK(m.num_classes() == 5);
}

TEST_CASE("cnn options override the reference shape") {
  CnnOptions opt;
  opt.input_length = 200;
  opt.channels = 2;
  const auto m = build_cnn<double>(3, 1, opt);
  CHECK(m.input_size() == 200);
  CHECK(conv_lengths(m).size() == 3);
  CHECK(m.num_classes() == 3);
  opt.input_length = 30;
  CHECK_THROWS_AS(build_cnn<double>(3, 1, opt), ShapeError);
}

TEST_CASE("fcl parameter count") {
  const auto m = build_fcl<float>(16, 5, 3);
  CHECK(m.parameter_count() == 629);
  CHECK(m.extractor.parameter_count() == 16 * 16 + 16 + 16 * 16 + 16);
  CHECK(m.recognizer.parameter_count() == 16 * 5 + 5);
  CHECK_FALSE(m.has_domain_head());
  CHECK(build_fcl<float>(16, 5, 3, true).has_domain_head());
}

TEST_CASE("parameter groups partition the model") {
  for (const auto& m : {build_cnn<double>(5, 2), build_fcl<double>(16, 5, 2, true), build_fcl<double>(16, 4, 2)}) {
    std::size_t total = 0;
    for (auto g : {ParamGroup::FeatureExtractor, ParamGroup::ObjectRecognizer, ParamGroup::DomainClassifier})
      total += m.group(g).parameter_count();
    CHECK(total == m.parameter_count());
  }
}

TEST_CASE("same seed builds identical parameters") {
  CHECK(build_cnn<float>(5, 42).extractor == build_cnn<float>(5, 42).extractor);
  CHECK(build_cnn<float>(5, 42).domain_head == build_cnn<float>(5, 42).domain_head);
  CHECK_FALSE(build_cnn<float>(5, 42).extractor == build_cnn<float>(5, 43).extractor);
  CHECK(build_fcl<double>(16, 5, 9).recognizer == build_fcl<double>(16, 5, 9).recognizer);
}

TEST_CASE("glorot initialization bounds and zero biases") {
  const auto m = build_cnn<double>(5, 7);
  for (const auto* stack : {&m.extractor, &m.recognizer, &m.domain_head}) {
    for (const auto& layer : stack->layers) {
      if (const auto* d = std::get_if<nn::Dense<double>>(&layer)) {
        const double limit = std::sqrt(6.0 / static_cast<double>(d->in_dim + d->out_dim));
        for (double w : d->weight) CHECK(std::abs(w) <= limit);
        for (double b : d->bias) CHECK(b == 0.0);
      }
      if (const auto* c = std::get_if<nn::Conv1d<double>>(&layer)) {
        const double limit = std::sqrt(6.0 / static_cast<double>((c->in_channels + c->out_channels) * c->kernel));
        for (double w : c->weight) CHECK(std::abs(w) <= limit);
      }
    }
  }
}

TEST_CASE("forward produces distributions") {
  const auto m = build_cnn<double>(5, 3);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = forward(m, random_input(640, s));
    CHECK(r.class_probs.size() == 5);
    CHECK(r.domain_probs.size() == 2);
    CHECK(r.features.size() == 64);
    CHECK(std::abs(sum(r.class_probs) - 1.0) < 1e-12);
    CHECK(std::abs(sum(r.domain_probs) - 1.0) < 1e-12);
  }
  const auto f = build_fcl<float>(16, 5, 3);
  const auto r = forward(f, random_input(16, 1));
  CHECK(r.domain_probs.empty());
  CHECK(std::abs(sum(r.class_probs) - 1.0) < 1e-6);
  CHECK_THROWS_AS(forward(f, random_input(15, 1)), ShapeError);
}

TEST_CASE("zero input with zero biases gives uniform class probabilities") {
  const auto m = build_cnn<double>(5, 3);
  const auto r = forward(m, std::vector<double>(640, 0.0));
  for (double p : r.class_probs) CHECK(p == doctest::Approx(0.2).epsilon(1e-15));
  for (double p : r.domain_probs) CHECK(p == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("forward is pure") {
  const auto m = build_cnn<float>(5, 3);
  const auto x = random_input(640, 5);
  ModelTapes<float> tapes;
  const auto a = forward(m, x, tapes);
  const auto b = forward(m, x, tapes);
  const auto c = forward(m, x);
  CHECK(a.class_probs == b.class_probs);
  CHECK(a.class_probs == c.class_probs);
  CHECK(a.features == c.features);
}

TEST_CASE("model kind names") {
  CHECK(to_string(ModelKind::Fcl) == "fcl");
  CHECK(parse_model_kind("cnn") == ModelKind::Cnn);
  CHECK_THROWS_AS(parse_model_kind("rnn"), DataError);
}
