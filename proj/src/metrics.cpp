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

#include "mmw/metrics.hpp"

#include <algorithm>

#include "mmw/error.hpp"

namespace mmw {

template <typename T>
std::vector<std::size_t> predict(const BasicModel<T>& model, const SampleMatrix& samples) {
  std::vector<std::size_t> out;
  if (samples.empty()) return out;
  if (samples.dim != model.input_size()) throw ShapeError("predict input", model.input_size(), samples.dim);
  out.reserve(samples.size());
  ModelTapes<T> tapes;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto feat = model.extractor.forward(samples.row(i), tapes.extractor);
    auto logits = model.recognizer.forward(feat, tapes.recognizer);
    // softmax is monotone, so the argmax of the logits is the argmax of the probabilities
    out.push_back(argmax_label<T>(nn::softmax<T>(logits)));
  }
  return out;
}

template std::vector<std::size_t> predict<float>(const BasicModel<float>&, const SampleMatrix&);
template std::vector<std::size_t> predict<double>(const BasicModel<double>&, const SampleMatrix&);

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t c = 0; c < classes; ++c) t += at(c, c);
  return t;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto v : counts) t += v;
  return t;
}

namespace {

void check_pair(std::span<const std::size_t> pred, std::span<const std::size_t> truth) {
  if (pred.size() != truth.size())
    throw DataError("prediction/truth length mismatch: " + std::to_string(pred.size()) + " vs " +
                    std::to_string(truth.size()));
  if (pred.empty()) throw EmptyInputError("no predictions to score");
}

}  // namespace

ConfusionMatrix confusion(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                          std::size_t classes) {
  check_pair(pred, truth);
  ConfusionMatrix m;
  m.classes = classes;
  m.counts.assign(classes * classes, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= classes || truth[i] >= classes) throw DataError("label outside [0, classes)");
    ++m.counts[truth[i] * classes + pred[i]];
  }
  return m;
}

double micro_f1(std::span<const std::size_t> pred, std::span<const std::size_t> truth) {
  check_pair(pred, truth);
  std::size_t classes = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) classes = std::max({classes, pred[i] + 1, truth[i] + 1});
  const auto m = confusion(pred, truth, classes);
  // Pooled over classes every miss is one FP (predicted class) and one FN (true class).
  const double tp = static_cast<double>(m.trace());
  const double fp = static_cast<double>(m.total() - m.trace());
  const double fn = fp;
  return tp / (tp + 0.5 * (fp + fn));
}

}  // namespace mmw
