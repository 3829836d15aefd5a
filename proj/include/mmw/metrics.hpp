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
#include <span>
#include <vector>

#include "mmw/models.hpp"
#include "mmw/training.hpp"

namespace mmw {

/// Index of the largest probability; ties go to the lowest index.
template <typename T>
std::size_t argmax_label(std::span<const T> probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

/// One label per row of `samples`, order-preserving. Throws ShapeError when
/// the sample width differs from the model input.
template <typename T>
std::vector<std::size_t> predict(const BasicModel<T>& model, const SampleMatrix& samples);

/// rows = truth, columns = prediction.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::size_t> counts;  // classes x classes

  std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * classes + pred]; }
  std::size_t trace() const;
  std::size_t total() const;
};

/// Throws DataError on length mismatch or empty input.
ConfusionMatrix confusion(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                          std::size_t classes);

/// sum TP / (sum TP + (sum FP + sum FN) / 2), pooled over classes. For
/// single-label multiclass data this is accuracy.
double micro_f1(std::span<const std::size_t> pred, std::span<const std::size_t> truth);

}  // namespace mmw
