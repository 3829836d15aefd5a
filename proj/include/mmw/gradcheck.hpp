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
#include <optional>
#include <span>

#include "mmw/models.hpp"
#include "mmw/nn.hpp"

namespace mmw {

/// Relative error used by the checkers: |a - n| / max(|a|, |n|, 1e-8).
double relative_error(double analytic, double numeric);

/// Compares backprop through `net` (logits -> softmax -> cross-entropy against
/// `target`) with central differences (L(theta+eps) - L(theta-eps)) / 2eps
/// for every parameter. Returns the maximum relative error; 0 for a network
/// without parameters. Throws ConfigError unless eps lies in [1e-7, 1e-3].
double gradient_check(const nn::Stack<double>& net, std::span<const double> x, std::span<const double> target,
                      double eps);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t parameters = 0;
};

/// Full-model check. The analytic side is compute_gradients on the single
/// item (x, class_label, domain_label). The numeric side differentiates the
/// object and domain losses separately and combines them the way the
/// reversal layer does: extractor parameters see dL_or - lambda * dL_dc,
/// recognizer parameters dL_or, domain-head parameters dL_dc.
GradCheckResult gradient_check(const ModelD& model, std::span<const double> x, std::size_t class_label,
                               std::optional<std::size_t> domain_label, double eps);

}  // namespace mmw
