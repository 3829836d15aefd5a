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

#include "mmw/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mmw/error.hpp"
#include "mmw/training.hpp"

namespace mmw {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

namespace {

void check_eps(double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw ConfigError("gradient_check: eps must lie in [1e-7, 1e-3]");
}

double stack_loss(const nn::Stack<double>& net, std::span<const double> x, std::span<const double> target,
                  nn::Tape<double>& tape) {
  auto logits = net.forward(x, tape);
  auto p = nn::softmax<double>(logits);
  return nn::cross_entropy<double>(p, target);
}

}  // namespace

double gradient_check(const nn::Stack<double>& net, std::span<const double> x, std::span<const double> target,
                      double eps) {
  check_eps(eps);
  nn::Tape<double> tape;
  auto logits = net.forward(x, tape);
  auto p = nn::softmax<double>(logits);
  double mass = 0.0;
  for (double t : target) mass += t;
  // d/dz of -sum t log softmax(z)
  std::vector<double> dlogits(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) dlogits[i] = p[i] * mass - target[i];
  auto grads = net.zero_grads();
  net.backward(tape, dlogits, grads, nullptr);

  nn::Stack<double> probe = net;
  double worst = 0.0;
  for (std::size_t li = 0; li < probe.layers.size(); ++li) {
    nn::with_params(probe.layers[li], [&](auto& w, auto& b) {
      auto scan = [&](std::vector<double>& params, const std::vector<double>& analytic) {
        for (std::size_t k = 0; k < params.size(); ++k) {
          const double orig = params[k];
          params[k] = orig + eps;
          const double up = stack_loss(probe, x, target, tape);
          params[k] = orig - eps;
          const double down = stack_loss(probe, x, target, tape);
          params[k] = orig;
          worst = std::max(worst, relative_error(analytic[k], (up - down) / (2.0 * eps)));
        }
      };
      scan(w, grads[li].weight);
      scan(b, grads[li].bias);
    });
  }
  return worst;
}

GradCheckResult gradient_check(const ModelD& model, std::span<const double> x, std::size_t class_label,
                               std::optional<std::size_t> domain_label, double eps) {
  check_eps(eps);
  if (domain_label && !model.has_domain_head()) throw ShapeError("gradient_check: model has no domain head");

  auto grads = ModelGrads<double>::zeros(model);
  StepWorkspace<double> ws;
  const StepItem item{x, class_label, domain_label};
  compute_gradients<double>(model, std::span<const StepItem>(&item, 1), grads, ws);

  // Sign with which the domain loss reaches the extractor.
  double dc_sign = 1.0;
  for (const auto& l : model.domain_head.layers)
    if (const auto* g = std::get_if<nn::GradReversal>(&l)) dc_sign = -g->lambda;

  ModelD probe = model;
  ModelTapes<double> tapes;
  auto losses = [&]() {
    auto r = forward(probe, x, tapes);
    const double lor = nn::cross_entropy<double>(r.class_probs, class_label);
    const double ldc = domain_label ? nn::cross_entropy<double>(r.domain_probs, *domain_label) : 0.0;
    return std::pair{lor, ldc};
  };

  GradCheckResult res;
  auto scan_group = [&](ParamGroup g, const nn::Grads<double>& analytic) {
    auto& stack = probe.group(g);
    for (std::size_t li = 0; li < stack.layers.size(); ++li) {
      nn::with_params(stack.layers[li], [&](auto& w, auto& b) {
        auto scan = [&](std::vector<double>& params, const std::vector<double>& a) {
          for (std::size_t k = 0; k < params.size(); ++k) {
            const double orig = params[k];
            params[k] = orig + eps;
            const auto [or_up, dc_up] = losses();
            params[k] = orig - eps;
            const auto [or_down, dc_down] = losses();
            params[k] = orig;
            const double d_or = (or_up - or_down) / (2.0 * eps);
            const double d_dc = (dc_up - dc_down) / (2.0 * eps);
            double numeric = 0.0;
            switch (g) {
              case ParamGroup::FeatureExtractor: numeric = d_or + dc_sign * d_dc; break;
              case ParamGroup::ObjectRecognizer: numeric = d_or; break;
              case ParamGroup::DomainClassifier: numeric = d_dc; break;
            }
            res.max_relative_error = std::max(res.max_relative_error, relative_error(a[k], numeric));
            ++res.parameters;
          }
        };
        scan(w, analytic[li].weight);
        scan(b, analytic[li].bias);
      });
    }
  };
  scan_group(ParamGroup::FeatureExtractor, grads.extractor);
  scan_group(ParamGroup::ObjectRecognizer, grads.recognizer);
  if (domain_label) scan_group(ParamGroup::DomainClassifier, grads.domain_head);
  return res;
}

}  // namespace mmw
