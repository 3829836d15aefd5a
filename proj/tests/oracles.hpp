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

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "mmw/models.hpp"
#include "mmw/training.hpp"

namespace mmw::test {

/// Fraction of equal positions, counted directly.
inline double accuracy(std::span<const std::size_t> pred, std::span<const std::size_t> truth) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

template <typename T>
std::vector<T> flat_params(const nn::Stack<T>& s) {
  std::vector<T> out;
  for (const auto& l : s.layers)
    nn::with_params(l, [&](const auto& w, const auto& b) {
      out.insert(out.end(), w.begin(), w.end());
      out.insert(out.end(), b.begin(), b.end());
    });
  return out;
}

template <typename T>
std::vector<T> flat_grads(const nn::Grads<T>& g) {
  std::vector<T> out;
  for (const auto& p : g) {
    out.insert(out.end(), p.weight.begin(), p.weight.end());
    out.insert(out.end(), p.bias.begin(), p.bias.end());
  }
  return out;
}

/// The domain head with every reversal layer removed: plain descent on L_dc.
template <typename T>
BasicModel<T> without_reversal(BasicModel<T> m) {
  auto& ls = m.domain_head.layers;
  ls.erase(std::remove_if(ls.begin(), ls.end(), [](const auto& l) { return std::holds_alternative<nn::GradReversal>(l); }),
           ls.end());
  return m;
}

struct UpdateCheck {
  double extractor_error = 0.0;   // max |applied - (-mu (g_or - lambda g_dc))|
  double recognizer_error = 0.0;  // max |applied - (-mu g_or)|
  double domain_error = 0.0;      // max |applied - (-mu g_dc)|
  double or_grad_from_dc = 0.0;   // max |recognizer gradient of the domain-only pass|
  double dc_grad_from_or = 0.0;   // max |domain-head gradient of the object-only pass|
  double g_or_norm = 0.0;
  double g_dc_norm = 0.0;
};

/// Instruments one adversarial step. g_or comes from a pass with only the
/// object labels, g_dc from a domain-only pass through a copy of the model
/// whose domain head has no reversal layer. The real step is then compared
/// against theta - mu * (g_or - lambda * g_dc) for the extractor.
inline UpdateCheck check_adversarial_update(const ModelD& model, std::span<const StepItem> items, double mu,
                                            double lambda) {
  std::vector<StepItem> obj_only, dom_only;
  for (const auto& it : items) {
    if (it.object_label) obj_only.push_back({it.x, it.object_label, std::nullopt});
    if (it.domain_label) dom_only.push_back({it.x, std::nullopt, it.domain_label});
  }
  // The combined step divides each loss by its own item count, exactly like these separate passes.
  StepWorkspace<double> ws;
  auto g_or = ModelGrads<double>::zeros(model);
  compute_gradients<double>(model, obj_only, g_or, ws);
  const auto plain = without_reversal(model);
  auto g_dc = ModelGrads<double>::zeros(plain);
  compute_gradients<double>(plain, dom_only, g_dc, ws);

  ModelD stepped = model;
  stepped.set_grl_lambda(lambda);
  auto g = ModelGrads<double>::zeros(stepped);
  compute_gradients<double>(stepped, items, g, ws);
  apply_gradients(stepped, g, mu, true);

  UpdateCheck out;
  auto max_err = [&](const std::vector<double>& before, const std::vector<double>& after,
                     const std::vector<double>& expected_delta) {
    double e = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) e = std::max(e, std::abs((after[i] - before[i]) - expected_delta[i]));
    return e;
  };
  const auto fe_or = flat_grads(g_or.extractor);
  const auto fe_dc = flat_grads(g_dc.extractor);
  std::vector<double> d_fe(fe_or.size());
  for (std::size_t i = 0; i < d_fe.size(); ++i) d_fe[i] = -mu * (fe_or[i] - lambda * fe_dc[i]);
  out.extractor_error = max_err(flat_params(model.extractor), flat_params(stepped.extractor), d_fe);

  auto scaled = [&](std::vector<double> v) {
    for (auto& x : v) x *= -mu;
    return v;
  };
  out.recognizer_error =
      max_err(flat_params(model.recognizer), flat_params(stepped.recognizer), scaled(flat_grads(g_or.recognizer)));
  out.domain_error =
      max_err(flat_params(plain.domain_head), flat_params(without_reversal(stepped).domain_head),
              scaled(flat_grads(g_dc.domain_head)));
  for (double v : flat_grads(g_dc.recognizer)) out.or_grad_from_dc = std::max(out.or_grad_from_dc, std::abs(v));
  for (double v : flat_grads(g_or.domain_head)) out.dc_grad_from_or = std::max(out.dc_grad_from_or, std::abs(v));
  for (double v : fe_or) out.g_or_norm += v * v;
  for (double v : fe_dc) out.g_dc_norm += v * v;
  out.g_or_norm = std::sqrt(out.g_or_norm);
  out.g_dc_norm = std::sqrt(out.g_dc_norm);
  return out;
}

}  // namespace mmw::test
