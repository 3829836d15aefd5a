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

// Small differentiable-layer engine: dense, single- or multi-channel 1D
// convolution, ReLU, gradient reversal, softmax + categorical cross-entropy
// and plain SGD. Every layer works on flat vectors; a Conv1d input is laid
// out channel-major ([channel][position]).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "mmw/error.hpp"
#include "mmw/random.hpp"

namespace mmw::nn {

inline constexpr double kProbabilityFloor = 1e-12;

/// floor((L - K) / S) + 1. Throws ShapeError when L < K or S == 0.
inline std::size_t conv_output_length(std::size_t length, std::size_t kernel, std::size_t stride) {
  if (stride == 0 || kernel == 0) throw ShapeError("conv: kernel and stride must be positive");
  if (length < kernel)
    throw ShapeError("conv: input length " + std::to_string(length) + " shorter than kernel " +
                     std::to_string(kernel));
  return (length - kernel) / stride + 1;
}

template <typename T>
struct Dense {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<T> weight;  // out_dim x in_dim, row-major
  std::vector<T> bias;    // out_dim

  Dense() = default;
  Dense(std::size_t in, std::size_t out) : in_dim(in), out_dim(out), weight(in * out), bias(out) {}

  bool operator==(const Dense&) const = default;
};

template <typename T>
struct Conv1d {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t input_length = 0;
  std::vector<T> weight;  // [out_channels][in_channels][kernel]
  std::vector<T> bias;    // [out_channels]

  Conv1d() = default;
  Conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t k, std::size_t s, std::size_t length)
      : in_channels(in_ch), out_channels(out_ch), kernel(k), stride(s), input_length(length),
        weight(out_ch * in_ch * k), bias(out_ch) {
    (void)conv_output_length(length, k, s);
  }

  std::size_t output_length() const { return conv_output_length(input_length, kernel, stride); }
  std::size_t input_size() const { return in_channels * input_length; }
  std::size_t output_size() const { return out_channels * output_length(); }

  bool operator==(const Conv1d&) const = default;
};

struct Relu {
  std::size_t size = 0;
  bool operator==(const Relu&) const = default;
};

/// Identity forward; backward multiplies the upstream gradient by -lambda.
struct GradReversal {
  std::size_t size = 0;
  double lambda = 1.0;
  bool operator==(const GradReversal&) const = default;
};

template <typename T>
using Layer = std::variant<Dense<T>, Conv1d<T>, Relu, GradReversal>;

/// Gradient accumulator shaped like one layer's parameters (empty for
/// parameterless layers).
template <typename T>
struct ParamGrad {
  std::vector<T> weight;
  std::vector<T> bias;

  void zero() {
    std::fill(weight.begin(), weight.end(), T(0));
    std::fill(bias.begin(), bias.end(), T(0));
  }
};

template <typename T>
using Grads = std::vector<ParamGrad<T>>;

// --- dense --------------------------------------------------------------------

template <typename T>
void dense_forward(const Dense<T>& l, std::span<const T> x, std::span<T> y) {
  if (x.size() != l.in_dim) throw ShapeError("dense_forward input", l.in_dim, x.size());
  if (y.size() != l.out_dim) throw ShapeError("dense_forward output", l.out_dim, y.size());
  for (std::size_t j = 0; j < l.out_dim; ++j) {
    const T* w = l.weight.data() + j * l.in_dim;
    T acc = l.bias[j];
    for (std::size_t i = 0; i < l.in_dim; ++i) acc += w[i] * x[i];
    y[j] = acc;
  }
}

template <typename T>
std::vector<T> dense_forward(const Dense<T>& l, std::span<const T> x) {
  std::vector<T> y(l.out_dim);
  dense_forward<T>(l, x, y);
  return y;
}

/// Adds dL/dW and dL/db into `acc`; writes dL/dx into `grad_x` unless empty.
template <typename T>
void dense_backward(const Dense<T>& l, std::span<const T> x, std::span<const T> upstream, ParamGrad<T>& acc,
                    std::span<T> grad_x) {
  if (x.size() != l.in_dim) throw ShapeError("dense_backward input", l.in_dim, x.size());
  if (upstream.size() != l.out_dim) throw ShapeError("dense_backward upstream", l.out_dim, upstream.size());
  if (!grad_x.empty()) {
    if (grad_x.size() != l.in_dim) throw ShapeError("dense_backward grad_x", l.in_dim, grad_x.size());
    std::fill(grad_x.begin(), grad_x.end(), T(0));
  }
  for (std::size_t j = 0; j < l.out_dim; ++j) {
    const T g = upstream[j];
    acc.bias[j] += g;
    T* gw = acc.weight.data() + j * l.in_dim;
    const T* w = l.weight.data() + j * l.in_dim;
    for (std::size_t i = 0; i < l.in_dim; ++i) gw[i] += g * x[i];
    if (!grad_x.empty())
      for (std::size_t i = 0; i < l.in_dim; ++i) grad_x[i] += w[i] * g;
  }
}

// --- conv1d -------------------------------------------------------------------

/// Valid cross-correlation: y[o][i] = b[o] + sum_c sum_k w[o][c][k] x[c][i*S + k].
template <typename T>
void conv1d_forward(const Conv1d<T>& l, std::span<const T> x, std::span<T> y) {
  if (x.size() != l.input_size()) throw ShapeError("conv1d_forward input", l.input_size(), x.size());
  const std::size_t out_len = l.output_length();
  if (y.size() != l.out_channels * out_len) throw ShapeError("conv1d_forward output", l.output_size(), y.size());
  for (std::size_t o = 0; o < l.out_channels; ++o) {
    T* yo = y.data() + o * out_len;
    std::fill(yo, yo + out_len, l.bias[o]);
    for (std::size_t c = 0; c < l.in_channels; ++c) {
      const T* w = l.weight.data() + (o * l.in_channels + c) * l.kernel;
      const T* xc = x.data() + c * l.input_length;
      for (std::size_t i = 0; i < out_len; ++i) {
        const T* xi = xc + i * l.stride;
        T acc = T(0);
        for (std::size_t k = 0; k < l.kernel; ++k) acc += w[k] * xi[k];
        yo[i] += acc;
      }
    }
  }
}

template <typename T>
std::vector<T> conv1d_forward(const Conv1d<T>& l, std::span<const T> x) {
  std::vector<T> y(l.output_size());
  conv1d_forward<T>(l, x, y);
  return y;
}

template <typename T>
void conv1d_backward(const Conv1d<T>& l, std::span<const T> x, std::span<const T> upstream, ParamGrad<T>& acc,
                     std::span<T> grad_x) {
  if (x.size() != l.input_size()) throw ShapeError("conv1d_backward input", l.input_size(), x.size());
  const std::size_t out_len = l.output_length();
  if (upstream.size() != l.out_channels * out_len)
    throw ShapeError("conv1d_backward upstream", l.output_size(), upstream.size());
  if (!grad_x.empty()) {
    if (grad_x.size() != x.size()) throw ShapeError("conv1d_backward grad_x", x.size(), grad_x.size());
    std::fill(grad_x.begin(), grad_x.end(), T(0));
  }
  for (std::size_t o = 0; o < l.out_channels; ++o) {
    const T* go = upstream.data() + o * out_len;
    T bsum = T(0);
    for (std::size_t i = 0; i < out_len; ++i) bsum += go[i];
    acc.bias[o] += bsum;
    for (std::size_t c = 0; c < l.in_channels; ++c) {
      const std::size_t woff = (o * l.in_channels + c) * l.kernel;
      const T* w = l.weight.data() + woff;
      T* gw = acc.weight.data() + woff;
      const T* xc = x.data() + c * l.input_length;
      for (std::size_t i = 0; i < out_len; ++i) {
        const T g = go[i];
        const T* xi = xc + i * l.stride;
        for (std::size_t k = 0; k < l.kernel; ++k) gw[k] += g * xi[k];
      }
      if (!grad_x.empty()) {
        T* gx = grad_x.data() + c * l.input_length;
        for (std::size_t i = 0; i < out_len; ++i) {
          const T g = go[i];
          T* gxi = gx + i * l.stride;
          for (std::size_t k = 0; k < l.kernel; ++k) gxi[k] += w[k] * g;
        }
      }
    }
  }
}

// --- activations ----------------------------------------------------------------

template <typename T>
std::vector<T> relu(std::span<const T> x) {
  std::vector<T> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return y;
}

/// Masks upstream where x <= 0 (subgradient 0 at exactly 0).
template <typename T>
std::vector<T> relu_backward(std::span<const T> x, std::span<const T> upstream) {
  if (x.size() != upstream.size()) throw ShapeError("relu_backward", x.size(), upstream.size());
  std::vector<T> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > T(0) ? upstream[i] : T(0);
  return g;
}

template <typename T>
std::vector<T> grl_forward(std::span<const T> x) {
  return {x.begin(), x.end()};
}

template <typename T>
std::vector<T> grl_backward(std::span<const T> upstream, double lambda) {
  std::vector<T> g(upstream.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<T>(-lambda) * upstream[i];
  return g;
}

// --- softmax / loss -------------------------------------------------------------

template <typename T>
void softmax(std::span<const T> logits, std::span<T> probs) {
  if (logits.size() != probs.size()) throw ShapeError("softmax", logits.size(), probs.size());
  if (logits.empty()) return;
  const T mx = *std::max_element(logits.begin(), logits.end());
  T sum = T(0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - mx);
    sum += probs[i];
  }
  for (auto& p : probs) p /= sum;
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
  std::vector<T> p(logits.size());
  softmax<T>(logits, p);
  return p;
}

/// -sum_i t_i log(max(p_i, 1e-12))
template <typename T>
double cross_entropy(std::span<const T> probs, std::span<const T> target) {
  if (probs.size() != target.size()) throw ShapeError("cross_entropy", probs.size(), target.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (target[i] == T(0)) continue;
    loss -= static_cast<double>(target[i]) * std::log(std::max(static_cast<double>(probs[i]), kProbabilityFloor));
  }
  return loss;
}

/// Cross-entropy against a one-hot target given by its index.
template <typename T>
double cross_entropy(std::span<const T> probs, std::size_t target) {
  if (target >= probs.size()) throw ShapeError("cross_entropy target index out of range");
  return -std::log(std::max(static_cast<double>(probs[target]), kProbabilityFloor));
}

// --- SGD ------------------------------------------------------------------------

/// theta <- theta - mu * g
template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, double mu) {
  if (params.size() != grads.size()) throw ShapeError("sgd_step", params.size(), grads.size());
  const T m = static_cast<T>(mu);
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= m * grads[i];
}

// --- layer helpers --------------------------------------------------------------

template <typename T>
std::size_t input_size(const Layer<T>& layer) {
  return std::visit(
      [](const auto& l) -> std::size_t {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, Dense<T>>) return l.in_dim;
        else if constexpr (std::is_same_v<L, Conv1d<T>>) return l.input_size();
        else return l.size;
      },
      layer);
}

template <typename T>
std::size_t output_size(const Layer<T>& layer) {
  return std::visit(
      [](const auto& l) -> std::size_t {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, Dense<T>>) return l.out_dim;
        else if constexpr (std::is_same_v<L, Conv1d<T>>) return l.output_size();
        else return l.size;
      },
      layer);
}

template <typename T>
bool has_params(const Layer<T>& layer) {
  return std::holds_alternative<Dense<T>>(layer) || std::holds_alternative<Conv1d<T>>(layer);
}

/// Calls f(weight_vector, bias_vector) for parameterized layers.
template <typename T, typename F>
void with_params(Layer<T>& layer, F&& f) {
  if (auto* d = std::get_if<Dense<T>>(&layer)) f(d->weight, d->bias);
  else if (auto* c = std::get_if<Conv1d<T>>(&layer)) f(c->weight, c->bias);
}

template <typename T, typename F>
void with_params(const Layer<T>& layer, F&& f) {
  if (const auto* d = std::get_if<Dense<T>>(&layer)) f(d->weight, d->bias);
  else if (const auto* c = std::get_if<Conv1d<T>>(&layer)) f(c->weight, c->bias);
}

template <typename T>
std::size_t parameter_count(const Layer<T>& layer) {
  std::size_t n = 0;
  with_params(layer, [&](const auto& w, const auto& b) { n = w.size() + b.size(); });
  return n;
}

/// Glorot-uniform weights in [-sqrt(6/(fan_in+fan_out)), +...], zero biases.
template <typename T>
void glorot_init(Layer<T>& layer, Rng& rng) {
  std::size_t fan_in = 0, fan_out = 0;
  if (const auto* d = std::get_if<Dense<T>>(&layer)) {
    fan_in = d->in_dim;
    fan_out = d->out_dim;
  } else if (const auto* c = std::get_if<Conv1d<T>>(&layer)) {
    fan_in = c->in_channels * c->kernel;
    fan_out = c->out_channels * c->kernel;
  } else {
    return;
  }
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  with_params(layer, [&](auto& w, auto& b) {
    for (auto& v : w) v = static_cast<T>(dist(rng));
    std::fill(b.begin(), b.end(), T(0));
  });
}

template <typename U, typename T>
Layer<U> cast_layer(const Layer<T>& layer) {
  auto conv = [](const std::vector<T>& v) { return std::vector<U>(v.begin(), v.end()); };
  return std::visit(
      [&](const auto& l) -> Layer<U> {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, Dense<T>>) {
          Dense<U> d;
          d.in_dim = l.in_dim;
          d.out_dim = l.out_dim;
          d.weight = conv(l.weight);
          d.bias = conv(l.bias);
          return d;
        } else if constexpr (std::is_same_v<L, Conv1d<T>>) {
          Conv1d<U> c;
          c.in_channels = l.in_channels;
          c.out_channels = l.out_channels;
          c.kernel = l.kernel;
          c.stride = l.stride;
          c.input_length = l.input_length;
          c.weight = conv(l.weight);
          c.bias = conv(l.bias);
          return c;
        } else {
          return l;
        }
      },
      layer);
}

// --- stack ----------------------------------------------------------------------

/// Per-call activations and scratch for one Stack. Reusable across samples.
template <typename T>
struct Tape {
  std::vector<std::vector<T>> acts;  // acts[0] = input, acts[i+1] = output of layer i
  std::vector<T> grad_a;
  std::vector<T> grad_b;
};

/// An ordered chain of layers.
template <typename T>
class Stack {
 public:
  std::vector<Layer<T>> layers;

  Stack() = default;
  explicit Stack(std::vector<Layer<T>> ls) : layers(std::move(ls)) { check_shapes(); }

  /// Throws ShapeError when consecutive layers disagree.
  void check_shapes() const {
    for (std::size_t i = 1; i < layers.size(); ++i)
      if (nn::output_size(layers[i - 1]) != nn::input_size(layers[i]))
        throw ShapeError("stack layer " + std::to_string(i), nn::output_size(layers[i - 1]),
                         nn::input_size(layers[i]));
  }

  std::size_t input_size() const { return layers.empty() ? 0 : nn::input_size(layers.front()); }
  std::size_t output_size() const { return layers.empty() ? 0 : nn::output_size(layers.back()); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += nn::parameter_count(l);
    return n;
  }

  Grads<T> zero_grads() const {
    Grads<T> g(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i)
      with_params(layers[i], [&](const auto& w, const auto& b) {
        g[i].weight.assign(w.size(), T(0));
        g[i].bias.assign(b.size(), T(0));
      });
    return g;
  }

  /// Runs the chain; the output stays in tape.acts.back().
  template <typename U>
  std::span<const T> forward(std::span<const U> x, Tape<T>& tape) const {
    tape.acts.resize(layers.size() + 1);
    auto& in = tape.acts[0];
    in.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) in[i] = static_cast<T>(x[i]);
    if (!layers.empty() && x.size() != input_size()) throw ShapeError("stack input", input_size(), x.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& src = tape.acts[i];
      auto& dst = tape.acts[i + 1];
      dst.resize(nn::output_size(layers[i]));
      std::visit(
          [&](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, Dense<T>>) {
              dense_forward<T>(l, src, dst);
            } else if constexpr (std::is_same_v<L, Conv1d<T>>) {
              conv1d_forward<T>(l, src, dst);
            } else if constexpr (std::is_same_v<L, Relu>) {
              for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k] > T(0) ? src[k] : T(0);
            } else {
              std::copy(src.begin(), src.end(), dst.begin());
            }
          },
          layers[i]);
    }
    return tape.acts.back();
  }

  /// Back-propagates `upstream` (dL/d output) through the tape recorded by
  /// forward(), adding parameter gradients into `acc`. When `grad_input` is
  /// non-null it receives dL/d input.
  void backward(Tape<T>& tape, std::span<const T> upstream, Grads<T>& acc, std::vector<T>* grad_input) const {
    if (upstream.size() != output_size()) throw ShapeError("stack upstream", output_size(), upstream.size());
    auto& cur = tape.grad_a;
    auto& nxt = tape.grad_b;
    cur.assign(upstream.begin(), upstream.end());
    for (std::size_t li = layers.size(); li-- > 0;) {
      const auto& x = tape.acts[li];
      const bool need_dx = li > 0 || grad_input != nullptr;
      nxt.resize(need_dx ? x.size() : 0);
      std::visit(
          [&](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, Dense<T>>) {
              dense_backward<T>(l, x, cur, acc[li], nxt);
            } else if constexpr (std::is_same_v<L, Conv1d<T>>) {
              conv1d_backward<T>(l, x, cur, acc[li], nxt);
            } else if constexpr (std::is_same_v<L, Relu>) {
              for (std::size_t k = 0; k < nxt.size(); ++k) nxt[k] = x[k] > T(0) ? cur[k] : T(0);
            } else {
              const T s = static_cast<T>(-l.lambda);
              for (std::size_t k = 0; k < nxt.size(); ++k) nxt[k] = s * cur[k];
            }
          },
          layers[li]);
      std::swap(cur, nxt);
    }
    if (grad_input) *grad_input = cur;
  }

  void apply_sgd(const Grads<T>& grads, double mu) {
    for (std::size_t i = 0; i < layers.size(); ++i)
      with_params(layers[i], [&](auto& w, auto& b) {
        sgd_step<T>(w, grads[i].weight, mu);
        sgd_step<T>(b, grads[i].bias, mu);
      });
  }

  void init(Rng& rng) {
    for (auto& l : layers) glorot_init(l, rng);
  }

  void set_grl_lambda(double lambda) {
    for (auto& l : layers)
      if (auto* g = std::get_if<GradReversal>(&l)) g->lambda = lambda;
  }

  template <typename U>
  Stack<U> cast() const {
    Stack<U> s;
    for (const auto& l : layers) s.layers.push_back(cast_layer<U>(l));
    return s;
  }

  bool operator==(const Stack&) const = default;
};

}  // namespace mmw::nn
