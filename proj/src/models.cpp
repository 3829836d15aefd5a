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

#include "mmw/models.hpp"

#include "mmw/error.hpp"

namespace mmw {

std::string_view to_string(ModelKind k) { return k == ModelKind::Fcl ? "fcl" : "cnn"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "fcl") return ModelKind::Fcl;
  if (text == "cnn") return ModelKind::Cnn;
  throw DataError("unknown model kind '" + std::string(text) + "'");
}

namespace {

template <typename T>
nn::Layer<T> dense(std::size_t in, std::size_t out) {
  return nn::Dense<T>(in, out);
}

nn::Relu relu(std::size_t n) { return nn::Relu{n}; }

}  // namespace

template <typename T>
BasicModel<T> build_fcl(std::size_t input_dim, std::size_t num_classes, std::uint64_t seed, bool domain_head) {
  if (input_dim == 0) throw ShapeError("build_fcl: input_dim must be positive");
  if (num_classes < 2) throw ShapeError("build_fcl: need at least 2 classes");
  constexpr std::size_t kHidden = 16;
  BasicModel<T> m;
  m.kind = ModelKind::Fcl;
  m.extractor = nn::Stack<T>({dense<T>(input_dim, kHidden), relu(kHidden), dense<T>(kHidden, kHidden), relu(kHidden)});
  m.recognizer = nn::Stack<T>({dense<T>(kHidden, num_classes)});
  if (domain_head)
    m.domain_head = nn::Stack<T>({nn::GradReversal{kHidden, 1.0}, dense<T>(kHidden, kHidden), relu(kHidden),
                                  dense<T>(kHidden, 2)});
  Rng rng(seed);
  m.extractor.init(rng);
  m.recognizer.init(rng);
  m.domain_head.init(rng);
  return m;
}

template <typename T>
BasicModel<T> build_cnn(std::size_t num_classes, std::uint64_t seed, const CnnOptions& opt) {
  if (num_classes < 2) throw ShapeError("build_cnn: need at least 2 classes");
  if (opt.conv_layers == 0 || opt.channels == 0) throw ShapeError("build_cnn: need at least one conv layer and channel");
  BasicModel<T> m;
  m.kind = ModelKind::Cnn;

  std::vector<nn::Layer<T>> ext;
  std::size_t length = opt.input_length;
  for (std::size_t i = 0; i < opt.conv_layers; ++i) {
    nn::Conv1d<T> conv(i == 0 ? 1 : opt.channels, opt.channels, opt.kernel, opt.stride, length);
    length = conv.output_length();
    const std::size_t out = conv.output_size();
    ext.emplace_back(std::move(conv));
    ext.emplace_back(relu(out));
  }
  const std::size_t feat = opt.channels * length;
  m.extractor = nn::Stack<T>(std::move(ext));
  m.recognizer = nn::Stack<T>({dense<T>(feat, 32), relu(32), dense<T>(32, 16), relu(16), dense<T>(16, num_classes)});
  m.domain_head = nn::Stack<T>({nn::GradReversal{feat, 1.0}, dense<T>(feat, 32), relu(32), dense<T>(32, 2)});

  const CnnOptions reference{};
  if (opt.input_length == reference.input_length && opt.kernel == reference.kernel &&
      opt.stride == reference.stride && opt.conv_layers == reference.conv_layers && opt.channels == 1) {
    // Reference architecture: 640 -> 311 -> 146 -> 64, heads 64/32/16/C and 64/32/2.
    const std::vector<std::size_t> expected_conv{311, 146, 64};
    const std::vector<std::size_t> expected_or{64, 32, 16, num_classes};
    const std::vector<std::size_t> expected_dc{64, 32, 2};
    if (conv_lengths(m) != expected_conv || head_widths(m.recognizer) != expected_or ||
        head_widths(m.domain_head) != expected_dc)
      throw std::logic_error("build_cnn: reference architecture shapes violated");
  }

  Rng rng(seed);
  m.extractor.init(rng);
  m.recognizer.init(rng);
  m.domain_head.init(rng);
  return m;
}

template <typename T>
std::vector<std::size_t> conv_lengths(const BasicModel<T>& model) {
  std::vector<std::size_t> out;
  for (const auto& l : model.extractor.layers)
    if (const auto* c = std::get_if<nn::Conv1d<T>>(&l)) out.push_back(c->output_length());
  return out;
}

template <typename T>
std::vector<std::size_t> head_widths(const nn::Stack<T>& head) {
  std::vector<std::size_t> out;
  if (head.layers.empty()) return out;
  out.push_back(head.input_size());
  for (const auto& l : head.layers)
    if (const auto* d = std::get_if<nn::Dense<T>>(&l)) out.push_back(d->out_dim);
  return out;
}

template <typename T>
ForwardResult<T> forward(const BasicModel<T>& model, std::span<const double> x, ModelTapes<T>& tapes) {
  if (x.size() != model.input_size()) throw ShapeError("forward input", model.input_size(), x.size());
  ForwardResult<T> r;
  auto feat = model.extractor.forward(x, tapes.extractor);
  r.features.assign(feat.begin(), feat.end());
  auto logits = model.recognizer.forward(feat, tapes.recognizer);
  r.class_probs = nn::softmax<T>(logits);
  if (model.has_domain_head()) {
    auto dl = model.domain_head.forward(feat, tapes.domain);
    r.domain_probs = nn::softmax<T>(dl);
  }
  return r;
}

template <typename T>
ForwardResult<T> forward(const BasicModel<T>& model, std::span<const double> x) {
  ModelTapes<T> tapes;
  return forward(model, x, tapes);
}

#define MMW_INSTANTIATE(T)                                                                                  \
  template BasicModel<T> build_fcl<T>(std::size_t, std::size_t, std::uint64_t, bool);                      \
  template BasicModel<T> build_cnn<T>(std::size_t, std::uint64_t, const CnnOptions&);                      \
  template std::vector<std::size_t> conv_lengths<T>(const BasicModel<T>&);                                 \
  template std::vector<std::size_t> head_widths<T>(const nn::Stack<T>&);                                   \
  template ForwardResult<T> forward<T>(const BasicModel<T>&, std::span<const double>);                     \
  template ForwardResult<T> forward<T>(const BasicModel<T>&, std::span<const double>, ModelTapes<T>&);

MMW_INSTANTIATE(float)
MMW_INSTANTIATE(double)

#undef MMW_INSTANTIATE

}  // namespace mmw
