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

#include "mmw/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "mmw/error.hpp"
#include "mmw/ingest.hpp"
#include "mmw/random.hpp"
#include "mmw/textfmt.hpp"

namespace mmw {

void SampleMatrix::push_back(std::span<const double> x) {
  if (dim == 0) dim = x.size();
  if (x.size() != dim) throw ShapeError("SampleMatrix row", dim, x.size());
  values.insert(values.end(), x.begin(), x.end());
}

void ExampleSet::push_back(std::span<const double> x, std::size_t label) {
  samples.push_back(x);
  labels.push_back(label);
}

ExampleSet ExampleSet::subset(std::span<const std::size_t> indices) const {
  ExampleSet out;
  out.samples.dim = samples.dim;
  for (auto i : indices) out.push_back(samples.row(i), labels[i]);
  return out;
}

DomainPair make_domain_pair(ExampleSet source, const ExampleSet& target, double fraction, std::size_t num_classes,
                            std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("labeled fraction must lie in [0, 1]");
  DomainPair pair;
  pair.source = std::move(source);
  pair.target = target.samples;
  pair.revealed_fraction = fraction;
  pair.revealed.samples.dim = target.samples.dim;
  if (fraction > 0.0) pair.revealed = target.subset(stratified_sample_indices(target.labels, num_classes, fraction, seed));
  return pair;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (!(grl_lambda >= 0.0) || !std::isfinite(grl_lambda)) throw ConfigError("grl_lambda must be >= 0");
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,object_loss,domain_loss,train_f1\n";
  for (const auto& h : history) {
    out += std::to_string(h.epoch) + "," + format_roundtrip(h.object_loss) + "," +
           (h.domain_loss ? format_roundtrip(*h.domain_loss) : std::string()) + "," + format_roundtrip(h.train_f1) +
           "\n";
  }
  return out;
}

template <typename T>
ModelGrads<T> ModelGrads<T>::zeros(const BasicModel<T>& m) {
  return {m.extractor.zero_grads(), m.recognizer.zero_grads(), m.domain_head.zero_grads()};
}

template <typename T>
void ModelGrads<T>::zero() {
  for (auto* g : {&extractor, &recognizer, &domain_head})
    for (auto& p : *g) p.zero();
}

namespace {

template <typename T>
std::size_t argmax(std::span<const T> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

/// (softmax(logits) - onehot(label)) * scale, returning the loss.
template <typename T>
double softmax_ce_grad(std::span<const T> logits, std::size_t label, T scale, std::vector<T>& probs,
                       std::vector<T>& dlogits) {
  probs.resize(logits.size());
  nn::softmax<T>(logits, probs);
  const double loss = nn::cross_entropy<T>(probs, label);
  dlogits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) dlogits[i] = (probs[i] - (i == label ? T(1) : T(0))) * scale;
  return loss;
}

}  // namespace

template <typename T>
StepStats compute_gradients(const BasicModel<T>& model, std::span<const StepItem> items, ModelGrads<T>& grads,
                            StepWorkspace<T>& ws) {
  StepStats st;
  for (const auto& it : items) {
    st.object_items += it.object_label.has_value();
    st.domain_items += it.domain_label.has_value();
  }
  if (st.domain_items > 0 && !model.has_domain_head())
    throw ShapeError("compute_gradients: domain-labeled items need a domain head");
  const T obj_scale = st.object_items ? T(1) / static_cast<T>(st.object_items) : T(0);
  const T dom_scale = st.domain_items ? T(1) / static_cast<T>(st.domain_items) : T(0);

  for (const auto& it : items) {
    if (!it.object_label && !it.domain_label) continue;
    auto feat = model.extractor.forward(it.x, ws.tapes.extractor);
    ws.grad_feat.assign(feat.size(), T(0));
    if (it.object_label) {
      auto logits = model.recognizer.forward(feat, ws.tapes.recognizer);
      st.object_loss += softmax_ce_grad<T>(logits, *it.object_label, obj_scale, ws.probs, ws.dlogits);
      st.correct += argmax<T>(ws.probs) == *it.object_label;
      model.recognizer.backward(ws.tapes.recognizer, ws.dlogits, grads.recognizer, &ws.grad_feat);
    }
    if (it.domain_label) {
      auto logits = model.domain_head.forward(feat, ws.tapes.domain);
      st.domain_loss += softmax_ce_grad<T>(logits, *it.domain_label, dom_scale, ws.probs, ws.dlogits);
      model.domain_head.backward(ws.tapes.domain, ws.dlogits, grads.domain_head, &ws.grad_feat_dc);
      for (std::size_t k = 0; k < ws.grad_feat.size(); ++k) ws.grad_feat[k] += ws.grad_feat_dc[k];
    }
    model.extractor.backward(ws.tapes.extractor, ws.grad_feat, grads.extractor, nullptr);
  }
  if (st.object_items) st.object_loss /= static_cast<double>(st.object_items);
  if (st.domain_items) st.domain_loss /= static_cast<double>(st.domain_items);
  return st;
}

template <typename T>
void apply_gradients(BasicModel<T>& model, const ModelGrads<T>& grads, double mu, bool update_domain_head) {
  model.extractor.apply_sgd(grads.extractor, mu);
  model.recognizer.apply_sgd(grads.recognizer, mu);
  if (update_domain_head) model.domain_head.apply_sgd(grads.domain_head, mu);
}

namespace {

/// Endless reshuffling iterator over [0, n).
class CyclicSampler {
 public:
  CyclicSampler(std::size_t n, std::uint64_t seed) : order_(n), pos_(n), rng_(seed) {
    std::iota(order_.begin(), order_.end(), 0);
  }

  void draw(std::size_t k, std::vector<std::size_t>& out) {
    out.clear();
    for (std::size_t i = 0; i < k; ++i) {
      if (pos_ == order_.size()) {
        std::shuffle(order_.begin(), order_.end(), rng_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t pos_;
  Rng rng_;
};

template <typename T>
TrainRun<T> run_regime(BasicModel<T> model, const ExampleSet& source, const SampleMatrix* target,
                       const ExampleSet* revealed, const TrainConfig& cfg) {
  cfg.validate();
  if (source.empty()) throw EmptyInputError("training: empty source set");
  if (source.samples.dim != model.input_size())
    throw ShapeError("training input", model.input_size(), source.samples.dim);
  const bool adversarial = target != nullptr;
  if (adversarial) {
    if (target->empty()) throw EmptyInputError("training: empty target set");
    if (!model.has_domain_head()) throw ShapeError("adversarial training needs a model with a domain head");
    model.set_grl_lambda(cfg.grl_lambda);
  }

  const std::size_t n = source.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng source_rng(cfg.seed);
  std::optional<CyclicSampler> target_it, revealed_it;
  if (adversarial) target_it.emplace(target->size(), derive_seed(cfg.seed, "target"));
  if (revealed) revealed_it.emplace(revealed->size(), derive_seed(cfg.seed, "revealed"));

  auto grads = ModelGrads<T>::zeros(model);
  StepWorkspace<T> ws;
  std::vector<StepItem> items;
  std::vector<std::size_t> drawn;

  TrainRun<T> run;
  run.config = cfg;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), source_rng);
    double obj_loss = 0.0, dom_loss = 0.0;
    std::size_t batches = 0, correct = 0, seen = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const std::size_t m = stop - start;
      items.clear();
      for (std::size_t i = start; i < stop; ++i) {
        const auto idx = order[i];
        items.push_back({source.samples.row(idx), source.labels[idx],
                         adversarial ? std::optional<std::size_t>(kSourceDomain) : std::nullopt});
      }
      if (revealed_it) {
        revealed_it->draw(m, drawn);
        for (auto idx : drawn) items.push_back({revealed->samples.row(idx), revealed->labels[idx], std::nullopt});
      }
      if (target_it) {
        target_it->draw(m, drawn);
        for (auto idx : drawn) items.push_back({target->row(idx), std::nullopt, kTargetDomain});
      }
      grads.zero();
      const auto st = compute_gradients<T>(model, items, grads, ws);
      apply_gradients(model, grads, cfg.learning_rate, adversarial);
      obj_loss += st.object_loss;
      dom_loss += st.domain_loss;
      correct += st.correct;
      seen += st.object_items;
      ++batches;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.object_loss = obj_loss / static_cast<double>(batches);
    if (adversarial) rec.domain_loss = dom_loss / static_cast<double>(batches);
    rec.train_f1 = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
    run.history.push_back(rec);
  }
  run.model = std::move(model);
  return run;
}

}  // namespace

template <typename T>
TrainRun<T> train_supervised(BasicModel<T> model, const ExampleSet& data, const TrainConfig& cfg) {
  return run_regime<T>(std::move(model), data, nullptr, nullptr, cfg);
}

template <typename T>
TrainRun<T> train_uda(BasicModel<T> model, const DomainPair& pair, const TrainConfig& cfg) {
  return run_regime<T>(std::move(model), pair.source, &pair.target, nullptr, cfg);
}

template <typename T>
TrainRun<T> train_ssda(BasicModel<T> model, const DomainPair& pair, const TrainConfig& cfg) {
  if (!(pair.revealed_fraction > 0.0 && pair.revealed_fraction <= 1.0))
    throw ConfigError("semi-supervised adaptation needs a labeled fraction in (0, 1]");
  if (pair.revealed.empty()) throw EmptyInputError("semi-supervised adaptation: no revealed target labels");
  return run_regime<T>(std::move(model), pair.source, &pair.target, &pair.revealed, cfg);
}

// --- checkpoint -----------------------------------------------------------------

namespace {

using ojson = nlohmann::ordered_json;

const char* group_name(ParamGroup g) {
  switch (g) {
    case ParamGroup::FeatureExtractor: return "feature_extractor";
    case ParamGroup::ObjectRecognizer: return "object_recognizer";
    case ParamGroup::DomainClassifier: return "domain_classifier";
  }
  return "?";
}

template <typename T>
ojson layer_json(const nn::Layer<T>& layer, ParamGroup group) {
  ojson j;
  j["group"] = group_name(group);
  std::visit(
      [&](const auto& l) {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, nn::Dense<T>>) {
          j["type"] = "dense";
          j["shape"] = {l.in_dim, l.out_dim};
        } else if constexpr (std::is_same_v<L, nn::Conv1d<T>>) {
          j["type"] = "conv1d";
          j["shape"] = {l.in_channels, l.out_channels, l.kernel, l.stride, l.input_length};
        } else if constexpr (std::is_same_v<L, nn::Relu>) {
          j["type"] = "relu";
          j["shape"] = {l.size};
        } else {
          j["type"] = "grl";
          j["shape"] = {l.size};
          j["lambda"] = l.lambda;
        }
      },
      layer);
  if (nn::has_params(layer)) {
    ojson params = ojson::array();
    nn::with_params(layer, [&](const auto& w, const auto& b) {
      for (auto v : w) params.push_back(static_cast<double>(v));
      for (auto v : b) params.push_back(static_cast<double>(v));
    });
    j["params"] = std::move(params);
  }
  return j;
}

template <typename T>
nn::Layer<T> layer_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  auto need = [&](std::size_t n) {
    if (shape.size() != n) throw CorruptFileError(0, "layer '" + type + "' has a malformed shape");
  };
  nn::Layer<T> layer;
  if (type == "dense") {
    need(2);
    layer = nn::Dense<T>(shape[0], shape[1]);
  } else if (type == "conv1d") {
    need(5);
    layer = nn::Conv1d<T>(shape[0], shape[1], shape[2], shape[3], shape[4]);
  } else if (type == "relu") {
    need(1);
    layer = nn::Relu{shape[0]};
  } else if (type == "grl") {
    need(1);
    layer = nn::GradReversal{shape[0], j.at("lambda").get<double>()};
  } else {
    throw CorruptFileError(0, "unknown layer type '" + type + "'");
  }
  if (nn::has_params(layer)) {
    const auto& params = j.at("params");
    if (params.size() != nn::parameter_count(layer))
      throw CorruptFileError(0, "layer '" + type + "' parameter count mismatch");
    std::size_t k = 0;
    nn::with_params(layer, [&](auto& w, auto& b) {
      for (auto& v : w) v = static_cast<T>(params[k++].template get<double>());
      for (auto& v : b) v = static_cast<T>(params[k++].template get<double>());
    });
  }
  return layer;
}

}  // namespace

template <typename T>
std::string checkpoint_json(const BasicModel<T>& model) {
  ojson doc;
  doc["schema_version"] = kCheckpointVersion;
  doc["kind"] = std::string(to_string(model.kind));
  doc["labelset"] = model.labels.names();
  doc["domain_labels"] = {{"source", kSourceDomain}, {"target", kTargetDomain}};
  doc["scaler"] = {{"mean", model.scaler.mean}, {"std", model.scaler.std}, {"epsilon", model.scaler.epsilon}};
  ojson layers = ojson::array();
  for (auto g : {ParamGroup::FeatureExtractor, ParamGroup::ObjectRecognizer, ParamGroup::DomainClassifier})
    for (const auto& l : model.group(g).layers) layers.push_back(layer_json(l, g));
  doc["layers"] = std::move(layers);
  return doc.dump(1) + "\n";
}

template <typename T>
BasicModel<T> parse_checkpoint(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw CorruptFileError(e.byte, e.what());
  }
  try {
    const auto version = doc.at("schema_version").get<long long>();
    if (version != kCheckpointVersion) throw VersionMismatchError(version, kCheckpointVersion);
    BasicModel<T> m;
    m.kind = parse_model_kind(doc.at("kind").get<std::string>());
    m.labels = LabelSet(doc.at("labelset").get<std::vector<std::string>>());
    const auto& dl = doc.at("domain_labels");
    if (dl.at("source").get<std::size_t>() != kSourceDomain || dl.at("target").get<std::size_t>() != kTargetDomain)
      throw CorruptFileError(0, "unsupported domain label convention");
    const auto& sc = doc.at("scaler");
    m.scaler.mean = sc.at("mean").get<std::vector<double>>();
    m.scaler.std = sc.at("std").get<std::vector<double>>();
    m.scaler.epsilon = sc.at("epsilon").get<double>();
    for (const auto& lj : doc.at("layers")) {
      const auto g = lj.at("group").get<std::string>();
      auto layer = layer_from_json<T>(lj);
      if (g == group_name(ParamGroup::FeatureExtractor)) m.extractor.layers.push_back(std::move(layer));
      else if (g == group_name(ParamGroup::ObjectRecognizer)) m.recognizer.layers.push_back(std::move(layer));
      else if (g == group_name(ParamGroup::DomainClassifier)) m.domain_head.layers.push_back(std::move(layer));
      else throw CorruptFileError(0, "unknown parameter group '" + g + "'");
    }
    m.extractor.check_shapes();
    m.recognizer.check_shapes();
    m.domain_head.check_shapes();
    if (m.extractor.layers.empty() || m.recognizer.layers.empty() ||
        m.recognizer.input_size() != m.extractor.output_size() ||
        (m.has_domain_head() && m.domain_head.input_size() != m.extractor.output_size()))
      throw CorruptFileError(0, "layer groups do not connect");
    if (m.labels.size() != m.num_classes()) throw CorruptFileError(0, "labelset size does not match recognizer");
    return m;
  } catch (const json::exception& e) {
    throw CorruptFileError(0, e.what());
  } catch (const ShapeError& e) {
    throw CorruptFileError(0, e.what());
  } catch (const InconsistentLabelsetError& e) {
    throw CorruptFileError(0, e.what());
  }
}

template <typename T>
void save_checkpoint(const BasicModel<T>& model, const std::filesystem::path& path) {
  write_file(path, checkpoint_json(model));
}

template <typename T>
BasicModel<T> load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint<T>(read_file(path));
}

#define MMW_INSTANTIATE(T)                                                                                     \
  template struct ModelGrads<T>;                                                                              \
  template StepStats compute_gradients<T>(const BasicModel<T>&, std::span<const StepItem>, ModelGrads<T>&,    \
                                          StepWorkspace<T>&);                                                 \
  template void apply_gradients<T>(BasicModel<T>&, const ModelGrads<T>&, double, bool);                       \
  template TrainRun<T> train_supervised<T>(BasicModel<T>, const ExampleSet&, const TrainConfig&);             \
  template TrainRun<T> train_uda<T>(BasicModel<T>, const DomainPair&, const TrainConfig&);                   \
  template TrainRun<T> train_ssda<T>(BasicModel<T>, const DomainPair&, const TrainConfig&);                  \
  template std::string checkpoint_json<T>(const BasicModel<T>&);                                              \
  template BasicModel<T> parse_checkpoint<T>(std::string_view);                                               \
  template void save_checkpoint<T>(const BasicModel<T>&, const std::filesystem::path&);                       \
  template BasicModel<T> load_checkpoint<T>(const std::filesystem::path&);

MMW_INSTANTIATE(float)
MMW_INSTANTIATE(double)

#undef MMW_INSTANTIATE

}  // namespace mmw
