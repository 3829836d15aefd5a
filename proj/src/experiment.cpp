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

#include "mmw/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "mmw/error.hpp"
#include "mmw/ingest.hpp"
#include "mmw/metrics.hpp"
#include "mmw/random.hpp"
#include "mmw/textfmt.hpp"

namespace mmw {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Fcl: return "FCL";
    case Method::Cnn: return "CNN";
    case Method::Uda: return "UDA";
    case Method::Ssda10: return "SSDA10";
    case Method::Ssda20: return "SSDA20";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  std::string up;
  for (char c : text) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto m : kAllMethods)
    if (to_string(m) == up) return m;
  throw ConfigError("unknown method '" + std::string(text) + "' (expected FCL, CNN, UDA, SSDA10 or SSDA20)");
}

std::string_view to_string(Precision p) { return p == Precision::Float ? "float" : "double"; }

Precision parse_precision(std::string_view text) {
  if (text == "float") return Precision::Float;
  if (text == "double") return Precision::Double;
  throw ConfigError("unknown precision '" + std::string(text) + "' (expected float or double)");
}

bool is_adaptation(Method m) { return m == Method::Uda || m == Method::Ssda10 || m == Method::Ssda20; }

ModelKind model_kind(Method m) { return m == Method::Fcl ? ModelKind::Fcl : ModelKind::Cnn; }

double labeled_fraction(Method m) {
  switch (m) {
    case Method::Ssda10: return 0.1;
    case Method::Ssda20: return 0.2;
    default: return 0.0;
  }
}

// --- data preparation ---------------------------------------------------------------

namespace {

struct ExampleRef {
  std::size_t recording;  // position within the domain
  std::size_t start;
};

struct DomainData {
  std::vector<std::vector<FeatureRow>> rows;  // per recording
  std::vector<std::size_t> recording_labels;
  std::vector<ExampleRef> examples;
  std::vector<std::size_t> example_labels;
  std::vector<std::size_t> train;  // example positions
  std::vector<std::size_t> test;
};

DomainData collect(const LabeledFrameCollection& data, const DomainTag& domain, std::size_t length,
                   const PipelineConfig& p) {
  DomainData d;
  const auto recs = data.of_domain(domain);
  if (recs.empty()) throw MissingDomainError(domain.str());
  for (std::size_t r = 0; r < recs.size(); ++r) {
    d.rows.push_back(recording_features(recs[r]->frames, p.schema));
    d.recording_labels.push_back(recs[r]->label);
    const auto n = d.rows.back().size();
    const auto starts = length == 1 ? window_starts(n, 1, 1) : window_starts(n, length, p.stride);
    for (auto s : starts) {
      d.examples.push_back({r, s});
      d.example_labels.push_back(recs[r]->label);
    }
  }
  return d;
}

void split(DomainData& d, std::size_t num_classes, const PipelineConfig& p, std::uint64_t seed,
           const LabelSet& labels) {
  if (!p.split_by_recording) {
    auto s = stratified_split_indices(d.example_labels, num_classes, p.split_ratio, seed, &labels);
    d.train = std::move(s.train);
    d.test = std::move(s.test);
    return;
  }
  const auto s = stratified_split_indices(d.recording_labels, num_classes, p.split_ratio, seed, &labels);
  std::vector<char> in_train(d.rows.size(), 0);
  for (auto r : s.train) in_train[r] = 1;
  for (std::size_t i = 0; i < d.examples.size(); ++i) (in_train[d.examples[i].recording] ? d.train : d.test).push_back(i);
}

ScalerParams fit_on_train(const DomainData& d, std::size_t length) {
  std::vector<std::vector<char>> covered(d.rows.size());
  for (std::size_t r = 0; r < d.rows.size(); ++r) covered[r].assign(d.rows[r].size(), 0);
  for (auto i : d.train) {
    const auto& e = d.examples[i];
    for (std::size_t k = 0; k < length; ++k) covered[e.recording][e.start + k] = 1;
  }
  std::vector<FeatureRow> rows;
  for (std::size_t r = 0; r < d.rows.size(); ++r)
    for (std::size_t k = 0; k < d.rows[r].size(); ++k)
      if (covered[r][k]) rows.push_back(d.rows[r][k]);
  return fit_scaler(rows);
}

ExampleSet materialize(const DomainData& d, const std::vector<std::vector<FeatureRow>>& scaled,
                       std::span<const std::size_t> which, std::size_t length, std::size_t dim) {
  ExampleSet out;
  out.samples.dim = length * dim;
  out.samples.values.reserve(which.size() * length * dim);
  out.labels.reserve(which.size());
  for (auto i : which) {
    const auto& e = d.examples[i];
    for (std::size_t k = 0; k < length; ++k) {
      const auto& row = scaled[e.recording][e.start + k];
      out.samples.values.insert(out.samples.values.end(), row.begin(), row.end());
    }
    out.labels.push_back(d.example_labels[i]);
  }
  return out;
}

PreparedDomain finish(const DomainData& d, const ScalerParams& scaler, std::size_t length, std::size_t dim) {
  std::vector<std::vector<FeatureRow>> scaled(d.rows.size());
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    scaled[r].reserve(d.rows[r].size());
    for (const auto& row : d.rows[r]) scaled[r].push_back(apply_scaler(scaler, row));
  }
  return {materialize(d, scaled, d.train, length, dim), materialize(d, scaled, d.test, length, dim)};
}

}  // namespace

PreparedExperiment prepare_experiment(const LabeledFrameCollection& data, const DomainTag& source,
                                      const DomainTag& target, ModelKind kind, const PipelineConfig& pipeline,
                                      std::uint64_t seed) {
  if (pipeline.window == 0 || pipeline.stride == 0) throw ConfigError("window and stride must be positive");
  const std::size_t length = kind == ModelKind::Cnn ? pipeline.window : 1;
  const std::size_t dim = pipeline.schema.dimension();
  const std::size_t classes = data.labels.size();

  PreparedExperiment exp;
  exp.kind = kind;
  exp.labels = data.labels;

  DomainData src = collect(data, source, length, pipeline);
  split(src, classes, pipeline, derive_seed(seed, "split/" + source.str()), data.labels);
  exp.scaler = fit_on_train(src, length);
  exp.source = finish(src, exp.scaler, length, dim);

  if (target == source) {
    exp.target = exp.source;
  } else {
    DomainData tgt = collect(data, target, length, pipeline);
    split(tgt, classes, pipeline, derive_seed(seed, "split/" + target.str()), data.labels);
    exp.target = finish(tgt, exp.scaler, length, dim);
  }
  return exp;
}

template <typename T>
MethodResult<T> train_and_score(const PreparedExperiment& exp, Regime regime, double fraction,
                                const TrainConfig& cfg, std::uint64_t model_seed, const PipelineConfig& pipeline) {
  const std::size_t classes = exp.labels.size();
  const std::size_t dim = exp.source.train.samples.dim;

  BasicModel<T> model;
  if (exp.kind == ModelKind::Fcl) {
    model = build_fcl<T>(dim, classes, model_seed, regime != Regime::Supervised);
  } else {
    CnnOptions opt;
    opt.input_length = dim;
    opt.channels = pipeline.cnn_channels;
    model = build_cnn<T>(classes, model_seed, opt);
  }
  model.scaler = exp.scaler;
  model.labels = exp.labels;

  MethodResult<T> out;
  if (regime == Regime::Supervised) {
    out.run = train_supervised(std::move(model), exp.source.train, cfg);
  } else {
    const double f = regime == Regime::Uda ? 0.0 : fraction;
    auto pair = make_domain_pair(exp.source.train, exp.target.train, f, classes, derive_seed(cfg.seed, "reveal"));
    out.run = regime == Regime::Ssda ? train_ssda(std::move(model), pair, cfg) : train_uda(std::move(model), pair, cfg);
  }
  const auto pred = predict(out.run.model, exp.target.test.samples);
  out.test_f1 = micro_f1(pred, exp.target.test.labels);
  return out;
}

template <typename T>
MethodResult<T> run_method(const PreparedExperiment& exp, Method method, const TrainConfig& cfg,
                           std::uint64_t model_seed, const PipelineConfig& pipeline) {
  if (model_kind(method) != exp.kind)
    throw ConfigError(std::string(to_string(method)) + " needs " + std::string(to_string(model_kind(method))) +
                      " inputs but the experiment was prepared for " + std::string(to_string(exp.kind)));
  const Regime regime = !is_adaptation(method) ? Regime::Supervised
                        : method == Method::Uda ? Regime::Uda
                                                : Regime::Ssda;
  return train_and_score<T>(exp, regime, labeled_fraction(method), cfg, model_seed, pipeline);
}

template MethodResult<float> train_and_score<float>(const PreparedExperiment&, Regime, double, const TrainConfig&,
                                                    std::uint64_t, const PipelineConfig&);
template MethodResult<double> train_and_score<double>(const PreparedExperiment&, Regime, double, const TrainConfig&,
                                                      std::uint64_t, const PipelineConfig&);
template MethodResult<float> run_method<float>(const PreparedExperiment&, Method, const TrainConfig&, std::uint64_t,
                                               const PipelineConfig&);
template MethodResult<double> run_method<double>(const PreparedExperiment&, Method, const TrainConfig&, std::uint64_t,
                                                 const PipelineConfig&);

// --- grid ----------------------------------------------------------------------------

void ExperimentGrid::validate() const {
  if (seeds.empty()) throw ConfigError("grid needs at least one seed");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.methods.size(); ++i) {
      const auto m = row.methods[i];
      if (std::find(row.methods.begin(), row.methods.begin() + static_cast<std::ptrdiff_t>(i), m) !=
          row.methods.begin() + static_cast<std::ptrdiff_t>(i))
        throw ConfigError("method " + std::string(to_string(m)) + " listed twice for row " + row.train_domain.str() +
                          " -> " + row.test_domain.str());
      if (is_adaptation(m) && row.train_domain == row.test_domain && !row.allow_same_domain_adaptation)
        throw ConfigError("adaptation method " + std::string(to_string(m)) + " on same-domain row " +
                          row.train_domain.str());
    }
  }
}

namespace {

std::vector<Method> all_methods() { return {kAllMethods.begin(), kAllMethods.end()}; }

}  // namespace

ExperimentGrid preset_grid(std::string_view name) {
  constexpr Ambience kAmb[] = {Ambience::Sunny, Ambience::Night, Ambience::Lablight};
  ExperimentGrid g;
  auto add = [&](DomainTag a, DomainTag b, std::vector<Method> methods) { g.rows.push_back({a, b, std::move(methods)}); };
  auto st = [](Ambience a, double p) { return DomainTag{a, p, RadarState::Static}; };
  auto dy = [](Ambience a, double p) { return DomainTag{a, p, RadarState::Dynamic}; };
  if (name == "cross-height") {
    for (auto a : kAmb) add(st(a, 53), st(a, 7), all_methods());
    for (auto a : kAmb) add(st(a, 7), st(a, 53), all_methods());
  } else if (name == "cross-distance") {
    for (auto a : kAmb) add(dy(a, 84), dy(a, 42), all_methods());
    for (auto a : kAmb) add(dy(a, 42), dy(a, 84), all_methods());
  } else if (name == "cross-ambience") {
    constexpr Ambience kOrder[] = {Ambience::Sunny, Ambience::Lablight, Ambience::Night};
    for (double h : {7.0, 53.0})
      for (auto a : kOrder)
        for (auto b : kOrder)
          if (a != b) add(st(a, h), st(b, h), all_methods());
  } else if (name == "same-ambience") {
    constexpr Ambience kOrder[] = {Ambience::Sunny, Ambience::Lablight, Ambience::Night};
    for (double h : {7.0, 53.0})
      for (auto a : kOrder) add(st(a, h), st(a, h), {Method::Fcl, Method::Cnn});
  } else {
    throw ConfigError("unknown grid preset '" + std::string(name) +
                      "' (expected cross-height, cross-distance, cross-ambience or same-ambience)");
  }
  return g;
}

const ReportCell* ReportRow::find(Method m) const {
  for (const auto& c : cells)
    if (c.method == m) return &c;
  return nullptr;
}

bool ReportTable::operator==(const ReportTable& other) const {
  if (seeds != other.seeds || rows.size() != other.rows.size()) return false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& a = rows[r];
    const auto& b = other.rows[r];
    if (!(a.train_domain == b.train_domain) || !(a.test_domain == b.test_domain) || a.cells.size() != b.cells.size())
      return false;
    for (std::size_t c = 0; c < a.cells.size(); ++c)
      if (a.cells[c].method != b.cells[c].method || a.cells[c].f1_mean != b.cells[c].f1_mean ||
          a.cells[c].f1_per_seed != b.cells[c].f1_per_seed)
        return false;
  }
  return true;
}

ReportTable run_grid(const ExperimentGrid& grid, const LabeledFrameCollection& data, const TrainConfig& cfg,
                     const PipelineConfig& pipeline, std::size_t parallelism) {
  grid.validate();
  cfg.validate();
  for (const auto& row : grid.rows)
    for (const auto& d : {row.train_domain, row.test_domain})
      if (!data.has_domain(d)) throw MissingDomainError(d.str());

  struct Task {
    std::size_t row;
    Method method;
    std::size_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < grid.rows.size(); ++r)
    for (auto m : kAllMethods)
      if (std::find(grid.rows[r].methods.begin(), grid.rows[r].methods.end(), m) != grid.rows[r].methods.end())
        for (std::size_t s = 0; s < grid.seeds.size(); ++s) tasks.push_back({r, m, s});

  std::vector<double> scores(tasks.size(), 0.0);
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const auto& t = tasks[i];
        const auto& row = grid.rows[t.row];
        const std::uint64_t run_seed = derive_seed(cfg.seed, grid.seeds[t.seed]);
        const std::string pair_id = row.train_domain.str() + ">" + row.test_domain.str();
        const auto exp = prepare_experiment(data, row.train_domain, row.test_domain, model_kind(t.method), pipeline,
                                            run_seed);
        TrainConfig c = cfg;
        c.seed = derive_seed(run_seed, "train/" + pair_id);
        const auto model_seed = derive_seed(run_seed, "model/" + pair_id);
        scores[i] = pipeline.precision == Precision::Double
                        ? run_method<double>(exp, t.method, c, model_seed, pipeline).test_f1
                        : run_method<float>(exp, t.method, c, model_seed, pipeline).test_f1;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(parallelism, tasks.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ReportTable table;
  table.seeds = grid.seeds;
  std::size_t k = 0;
  for (const auto& row : grid.rows) {
    ReportRow out{row.train_domain, row.test_domain, {}};
    while (k < tasks.size() && &grid.rows[tasks[k].row] == &row) {
      ReportCell cell;
      cell.method = tasks[k].method;
      double sum = 0.0;
      for (std::size_t s = 0; s < grid.seeds.size(); ++s, ++k) {
        cell.f1_per_seed.push_back(scores[k]);
        sum += scores[k];
      }
      cell.f1_mean = sum / static_cast<double>(grid.seeds.size());
      out.cells.push_back(std::move(cell));
    }
    table.rows.push_back(std::move(out));
  }
  return table;
}

// --- report emission -------------------------------------------------------------------

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  throw ConfigError("unknown report format '" + std::string(text) + "' (expected csv, json or markdown)");
}

namespace {

std::string emit_csv(const ReportTable& t) {
  std::string out = "train_domain,test_domain,method,f1_mean";
  for (auto s : t.seeds) out += ",f1_seed_" + std::to_string(s);
  out += "\n";
  for (const auto& row : t.rows) {
    for (const auto& c : row.cells) {
      out += row.train_domain.str() + "," + row.test_domain.str() + "," + std::string(to_string(c.method)) + "," +
             format_fixed(c.f1_mean, 6);
      for (auto v : c.f1_per_seed) out += "," + format_fixed(v, 6);
      out += "\n";
    }
  }
  return out;
}

std::string emit_json(const ReportTable& t) {
  nlohmann::ordered_json j;
  j["seeds"] = t.seeds;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r;
    r["train_domain"] = row.train_domain.str();
    r["test_domain"] = row.test_domain.str();
    r["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : row.cells) {
      nlohmann::ordered_json cell;
      cell["method"] = std::string(to_string(c.method));
      cell["f1_mean"] = c.f1_mean;
      cell["f1_per_seed"] = c.f1_per_seed;
      r["cells"].push_back(std::move(cell));
    }
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

std::string method_heading(Method m) {
  switch (m) {
    case Method::Ssda10: return "F1-score (SSDA 10%)";
    case Method::Ssda20: return "F1-score (SSDA 20%)";
    default: return "F1-score (" + std::string(to_string(m)) + ")";
  }
}

std::string emit_markdown(const ReportTable& t) {
  std::string out = "| Training environment | Testing environment |";
  for (auto m : kAllMethods) out += " " + method_heading(m) + " |";
  out += "\n|---|---|";
  for (std::size_t i = 0; i < kAllMethods.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& row : t.rows) {
    out += "| " + row.train_domain.pretty() + " | " + row.test_domain.pretty() + " |";
    for (auto m : kAllMethods) {
      const auto* c = row.find(m);
      out += " " + (c ? format_fixed(c->f1_mean, 3) : std::string("-")) + " |";
    }
    out += "\n";
  }
  out += "\nMicro-F1 on the held-out test split, mean over seeds";
  for (std::size_t i = 0; i < t.seeds.size(); ++i) out += (i ? ", " : " ") + std::to_string(t.seeds[i]);
  out += ".\n";
  return out;
}

}  // namespace

std::string emit_report(const ReportTable& table, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return emit_csv(table);
    case ReportFormat::Json: return emit_json(table);
    case ReportFormat::Markdown: return emit_markdown(table);
  }
  return {};
}

ReportTable parse_report_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("report JSON: ") + e.what());
  }
  try {
    ReportTable t;
    t.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& r : j.at("rows")) {
      ReportRow row;
      try {
        row.train_domain = parse_domain(r.at("train_domain").get<std::string>());
        row.test_domain = parse_domain(r.at("test_domain").get<std::string>());
        for (const auto& c : r.at("cells")) {
          ReportCell cell;
          cell.method = parse_method(c.at("method").get<std::string>());
          cell.f1_mean = c.at("f1_mean").get<double>();
          cell.f1_per_seed = c.at("f1_per_seed").get<std::vector<double>>();
          if (cell.f1_per_seed.size() != t.seeds.size())
            throw DataError("report JSON: cell has " + std::to_string(cell.f1_per_seed.size()) + " seed scores, expected " +
                            std::to_string(t.seeds.size()));
          row.cells.push_back(std::move(cell));
        }
      } catch (const ConfigError& e) {
        throw DataError(std::string("report JSON: ") + e.what());
      }
      std::stable_sort(row.cells.begin(), row.cells.end(),
                       [](const ReportCell& a, const ReportCell& b) { return a.method < b.method; });
      t.rows.push_back(std::move(row));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report JSON: ") + e.what());
  }
}

}  // namespace mmw
