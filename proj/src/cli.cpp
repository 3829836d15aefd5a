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

#include "mmw/cli.hpp"

#include <charconv>
#include <filesystem>
#include <functional>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmw/datamodel.hpp"
#include "mmw/error.hpp"
#include "mmw/experiment.hpp"
#include "mmw/features.hpp"
#include "mmw/ingest.hpp"
#include "mmw/metrics.hpp"
#include "mmw/random.hpp"
#include "mmw/synth.hpp"
#include "mmw/textfmt.hpp"
#include "mmw/training.hpp"

namespace mmw::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::InvalidConfig: return kExitInvalidConfig;
      case ErrorKind::Data:
      case ErrorKind::Shape: return kExitData;
      case ErrorKind::Io: return kExitIo;
    }
  }
  return kExitFailure;
}

namespace {

// --- config keys ----------------------------------------------------------------

enum class KeyType { Uint, Float, Bool, String, UintList, Object };

struct KeySpec {
  std::string key;
  KeyType type;
  json fallback;  // null = unset
  std::string help;
};

std::string type_name(KeyType t) {
  switch (t) {
    case KeyType::Uint: return "non-negative integer";
    case KeyType::Float: return "number";
    case KeyType::Bool: return "boolean";
    case KeyType::String: return "string";
    case KeyType::UintList: return "list of non-negative integers";
    case KeyType::Object: return "JSON value";
  }
  return "?";
}

bool type_matches(KeyType t, const json& v) {
  if (v.is_null()) return true;
  switch (t) {
    case KeyType::Uint: return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    case KeyType::Float: return v.is_number();
    case KeyType::Bool: return v.is_boolean();
    case KeyType::String: return v.is_string();
    case KeyType::UintList:
      if (!v.is_array()) return false;
      for (const auto& x : v)
        if (!type_matches(KeyType::Uint, x) || x.is_null()) return false;
      return true;
    case KeyType::Object: return true;
  }
  return false;
}

std::uint64_t parse_uint(const std::string& key, std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
    throw ConfigError("--" + key + ": expected a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

json from_flag(const KeySpec& spec, const std::string& text) {
  switch (spec.type) {
    case KeyType::Uint: return parse_uint(spec.key, text);
    case KeyType::Float: {
      double v = 0.0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size() || text.empty())
        throw ConfigError("--" + spec.key + ": expected a number, got '" + text + "'");
      return v;
    }
    case KeyType::Bool:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw ConfigError("--" + spec.key + ": expected true or false, got '" + text + "'");
    case KeyType::String: return text;
    case KeyType::UintList: {
      json arr = json::array();
      std::size_t start = 0;
      while (start <= text.size() && !text.empty()) {
        const auto comma = text.find(',', start);
        arr.push_back(parse_uint(spec.key, std::string_view(text).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return arr;
    }
    case KeyType::Object: {
      try {
        return json::parse(text);
      } catch (const json::parse_error& e) {
        throw ConfigError("--" + spec.key + ": " + e.what());
      }
    }
  }
  return nullptr;
}

std::string default_text(const KeySpec& spec) {
  if (spec.fallback.is_null()) return "unset";
  if (spec.type == KeyType::String) return spec.fallback.get<std::string>();
  if (spec.type == KeyType::UintList) {
    std::string s;
    for (const auto& x : spec.fallback) s += (s.empty() ? "" : ",") + x.dump();
    return s;
  }
  return spec.fallback.dump();
}

using Body = std::function<int(const json& cfg, std::ostream& out, std::ostream& err)>;

struct Command {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;
  Body body;
};

json load_config_file(const std::string& path, const std::vector<KeySpec>& keys) {
  json file;
  try {
    file = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!file.is_object()) throw ConfigError("config " + path + ": top level must be an object");
  json cfg = json::object();
  for (auto it = file.begin(); it != file.end(); ++it) {
    const KeySpec* spec = nullptr;
    for (const auto& k : keys)
      if (k.key == it.key()) spec = &k;
    if (!spec) throw ConfigError("config " + path + ": unknown key '" + it.key() + "'");
    if (!type_matches(spec->type, it.value()))
      throw ConfigError("config " + path + ": key '" + it.key() + "' must be a " + type_name(spec->type));
    cfg[it.key()] = it.value();
  }
  return cfg;
}

// --- typed access ------------------------------------------------------------------

bool has(const json& cfg, const char* key) { return cfg.contains(key) && !cfg.at(key).is_null(); }

std::string str(const json& cfg, const char* key) {
  if (!has(cfg, key)) throw ConfigError(std::string("missing required key '") + key + "'");
  return cfg.at(key).get<std::string>();
}

std::size_t uint(const json& cfg, const char* key) { return cfg.at(key).get<std::size_t>(); }

TrainConfig train_config(const json& cfg) {
  TrainConfig t;
  t.learning_rate = cfg.at("learning_rate").get<double>();
  t.batch_size = uint(cfg, "batch_size");
  t.epochs = uint(cfg, "epochs");
  t.grl_lambda = cfg.at("grl_lambda").get<double>();
  t.seed = cfg.at("seed").get<std::uint64_t>();
  t.validate();
  return t;
}

PipelineConfig pipeline_config(const json& cfg) {
  PipelineConfig p;
  p.split_ratio = cfg.at("split_ratio").get<double>();
  p.window = uint(cfg, "window");
  p.stride = uint(cfg, "stride");
  p.split_by_recording = cfg.at("split_by_recording").get<bool>();
  p.precision = parse_precision(cfg.at("precision").get<std::string>());
  if (!(p.split_ratio > 0.0 && p.split_ratio < 1.0)) throw ConfigError("split_ratio must lie in (0, 1)");
  if (p.window == 0 || p.stride == 0) throw ConfigError("window and stride must be positive");
  return p;
}

std::vector<KeySpec> train_keys() {
  const TrainConfig t;
  const PipelineConfig p;
  return {
      {"learning_rate", KeyType::Float, t.learning_rate, "SGD step size"},
      {"batch_size", KeyType::Uint, t.batch_size, "mini-batch size"},
      {"epochs", KeyType::Uint, t.epochs, "training epochs"},
      {"grl_lambda", KeyType::Float, t.grl_lambda, "gradient reversal scale"},
      {"split_ratio", KeyType::Float, p.split_ratio, "stratified train fraction"},
      {"window", KeyType::Uint, p.window, "feature rows per CNN window"},
      {"stride", KeyType::Uint, p.stride, "window stride in rows"},
      {"split_by_recording", KeyType::Bool, p.split_by_recording, "split whole recordings instead of examples"},
      {"precision", KeyType::String, "float", "training arithmetic: float or double"},
  };
}

/// Manifest file, or a directory holding manifest.json.
LabeledFrameCollection load_dataset(const std::string& where) {
  fs::path path(where);
  if (fs::is_directory(path)) path /= "manifest.json";
  const auto manifest = load_manifest(path);
  return assemble_dataset(manifest, path.parent_path());
}

/// Unknown ambience or state names denote a domain the data cannot contain.
DomainTag grid_domain(const std::string& text) {
  try {
    return parse_domain(text);
  } catch (const ConfigError&) {
    const auto slash = text.find('/');
    const auto amb = text.substr(0, slash);
    try {
      parse_ambience(amb);
    } catch (const DataError&) {
      throw MissingDomainError(text);
    }
    throw;
  }
}

// --- commands ----------------------------------------------------------------------

int cmd_synth(const json& cfg, std::ostream& out, std::ostream&) {
  const auto suite = suite_by_name(str(cfg, "suite"));
  const auto frames = uint(cfg, "frames");
  const auto per_cell = uint(cfg, "recordings_per_cell");
  if (frames == 0 || per_cell == 0) throw ConfigError("frames and recordings_per_cell must be positive");
  const auto data = generate_collection(suite, frames, cfg.at("seed").get<std::uint64_t>(), per_cell);
  const fs::path dir = str(cfg, "output");
  write_dataset(data, dir);
  out << "wrote " << data.recordings.size() << " recordings (" << suite.classes.size() << " classes x "
      << suite.domains.size() << " domains) to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_ingest_check(const json& cfg, std::ostream& out, std::ostream&) {
  const auto data = load_dataset(str(cfg, "dataset"));
  std::size_t findings = 0;
  for (const auto& rec : data.recordings) {
    for (const auto& f : validate_recording(rec.frames)) {
      ++findings;
      out << rec.source << ": frame " << f.frame_position;
      if (f.point) out << " point " << *f.point;
      out << ": " << f.message << "\n";
    }
  }
  out << data.recordings.size() << " recordings, " << data.labels.size() << " classes, " << data.domains().size()
      << " domains, " << findings << " findings\n";
  return findings == 0 ? kExitOk : kExitData;
}

int cmd_preprocess(const json& cfg, std::ostream& out, std::ostream&) {
  const auto data = load_dataset(str(cfg, "dataset"));
  std::optional<DomainTag> only;
  if (has(cfg, "domain")) only = parse_domain(str(cfg, "domain"));
  const fs::path dir = str(cfg, "output");
  std::size_t written = 0;
  for (const auto& rec : data.recordings) {
    if (only && !(rec.domain == *only)) continue;
    const auto rows = recording_features(rec.frames);
    write_file(dir / (fs::path(rec.source).stem().string() + ".features.csv"), feature_csv(rows));
    ++written;
  }
  if (only && written == 0) throw MissingDomainError(only->str());
  out << "wrote " << written << " feature files to " << dir.string() << "\n";
  return kExitOk;
}

template <typename T>
int train_with(const PreparedExperiment& exp, Regime regime, double fraction, const TrainConfig& tc,
               const PipelineConfig& pc, const fs::path& dir, std::ostream& out) {
  const auto res = train_and_score<T>(exp, regime, fraction, tc, derive_seed(tc.seed, "model"), pc);
  const double train_f1 = micro_f1(predict(res.run.model, exp.source.train.samples), exp.source.train.labels);
  save_checkpoint(res.run.model, dir / "checkpoint.json");
  write_file(dir / "history.csv", history_csv(res.run.history));
  out << "train_f1=" << format_fixed(train_f1, 6) << " test_f1=" << format_fixed(res.test_f1, 6) << "\n";
  return kExitOk;
}

int cmd_train(const json& cfg, std::ostream& out, std::ostream&) {
  const std::string method = str(cfg, "method");
  Regime regime;
  ModelKind kind = ModelKind::Cnn;
  if (method == "fcl" || method == "cnn") {
    regime = Regime::Supervised;
    kind = parse_model_kind(method);
  } else if (method == "uda") {
    regime = Regime::Uda;
  } else if (method == "ssda") {
    regime = Regime::Ssda;
  } else {
    throw ConfigError("unknown method '" + method + "' (expected fcl, cnn, uda or ssda)");
  }
  const bool has_target = has(cfg, "target_domain");
  const bool has_fraction = has(cfg, "labeled_fraction");
  if (regime != Regime::Supervised && !has_target) throw ConfigError(method + " needs target_domain");
  if (regime != Regime::Ssda && has_fraction)
    throw ConfigError("labeled_fraction only applies to ssda, not " + method);
  const double fraction = has_fraction ? cfg.at("labeled_fraction").get<double>() : 0.1;
  if (regime == Regime::Ssda && !(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("labeled_fraction must lie in (0, 1]");

  const auto tc = train_config(cfg);
  const auto pc = pipeline_config(cfg);
  const DomainTag source = parse_domain(str(cfg, "source_domain"));
  const DomainTag target = has_target ? parse_domain(str(cfg, "target_domain")) : source;
  const auto data = load_dataset(str(cfg, "dataset"));
  const auto exp = prepare_experiment(data, source, target, kind, pc, tc.seed);
  const fs::path dir = str(cfg, "output");
  return pc.precision == Precision::Double ? train_with<double>(exp, regime, fraction, tc, pc, dir, out)
                                           : train_with<float>(exp, regime, fraction, tc, pc, dir, out);
}

ExperimentGrid grid_from_config(const json& cfg) {
  ExperimentGrid grid;
  if (has(cfg, "preset")) grid = preset_grid(str(cfg, "preset"));
  grid.seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
  const json& rows = cfg.at("rows");
  if (!rows.is_array()) throw ConfigError("rows must be an array");
  for (const auto& r : rows) {
    if (!r.is_object()) throw ConfigError("each grid row must be an object");
    for (auto it = r.begin(); it != r.end(); ++it)
      if (it.key() != "train" && it.key() != "test" && it.key() != "methods" && it.key() != "allow_same_domain")
        throw ConfigError("grid row: unknown key '" + it.key() + "'");
    if (!r.contains("train") || !r.at("train").is_string() || !r.contains("test") || !r.at("test").is_string())
      throw ConfigError("grid row needs string keys 'train' and 'test'");
    GridRow row;
    row.train_domain = grid_domain(r.at("train").get<std::string>());
    row.test_domain = grid_domain(r.at("test").get<std::string>());
    if (r.contains("methods")) {
      if (!r.at("methods").is_array()) throw ConfigError("grid row: methods must be an array");
      for (const auto& m : r.at("methods")) {
        if (!m.is_string()) throw ConfigError("grid row: methods must be strings");
        row.methods.push_back(parse_method(m.get<std::string>()));
      }
    } else {
      row.methods.assign(kAllMethods.begin(), kAllMethods.end());
    }
    if (r.contains("allow_same_domain")) {
      if (!r.at("allow_same_domain").is_boolean()) throw ConfigError("grid row: allow_same_domain must be a boolean");
      row.allow_same_domain_adaptation = r.at("allow_same_domain").get<bool>();
    }
    grid.rows.push_back(std::move(row));
  }
  grid.validate();
  return grid;
}

int cmd_grid(const json& cfg, std::ostream& out, std::ostream& err) {
  const auto grid = grid_from_config(cfg);
  const auto tc = train_config(cfg);
  const auto pc = pipeline_config(cfg);
  const auto parallelism = uint(cfg, "parallelism");
  if (parallelism == 0) throw ConfigError("parallelism must be positive");

  LabeledFrameCollection data;
  if (!grid.rows.empty()) {
    if (has(cfg, "dataset")) {
      data = load_dataset(str(cfg, "dataset"));
    } else {
      const auto frames = uint(cfg, "frames");
      const auto per_cell = uint(cfg, "recordings_per_cell");
      if (frames == 0 || per_cell == 0) throw ConfigError("frames and recordings_per_cell must be positive");
      data = generate_collection(suite_by_name(str(cfg, "suite")), frames, tc.seed, per_cell);
    }
  }
  err << "grid: " << grid.rows.size() << " rows, " << grid.seeds.size() << " seeds\n";
  const auto table = run_grid(grid, data, tc, pc, parallelism);
  const fs::path dir = str(cfg, "output");
  write_file(dir / "report.csv", emit_report(table, ReportFormat::Csv));
  write_file(dir / "report.json", emit_report(table, ReportFormat::Json));
  write_file(dir / "report.md", emit_report(table, ReportFormat::Markdown));
  std::size_t cells = 0;
  for (const auto& r : table.rows) cells += r.cells.size();
  out << "wrote " << table.rows.size() << " rows, " << cells << " cells to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_report(const json& cfg, std::ostream& out, std::ostream&) {
  const auto table = parse_report_json(read_file(str(cfg, "input")));
  const auto text = emit_report(table, parse_report_format(str(cfg, "format")));
  if (has(cfg, "output"))
    write_file(str(cfg, "output"), text);
  else
    out << text;
  return kExitOk;
}

std::vector<Command> commands() {
  std::vector<Command> cmds;
  cmds.push_back({"synth",
                  "Write a synthetic dataset (point CSVs + manifest.json)",
                  {{"output", KeyType::String, "synth_data", "output directory"},
                   {"seed", KeyType::Uint, 0, "generator seed"},
                   {"suite", KeyType::String, "default", "synthetic suite: default or distance"},
                   {"frames", KeyType::Uint, 300, "frames per recording"},
                   {"recordings_per_cell", KeyType::Uint, 1, "recordings per (class, domain)"}},
                  cmd_synth});
  cmds.push_back({"ingest-check",
                  "Validate every recording of a dataset",
                  {{"dataset", KeyType::String, nullptr, "manifest.json or its directory"}},
                  cmd_ingest_check});
  cmds.push_back({"preprocess",
                  "Dump per-frame feature rows of a dataset as CSV",
                  {{"dataset", KeyType::String, nullptr, "manifest.json or its directory"},
                   {"output", KeyType::String, "features", "output directory"},
                   {"domain", KeyType::String, nullptr, "only recordings of this domain, e.g. sunny/7"}},
                  cmd_preprocess});
  Command train{"train",
                "Train one model and write checkpoint.json + history.csv",
                {{"dataset", KeyType::String, nullptr, "manifest.json or its directory"},
                 {"output", KeyType::String, "train_out", "output directory"},
                 {"method", KeyType::String, "cnn", "fcl, cnn, uda or ssda"},
                 {"source_domain", KeyType::String, "sunny/7", "labeled training domain"},
                 {"target_domain", KeyType::String, nullptr, "evaluation / adaptation domain"},
                 {"labeled_fraction", KeyType::Float, nullptr, "revealed target labels for ssda (0.1 when unset)"},
                 {"seed", KeyType::Uint, 0, "split, init and shuffle seed"}},
                cmd_train};
  for (auto& k : train_keys()) train.keys.push_back(k);
  cmds.push_back(std::move(train));
  Command grid{"grid",
               "Run an experiment grid and write report.{csv,json,md}",
               {{"dataset", KeyType::String, nullptr, "manifest.json or its directory (synthetic when unset)"},
                {"suite", KeyType::String, "default", "synthetic suite when no dataset is given"},
                {"frames", KeyType::Uint, 300, "synthetic frames per recording"},
                {"recordings_per_cell", KeyType::Uint, 1, "synthetic recordings per (class, domain)"},
                {"preset", KeyType::String, nullptr, "cross-height, cross-distance, cross-ambience or same-ambience"},
                {"rows", KeyType::Object, json::array(), "extra rows: [{train, test, methods, allow_same_domain}]"},
                {"seeds", KeyType::UintList, json::array({0, 1, 2}), "seeds averaged per cell"},
                {"parallelism", KeyType::Uint, 1, "worker threads"},
                {"output", KeyType::String, "grid_out", "output directory"},
                {"seed", KeyType::Uint, 0, "base seed"}},
               cmd_grid};
  for (auto& k : train_keys()) grid.keys.push_back(k);
  cmds.push_back(std::move(grid));
  cmds.push_back({"report",
                  "Re-emit a report.json as csv, json or markdown",
                  {{"input", KeyType::String, nullptr, "report.json path"},
                   {"format", KeyType::String, "markdown", "csv, json or markdown"},
                   {"output", KeyType::String, nullptr, "output file (stdout when unset)"}},
                  cmd_report});
  return cmds;
}

std::string dashed(std::string s) {
  for (auto& c : s)
    if (c == '_') c = '-';
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto cmds = commands();
  CLI::App app{"mmWave radar object recognition with domain adaptation", args.empty() ? "mmw" : args[0]};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  struct Bound {
    std::string config_path;
    std::vector<std::string> values;
    std::vector<CLI::Option*> options;
  };
  std::vector<Bound> bound(cmds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    auto* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
    subs.push_back(sub);
    sub->add_option("--config", bound[i].config_path, "JSON config; flags override its keys");
    bound[i].values.resize(cmds[i].keys.size());
    for (std::size_t k = 0; k < cmds[i].keys.size(); ++k) {
      const auto& spec = cmds[i].keys[k];
      std::string names = "--" + spec.key;
      if (dashed(spec.key) != spec.key) names += ",--" + dashed(spec.key);
      bound[i].options.push_back(
          sub->add_option(names, bound[i].values[k], spec.help)->default_str(default_text(spec))->type_name(
              "<" + type_name(spec.type) + ">"));
    }
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidConfig;
  }

  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      json cfg = json::object();
      for (const auto& spec : cmds[i].keys) cfg[spec.key] = spec.fallback;
      if (!bound[i].config_path.empty()) cfg.update(load_config_file(bound[i].config_path, cmds[i].keys));
      for (std::size_t k = 0; k < cmds[i].keys.size(); ++k)
        if (bound[i].options[k]->count() > 0) cfg[cmds[i].keys[k].key] = from_flag(cmds[i].keys[k], bound[i].values[k]);
      return cmds[i].body(cfg, out, err);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return exit_code(e);
    }
  }
  return kExitInvalidConfig;
}

}  // namespace mmw::cli
