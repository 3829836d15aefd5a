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

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "mmw/cli.hpp"
#include "mmw/error.hpp"
#include "mmw/experiment.hpp"
#include "mmw/ingest.hpp"
#include "mmw/training.hpp"
#include "test_util.hpp"

using namespace mmw;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  args.insert(args.begin(), "mmw");
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("synth writes a dataset that passes ingest-check") {
  test::TempDir dir("cli_synth");
  const auto a = (dir.path() / "a").string();
  const auto r = run({"synth", "--output", a, "--seed", "7", "--frames", "60"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("wrote 30 recordings (5 classes x 6 domains)") != std::string::npos);
  CHECK(load_manifest(fs::path(a) / "manifest.json").entries.size() == 30);

  const auto b = (dir.path() / "b").string();
  REQUIRE(run({"synth", "--output", b, "--seed", "7", "--frames", "60"}).code == 0);
  for (const auto& e : fs::directory_iterator(a))
    CHECK(read_file(e.path()) == read_file(fs::path(b) / e.path().filename()));

  const auto check = run({"ingest-check", "--dataset", a});
  CHECK(check.code == 0);
  CHECK(check.out.find("30 recordings, 5 classes, 6 domains, 0 findings") != std::string::npos);

  const auto pre = run({"preprocess", "--dataset", a, "--output", (dir.path() / "f").string(), "--domain", "night/53"});
  CHECK(pre.code == 0);
  CHECK(pre.out.find("wrote 5 feature files") != std::string::npos);
  CHECK(run({"preprocess", "--dataset", a, "--output", (dir.path() / "f").string(), "--domain", "night/84"}).code == 3);
}

TEST_CASE("ingest-check reports findings with exit code 3") {
  test::TempDir dir("cli_bad");
  Recording frames(3);
  for (std::size_t i = 0; i < 3; ++i) {
    frames[i].frame_index = static_cast<std::int64_t>(i == 0 ? 0 : 3 - i);
    frames[i].timestamp = 0.1 * static_cast<double>(i);
    frames[i].points.push_back({0.1, 0.0, 0.0, 9.0, 4.0});
  }
  write_file(dir.path() / "r.csv", write_points_csv(frames));
  DatasetManifest m;
  m.entries.push_back({"r.csv", "dime", {}});
  write_file(dir.path() / "manifest.json", manifest_json(m));
  const auto r = run({"ingest-check", "--dataset", dir.path().string()});
  CHECK(r.code == 3);
  CHECK(r.out.find("1 findings") != std::string::npos);
}

TEST_CASE("synth into an unwritable location fails with the io exit code") {
  test::TempDir dir("cli_io");
  write_file(dir.path() / "file", "x");
  CHECK(run({"synth", "--output", (dir.path() / "file" / "sub").string(), "--frames", "45"}).code == 4);
}

TEST_CASE("train writes a checkpoint") {
  test::TempDir dir("cli_train");
  const auto data = (dir.path() / "d").string();
  REQUIRE(run({"synth", "--output", data, "--frames", "60"}).code == 0);
  const auto out = (dir.path() / "t").string();
  const auto r = run({"train", "--dataset", data, "--output", out, "--method", "cnn", "--epochs", "3"});
  REQUIRE(r.code == 0);
  const auto ckpt = load_checkpoint<float>(fs::path(out) / "checkpoint.json");
  CHECK(ckpt.labels.size() == 5);
  CHECK(read_file(fs::path(out) / "history.csv").rfind("epoch,", 0) == 0);
  double train_f1 = -1, test_f1 = -1;
  REQUIRE(std::sscanf(r.out.c_str(), "train_f1=%lf test_f1=%lf", &train_f1, &test_f1) == 2);
  CHECK((train_f1 >= 0.0 && train_f1 <= 1.0));
  CHECK((test_f1 >= 0.0 && test_f1 <= 1.0));

  const auto s = run({"train", "--dataset", data, "--output", out, "--method", "ssda", "--source-domain", "sunny/53",
                      "--target-domain", "sunny/7", "--labeled-fraction", "0.2", "--epochs", "2",
                      "--precision", "double"});
  CHECK(s.code == 0);
  CHECK(load_checkpoint<double>(fs::path(out) / "checkpoint.json").has_domain_head());

  CHECK(run({"train", "--dataset", data, "--method", "ssda"}).code == 2);
  CHECK(run({"train", "--dataset", data, "--method", "uda", "--target_domain", "sunny/53", "--labeled_fraction",
             "0.1"})
            .code == 2);
  CHECK(run({"train", "--dataset", data, "--method", "ssda", "--target_domain", "sunny/53", "--labeled_fraction",
             "0"})
            .code == 2);
  CHECK(run({"train", "--dataset", (dir.path() / "nothing").string()}).code == 3);
}

TEST_CASE("grid from a preset on synthetic data") {
  test::TempDir dir("cli_grid");
  const auto out = (dir.path() / "g").string();
  const auto r = run({"grid", "--preset", "cross-height", "--frames", "60", "--epochs", "1", "--seeds", "0",
                      "--parallelism", "2", "--output", out});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("wrote 6 rows, 30 cells") != std::string::npos);
  const auto table = parse_report_json(read_file(fs::path(out) / "report.json"));
  CHECK(table.rows.size() == 6);
  const auto csv = read_file(fs::path(out) / "report.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);

  const auto md = run({"report", "--input", (fs::path(out) / "report.json").string()});
  CHECK(md.code == 0);
  CHECK(md.out == read_file(fs::path(out) / "report.md"));
  const auto csv2 = run({"report", "--input", (fs::path(out) / "report.json").string(), "--format", "csv"});
  CHECK(csv2.out == csv);
}

TEST_CASE("grid config files") {
  test::TempDir dir("cli_cfg");
  const auto cfg = dir.path() / "grid.json";

  write_file(cfg, R"({"rows": [], "output": ")" + (dir.path() / "empty").string() + R"("})");
  const auto empty = run({"grid", "--config", cfg.string()});
  CHECK(empty.code == 0);
  CHECK(empty.out.find("wrote 0 rows, 0 cells") != std::string::npos);

  write_file(cfg, R"({"rows": [{"train": "rainy/7", "test": "sunny/7"}], "output": ")" +
                      (dir.path() / "x").string() + R"("})");
  CHECK(run({"grid", "--config", cfg.string()}).code == 3);

  write_file(cfg, R"({"rows": [{"train": "sunny/7", "test": "sunny/7", "methods": ["UDA"]}]})");
  CHECK(run({"grid", "--config", cfg.string()}).code == 2);

  write_file(cfg, R"({"rows": [{"train": "sunny/7", "test": "sunny/7", "colour": 1}]})");
  CHECK(run({"grid", "--config", cfg.string()}).code == 2);

  write_file(cfg, R"({"learning_rat": 0.1})");
  CHECK(run({"grid", "--config", cfg.string()}).code == 2);
  write_file(cfg, R"({"epochs": "many"})");
  CHECK(run({"grid", "--config", cfg.string()}).code == 2);
  write_file(cfg, "{ not json");
  CHECK(run({"grid", "--config", cfg.string()}).code == 2);
}

TEST_CASE("usage errors and help") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"train", "--epochs", "ten"}).code == 2);
  const auto help = run({"train", "--help"});
  CHECK(help.code == 0);
  const auto text = help.out + help.err;
  CHECK(text.find("--learning-rate") != std::string::npos);
  CHECK(text.find("0.01") != std::string::npos);
  CHECK(text.find("100") != std::string::npos);
}

TEST_CASE("exit code mapping") {
  CHECK(cli::exit_code(ConfigError("x")) == cli::kExitInvalidConfig);
  CHECK(cli::exit_code(MissingDomainError("x")) == cli::kExitData);
  CHECK(cli::exit_code(ShapeError("x", 1, 2)) == cli::kExitData);
  CHECK(cli::exit_code(IoError("x")) == cli::kExitIo);
  CHECK(cli::exit_code(std::runtime_error("x")) == cli::kExitFailure);
}
