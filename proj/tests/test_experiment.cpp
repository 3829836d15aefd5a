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
#include <set>

#include "mmw/error.hpp"
#include "mmw/experiment.hpp"
#include "mmw/synth.hpp"

using namespace mmw;

namespace {

const DomainTag kSunny7{Ambience::Sunny, 7};
const DomainTag kSunny53{Ambience::Sunny, 53};

const LabeledFrameCollection& small_data() {
  static const auto data = generate_collection(default_suite(), 80, 3);
  return data;
}

TrainConfig few_epochs() {
  TrainConfig c;
  c.epochs = 2;
  c.seed = 5;
  return c;
}

ReportTable sample_table() {
  ReportTable t;
  t.seeds = {0, 1};
  ReportRow r{kSunny53, kSunny7, {}};
  r.cells.push_back({Method::Fcl, 0.5, {0.25, 0.75}});
  r.cells.push_back({Method::Cnn, 0.125, {0.0, 0.25}});
  t.rows.push_back(r);
  return t;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("method names and properties") {
  for (auto m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
  CHECK(parse_method("ssda20") == Method::Ssda20);
  CHECK_THROWS_AS(parse_method("dann"), ConfigError);
  CHECK(model_kind(Method::Fcl) == ModelKind::Fcl);
  CHECK(model_kind(Method::Ssda10) == ModelKind::Cnn);
  CHECK_FALSE(is_adaptation(Method::Cnn));
  CHECK(is_adaptation(Method::Uda));
  CHECK(labeled_fraction(Method::Uda) == 0.0);
  CHECK(labeled_fraction(Method::Ssda10) == 0.1);
  CHECK(labeled_fraction(Method::Ssda20) == 0.2);
  CHECK(parse_precision("double") == Precision::Double);
  CHECK_THROWS_AS(parse_precision("half"), ConfigError);
}

TEST_CASE("prepared experiment shapes") {
  const auto cnn = prepare_experiment(small_data(), kSunny53, kSunny7, ModelKind::Cnn, {}, 1);
  // 5 recordings of 80 frames give 41 windows each; 70% of 205 is 143.5 -> 144 by the remainder rule.
  CHECK(cnn.source.train.samples.dim == 640);
  CHECK(cnn.source.train.size() + cnn.source.test.size() == 205);
  CHECK(cnn.source.train.size() == 144);
  CHECK(cnn.target.test.size() == 205 - cnn.target.train.size());
  CHECK(cnn.scaler.dimension() == 16);
  CHECK(cnn.labels.size() == 5);

  const auto fcl = prepare_experiment(small_data(), kSunny53, kSunny7, ModelKind::Fcl, {}, 1);
  CHECK(fcl.source.train.samples.dim == 16);
  CHECK(fcl.source.train.size() == 280);
  CHECK(fcl.source.test.size() == 120);

  const auto same = prepare_experiment(small_data(), kSunny7, kSunny7, ModelKind::Fcl, {}, 1);
  CHECK(same.target.test.labels == same.source.test.labels);
  CHECK(same.target.test.samples.values == same.source.test.samples.values);

  // Standardized source-train rows have zero column means.
  for (std::size_t c = 0; c < 16; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < fcl.source.train.size(); ++i) s += fcl.source.train.samples.row(i)[c];
    CHECK(std::abs(s / static_cast<double>(fcl.source.train.size())) < 1e-9);
  }

  CHECK_THROWS_AS(prepare_experiment(small_data(), {Ambience::Sunny, 84}, kSunny7, ModelKind::Cnn, {}, 1),
                  MissingDomainError);
  const auto tiny = generate_collection(default_suite(), 30, 3);
  CHECK_THROWS_AS(prepare_experiment(tiny, kSunny53, kSunny7, ModelKind::Cnn, {}, 1), TooFewRowsError);
}

TEST_CASE("grid validation") {
  ExperimentGrid g;
  g.rows.push_back({kSunny7, kSunny7, {Method::Cnn, Method::Uda}});
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g.rows[0].allow_same_domain_adaptation = true;
  CHECK_NOTHROW(g.validate());
  g.rows[0].methods = {Method::Cnn, Method::Cnn};
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g.rows[0].methods = {Method::Cnn};
  g.seeds.clear();
  CHECK_THROWS_AS(g.validate(), ConfigError);
  CHECK_THROWS_AS(preset_grid("cross-weather"), ConfigError);
}

TEST_CASE("cross-height and cross-distance presets list their rows in table order") {
  const auto h = preset_grid("cross-height");
  REQUIRE(h.rows.size() == 6);
  const char* expected_h[6][2] = {{"Sunny(53)", "Sunny(7)"}, {"Night(53)", "Night(7)"},
                                  {"Lablight(53)", "Lablight(7)"}, {"Sunny(7)", "Sunny(53)"},
                                  {"Night(7)", "Night(53)"}, {"Lablight(7)", "Lablight(53)"}};
  for (std::size_t r = 0; r < 6; ++r) {
    CHECK(h.rows[r].train_domain.pretty() == expected_h[r][0]);
    CHECK(h.rows[r].test_domain.pretty() == expected_h[r][1]);
    CHECK(h.rows[r].methods == std::vector<Method>(kAllMethods.begin(), kAllMethods.end()));
  }
  CHECK(h.seeds == std::vector<std::uint64_t>{0, 1, 2});

  const auto d = preset_grid("cross-distance");
  REQUIRE(d.rows.size() == 6);
  const char* expected_d[6][2] = {{"Sunny(84)", "Sunny(42)"}, {"Night(84)", "Night(42)"},
                                  {"Lablight(84)", "Lablight(42)"}, {"Sunny(42)", "Sunny(84)"},
                                  {"Night(42)", "Night(84)"}, {"Lablight(42)", "Lablight(84)"}};
  for (std::size_t r = 0; r < 6; ++r) {
    CHECK(d.rows[r].train_domain.pretty() == expected_d[r][0]);
    CHECK(d.rows[r].test_domain.pretty() == expected_d[r][1]);
    CHECK(d.rows[r].train_domain.radar_state == RadarState::Dynamic);
  }

  const auto a = preset_grid("cross-ambience");
  CHECK(a.rows.size() == 12);
  std::set<std::string> pairs;
  for (const auto& r : a.rows) {
    CHECK(r.train_domain.placement == r.test_domain.placement);
    CHECK_FALSE(r.train_domain == r.test_domain);
    pairs.insert(r.train_domain.str() + ">" + r.test_domain.str());
  }
  CHECK(pairs.size() == 12);
  const auto s = preset_grid("same-ambience");
  CHECK(s.rows.size() == 6);
  CHECK_NOTHROW(s.validate());
  for (const auto& g : {h, d, a}) CHECK_NOTHROW(g.validate());
}

TEST_CASE("report emission") {
  const auto t = sample_table();
  const auto csv = emit_report(t, ReportFormat::Csv);
  CHECK(count_lines(csv) == 3);
  CHECK(csv.rfind("train_domain,test_domain,method,f1_mean,f1_seed_0,f1_seed_1\n", 0) == 0);
  CHECK(csv.find("sunny/53,sunny/7,FCL,0.500000,0.250000,0.750000\n") != std::string::npos);

  const auto json = emit_report(t, ReportFormat::Json);
  CHECK(parse_report_json(json) == t);
  CHECK_THROWS_AS(parse_report_json("{\"seeds\": [0]}"), DataError);
  CHECK_THROWS_AS(parse_report_json("not json"), DataError);

  const auto md = emit_report(t, ReportFormat::Markdown);
  CHECK(md.find("| Training environment | Testing environment | F1-score (FCL) | F1-score (CNN) | F1-score (UDA) | "
                "F1-score (SSDA 10%) | F1-score (SSDA 20%) |") == 0);
  CHECK(md.find("| Sunny(53) | Sunny(7) | 0.500 | 0.125 | - | - | - |") != std::string::npos);
  CHECK(emit_report(t, ReportFormat::Markdown) == md);
  CHECK(parse_report_format("md") == ReportFormat::Markdown);
  CHECK_THROWS_AS(parse_report_format("xml"), ConfigError);
}

TEST_CASE("markdown report of a six-row grid") {
  ReportTable t;
  t.seeds = {0, 1, 2};
  for (const auto& row : preset_grid("cross-height").rows) {
    ReportRow r{row.train_domain, row.test_domain, {}};
    for (auto m : kAllMethods) r.cells.push_back({m, 0.5, {0.5, 0.5, 0.5}});
    t.rows.push_back(r);
  }
  const auto md = emit_report(t, ReportFormat::Markdown);
  std::vector<std::string> lines;
  for (std::size_t start = 0, end; (end = md.find('\n', start)) != std::string::npos; start = end + 1)
    lines.push_back(md.substr(start, end - start));
  std::size_t body = 0;
  for (std::size_t i = 2; i < lines.size() && lines[i].rfind("| ", 0) == 0; ++i) {
    ++body;
    CHECK(std::count(lines[i].begin(), lines[i].end(), '|') == 8);
  }
  CHECK(body == 6);
  CHECK(lines[1].rfind("|---|---|", 0) == 0);
  CHECK(md.find("| Sunny(53) | Sunny(7) | 0.500 | 0.500 | 0.500 | 0.500 | 0.500 |") != std::string::npos);
  CHECK(md.find("seeds 0, 1, 2") != std::string::npos);
}

TEST_CASE("grid run") {
  ExperimentGrid g;
  g.seeds = {0, 1};
  g.rows.push_back({kSunny53, kSunny7, {Method::Fcl, Method::Cnn, Method::Uda, Method::Ssda20}});
  g.rows.push_back({kSunny7, kSunny7, {Method::Cnn}});
  const auto t = run_grid(g, small_data(), few_epochs());
  REQUIRE(t.rows.size() == 2);
  CHECK(t.seeds == g.seeds);
  REQUIRE(t.rows[0].cells.size() == 4);
  CHECK(t.rows[0].cells[3].method == Method::Ssda20);
  CHECK(t.rows[0].find(Method::Ssda10) == nullptr);
  for (const auto& row : t.rows)
    for (const auto& c : row.cells) {
      REQUIRE(c.f1_per_seed.size() == 2);
      CHECK(c.f1_mean == doctest::Approx((c.f1_per_seed[0] + c.f1_per_seed[1]) / 2));
      for (double v : c.f1_per_seed) CHECK((v >= 0.0 && v <= 1.0));
    }
  CHECK(run_grid(g, small_data(), few_epochs(), {}, 3) == t);

  ExperimentGrid missing;
  missing.rows.push_back({kSunny7, {Ambience::Night, 84, RadarState::Dynamic}, {Method::Cnn}});
  CHECK_THROWS_AS(run_grid(missing, small_data(), few_epochs()), MissingDomainError);
  ExperimentGrid same;
  same.rows.push_back({kSunny7, kSunny7, {Method::Uda}});
  CHECK_THROWS_AS(run_grid(same, small_data(), few_epochs()), ConfigError);
}

TEST_CASE("method runner checks the model kind") {
  const auto exp = prepare_experiment(small_data(), kSunny53, kSunny7, ModelKind::Fcl, {}, 2);
  CHECK_THROWS_AS(run_method<float>(exp, Method::Cnn, few_epochs(), 1), ConfigError);
  const auto r = run_method<double>(exp, Method::Fcl, few_epochs(), 1);
  CHECK(r.run.history.size() == 2);
  CHECK((r.test_f1 >= 0.0 && r.test_f1 <= 1.0));
}
