// Copyright 2026 The DLSC Authors
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

#include <cmath>
#include <map>
#include <string>

#include <doctest.h>

#include "dlsc/connectivity.hpp"
#include "testing_support.hpp"

using namespace dlsc;
using dlsc::testing::ScopedTempDir;
using dlsc::testing::random_matrix;
using dlsc::testing::random_vector;

TEST_CASE("region series") {
  Eigen::MatrixXd data(3, 3);
  data.col(0) << 1, 2, 3;
  data.col(1) << 3, 2, 1;
  data.col(2) << 10, 20, 30;
  const SignalMatrix signals(data, 1.0);

  SUBCASE("single voxel is returned verbatim") {
    const Eigen::VectorXd s = region_series(signals, {"one", {2}});
    CHECK((s.array() == data.col(2).array()).all());
  }

  SUBCASE("mean of identical columns is that column") {
    Eigen::MatrixXd dup = data;
    dup.col(1) = dup.col(0);
    const SignalMatrix twin(dup, 1.0);
    const Eigen::VectorXd s = region_series(twin, {"pair", {0, 1}});
    CHECK((s.array() == dup.col(0).array()).all());
  }

  SUBCASE("mean of mirrored columns is flat") {
    const Eigen::VectorXd s = region_series(signals, {"mirror", {0, 1}});
    CHECK(s[0] == 2.0);
    CHECK(s[1] == 2.0);
    CHECK(s[2] == 2.0);
  }

  SUBCASE("out-of-range and duplicate indices are rejected") {
    CHECK_THROWS_AS(region_series(signals, {"bad", {5}}), Error);
    CHECK_THROWS_AS(region_series(signals, {"dup", {1, 1}}), Error);
    CHECK_THROWS_AS(region_series(signals, {"empty", {}}), Error);
  }
}

TEST_CASE("pearson correlation") {
  Eigen::VectorXd x(4), y(4);
  x << 1, 2, 3, 4;

  SUBCASE("self correlation is 1, anti-correlation is -1") {
    CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(x, Eigen::VectorXd(-x)) == doctest::Approx(-1.0).epsilon(1e-15));
  }

  SUBCASE("matches the frozen two-pass value") {
    y << 1, 2, 3, 10;
    CHECK(pearson(x, y) ==
          doctest::Approx(0.8854377448471462).epsilon(1e-12));
  }

  SUBCASE("zero variance is a degenerate-input error") {
    y.setConstant(2.0);
    CHECK_THROWS_AS(pearson(x, y), Error);
  }

  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(pearson(x, random_vector(5, 1)), Error);
  }

  SUBCASE("affine invariance with positive scale") {
    const Eigen::VectorXd a = random_vector(50, 10);
    const Eigen::VectorXd b = random_vector(50, 11);
    const double base = pearson(a, b);
    CHECK(pearson(Eigen::VectorXd(2.5 * a.array() + 7.0), b) ==
          doctest::Approx(base).epsilon(1e-12));
    CHECK(pearson(Eigen::VectorXd(-1.5 * a.array() + 3.0), b) ==
          doctest::Approx(-base).epsilon(1e-12));
  }
}

TEST_CASE("fisher transform") {
  CHECK(fisher_z(0.0) == 0.0);
  CHECK(fisher_z(0.5) == doctest::Approx(0.5493061443340548).epsilon(1e-9));
  CHECK(fisher_z_inv(fisher_z(-0.9)) == doctest::Approx(-0.9).epsilon(1e-12));
  CHECK(std::isfinite(fisher_z(1.0)));
  CHECK(std::isfinite(fisher_z(-1.0)));
  CHECK(fisher_z_inv(100.0) < 1.0);
  CHECK(fisher_z_inv(-100.0) > -1.0);
  CHECK_THROWS_AS(fisher_z(1.5), Error);

  // Strictly increasing on a grid.
  double prev = fisher_z(-0.999);
  for (double r = -0.9; r <= 0.9991; r += 0.1) {
    const double z = fisher_z(r);
    CHECK(z > prev);
    prev = z;
  }
}

TEST_CASE("connectivity map") {
  Eigen::MatrixXd data = random_matrix(30, 9, 17);
  const SignalMatrix signals(data, 0.72);
  const std::vector<RegionSpec> seeds = {
      {"s0", {0}}, {"s1", {1, 2}}, {"s2", {3}}};
  const std::vector<RegionSpec> targets = {{"t0", {4}}, {"t1", {5}},
                                           {"t2", {6}}, {"t3", {7}},
                                           {"t4", {8}}, {"t5", {0}}};

  SUBCASE("row count is the Cartesian product") {
    const ConnectivityReport report = connectivity_map(signals, seeds, targets);
    CHECK(report.rows.size() == 18);
    CHECK_FALSE(report.group_info.has_value());
  }

  SUBCASE("seed equal to target gives r = 1") {
    const ConnectivityReport report = connectivity_map(signals, seeds, targets);
    for (const auto& row : report.rows)
      if (row.seed == "s0" && row.target == "t5")
        CHECK(row.r == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("zero-variance region is flagged, not fatal") {
    Eigen::MatrixXd flat = data;
    flat.col(4).setConstant(3.0);
    const ConnectivityReport report =
        connectivity_map(SignalMatrix(flat, 0.72), seeds, targets);
    int invalid = 0;
    for (const auto& row : report.rows)
      if (!row.valid) {
        ++invalid;
        CHECK(row.target == "t0");
      }
    CHECK(invalid == 3);
  }

  SUBCASE("rows are keyed by name, not position") {
    const ConnectivityReport forward = connectivity_map(signals, seeds, targets);
    auto reversed_seeds = seeds;
    std::reverse(reversed_seeds.begin(), reversed_seeds.end());
    const ConnectivityReport backward =
        connectivity_map(signals, reversed_seeds, targets);
    std::map<std::pair<std::string, std::string>, double> lookup;
    for (const auto& row : backward.rows) lookup[{row.seed, row.target}] = row.r;
    for (const auto& row : forward.rows)
      CHECK(lookup.at({row.seed, row.target}) == row.r);
  }
}

TEST_CASE("group average") {
  auto make_report = [](double r0, double r1) {
    ConnectivityReport rep;
    rep.rows.push_back({"s", "t0", r0, fisher_z(r0), true});
    rep.rows.push_back({"s", "t1", r1, fisher_z(r1), true});
    return rep;
  };

  SUBCASE("single report averages to itself") {
    const ConnectivityReport one = make_report(0.3, -0.2);
    const ConnectivityReport avg = group_average({one});
    REQUIRE(avg.group_info.has_value());
    CHECK(avg.group_info->n_subjects == 1);
    CHECK(avg.group_info->aggregation == "fisher-mean");
    for (std::size_t i = 0; i < one.rows.size(); ++i)
      CHECK(avg.rows[i].r == doctest::Approx(one.rows[i].r).epsilon(1e-12));
  }

  SUBCASE("opposite z values cancel") {
    const ConnectivityReport avg =
        group_average({make_report(0.6, 0.1), make_report(-0.6, -0.1)});
    CHECK(avg.rows[0].r == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(avg.rows[1].r == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("matches tanh of the mean atanh") {
    const ConnectivityReport avg = group_average(
        {make_report(0.2, 0.0), make_report(0.4, 0.0), make_report(0.6, 0.0)});
    CHECK(avg.rows[0].r ==
          doctest::Approx(0.41351420408153683).epsilon(1e-12));
  }

  SUBCASE("mismatched keys are rejected") {
    ConnectivityReport odd;
    odd.rows.push_back({"s", "other", 0.1, fisher_z(0.1), true});
    odd.rows.push_back({"s", "t1", 0.1, fisher_z(0.1), true});
    CHECK_THROWS_AS(group_average({make_report(0.1, 0.2), odd}), Error);
  }

  SUBCASE("invalid rows are excluded from the mean") {
    ConnectivityReport with_invalid = make_report(0.2, 0.2);
    with_invalid.rows[0].valid = false;
    const ConnectivityReport avg =
        group_average({with_invalid, make_report(0.6, 0.6)});
    CHECK(avg.rows[0].r == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(avg.rows[1].r ==
          doctest::Approx(fisher_z_inv((fisher_z(0.2) + fisher_z(0.6)) / 2.0))
              .epsilon(1e-12));
  }
}

TEST_CASE("emphasis profile") {
  ConnectivityReport raw, denoised;
  const double rs[3] = {0.7, 0.1, 0.4};
  for (int i = 0; i < 3; ++i) {
    const std::string target = "t" + std::to_string(i);
    raw.rows.push_back({"s", target, rs[i], fisher_z(rs[i]), true});
    denoised.rows.push_back({"s", target, rs[i], fisher_z(rs[i]), true});
  }

  SUBCASE("identical reports give all-zero deltas, sorted by z_raw") {
    const auto rows = emphasis_profile(raw, denoised);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].target == "t0");
    CHECK(rows[1].target == "t2");
    CHECK(rows[2].target == "t1");
    for (const auto& row : rows) CHECK(row.delta_z == 0.0);
  }

  SUBCASE("a single raised pair tops the |delta| ranking") {
    denoised.rows[1].r = 0.9;
    denoised.rows[1].z = fisher_z(0.9);
    const auto rows = emphasis_profile(raw, denoised);
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (std::abs(rows[i].delta_z) > std::abs(rows[best].delta_z)) best = i;
    CHECK(rows[best].target == "t1");
  }

  SUBCASE("key mismatch is rejected") {
    denoised.rows[2].target = "other";
    CHECK_THROWS_AS(emphasis_profile(raw, denoised), Error);
  }
}

TEST_CASE("region and report csv round-trips") {
  ScopedTempDir dir("conn_csv");

  SUBCASE("regions") {
    const std::vector<RegionSpec> regions = {{"a", {0, 5, 7}}, {"b", {2}}};
    const auto path = dir.path() / "regions.csv";
    save_regions_csv(regions, path);
    const auto back = load_regions_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].name == "a");
    CHECK(back[0].voxel_indices == std::vector<Eigen::Index>{0, 5, 7});
    CHECK(back[1].name == "b");
  }

  SUBCASE("plain report with an invalid row") {
    ConnectivityReport report;
    report.rows.push_back({"s", "t", 0.25, fisher_z(0.25), true});
    report.rows.push_back({"s", "u", 0.0, 0.0, false});
    const auto path = dir.path() / "report.csv";
    save_report_csv(report, path);
    const ConnectivityReport back = load_report_csv(path);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].r == 0.25);
    CHECK(back.rows[0].z == fisher_z(0.25));
    CHECK(back.rows[0].valid);
    CHECK_FALSE(back.rows[1].valid);
    CHECK_FALSE(back.group_info.has_value());
  }

  SUBCASE("group report keeps the subject count") {
    ConnectivityReport report;
    report.rows.push_back({"s", "t", 0.5, fisher_z(0.5), true});
    report.group_info = GroupInfo{7, "fisher-mean"};
    const auto path = dir.path() / "group.csv";
    save_report_csv(report, path);
    const ConnectivityReport back = load_report_csv(path);
    REQUIRE(back.group_info.has_value());
    CHECK(back.group_info->n_subjects == 7);
  }
}
