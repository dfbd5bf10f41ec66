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

#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <tuple>

#include <doctest.h>

#include "dlsc/matrix_io.hpp"
#include "dlsc/pipeline.hpp"
#include "dlsc/sparse_coding.hpp"
#include "testing_support.hpp"

using namespace dlsc;
using dlsc::testing::ScopedTempDir;
using dlsc::testing::random_matrix;
using dlsc::testing::random_vector;
using dlsc::testing::small_paradigm;

namespace {

/// Test-side correlation oracle: straightforward two-pass loops, no shared
/// code with the library's selection path.
double oracle_max_abs_corr(const Eigen::VectorXd& x, const Eigen::MatrixXd& atoms) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    double mx = 0.0, my = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      mx += x[i];
      my += atoms(i, j);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (atoms(i, j) - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (atoms(i, j) - my) * (atoms(i, j) - my);
    }
    if (sxx == 0.0 || syy == 0.0) continue;
    best = std::max(best, std::abs(sxy / std::sqrt(sxx * syy)));
  }
  return best;
}

}  // namespace

TEST_CASE("training selection excludes task-locked voxels") {
  const TaskParadigm paradigm = small_paradigm();
  const HrfSpec hrf;
  const Eigen::Index n = 22;
  const Dictionary fixed = build_fixed_dictionary(paradigm, n, 0.72, hrf);

  Eigen::MatrixXd data(n, 4);
  data.col(0) = 5.0 * fixed.atoms().col(0).array() + 2.0;  // affine copy
  data.col(1) = random_vector(n, 3);
  // Orthogonal to both demeaned atoms, then demeaned itself.
  Eigen::VectorXd v = random_vector(n, 4);
  for (Eigen::Index j = 0; j < fixed.n_atoms(); ++j) {
    Eigen::VectorXd d = fixed.atoms().col(j).array() - fixed.atoms().col(j).mean();
    d.normalize();
    v -= d.dot(v) * d;
  }
  v.array() -= v.mean();
  // Re-project after demeaning to kill the residual correlation exactly.
  for (Eigen::Index j = 0; j < fixed.n_atoms(); ++j) {
    Eigen::VectorXd d = fixed.atoms().col(j).array() - fixed.atoms().col(j).mean();
    d.normalize();
    v -= d.dot(v) * d;
  }
  data.col(2) = v;
  data.col(3).setConstant(4.2);  // zero variance: treated as r = 0
  const SignalMatrix signals(data, 0.72);

  const std::vector<bool> mask = select_training_voxels(signals, fixed, 0.9, 1);
  CHECK_FALSE(mask[0]);  // |r| = 1 with a fixed atom
  CHECK(mask[2]);        // r = 0 against every atom
  CHECK(mask[3]);        // zero variance counts as r = 0

  // Even a c_th close to 1 keeps the perfectly correlated voxel out.
  const std::vector<bool> strict = select_training_voxels(signals, fixed, 0.999999, 1);
  CHECK_FALSE(strict[0]);
}

TEST_CASE("training selection matches a brute-force oracle") {
  const TaskParadigm paradigm = default_motor_paradigm();
  const HrfSpec hrf;
  const Dictionary fixed = build_fixed_dictionary(paradigm, 284, 0.72, hrf);
  Eigen::MatrixXd data = random_matrix(284, 100, 64);
  // Plant a few task-locked voxels so both branches are exercised.
  for (int v = 0; v < 10; ++v)
    data.col(v) = 3.0 * fixed.atoms().col(v % 6) + 0.1 * data.col(v);
  const SignalMatrix signals(data, 0.72);

  const std::vector<bool> mask = select_training_voxels(signals, fixed, 0.1, 1);
  for (Eigen::Index v = 0; v < 100; ++v) {
    const bool expected = oracle_max_abs_corr(data.col(v), fixed.atoms()) < 0.1;
    CHECK(mask[static_cast<std::size_t>(v)] == expected);
  }
}

TEST_CASE("training selection enforces V_r >= K_l") {
  const TaskParadigm paradigm = small_paradigm();
  const HrfSpec hrf;
  const Eigen::Index n = 22;
  const Dictionary fixed = build_fixed_dictionary(paradigm, n, 0.72, hrf);
  Eigen::MatrixXd data(n, 3);
  for (int v = 0; v < 3; ++v) data.col(v) = (v + 1.0) * fixed.atoms().col(0);
  try {
    select_training_voxels(SignalMatrix(data, 0.72), fixed, 0.5, 2);
    FAIL("expected a constraint violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConstraintViolation);
    CHECK(std::string(e.what()).find("V_r >= K_l") != std::string::npos);
  }
}

TEST_CASE("denoise reproduces fixed-atom columns nearly exactly") {
  const TaskParadigm paradigm = small_paradigm();
  const HrfSpec hrf;
  const Eigen::Index n = 22;
  const Dictionary fixed = build_fixed_dictionary(paradigm, n, 0.72, hrf);

  // Sixty columns that are scaled fixed atoms plus forty noise columns that
  // keep the training set non-empty (the learned block must train on
  // something below the correlation threshold).
  Eigen::MatrixXd data(n, 100);
  std::mt19937_64 rng(11);
  for (int v = 0; v < 60; ++v)
    data.col(v) = (1.0 + static_cast<double>(rng() % 7)) *
                  fixed.atoms().col(v % fixed.n_atoms());
  for (int v = 60; v < 100; ++v) data.col(v) = random_vector(n, rng());
  const SignalMatrix signals(data, 0.72);

  DlscParams params;
  params.dict_size = 8;  // 2 fixed + 6 learned
  params.sparsity = 4;
  params.corr_threshold = 0.9;
  params.ksvd_iterations = 5;
  params.rng_seed = 21;
  const DenoiseOutput out = denoise(signals, paradigm, hrf, params);

  const double atom_error =
      (out.denoised.data().leftCols(60) - data.leftCols(60)).norm();
  CHECK(atom_error <= 1e-8 * data.leftCols(60).norm());
  CHECK(out.denoised.n_frames() == n);
  CHECK(out.denoised.n_voxels() == 100);
  CHECK(out.denoised.tr_seconds() == 0.72);
}

TEST_CASE("denoise threads the standard operating point through verbatim") {
  const TaskParadigm paradigm = default_motor_paradigm();
  const HrfSpec hrf;
  const SignalMatrix signals(random_matrix(284, 900, 2026), 0.72);

  DlscParams params;  // (400, 40, 0.1) by default
  params.ksvd_iterations = 1;
  params.rng_seed = 7;
  REQUIRE(params.dict_size == 400);
  REQUIRE(params.sparsity == 40);
  REQUIRE(params.corr_threshold == 0.1);

  const DenoiseOutput out = denoise(signals, paradigm, hrf, params);
  CHECK(out.dictionary.n_atoms() == 400);
  CHECK(out.dictionary.fixed_count() == 6);
  CHECK(out.dictionary.learned_count() == 394);
  CHECK(out.coefficients.n_atoms() == 400);
  CHECK(out.coefficients.sparsity_bound() == 40);
  CHECK(validate_column_sparsity(out.coefficients));
  Eigen::Index selected = 0;
  for (const bool m : out.training_mask) selected += m;
  CHECK(selected >= 394);
}

TEST_CASE("denoise with an unconstrained code reconstructs the input") {
  const TaskParadigm paradigm = small_paradigm();
  const HrfSpec hrf;
  const Eigen::Index n = 24;
  const SignalMatrix signals(random_matrix(n, 60, 5150), 0.72);

  DlscParams params;
  params.dict_size = static_cast<int>(n);  // K = N
  params.sparsity = static_cast<int>(n);   // lambda = K = N
  params.corr_threshold = 0.35;
  params.ksvd_iterations = 8;
  params.rng_seed = 3;
  const DenoiseOutput out = denoise(signals, paradigm, hrf, params);
  const double rel =
      (signals.data() - out.denoised.data()).norm() / signals.data().norm();
  CHECK(rel <= 1e-6);
}

TEST_CASE("denoised columns live in the span of their support") {
  const TaskParadigm paradigm = small_paradigm();
  const HrfSpec hrf;
  const SignalMatrix signals(random_matrix(22, 50, 909), 0.72);
  DlscParams params;
  params.dict_size = 10;
  params.sparsity = 3;
  params.corr_threshold = 0.9;
  params.ksvd_iterations = 4;
  const DenoiseOutput out = denoise(signals, paradigm, hrf, params);
  for (Eigen::Index v = 0; v < signals.n_voxels(); ++v) {
    const Eigen::VectorXd rebuilt =
        out.dictionary.atoms() * out.coefficients.coeffs().col(v);
    CHECK((out.denoised.data().col(v) - rebuilt).norm() <= 1e-12);
  }
}

TEST_CASE("learning never mutates the fixed block") {
  const TaskParadigm paradigm = small_paradigm();
  const HrfSpec hrf;
  const SignalMatrix signals(random_matrix(22, 40, 31337), 0.72);
  const Dictionary fixed = build_fixed_dictionary(paradigm, 22, 0.72, hrf);
  DlscParams params;
  params.dict_size = 9;
  params.sparsity = 3;
  params.corr_threshold = 0.9;
  params.ksvd_iterations = 6;
  const DenoiseOutput out = denoise(signals, paradigm, hrf, params);
  CHECK((out.dictionary.atoms().leftCols(2) - fixed.atoms())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
  CHECK(out.dictionary.label(0) == "a");
  CHECK(out.dictionary.label(1) == "b");
}

TEST_CASE("denoise is deterministic given the seed") {
  const TaskParadigm paradigm = small_paradigm();
  const HrfSpec hrf;
  const SignalMatrix signals(random_matrix(22, 40, 8), 0.72);
  DlscParams params;
  params.dict_size = 8;
  params.sparsity = 3;
  params.corr_threshold = 0.9;
  params.ksvd_iterations = 5;
  params.rng_seed = 77;
  const DenoiseOutput a = denoise(signals, paradigm, hrf, params);
  const DenoiseOutput b = denoise(signals, paradigm, hrf, params);
  CHECK((a.denoised.data().array() == b.denoised.data().array()).all());
  CHECK((a.dictionary.atoms().array() == b.dictionary.atoms().array()).all());
  CHECK((a.coefficients.coeffs().array() == b.coefficients.coeffs().array()).all());
  CHECK(a.training_mask == b.training_mask);
  CHECK(a.trace.objective_per_iteration == b.trace.objective_per_iteration);
}

TEST_CASE("scaling the input scales the output") {
  const TaskParadigm paradigm = small_paradigm();
  const HrfSpec hrf;
  const Eigen::MatrixXd base = random_matrix(22, 40, 123);
  DlscParams params;
  params.dict_size = 8;
  params.sparsity = 3;
  params.corr_threshold = 0.9;
  params.ksvd_iterations = 5;
  params.rng_seed = 5;

  const DenoiseOutput ref = denoise(SignalMatrix(base, 0.72), paradigm, hrf, params);

  SUBCASE("power-of-two scale is exact") {
    const DenoiseOutput doubled =
        denoise(SignalMatrix(2.0 * base, 0.72), paradigm, hrf, params);
    CHECK(doubled.training_mask == ref.training_mask);
    CHECK((doubled.denoised.data() - 2.0 * ref.denoised.data())
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  SUBCASE("general positive scale is exact to rounding") {
    const DenoiseOutput scaled =
        denoise(SignalMatrix(1.7 * base, 0.72), paradigm, hrf, params);
    CHECK(scaled.training_mask == ref.training_mask);
    CHECK((scaled.denoised.data() - 1.7 * ref.denoised.data()).norm() <=
          1e-12 * ref.denoised.data().norm());
  }
}

TEST_CASE("grid search") {
  const TaskParadigm paradigm = small_paradigm();
  const HrfSpec hrf;

  // Two communities driven by the two conditions plus noise background.
  const Eigen::Index n = 22;
  const Dictionary fixed = build_fixed_dictionary(paradigm, n, 0.72, hrf);
  Eigen::MatrixXd data(n, 60);
  std::mt19937_64 rng(999);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int v = 0; v < 12; ++v)
    data.col(v) = fixed.atoms().col(0) * 1.0;
  for (int v = 12; v < 24; ++v)
    data.col(v) = fixed.atoms().col(1) * 1.0;
  for (int v = 24; v < 60; ++v) data.col(v) = random_vector(n, rng());
  for (Eigen::Index v = 0; v < 60; ++v)
    for (Eigen::Index i = 0; i < n; ++i) data(i, v) += 0.4 * gauss(rng);
  const SignalMatrix signals(data, 0.72);

  GridScorer scorer;
  scorer.seeds = {{"seed_a", {0, 1, 2}}, {"seed_b", {12, 13, 14}}};
  scorer.targets = {{"tgt_a", {3, 4, 5}}, {"tgt_b", {15, 16, 17}}};
  scorer.high_pairs = {{"seed_a", "tgt_a"}, {"seed_b", "tgt_b"}};
  scorer.low_pairs = {{"seed_a", "tgt_b"}, {"seed_b", "tgt_a"}};

  SUBCASE("covers the Cartesian product and records failures") {
    const GridSearchReport report =
        grid_search(signals, paradigm, hrf, {6, 10}, {2, 40}, {0.0, 0.9},
                    scorer, 2, 4);
    CHECK(report.entries.size() == 8);
    std::set<std::tuple<int, int, double>> seen;
    int failed = 0;
    for (const auto& e : report.entries) {
      seen.insert({e.params.dict_size, e.params.sparsity, e.params.corr_threshold});
      if (!e.succeeded) {
        ++failed;
        CHECK_FALSE(e.failure_reason.empty());
      }
    }
    CHECK(seen.size() == 8);
    // cth = 0 selects nothing (V_r = 0 < K_l) and lambda = 40 > K = 6/10
    // is invalid; both kinds of failure are recorded, never fatal.
    CHECK(failed >= 4);
    // Sorted: successes first, best score first.
    bool in_failures = false;
    double last_score = std::numeric_limits<double>::infinity();
    for (const auto& e : report.entries) {
      if (!e.succeeded) {
        in_failures = true;
        continue;
      }
      CHECK_FALSE(in_failures);
      CHECK(e.score <= last_score + 1e-15);
      last_score = e.score;
    }
  }

  SUBCASE("singleton grid equals a direct denoise call") {
    const GridSearchReport report =
        grid_search(signals, paradigm, hrf, {8}, {3}, {0.9}, scorer, 3, 11);
    REQUIRE(report.entries.size() == 1);
    const GridSearchEntry& entry = report.entries[0];
    REQUIRE(entry.succeeded);

    DlscParams params;
    params.dict_size = 8;
    params.sparsity = 3;
    params.corr_threshold = 0.9;
    params.ksvd_iterations = 3;
    params.rng_seed = 11;
    const DenoiseOutput direct = denoise(signals, paradigm, hrf, params);
    const ConnectivityReport direct_map =
        connectivity_map(direct.denoised, scorer.seeds, scorer.targets);
    REQUIRE(entry.connectivity.rows.size() == direct_map.rows.size());
    for (std::size_t i = 0; i < direct_map.rows.size(); ++i)
      CHECK(entry.connectivity.rows[i].r == direct_map.rows[i].r);
  }

  SUBCASE("scores equal a brute-force rescoring of the saved maps") {
    const GridSearchReport report =
        grid_search(signals, paradigm, hrf, {8, 10}, {2, 3}, {0.9}, scorer, 2, 4);
    for (const auto& entry : report.entries) {
      if (!entry.succeeded) continue;
      double high = 0.0, low = 0.0;
      for (const auto& row : entry.connectivity.rows) {
        for (const auto& p : scorer.high_pairs)
          if (row.seed == p.first && row.target == p.second) high += row.z;
        for (const auto& p : scorer.low_pairs)
          if (row.seed == p.first && row.target == p.second) low += row.z;
      }
      const double expected = high / 2.0 - low / 2.0;
      CHECK(entry.score == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  SUBCASE("reconstruction-error scorer needs no regions") {
    GridScorer recon;
    recon.rule = GridScorer::Rule::kReconstructionError;
    const GridSearchReport report =
        grid_search(signals, paradigm, hrf, {8}, {2, 4}, {0.9}, recon, 2, 4);
    REQUIRE(report.entries.size() == 2);
    for (const auto& e : report.entries) {
      REQUIRE(e.succeeded);
      CHECK(e.score <= 0.0);
    }
    // More atoms per voxel cannot fit worse.
    CHECK(report.entries[0].params.sparsity == 4);
  }

  SUBCASE("grid report csv") {
    ScopedTempDir dir("grid_csv");
    const GridSearchReport report =
        grid_search(signals, paradigm, hrf, {8}, {3}, {0.0, 0.9}, scorer, 2, 4);
    const auto path = dir.path() / "grid.csv";
    save_grid_report_csv(report, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "k,lambda,cth,status,score,reason");
    int rows = 0;
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 2);
  }
}

TEST_CASE("grid search validates its inputs") {
  const TaskParadigm paradigm = small_paradigm();
  const SignalMatrix signals(random_matrix(22, 30, 1), 0.72);
  GridScorer scorer;  // contrast rule but no regions
  CHECK_THROWS_AS(grid_search(signals, paradigm, HrfSpec{}, {}, {2}, {0.5},
                              scorer, 2, 1),
                  Error);
  CHECK_THROWS_AS(grid_search(signals, paradigm, HrfSpec{}, {8}, {2}, {0.5},
                              scorer, 2, 1),
                  Error);
}
