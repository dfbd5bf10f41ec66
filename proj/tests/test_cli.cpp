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

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <doctest.h>

#include "dlsc/connectivity.hpp"
#include "dlsc/matrix_io.hpp"
#include "dlsc/paradigm.hpp"
#include "testing_support.hpp"

using namespace dlsc;
using dlsc::testing::ScopedTempDir;
using dlsc::testing::random_matrix;

namespace {

std::string cli_path() {
  const char* env = std::getenv("DLSC_CLI");
  REQUIRE_MESSAGE(env != nullptr,
                  "set DLSC_CLI to the dlsc binary path (ctest does this)");
  return env;
}

int run_cli(const std::string& arguments) {
  const std::string command =
      cli_path() + " " + arguments + " 2>/dev/null >/dev/null";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes a small task-structured matrix plus regions for connect/grid runs.
struct CliFixture {
  explicit CliFixture(const ScopedTempDir& dir) {
    const TaskParadigm paradigm = dlsc::testing::small_paradigm();
    const HrfSpec hrf;
    const Eigen::Index n = 22;
    const Dictionary fixed = build_fixed_dictionary(paradigm, n, 0.72, hrf);
    Eigen::MatrixXd data(n, 40);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int v = 0; v < 8; ++v) data.col(v) = fixed.atoms().col(0);
    for (int v = 8; v < 16; ++v) data.col(v) = fixed.atoms().col(1);
    for (Eigen::Index v = 16; v < 40; ++v)
      data.col(v) = dlsc::testing::random_vector(n, rng());
    for (Eigen::Index v = 0; v < 40; ++v)
      for (Eigen::Index i = 0; i < n; ++i) data(i, v) += 0.3 * gauss(rng);

    input = dir.path() / "input.bin";
    save_signal_matrix(SignalMatrix(data, 0.72), input,
                       MatrixFileFormat::kBinary);
    paradigm_csv = dir.path() / "paradigm.csv";
    save_paradigm_csv(paradigm, paradigm_csv);

    seeds = dir.path() / "seeds.csv";
    targets = dir.path() / "targets.csv";
    pairs = dir.path() / "pairs.csv";
    save_regions_csv({{"seed_a", {0, 1}}, {"seed_b", {8, 9}}}, seeds);
    save_regions_csv({{"tgt_a", {2, 3}}, {"tgt_b", {10, 11}}}, targets);
    save_pairs_csv({{{"seed_a", "tgt_a"}, {"seed_b", "tgt_b"}},
                    {{"seed_a", "tgt_b"}, {"seed_b", "tgt_a"}}},
                   pairs);
  }

  std::filesystem::path input, paradigm_csv, seeds, targets, pairs;
};

}  // namespace

TEST_CASE("cli hrf-dump writes a kernel csv with a manifest") {
  ScopedTempDir dir("cli_hrf");
  const auto out = dir.path() / "h.csv";
  const int rc =
      run_cli("hrf-dump --tr 0.72 --dt 0.1 --out " + out.string());
  REQUIRE(rc == 0);

  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,h");
  std::getline(in, line);
  CHECK(line == "0,0");  // kernel starts at zero

  double max_h = -1.0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    max_h = std::max(max_h, std::stod(line.substr(comma + 1)));
  }
  CHECK(max_h == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::filesystem::exists(dir.path() / "h.csv.manifest.json"));
}

TEST_CASE("cli subcommands chain through files") {
  ScopedTempDir dir("cli_chain");
  const CliFixture fx(dir);

  const auto dn = dir.path() / "dn";
  REQUIRE(run_cli("denoise --input " + fx.input.string() + " --paradigm " +
                  fx.paradigm_csv.string() +
                  " --k 8 --lambda 3 --cth 0.9 --iters 3 --seed 5 --out " +
                  dn.string()) == 0);
  CHECK(std::filesystem::exists(dn / "denoised.bin"));
  CHECK(std::filesystem::exists(dn / "dictionary.csv"));
  CHECK(std::filesystem::exists(dn / "coefficients.csv"));
  CHECK(std::filesystem::exists(dn / "mask.csv"));
  CHECK(std::filesystem::exists(dn / "trace.csv"));
  CHECK(std::filesystem::exists(dn / "manifest.json"));

  const auto raw_report = dir.path() / "raw.csv";
  const auto dn_report = dir.path() / "dn.csv";
  REQUIRE(run_cli("connect --input " + fx.input.string() + " --seeds " +
                  fx.seeds.string() + " --targets " + fx.targets.string() +
                  " --out " + raw_report.string()) == 0);
  REQUIRE(run_cli("connect --input " + (dn / "denoised.bin").string() +
                  " --seeds " + fx.seeds.string() + " --targets " +
                  fx.targets.string() + " --out " + dn_report.string()) == 0);

  const auto emphasis = dir.path() / "emphasis.csv";
  REQUIRE(run_cli("compare --raw " + raw_report.string() + " --denoised " +
                  dn_report.string() + " --out " + emphasis.string()) == 0);
  std::ifstream in(emphasis);
  std::string line;
  std::getline(in, line);
  CHECK(line == "seed,target,z_raw,z_denoised,delta_z");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("cli tnlm runs on csv input with coordinates") {
  ScopedTempDir dir("cli_tnlm");
  const auto input = dir.path() / "in.csv";
  save_signal_matrix(SignalMatrix(random_matrix(15, 6, 3), 0.72), input,
                     MatrixFileFormat::kCsv);
  const auto coords = dir.path() / "coords.csv";
  {
    std::ofstream out(coords);
    out << "x,y,z\n";
    for (int v = 0; v < 6; ++v) out << v << ",0,0\n";
  }
  const auto out = dir.path() / "out.csv";
  REQUIRE(run_cli("tnlm --input " + input.string() +
                  " --distance 2 --smoothing 0.72 --coords " +
                  coords.string() + " --out " + out.string()) == 0);
  const SignalMatrix result = load_signal_matrix(out, MatrixFileFormat::kCsv);
  CHECK(result.n_frames() == 15);
  CHECK(result.n_voxels() == 6);
}

TEST_CASE("cli grid writes a report over the full product") {
  ScopedTempDir dir("cli_grid");
  const CliFixture fx(dir);
  const auto out = dir.path() / "grid";
  REQUIRE(run_cli("grid --input " + fx.input.string() + " --paradigm " +
                  fx.paradigm_csv.string() +
                  " --k 6,8 --lambda 2:3:1 --cth 0.9 --iters 2 --seed 1"
                  " --scorer contrast --seeds " +
                  fx.seeds.string() + " --targets " + fx.targets.string() +
                  " --pairs " + fx.pairs.string() + " --out " + out.string()) ==
          0);
  std::ifstream in(out / "grid.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,lambda,cth,status,score,reason");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);  // 2 x 2 x 1
}

TEST_CASE("cli phantom emits a consumable dataset") {
  ScopedTempDir dir("cli_phantom");
  const auto spec = dir.path() / "spec.txt";
  {
    std::ofstream out(spec);
    // The 60-frame run covers the lh and lf blocks of the default design.
    out << "n_frames=60\n"
           "tr=0.72\n"
           "n_voxels=30\n"
           "noise_sigma=0.1\n"
           "rng_seed=4\n"
           "paradigm=default\n"
           "community=c1:0:12:task=lh:1.0\n"
           "community=c2:12:24:task=lf:1.0\n";
  }
  const auto out = dir.path() / "ph";
  REQUIRE(run_cli("phantom --spec " + spec.string() + " --out " +
                  out.string()) == 0);
  for (const char* name : {"noisy.bin", "clean.bin", "seeds.csv",
                           "targets.csv", "pairs.csv", "communities.csv",
                           "true_dictionary.csv", "true_coefficients.csv",
                           "manifest.json"})
    CHECK(std::filesystem::exists(out / name));

  // The emitted regions must be directly consumable by connect.
  const auto report = dir.path() / "report.csv";
  CHECK(run_cli("connect --input " + (out / "noisy.bin").string() +
                " --seeds " + (out / "seeds.csv").string() + " --targets " +
                (out / "targets.csv").string() + " --out " +
                report.string()) == 0);
  const ConnectivityReport back = load_report_csv(report);
  CHECK(back.rows.size() == 2 * 4);  // 2 seeds x (2 communities x 2 targets)
}

TEST_CASE("cli reruns reproduce identical manifests") {
  ScopedTempDir dir("cli_det");
  const CliFixture fx(dir);
  std::string previous;
  for (int round = 0; round < 2; ++round) {
    const auto out = dir.path() / ("dn" + std::to_string(round));
    REQUIRE(run_cli("denoise --input " + fx.input.string() + " --paradigm " +
                    fx.paradigm_csv.string() +
                    " --k 8 --lambda 3 --cth 0.9 --iters 3 --seed 5 --out " +
                    out.string()) == 0);
    // Normalize the output path out of the manifest before comparing.
    std::string manifest = slurp(out / "manifest.json");
    const std::string needle = out.string();
    for (std::size_t pos = manifest.find(needle); pos != std::string::npos;
         pos = manifest.find(needle, pos))
      manifest.replace(pos, needle.size(), "OUT");
    if (round == 0)
      previous = manifest;
    else
      CHECK(manifest == previous);
  }
}

TEST_CASE("cli exit codes are specific") {
  ScopedTempDir dir("cli_codes");
  const CliFixture fx(dir);

  SUBCASE("unknown subcommand is a usage error") {
    CHECK(run_cli("frobnicate") == 2);
  }

  SUBCASE("unknown flag is a usage error") {
    CHECK(run_cli("hrf-dump --tr 0.72 --nope 1 --out x.csv") == 2);
  }

  SUBCASE("missing input file is an io error") {
    CHECK(run_cli("denoise --input " + (dir.path() / "absent.bin").string() +
                  " --out " + (dir.path() / "o").string()) == 3);
  }

  SUBCASE("malformed csv is a parse error") {
    const auto bad = dir.path() / "bad.csv";
    std::ofstream(bad) << "tr=0.72\n1,2\n3\n";
    CHECK(run_cli("tnlm --input " + bad.string() + " --out " +
                  (dir.path() / "o.csv").string()) == 4);
  }

  SUBCASE("too strict a threshold is a constraint violation") {
    CHECK(run_cli("denoise --input " + fx.input.string() + " --paradigm " +
                  fx.paradigm_csv.string() +
                  " --k 30 --lambda 3 --cth 0.0001 --iters 2 --out " +
                  (dir.path() / "o").string()) == 5);
  }

  SUBCASE("bad parameters are invalid arguments") {
    CHECK(run_cli("denoise --input " + fx.input.string() + " --paradigm " +
                  fx.paradigm_csv.string() +
                  " --k 8 --lambda 9 --cth 0.9 --out " +
                  (dir.path() / "o").string()) == 6);
  }

  SUBCASE("version flag") {
    CHECK(run_cli("--version") == 0);
  }
}
