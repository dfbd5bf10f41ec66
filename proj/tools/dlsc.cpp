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

#ifdef _OPENMP
#include <omp.h>
#endif

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlsc/dlsc.hpp"
#include "manifest.hpp"

namespace {

using dlsc::Error;
using dlsc::ErrorCode;
using dlsc::MatrixFileFormat;
using dlsc::tools::ManifestWriter;

constexpr const char* kVersion = "dlsc 0.1.0";

struct HrfFlags {
  double peak_delay = 6.0;
  double undershoot_delay = 16.0;
  double peak_dispersion = 1.0;
  double undershoot_dispersion = 1.0;
  double undershoot_ratio = 6.0;
  double kernel_length = 32.0;
  int oversample = 16;

  void attach(CLI::App* cmd) {
    cmd->add_option("--hrf-peak-delay", peak_delay, "Response peak delay (s)")
        ->capture_default_str();
    cmd->add_option("--hrf-undershoot-delay", undershoot_delay,
                    "Undershoot delay (s)")
        ->capture_default_str();
    cmd->add_option("--hrf-peak-dispersion", peak_dispersion,
                    "Peak gamma dispersion")
        ->capture_default_str();
    cmd->add_option("--hrf-undershoot-dispersion", undershoot_dispersion,
                    "Undershoot gamma dispersion")
        ->capture_default_str();
    cmd->add_option("--hrf-undershoot-ratio", undershoot_ratio,
                    "Peak-to-undershoot amplitude ratio")
        ->capture_default_str();
    cmd->add_option("--hrf-kernel-length", kernel_length, "Kernel length (s)")
        ->capture_default_str();
    cmd->add_option("--hrf-oversample", oversample,
                    "Convolution oversampling factor")
        ->capture_default_str();
  }

  dlsc::HrfSpec spec() const {
    dlsc::HrfSpec s;
    s.peak_delay_seconds = peak_delay;
    s.undershoot_delay_seconds = undershoot_delay;
    s.peak_dispersion = peak_dispersion;
    s.undershoot_dispersion = undershoot_dispersion;
    s.undershoot_ratio = undershoot_ratio;
    s.kernel_length_seconds = kernel_length;
    s.oversample_factor = oversample;
    return s;
  }

  nlohmann::json to_json() const {
    return {{"peak_delay", peak_delay},
            {"undershoot_delay", undershoot_delay},
            {"peak_dispersion", peak_dispersion},
            {"undershoot_dispersion", undershoot_dispersion},
            {"undershoot_ratio", undershoot_ratio},
            {"kernel_length", kernel_length},
            {"oversample", oversample}};
  }
};

MatrixFileFormat resolve_format(const std::string& flag,
                                const std::filesystem::path& path) {
  if (flag == "csv") return MatrixFileFormat::kCsv;
  if (flag == "binary") return MatrixFileFormat::kBinary;
  return dlsc::format_from_extension(path);
}

dlsc::SignalMatrix load_input(const std::filesystem::path& path,
                              const std::string& format_flag) {
  return dlsc::load_signal_matrix(path, resolve_format(format_flag, path));
}

dlsc::TaskParadigm resolve_paradigm(const std::string& arg) {
  if (arg == "default") return dlsc::default_motor_paradigm();
  return dlsc::load_paradigm_csv(arg);
}

/// Grid axis syntax: "begin:end:step" (inclusive), "a,b,c", or one value.
template <typename T>
std::vector<T> parse_grid(const std::string& text, const std::string& flag) {
  auto parse_one = [&](std::string_view token) {
    T value{};
    auto [ptr, ec] =
        std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
      dlsc::throw_error(ErrorCode::kInvalidArgument,
                        flag + ": bad number '" + std::string(token) + "'");
    return value;
  };
  std::vector<T> values;
  if (text.find(':') != std::string::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
      dlsc::throw_error(ErrorCode::kInvalidArgument,
                        flag + ": range needs begin:end:step");
    const T begin = parse_one(std::string_view(text).substr(0, c1));
    const T end = parse_one(std::string_view(text).substr(c1 + 1, c2 - c1 - 1));
    const T step = parse_one(std::string_view(text).substr(c2 + 1));
    if (!(step > 0) || end < begin)
      dlsc::throw_error(ErrorCode::kInvalidArgument,
                        flag + ": range must satisfy begin <= end, step > 0");
    const auto count = static_cast<long long>(
        std::floor((static_cast<double>(end) - static_cast<double>(begin)) /
                       static_cast<double>(step) +
                   1e-9));
    for (long long i = 0; i <= count; ++i)
      values.push_back(static_cast<T>(begin + static_cast<T>(i) * step));
    return values;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    values.push_back(parse_one(
        std::string_view(text).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return values;
}

std::vector<std::array<int, 3>> load_coords_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    dlsc::throw_error(ErrorCode::kIo, "cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    dlsc::throw_error(ErrorCode::kParse, path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,z")
    dlsc::throw_error(ErrorCode::kParse,
                      path.string() + ": expected header 'x,y,z'");
  std::vector<std::array<int, 3>> coords;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    ++row;
    std::array<int, 3> c{};
    std::size_t start = 0;
    for (int axis = 0; axis < 3; ++axis) {
      const auto pos = axis < 2 ? line.find(',', start) : line.size();
      if (pos == std::string::npos)
        dlsc::throw_error(ErrorCode::kParse,
                          path.string() + ": row " + std::to_string(row) +
                              " needs x,y,z");
      const std::string_view token =
          std::string_view(line).substr(start, pos - start);
      auto [ptr, ec] = std::from_chars(token.data(),
                                       token.data() + token.size(), c[axis]);
      if (ec != std::errc() || ptr != token.data() + token.size())
        dlsc::throw_error(ErrorCode::kParse,
                          path.string() + ": bad coordinate at row " +
                              std::to_string(row));
      start = pos + 1;
    }
    coords.push_back(c);
  }
  return coords;
}

void save_mask_csv(const std::vector<bool>& mask,
                   const std::filesystem::path& path) {
  dlsc::atomic_write_file(path, [&](std::ostream& out) {
    out << "voxel,selected\n";
    for (std::size_t v = 0; v < mask.size(); ++v)
      out << v << ',' << (mask[v] ? 1 : 0) << '\n';
  });
}

std::filesystem::path sibling_manifest(const std::filesystem::path& out) {
  std::filesystem::path p = out;
  p += ".manifest.json";
  return p;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    dlsc::throw_error(ErrorCode::kIo,
                      "cannot create directory " + dir.string() + " (" +
                          ec.message() + ")");
}

// ---------------------------------------------------------------------------
// Subcommand configuration blocks.

struct HrfDumpArgs {
  double tr = 0.72;
  double dt = 0.0;  // 0 = use tr
  std::string out;
  HrfFlags hrf;
};

int run_hrf_dump(const HrfDumpArgs& args) {
  const double dt = args.dt > 0.0 ? args.dt : args.tr;
  const Eigen::VectorXd h = dlsc::canonical_hrf(args.hrf.spec(), dt);
  const std::filesystem::path out = args.out;
  dlsc::atomic_write_file(out, [&](std::ostream& stream) {
    stream << "t,h\n";
    for (Eigen::Index i = 0; i < h.size(); ++i)
      stream << dlsc::format_double(static_cast<double>(i) * dt) << ','
             << dlsc::format_double(h[i]) << '\n';
  });

  ManifestWriter manifest("hrf-dump", {{"tr", args.tr},
                                       {"dt", dt},
                                       {"out", out.string()},
                                       {"hrf", args.hrf.to_json()}});
  manifest.record_output(out);
  manifest.write(sibling_manifest(out));
  return 0;
}

struct PhantomArgs {
  std::string spec_path;  // empty = built-in default spec
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_phantom(const PhantomArgs& args) {
  dlsc::PhantomSpec spec = args.spec_path.empty()
                               ? dlsc::default_phantom_spec()
                               : dlsc::load_phantom_spec(args.spec_path);
  if (args.seed_set) spec.rng_seed = args.seed;
  const dlsc::PhantomTruth truth = dlsc::generate_phantom(spec);

  const std::filesystem::path dir = args.out_dir;
  ensure_directory(dir);
  dlsc::save_signal_matrix(truth.noisy, dir / "noisy.bin",
                           MatrixFileFormat::kBinary);
  dlsc::save_signal_matrix(truth.clean, dir / "clean.bin",
                           MatrixFileFormat::kBinary);
  dlsc::save_dictionary_csv(truth.true_dictionary, dir / "true_dictionary.csv");
  dlsc::save_coefficients_csv(truth.true_coefficients,
                              dir / "true_coefficients.csv");
  dlsc::atomic_write_file(dir / "communities.csv", [&](std::ostream& out) {
    out << "voxel,community\n";
    for (std::size_t v = 0; v < truth.community_of_voxel.size(); ++v)
      out << v << ',' << truth.community_of_voxel[v] << '\n';
  });
  dlsc::save_regions_csv(truth.seed_regions, dir / "seeds.csv");
  dlsc::save_regions_csv(truth.target_regions, dir / "targets.csv");
  dlsc::save_pairs_csv({truth.expected_high_pairs, truth.expected_low_pairs},
                       dir / "pairs.csv");

  ManifestWriter manifest(
      "phantom",
      {{"spec", args.spec_path.empty() ? "builtin-default" : args.spec_path},
       {"out", dir.string()},
       {"rng_seed", spec.rng_seed},
       {"n_frames", spec.n_frames},
       {"n_voxels", spec.n_voxels},
       {"tr", spec.tr_seconds}});
  manifest.add_note("resolved_noise_sigma", truth.resolved_noise_sigma);
  manifest.add_note("snr_db", dlsc::snr_db(truth.clean, truth.noisy));
  for (const char* name :
       {"noisy.bin", "clean.bin", "true_dictionary.csv",
        "true_coefficients.csv", "communities.csv", "seeds.csv", "targets.csv",
        "pairs.csv"})
    manifest.record_output(dir / name);
  manifest.write(dir / "manifest.json");
  std::cerr << "phantom: " << spec.n_frames << "x" << spec.n_voxels
            << " written to " << dir.string() << "\n";
  return 0;
}

struct DenoiseArgs {
  std::string input;
  std::string format = "auto";
  std::string paradigm = "default";
  int k = 400;
  int lambda = 40;
  double cth = 0.1;
  int iters = 30;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::string out_dir;
  std::string out_format = "binary";
  HrfFlags hrf;
};

int run_denoise(const DenoiseArgs& args) {
  const dlsc::SignalMatrix signals = load_input(args.input, args.format);
  const dlsc::TaskParadigm paradigm = resolve_paradigm(args.paradigm);
  dlsc::DlscParams params;
  params.dict_size = args.k;
  params.sparsity = args.lambda;
  params.corr_threshold = args.cth;
  params.ksvd_iterations = args.iters;
  params.rng_seed = args.seed;

  const dlsc::DenoiseOutput output =
      dlsc::denoise(signals, paradigm, args.hrf.spec(), params, args.tol);

  const std::filesystem::path dir = args.out_dir;
  ensure_directory(dir);
  const bool csv = args.out_format == "csv";
  const std::filesystem::path denoised_path =
      dir / (csv ? "denoised.csv" : "denoised.bin");
  dlsc::save_signal_matrix(output.denoised, denoised_path,
                           csv ? MatrixFileFormat::kCsv
                               : MatrixFileFormat::kBinary);
  dlsc::save_dictionary_csv(output.dictionary, dir / "dictionary.csv");
  dlsc::save_coefficients_csv(output.coefficients, dir / "coefficients.csv");
  save_mask_csv(output.training_mask, dir / "mask.csv");
  dlsc::save_trace_csv(output.trace, dir / "trace.csv");

  ManifestWriter manifest("denoise", {{"input", args.input},
                                      {"format", args.format},
                                      {"paradigm", args.paradigm},
                                      {"k", args.k},
                                      {"lambda", args.lambda},
                                      {"cth", args.cth},
                                      {"iters", args.iters},
                                      {"seed", args.seed},
                                      {"tol", args.tol},
                                      {"out", dir.string()},
                                      {"out_format", args.out_format},
                                      {"hrf", args.hrf.to_json()}});
  Eigen::Index selected = 0;
  for (const bool m : output.training_mask) selected += m;
  manifest.add_note("training_voxels", selected);
  manifest.add_note("final_objective",
                    output.trace.objective_per_iteration.empty()
                        ? 0.0
                        : output.trace.objective_per_iteration.back());
  for (const auto& name : {denoised_path.filename().string(),
                           std::string("dictionary.csv"),
                           std::string("coefficients.csv"),
                           std::string("mask.csv"), std::string("trace.csv")})
    manifest.record_output(dir / name);
  manifest.write(dir / "manifest.json");
  std::cerr << "denoise: " << signals.n_voxels() << " voxels, V_r=" << selected
            << ", outputs in " << dir.string() << "\n";
  return 0;
}

struct GridArgs {
  std::string input;
  std::string format = "auto";
  std::string paradigm = "default";
  std::string k_grid = "300:500:100";
  std::string lambda_grid = "5:50:5";
  std::string cth_grid = "0.1:0.4:0.1";
  int iters = 30;
  std::uint64_t seed = 0;
  std::string scorer = "contrast";
  std::string seeds_path, targets_path, pairs_path;
  std::string out_dir;
  HrfFlags hrf;
};

int run_grid(const GridArgs& args) {
  const dlsc::SignalMatrix signals = load_input(args.input, args.format);
  const dlsc::TaskParadigm paradigm = resolve_paradigm(args.paradigm);

  dlsc::GridScorer scorer;
  if (args.scorer == "contrast") {
    scorer.rule = dlsc::GridScorer::Rule::kConnectivityContrast;
    if (args.seeds_path.empty() || args.targets_path.empty() ||
        args.pairs_path.empty())
      dlsc::throw_error(ErrorCode::kInvalidArgument,
                        "the contrast scorer needs --seeds, --targets and "
                        "--pairs");
    scorer.seeds = dlsc::load_regions_csv(args.seeds_path);
    scorer.targets = dlsc::load_regions_csv(args.targets_path);
    const dlsc::PairClasses pairs = dlsc::load_pairs_csv(args.pairs_path);
    scorer.high_pairs = pairs.high;
    scorer.low_pairs = pairs.low;
  } else if (args.scorer == "recon-error") {
    scorer.rule = dlsc::GridScorer::Rule::kReconstructionError;
  } else {
    dlsc::throw_error(ErrorCode::kInvalidArgument,
                      "unknown scorer '" + args.scorer +
                          "' (expected contrast or recon-error)");
  }

  const std::vector<int> k_grid = parse_grid<int>(args.k_grid, "--k");
  const std::vector<int> lambda_grid =
      parse_grid<int>(args.lambda_grid, "--lambda");
  const std::vector<double> cth_grid =
      parse_grid<double>(args.cth_grid, "--cth");

  const dlsc::GridSearchReport report =
      dlsc::grid_search(signals, paradigm, args.hrf.spec(), k_grid, lambda_grid,
                        cth_grid, scorer, args.iters, args.seed);

  const std::filesystem::path dir = args.out_dir;
  ensure_directory(dir);
  dlsc::save_grid_report_csv(report, dir / "grid.csv");

  int succeeded = 0;
  for (const auto& e : report.entries) succeeded += e.succeeded;
  ManifestWriter manifest("grid", {{"input", args.input},
                                   {"paradigm", args.paradigm},
                                   {"k", args.k_grid},
                                   {"lambda", args.lambda_grid},
                                   {"cth", args.cth_grid},
                                   {"iters", args.iters},
                                   {"seed", args.seed},
                                   {"scorer", args.scorer},
                                   {"seeds", args.seeds_path},
                                   {"targets", args.targets_path},
                                   {"pairs", args.pairs_path},
                                   {"out", dir.string()}});
  manifest.add_note("entries", static_cast<int>(report.entries.size()));
  manifest.add_note("succeeded", succeeded);
  manifest.record_output(dir / "grid.csv");
  manifest.write(dir / "manifest.json");
  std::cerr << "grid: " << report.entries.size() << " points, " << succeeded
            << " succeeded, report in " << dir.string() << "\n";
  return 0;
}

struct TnlmArgs {
  std::string input;
  std::string format = "auto";
  int distance = 11;
  double smoothing = 0.72;
  std::string coords_path;
  std::string out;
};

int run_tnlm(const TnlmArgs& args) {
  const dlsc::SignalMatrix signals = load_input(args.input, args.format);
  dlsc::TnlmParams params;
  params.distance_param = args.distance;
  params.smoothing_level = args.smoothing;
  if (!args.coords_path.empty())
    params.voxel_coordinates = load_coords_csv(args.coords_path);
  const dlsc::SignalMatrix denoised = dlsc::tnlm_denoise(signals, params);

  const std::filesystem::path out = args.out;
  dlsc::save_signal_matrix(denoised, out, resolve_format("auto", out));
  ManifestWriter manifest("tnlm", {{"input", args.input},
                                   {"distance", args.distance},
                                   {"smoothing", args.smoothing},
                                   {"coords", args.coords_path},
                                   {"out", out.string()}});
  manifest.record_output(out);
  manifest.write(sibling_manifest(out));
  return 0;
}

struct ConnectArgs {
  std::string input;
  std::string format = "auto";
  std::string seeds_path, targets_path;
  std::string out;
};

int run_connect(const ConnectArgs& args) {
  const dlsc::SignalMatrix signals = load_input(args.input, args.format);
  const auto seeds = dlsc::load_regions_csv(args.seeds_path);
  const auto targets = dlsc::load_regions_csv(args.targets_path);
  const dlsc::ConnectivityReport report =
      dlsc::connectivity_map(signals, seeds, targets);
  const std::filesystem::path out = args.out;
  dlsc::save_report_csv(report, out);
  ManifestWriter manifest("connect", {{"input", args.input},
                                      {"seeds", args.seeds_path},
                                      {"targets", args.targets_path},
                                      {"out", out.string()}});
  manifest.record_output(out);
  manifest.write(sibling_manifest(out));
  return 0;
}

struct CompareArgs {
  std::string raw_path, denoised_path, out;
};

int run_compare(const CompareArgs& args) {
  const dlsc::ConnectivityReport raw = dlsc::load_report_csv(args.raw_path);
  const dlsc::ConnectivityReport denoised =
      dlsc::load_report_csv(args.denoised_path);
  const auto rows = dlsc::emphasis_profile(raw, denoised);
  const std::filesystem::path out = args.out;
  dlsc::save_emphasis_csv(rows, out);
  ManifestWriter manifest("compare", {{"raw", args.raw_path},
                                      {"denoised", args.denoised_path},
                                      {"out", out.string()}});
  manifest.record_output(out);
  manifest.write(sibling_manifest(out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  if (const char* threads = std::getenv("DLSC_THREADS")) {
    const int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
  }
#endif

  CLI::App app{
      "Task time-series denoising by semi-supervised dictionary learning, "
      "with seed connectivity analysis, a temporal non-local-means baseline "
      "and a synthetic phantom generator"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "Read options from an INI file");
  app.require_subcommand(1);

  int exit_code = 0;
  auto guard = [&exit_code](auto&& fn) {
    return [&exit_code, fn = std::forward<decltype(fn)>(fn)]() {
      exit_code = fn();
    };
  };

  HrfDumpArgs hrf_args;
  CLI::App* hrf_cmd =
      app.add_subcommand("hrf-dump", "Sample the canonical response kernel");
  hrf_cmd->add_option("--tr", hrf_args.tr, "Sampling interval (s)")
      ->capture_default_str();
  hrf_cmd->add_option("--dt", hrf_args.dt,
                      "Kernel sampling step (s); defaults to --tr");
  hrf_cmd->add_option("--out", hrf_args.out, "Output CSV path")->required();
  hrf_args.hrf.attach(hrf_cmd);
  hrf_cmd->callback(guard([&] { return run_hrf_dump(hrf_args); }));

  PhantomArgs phantom_args;
  CLI::App* phantom_cmd = app.add_subcommand(
      "phantom", "Generate a synthetic ground-truth phantom dataset");
  phantom_cmd->add_option("--spec", phantom_args.spec_path,
                          "key=value spec file (omit for the built-in default)");
  phantom_cmd->add_option("--out", phantom_args.out_dir, "Output directory")
      ->required();
  phantom_cmd
      ->add_option("--seed", phantom_args.seed, "Override the spec's rng seed")
      ->each([&](const std::string&) { phantom_args.seed_set = true; });
  phantom_cmd->callback(guard([&] { return run_phantom(phantom_args); }));

  DenoiseArgs denoise_args;
  CLI::App* denoise_cmd = app.add_subcommand(
      "denoise", "Dictionary-learning denoising of a signal matrix");
  denoise_cmd->add_option("--input", denoise_args.input, "Input signal matrix")
      ->required();
  denoise_cmd
      ->add_option("--format", denoise_args.format,
                   "Input format: csv, binary or auto (by extension)")
      ->check(CLI::IsMember({"csv", "binary", "auto"}))
      ->capture_default_str();
  denoise_cmd
      ->add_option("--paradigm", denoise_args.paradigm,
                   "Paradigm CSV path, or 'default' for the built-in motor task")
      ->capture_default_str();
  denoise_cmd->add_option("--k", denoise_args.k, "Dictionary size K")
      ->capture_default_str();
  denoise_cmd
      ->add_option("--lambda", denoise_args.lambda,
                   "Max non-zero coefficients per voxel")
      ->capture_default_str();
  denoise_cmd
      ->add_option("--cth", denoise_args.cth,
                   "Correlation threshold for the training set")
      ->capture_default_str();
  denoise_cmd
      ->add_option("--iters", denoise_args.iters, "Dictionary update iterations")
      ->capture_default_str();
  denoise_cmd->add_option("--seed", denoise_args.seed, "RNG seed")
      ->capture_default_str();
  denoise_cmd
      ->add_option("--tol", denoise_args.tol,
                   "Absolute residual tolerance for the pursuit (0 = off)")
      ->capture_default_str();
  denoise_cmd->add_option("--out", denoise_args.out_dir, "Output directory")
      ->required();
  denoise_cmd
      ->add_option("--out-format", denoise_args.out_format,
                   "Denoised matrix format: binary or csv")
      ->check(CLI::IsMember({"csv", "binary"}))
      ->capture_default_str();
  denoise_args.hrf.attach(denoise_cmd);
  denoise_cmd->callback(guard([&] { return run_denoise(denoise_args); }));

  GridArgs grid_args;
  CLI::App* grid_cmd = app.add_subcommand(
      "grid", "Sweep (K, lambda, C_th) and score every point");
  grid_cmd->add_option("--input", grid_args.input, "Input signal matrix")
      ->required();
  grid_cmd
      ->add_option("--format", grid_args.format,
                   "Input format: csv, binary or auto")
      ->check(CLI::IsMember({"csv", "binary", "auto"}))
      ->capture_default_str();
  grid_cmd
      ->add_option("--paradigm", grid_args.paradigm,
                   "Paradigm CSV path or 'default'")
      ->capture_default_str();
  grid_cmd
      ->add_option("--k", grid_args.k_grid,
                   "K axis: begin:end:step, comma list, or one value")
      ->capture_default_str();
  grid_cmd->add_option("--lambda", grid_args.lambda_grid, "lambda axis")
      ->capture_default_str();
  grid_cmd->add_option("--cth", grid_args.cth_grid, "C_th axis")
      ->capture_default_str();
  grid_cmd->add_option("--iters", grid_args.iters, "Dictionary update iterations")
      ->capture_default_str();
  grid_cmd->add_option("--seed", grid_args.seed, "RNG seed")
      ->capture_default_str();
  grid_cmd
      ->add_option("--scorer", grid_args.scorer,
                   "Scoring rule: contrast or recon-error")
      ->check(CLI::IsMember({"contrast", "recon-error"}))
      ->capture_default_str();
  grid_cmd->add_option("--seeds", grid_args.seeds_path,
                       "Seed regions CSV (contrast scorer)");
  grid_cmd->add_option("--targets", grid_args.targets_path,
                       "Target regions CSV (contrast scorer)");
  grid_cmd->add_option("--pairs", grid_args.pairs_path,
                       "High/low pair classes CSV (contrast scorer)");
  grid_cmd->add_option("--out", grid_args.out_dir, "Output directory")
      ->required();
  grid_args.hrf.attach(grid_cmd);
  grid_cmd->callback(guard([&] { return run_grid(grid_args); }));

  TnlmArgs tnlm_args;
  CLI::App* tnlm_cmd = app.add_subcommand(
      "tnlm", "Temporal non-local-means baseline denoiser");
  tnlm_cmd->add_option("--input", tnlm_args.input, "Input signal matrix")
      ->required();
  tnlm_cmd
      ->add_option("--format", tnlm_args.format,
                   "Input format: csv, binary or auto")
      ->check(CLI::IsMember({"csv", "binary", "auto"}))
      ->capture_default_str();
  tnlm_cmd->add_option("--distance", tnlm_args.distance, "Neighborhood radius")
      ->capture_default_str();
  tnlm_cmd->add_option("--smoothing", tnlm_args.smoothing, "Smoothing level h")
      ->capture_default_str();
  tnlm_cmd->add_option("--coords", tnlm_args.coords_path,
                       "Voxel coordinate CSV (x,y,z); omit for a 1-D layout");
  tnlm_cmd->add_option("--out", tnlm_args.out, "Output matrix path")
      ->required();
  tnlm_cmd->callback(guard([&] { return run_tnlm(tnlm_args); }));

  ConnectArgs connect_args;
  CLI::App* connect_cmd = app.add_subcommand(
      "connect", "Seed-to-target connectivity of a signal matrix");
  connect_cmd->add_option("--input", connect_args.input, "Input signal matrix")
      ->required();
  connect_cmd
      ->add_option("--format", connect_args.format,
                   "Input format: csv, binary or auto")
      ->check(CLI::IsMember({"csv", "binary", "auto"}))
      ->capture_default_str();
  connect_cmd->add_option("--seeds", connect_args.seeds_path, "Seed regions CSV")
      ->required();
  connect_cmd
      ->add_option("--targets", connect_args.targets_path, "Target regions CSV")
      ->required();
  connect_cmd->add_option("--out", connect_args.out, "Report CSV path")
      ->required();
  connect_cmd->callback(guard([&] { return run_connect(connect_args); }));

  CompareArgs compare_args;
  CLI::App* compare_cmd = app.add_subcommand(
      "compare", "Per-pair z change between two connectivity reports");
  compare_cmd->add_option("--raw", compare_args.raw_path, "Raw report CSV")
      ->required();
  compare_cmd
      ->add_option("--denoised", compare_args.denoised_path,
                   "Denoised report CSV")
      ->required();
  compare_cmd->add_option("--out", compare_args.out, "Emphasis CSV path")
      ->required();
  compare_cmd->callback(guard([&] { return run_compare(compare_args); }));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
