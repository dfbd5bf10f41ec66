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

#ifndef DLSC_PHANTOM_HPP
#define DLSC_PHANTOM_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dlsc/coefficients.hpp"
#include "dlsc/connectivity.hpp"
#include "dlsc/dictionary.hpp"
#include "dlsc/paradigm.hpp"
#include "dlsc/signal_matrix.hpp"

namespace dlsc {

/// One ground-truth basis series driving a community: either a task
/// condition's stimulus regressor or a seeded smooth random latent.
struct GeneratingAtom {
  enum class Kind { kTaskCondition, kSmoothLatent };
  Kind kind = Kind::kTaskCondition;
  std::string condition;  // kTaskCondition
  int latent_id = 0;      // kSmoothLatent
  double amplitude = 1.0;
};

/// Contiguous voxel range [begin, end) sharing the same generating atoms.
/// Voxels outside every community carry pure noise.
struct Community {
  std::string name;
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
  std::vector<GeneratingAtom> atoms;
};

struct NuisanceSpec {
  int drift_order = 0;     // highest polynomial degree, 0 = offset only
  double spike_rate = 0.0; // per-entry probability of an amplitude spike
};

struct PhantomSpec {
  explicit PhantomSpec(TaskParadigm task_paradigm)
      : paradigm(std::move(task_paradigm)) {}

  Eigen::Index n_frames = 284;
  double tr_seconds = 0.72;
  TaskParadigm paradigm;
  HrfSpec hrf;
  Eigen::Index n_voxels = 2000;
  std::vector<Community> communities;
  double noise_sigma = 0.0;
  /// When set, noise_sigma is derived from the clean matrix so that the
  /// realized signal-to-noise ratio targets this value.
  std::optional<double> target_snr_db;
  std::optional<NuisanceSpec> nuisance;
  std::uint64_t rng_seed = 0;
};

struct PhantomTruth {
  SignalMatrix clean;
  SignalMatrix noisy;
  Dictionary true_dictionary;
  CoefficientMatrix true_coefficients;
  std::vector<int> community_of_voxel;  // -1 for background voxels
  /// One seed region per community plus two target regions per community,
  /// carved from the first voxels of each range.
  std::vector<RegionSpec> seed_regions;
  std::vector<RegionSpec> target_regions;
  std::vector<std::pair<std::string, std::string>> expected_high_pairs;
  std::vector<std::pair<std::string, std::string>> expected_low_pairs;
  double resolved_noise_sigma = 0.0;
};

/// Desk-scale default: 284 frames at TR 0.72 s, 2000 voxels, six 200-voxel
/// communities aligned to the default motor conditions (task amplitude 1.0
/// plus a community latent at 0.5), 800 background voxels, -3 dB target SNR.
PhantomSpec default_phantom_spec();

/// Builds clean = dictionary * coefficients from the community structure,
/// then adds seeded Gaussian noise and optional drift/spikes. Randomness is
/// split into one stream per voxel plus one per latent, so results do not
/// depend on evaluation order.
PhantomTruth generate_phantom(const PhantomSpec& spec);

/// 10*log10(||clean||_F^2 / ||noisy - clean||_F^2); +infinity when the
/// matrices are identical.
double snr_db(const SignalMatrix& clean, const SignalMatrix& noisy);

/// Noise level that makes the expected ||noise||_F^2 = N*V*sigma^2 hit the
/// target ratio against this clean matrix.
double sigma_for_target_snr(const Eigen::MatrixXd& clean, double target_db);

/// Flat key=value spec file (see README for the key list).
PhantomSpec load_phantom_spec(const std::filesystem::path& path);

}  // namespace dlsc

#endif  // DLSC_PHANTOM_HPP
