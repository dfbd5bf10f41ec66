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

#ifndef DLSC_PIPELINE_HPP
#define DLSC_PIPELINE_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dlsc/coefficients.hpp"
#include "dlsc/connectivity.hpp"
#include "dlsc/dictionary.hpp"
#include "dlsc/ksvd.hpp"
#include "dlsc/paradigm.hpp"
#include "dlsc/params.hpp"
#include "dlsc/signal_matrix.hpp"

namespace dlsc {

struct DenoiseOutput {
  SignalMatrix denoised;           // dictionary * coefficients
  Dictionary dictionary;           // fixed block first, learned block after
  CoefficientMatrix coefficients;  // codes of every input voxel
  std::vector<bool> training_mask; // true = voxel entered the training set
  KsvdTrace trace;
};

/// Voxel v is selected iff its largest |correlation| against the fixed atoms
/// stays below corr_threshold. Zero-variance voxels count as correlation 0
/// and are therefore selected. Fails if fewer than learned_count voxels
/// qualify (the training set must be at least as large as the learned
/// block).
std::vector<bool> select_training_voxels(const SignalMatrix& signals,
                                         const Dictionary& fixed,
                                         double corr_threshold,
                                         int learned_count);

/// End-to-end denoiser: build the fixed atoms from the paradigm, select the
/// weakly task-correlated voxels, train the learned block on them, code
/// every voxel against the concatenated dictionary, and reconstruct.
DenoiseOutput denoise(const SignalMatrix& signals, const TaskParadigm& paradigm,
                      const HrfSpec& hrf, const DlscParams& params,
                      double residual_tol = 0.0);

/// How a grid point gets its score (higher is better).
struct GridScorer {
  enum class Rule {
    /// mean z over the designated high pairs minus mean z over the low
    /// pairs, computed on the denoised matrix. Needs seeds/targets/pairs.
    kConnectivityContrast,
    /// negative relative reconstruction error -||S - S_hat||_F / ||S||_F.
    kReconstructionError,
  };
  Rule rule = Rule::kConnectivityContrast;
  std::vector<RegionSpec> seeds;
  std::vector<RegionSpec> targets;
  std::vector<std::pair<std::string, std::string>> high_pairs;
  std::vector<std::pair<std::string, std::string>> low_pairs;
};

struct GridSearchEntry {
  DlscParams params;
  bool succeeded = false;
  double score = 0.0;          // meaningful only when succeeded
  std::string failure_reason;  // set when not succeeded
  /// Connectivity of the denoised output under the scorer's regions; empty
  /// for the reconstruction-error rule.
  ConnectivityReport connectivity;
};

/// Entries sorted best score first; failed points sort last. Ties prefer
/// the standard operating point (400, 40, 0.1) when present, then
/// lexicographic (K, lambda, C_th).
struct GridSearchReport {
  std::vector<GridSearchEntry> entries;
};

/// Runs denoise() on the full Cartesian product of the three grids. A point
/// that fails (e.g. its training set comes up short) is recorded with its
/// reason; the sweep always completes.
GridSearchReport grid_search(const SignalMatrix& signals,
                             const TaskParadigm& paradigm, const HrfSpec& hrf,
                             const std::vector<int>& k_grid,
                             const std::vector<int>& lambda_grid,
                             const std::vector<double>& cth_grid,
                             const GridScorer& scorer, int ksvd_iterations,
                             std::uint64_t rng_seed);

/// Grid report CSV: header "k,lambda,cth,status,score,reason".
void save_grid_report_csv(const GridSearchReport& report,
                          const std::filesystem::path& path);

}  // namespace dlsc

#endif  // DLSC_PIPELINE_HPP
