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

#ifndef DLSC_PARAMS_HPP
#define DLSC_PARAMS_HPP

#include <cstdint>
#include <string>

#include "dlsc/errors.hpp"

namespace dlsc {

/// Tuning knobs of the DLSC denoiser. Defaults are the toolkit's standard
/// operating point: dictionary of 400 atoms, 40 non-zeros per voxel, and a
/// 0.1 correlation threshold for the learned-atom training set.
struct DlscParams {
  int dict_size = 400;         // K, fixed + learned atoms
  int sparsity = 40;           // max non-zeros per coded voxel
  double corr_threshold = 0.1; // training-set cutoff, in [0, 1)
  int ksvd_iterations = 30;
  std::uint64_t rng_seed = 0;

  /// Checks the standalone invariants. The relation to the fixed atom count
  /// (dict_size must exceed it) is checked by the pipeline, which knows it.
  void validate() const {
    if (dict_size < 1)
      throw_error(ErrorCode::kInvalidArgument,
                  "dict_size must be >= 1, got " + std::to_string(dict_size));
    if (sparsity < 1 || sparsity > dict_size)
      throw_error(ErrorCode::kInvalidArgument,
                  "sparsity must lie in [1, dict_size], got " +
                      std::to_string(sparsity) + " with dict_size " +
                      std::to_string(dict_size));
    if (!(corr_threshold >= 0.0 && corr_threshold < 1.0))
      throw_error(ErrorCode::kInvalidArgument,
                  "corr_threshold must lie in [0, 1), got " +
                      std::to_string(corr_threshold));
    if (ksvd_iterations < 1)
      throw_error(ErrorCode::kInvalidArgument,
                  "ksvd_iterations must be >= 1, got " +
                      std::to_string(ksvd_iterations));
  }
};

}  // namespace dlsc

#endif  // DLSC_PARAMS_HPP
