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

#ifndef DLSC_KSVD_HPP
#define DLSC_KSVD_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dlsc/coefficients.hpp"
#include "dlsc/dictionary.hpp"
#include "dlsc/signal_matrix.hpp"

namespace dlsc {

/// Training diagnostics, one entry per iteration. The objective is the
/// squared Frobenius norm of the coding residual, recorded after each
/// iteration's coding stage.
struct KsvdTrace {
  std::vector<double> objective_per_iteration;
  std::vector<int> replaced_atoms_per_iteration;
};

struct KsvdResult {
  Dictionary dictionary;  // learned-only, fixed_count = 0
  CoefficientMatrix coefficients;
  KsvdTrace trace;
};

/// Dictionary learning by alternating sparse coding and per-atom rank-one
/// updates. Each iteration codes every training column with OMP, keeping a
/// column's previous coefficients whenever they fit better than the fresh
/// pursuit (coefficient reuse), then sweeps the atoms in ascending index
/// order: an atom with users is replaced, together with its coefficient row
/// restricted to those users, by the leading singular pair of the restricted
/// error matrix; an unused atom is replaced by the worst-represented
/// training column, normalized. Both stages leave the objective
/// non-increasing, and identical inputs with the same seed reproduce
/// bit-identical results.
///
/// Requires at least k_atoms training columns, and at least k_atoms of them
/// distinct (and non-zero) for the seeded initialization.
KsvdResult ksvd_train(const SignalMatrix& training, int k_atoms, int sparsity,
                      int iterations, std::uint64_t rng_seed,
                      double residual_tol = 0.0);

/// Trace CSV: header "iteration,objective,replaced_atoms", one row per
/// iteration.
void save_trace_csv(const KsvdTrace& trace, const std::filesystem::path& path);

}  // namespace dlsc

#endif  // DLSC_KSVD_HPP
