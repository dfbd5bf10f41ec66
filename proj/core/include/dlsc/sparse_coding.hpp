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

#ifndef DLSC_SPARSE_CODING_HPP
#define DLSC_SPARSE_CODING_HPP

#include <vector>

#include <Eigen/Core>

#include "dlsc/coefficients.hpp"
#include "dlsc/dictionary.hpp"
#include "dlsc/signal_matrix.hpp"

namespace dlsc {

/// Sparse code of one signal: selected atoms in selection order with their
/// least-squares coefficients.
struct OmpResult {
  std::vector<Eigen::Index> support;
  Eigen::VectorXd coefficients;
  double residual_norm = 0.0;
  /// Set when a numerically dependent atom was selected; it is dropped and
  /// the pursuit stops with the atoms picked so far.
  bool rank_deficient_stop = false;
};

/// Residuals at or below this fraction of the signal norm always stop the
/// pursuit, independent of residual_tol. Keeps the sparsity bound the
/// binding constraint while avoiding pursuit of rounding noise.
inline constexpr double kResidualFloorRelative = 1e-12;

/// Orthogonal matching pursuit. Per step: pick the atom with the largest
/// |inner product| against the current residual (exact ties go to the lowest
/// index), refit all selected atoms by least squares, update the residual.
/// Stops at `sparsity` atoms, at residual_norm <= residual_tol, or when the
/// best atom is already selected. Least squares runs on an incrementally
/// grown orthogonal basis (modified Gram-Schmidt with reorthogonalization),
/// so the residual is orthogonal to every selected atom.
OmpResult omp(const Eigen::Ref<const Eigen::VectorXd>& signal,
              const Dictionary& dict, int sparsity, double residual_tol = 0.0);

/// Codes every voxel column independently against the dictionary and
/// scatters the sparse results into a dense K x V matrix. Columns are
/// processed in parallel; results are identical to sequential execution.
CoefficientMatrix sparse_code(const SignalMatrix& signals, const Dictionary& dict,
                              int sparsity, double residual_tol = 0.0);

/// Maximum |inner product| over distinct atom pairs. Requires K >= 2.
double mutual_coherence(const Dictionary& dict);

}  // namespace dlsc

#endif  // DLSC_SPARSE_CODING_HPP
