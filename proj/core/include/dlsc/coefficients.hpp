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

#ifndef DLSC_COEFFICIENTS_HPP
#define DLSC_COEFFICIENTS_HPP

#include <string>
#include <utility>

#include <Eigen/Core>

#include "dlsc/errors.hpp"

namespace dlsc {

/// True iff every column of `coeffs` has at most `sparsity_bound` non-zero
/// entries. Comparison is against exact zero: the sparse solvers produce
/// structural zeros, never tiny residual values.
inline bool validate_column_sparsity(const Eigen::MatrixXd& coeffs,
                                     int sparsity_bound) {
  for (Eigen::Index v = 0; v < coeffs.cols(); ++v) {
    int nnz = 0;
    for (Eigen::Index k = 0; k < coeffs.rows(); ++k)
      if (coeffs(k, v) != 0.0) ++nnz;
    if (nnz > sparsity_bound) return false;
  }
  return true;
}

/// Dense K x V coefficient matrix with a per-column non-zero bound.
/// Construction rejects any column with more than `sparsity_bound` non-zeros,
/// so an instance always satisfies the bound.
class CoefficientMatrix {
 public:
  CoefficientMatrix(Eigen::MatrixXd coeffs, int sparsity_bound)
      : coeffs_(std::move(coeffs)), sparsity_bound_(sparsity_bound) {
    if (sparsity_bound_ < 1)
      throw_error(ErrorCode::kInvalidArgument,
                  "sparsity bound must be >= 1, got " +
                      std::to_string(sparsity_bound_));
    if (!coeffs_.allFinite())
      throw_error(ErrorCode::kInvalidArgument,
                  "coefficient matrix contains non-finite entries");
    if (!dlsc::validate_column_sparsity(coeffs_, sparsity_bound_))
      throw_error(ErrorCode::kInvalidArgument,
                  "coefficient matrix violates the per-column sparsity bound " +
                      std::to_string(sparsity_bound_));
  }

  Eigen::Index n_atoms() const { return coeffs_.rows(); }
  Eigen::Index n_voxels() const { return coeffs_.cols(); }
  int sparsity_bound() const { return sparsity_bound_; }
  const Eigen::MatrixXd& coeffs() const { return coeffs_; }

 private:
  Eigen::MatrixXd coeffs_;
  int sparsity_bound_;
};

inline bool validate_column_sparsity(const CoefficientMatrix& a) {
  return validate_column_sparsity(a.coeffs(), a.sparsity_bound());
}

}  // namespace dlsc

#endif  // DLSC_COEFFICIENTS_HPP
