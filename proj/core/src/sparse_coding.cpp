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

#include "dlsc/sparse_coding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dlsc {

namespace {

// A candidate atom whose component orthogonal to the selected set is below
// this fraction of its norm is treated as linearly dependent.
constexpr double kRankTolerance = 1e-10;

Eigen::Index argmax_abs(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  double best_abs = std::abs(v[0]);
  for (Eigen::Index j = 1; j < v.size(); ++j) {
    const double a = std::abs(v[j]);
    if (a > best_abs) {  // strict: exact ties keep the lowest index
      best_abs = a;
      best = j;
    }
  }
  return best;
}

}  // namespace

OmpResult omp(const Eigen::Ref<const Eigen::VectorXd>& signal,
              const Dictionary& dict, int sparsity, double residual_tol) {
  if (sparsity < 1)
    throw_error(ErrorCode::kInvalidArgument,
                "sparsity must be >= 1, got " + std::to_string(sparsity));
  if (signal.size() != dict.n_frames())
    throw_error(ErrorCode::kDimensionMismatch,
                "signal length " + std::to_string(signal.size()) +
                    " does not match dictionary frame count " +
                    std::to_string(dict.n_frames()));
  if (!signal.allFinite())
    throw_error(ErrorCode::kInvalidArgument, "signal contains non-finite entries");
  if (residual_tol < 0.0)
    throw_error(ErrorCode::kInvalidArgument, "residual_tol must be >= 0");

  const Eigen::MatrixXd& atoms = dict.atoms();
  const Eigen::Index n = atoms.rows();
  const int max_atoms =
      std::min<int>(sparsity, static_cast<int>(dict.n_atoms()));

  OmpResult result;
  Eigen::VectorXd residual = signal;
  double residual_norm = residual.norm();
  const double stop_norm =
      std::max(residual_tol, kResidualFloorRelative * signal.norm());

  // Orthonormal basis Q of the selected atoms and the triangular factor R
  // with atoms_selected = Q * R; coefficients come from R x = Q^T y.
  Eigen::MatrixXd basis(n, max_atoms);
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(max_atoms, max_atoms);
  Eigen::VectorXd qty(max_atoms);
  std::vector<char> selected(static_cast<std::size_t>(dict.n_atoms()), 0);

  int n_selected = 0;
  while (n_selected < max_atoms && residual_norm > stop_norm) {
    const Eigen::VectorXd correlations = atoms.transpose() * residual;
    const Eigen::Index pick = argmax_abs(correlations);
    if (selected[static_cast<std::size_t>(pick)]) break;  // duplicate: stop

    // Orthogonalize the picked atom against the basis; a second pass keeps
    // the basis orthogonal even when atoms are highly coherent.
    Eigen::VectorXd u = atoms.col(pick);
    Eigen::VectorXd proj = Eigen::VectorXd::Zero(max_atoms);
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < n_selected; ++i) {
        const double h = basis.col(i).dot(u);
        proj[i] += h;
        u -= h * basis.col(i);
      }
    }
    const double u_norm = u.norm();
    if (u_norm <= kRankTolerance) {
      result.rank_deficient_stop = true;  // dependent atom: drop it and stop
      break;
    }

    basis.col(n_selected) = u / u_norm;
    tri.col(n_selected).head(n_selected) = proj.head(n_selected);
    tri(n_selected, n_selected) = u_norm;
    const double q_dot_r = basis.col(n_selected).dot(residual);
    qty[n_selected] = q_dot_r;
    residual -= q_dot_r * basis.col(n_selected);
    residual_norm = residual.norm();
    selected[static_cast<std::size_t>(pick)] = 1;
    result.support.push_back(pick);
    ++n_selected;
  }

  // Back-substitute R x = Q^T y for the coefficients in selection order.
  result.coefficients = Eigen::VectorXd::Zero(n_selected);
  for (int i = n_selected - 1; i >= 0; --i) {
    double s = qty[i];
    for (int j = i + 1; j < n_selected; ++j) s -= tri(i, j) * result.coefficients[j];
    result.coefficients[i] = s / tri(i, i);
  }
  result.residual_norm = residual_norm;
  return result;
}

CoefficientMatrix sparse_code(const SignalMatrix& signals, const Dictionary& dict,
                              int sparsity, double residual_tol) {
  if (signals.n_frames() != dict.n_frames())
    throw_error(ErrorCode::kDimensionMismatch,
                "signal frame count " + std::to_string(signals.n_frames()) +
                    " does not match dictionary frame count " +
                    std::to_string(dict.n_frames()));
  const Eigen::Index n_voxels = signals.n_voxels();
  Eigen::MatrixXd coeffs =
      Eigen::MatrixXd::Zero(dict.n_atoms(), n_voxels);

#pragma omp parallel for schedule(static)
  for (Eigen::Index v = 0; v < n_voxels; ++v) {
    const OmpResult code = omp(signals.data().col(v), dict, sparsity, residual_tol);
    for (std::size_t i = 0; i < code.support.size(); ++i)
      coeffs(code.support[i], v) = code.coefficients[static_cast<Eigen::Index>(i)];
  }

  return CoefficientMatrix(std::move(coeffs), sparsity);
}

double mutual_coherence(const Dictionary& dict) {
  if (dict.n_atoms() < 2)
    throw_error(ErrorCode::kInvalidArgument,
                "mutual coherence needs at least 2 atoms");
  const Eigen::MatrixXd gram = dict.atoms().transpose() * dict.atoms();
  double best = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = i + 1; j < gram.cols(); ++j)
      best = std::max(best, std::abs(gram(i, j)));
  return std::min(best, 1.0);
}

}  // namespace dlsc
