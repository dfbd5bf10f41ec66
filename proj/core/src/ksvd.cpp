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

#include "dlsc/ksvd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/SVD>

#include "dlsc/matrix_io.hpp"
#include "dlsc/sparse_coding.hpp"

namespace dlsc {

namespace {

// Normalized atoms closer than this (in |cosine|) count as the same column
// for the distinct-column initialization.
constexpr double kDuplicateCosine = 1.0 - 1e-12;

/// Residual of one training column under the current (dictionary, codes)
/// pair; exploits the column's sparse support.
Eigen::VectorXd column_residual(const Eigen::MatrixXd& training,
                                const Eigen::MatrixXd& atoms,
                                const Eigen::MatrixXd& codes, Eigen::Index v) {
  Eigen::VectorXd r = training.col(v);
  for (Eigen::Index k = 0; k < codes.rows(); ++k)
    if (codes(k, v) != 0.0) r -= codes(k, v) * atoms.col(k);
  return r;
}

/// Seeded pick of k distinct non-zero training columns, used as the initial
/// atoms. Distinctness is up to sign and scale.
Eigen::MatrixXd initial_atoms(const Eigen::MatrixXd& training, int k_atoms,
                              std::uint64_t rng_seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(training.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(rng_seed);
  std::shuffle(order.begin(), order.end(), rng);

  Eigen::MatrixXd atoms(training.rows(), k_atoms);
  int picked = 0;
  for (const Eigen::Index v : order) {
    if (picked == k_atoms) break;
    const double norm = training.col(v).norm();
    if (norm == 0.0) continue;
    const Eigen::VectorXd candidate = training.col(v) / norm;
    bool duplicate = false;
    for (int i = 0; i < picked && !duplicate; ++i)
      duplicate = std::abs(candidate.dot(atoms.col(i))) >= kDuplicateCosine;
    if (duplicate) continue;
    atoms.col(picked++) = candidate;
  }
  if (picked < k_atoms)
    throw_error(ErrorCode::kDegenerateInput,
                "degenerate training data: only " + std::to_string(picked) +
                    " distinct non-zero columns available for " +
                    std::to_string(k_atoms) + " initial atoms");
  return atoms;
}

}  // namespace

KsvdResult ksvd_train(const SignalMatrix& training, int k_atoms, int sparsity,
                      int iterations, std::uint64_t rng_seed,
                      double residual_tol) {
  const Eigen::MatrixXd& Y = training.data();
  const Eigen::Index n_cols = Y.cols();
  if (k_atoms < 1)
    throw_error(ErrorCode::kInvalidArgument, "k_atoms must be >= 1");
  if (sparsity < 1)
    throw_error(ErrorCode::kInvalidArgument, "sparsity must be >= 1");
  if (iterations < 1)
    throw_error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  if (n_cols < k_atoms)
    throw_error(ErrorCode::kConstraintViolation,
                "training column count V_r (" + std::to_string(n_cols) +
                    ") must satisfy V_r >= K_l (" + std::to_string(k_atoms) +
                    ")");

  Eigen::MatrixXd atoms = initial_atoms(Y, k_atoms, rng_seed);
  Eigen::MatrixXd codes = Eigen::MatrixXd::Zero(k_atoms, n_cols);
  KsvdTrace trace;
  trace.objective_per_iteration.reserve(static_cast<std::size_t>(iterations));
  trace.replaced_atoms_per_iteration.reserve(static_cast<std::size_t>(iterations));

  std::vector<std::string> labels(static_cast<std::size_t>(k_atoms));
  for (int j = 0; j < k_atoms; ++j) labels[j] = "learned_" + std::to_string(j);

  for (int iter = 0; iter < iterations; ++iter) {
    // Coding stage. A fresh pursuit replaces a column's code only when it
    // fits at least as well; the carried-over codes are consistent with the
    // current atoms because the update sweep rewrites them alongside.
    const Dictionary dict(atoms, 0, labels);
    Eigen::VectorXd column_objective(n_cols);
#pragma omp parallel for schedule(static)
    for (Eigen::Index v = 0; v < n_cols; ++v) {
      const OmpResult fresh = omp(Y.col(v), dict, sparsity, residual_tol);
      const double prev_norm =
          column_residual(Y, atoms, codes, v).norm();
      if (fresh.residual_norm <= prev_norm) {
        codes.col(v).setZero();
        for (std::size_t i = 0; i < fresh.support.size(); ++i)
          codes(fresh.support[i], v) =
              fresh.coefficients[static_cast<Eigen::Index>(i)];
        column_objective[v] = fresh.residual_norm * fresh.residual_norm;
      } else {
        column_objective[v] = prev_norm * prev_norm;
      }
    }
    // Summed sequentially so the trace does not depend on the thread count.
    double objective = 0.0;
    for (Eigen::Index v = 0; v < n_cols; ++v) objective += column_objective[v];
    trace.objective_per_iteration.push_back(objective);

    // Dictionary update sweep, ascending atom index; each update sees the
    // atoms and coefficient rows already rewritten this sweep.
    int replaced = 0;
    std::vector<char> used_for_replacement(static_cast<std::size_t>(n_cols), 0);
    for (int j = 0; j < k_atoms; ++j) {
      std::vector<Eigen::Index> users;
      for (Eigen::Index v = 0; v < n_cols; ++v)
        if (codes(j, v) != 0.0) users.push_back(v);

      if (users.empty()) {
        // Dead atom: bring in the worst-represented column not already used
        // as a replacement this sweep (ties to the lowest index).
        Eigen::Index best_v = -1;
        double best_err = -1.0;
        for (Eigen::Index v = 0; v < n_cols; ++v) {
          if (used_for_replacement[static_cast<std::size_t>(v)]) continue;
          if (Y.col(v).norm() == 0.0) continue;
          const double err =
              column_residual(Y, atoms, codes, v).squaredNorm();
          if (err > best_err) {
            best_err = err;
            best_v = v;
          }
        }
        if (best_v < 0)
          throw_error(ErrorCode::kDegenerateInput,
                      "degenerate training data: no distinct column left to "
                      "replace unused atom " + std::to_string(j));
        atoms.col(j) = Y.col(best_v) / Y.col(best_v).norm();
        used_for_replacement[static_cast<std::size_t>(best_v)] = 1;
        ++replaced;
        continue;
      }

      // Restricted error matrix: residuals of the users with this atom's
      // contribution added back.
      Eigen::MatrixXd error(Y.rows(), static_cast<Eigen::Index>(users.size()));
      for (std::size_t u = 0; u < users.size(); ++u) {
        const Eigen::Index v = users[u];
        error.col(static_cast<Eigen::Index>(u)) =
            column_residual(Y, atoms, codes, v) + codes(j, v) * atoms.col(j);
      }

      Eigen::BDCSVD<Eigen::MatrixXd> svd(
          error, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const double sigma = svd.singularValues()[0];
      if (!(sigma > 0.0)) {
        // Users exist but the restricted error vanished; nothing to fit.
        for (const Eigen::Index v : users) codes(j, v) = 0.0;
        continue;
      }
      Eigen::VectorXd left = svd.matrixU().col(0);
      Eigen::VectorXd right = svd.matrixV().col(0);
      Eigen::Index peak = 0;
      left.cwiseAbs().maxCoeff(&peak);
      if (left[peak] < 0.0) {  // fix the sign convention
        left = -left;
        right = -right;
      }
      atoms.col(j) = left;
      for (std::size_t u = 0; u < users.size(); ++u)
        codes(j, users[u]) = sigma * right[static_cast<Eigen::Index>(u)];
    }
    trace.replaced_atoms_per_iteration.push_back(replaced);
  }

  // Atom norms drift at most by rounding; renormalize before constructing.
  for (int j = 0; j < k_atoms; ++j) atoms.col(j) /= atoms.col(j).norm();

  return KsvdResult{Dictionary(std::move(atoms), 0, std::move(labels)),
                    CoefficientMatrix(std::move(codes), sparsity),
                    std::move(trace)};
}

void save_trace_csv(const KsvdTrace& trace, const std::filesystem::path& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "iteration,objective,replaced_atoms\n";
    for (std::size_t i = 0; i < trace.objective_per_iteration.size(); ++i) {
      const int replaced =
          i < trace.replaced_atoms_per_iteration.size()
              ? trace.replaced_atoms_per_iteration[i]
              : 0;
      out << i << ',' << format_double(trace.objective_per_iteration[i]) << ','
          << replaced << '\n';
    }
  });
}

}  // namespace dlsc
