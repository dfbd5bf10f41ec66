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

#include "dlsc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>

#include "dlsc/matrix_io.hpp"
#include "dlsc/sparse_coding.hpp"

namespace dlsc {

namespace {

/// Largest |correlation| of one voxel against the fixed atoms; 0 for a
/// zero-variance voxel. The atoms are demeaned/renormalized once by the
/// caller.
double max_abs_correlation(const Eigen::VectorXd& voxel,
                           const Eigen::MatrixXd& demeaned_atoms) {
  Eigen::VectorXd d = voxel.array() - voxel.mean();
  const double norm = d.norm();
  if (norm == 0.0) return 0.0;
  d /= norm;
  return (demeaned_atoms.transpose() * d).cwiseAbs().maxCoeff();
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_context(std::string("denoise[") + name + "]");
  }
}

}  // namespace

std::vector<bool> select_training_voxels(const SignalMatrix& signals,
                                         const Dictionary& fixed,
                                         double corr_threshold,
                                         int learned_count) {
  if (!(corr_threshold >= 0.0 && corr_threshold < 1.0))
    throw_error(ErrorCode::kInvalidArgument,
                "correlation threshold must lie in [0, 1)");
  if (fixed.fixed_count() < 1)
    throw_error(ErrorCode::kInvalidArgument,
                "training selection needs at least one fixed atom");
  if (signals.n_frames() != fixed.n_frames())
    throw_error(ErrorCode::kDimensionMismatch,
                "signals and fixed dictionary differ in frame count");

  // A zero-variance atom would make the correlation undefined; the fixed
  // atoms come from non-constant regressors, so treat it as a caller error.
  Eigen::MatrixXd demeaned(fixed.n_frames(), fixed.fixed_count());
  for (Eigen::Index j = 0; j < fixed.fixed_count(); ++j) {
    Eigen::VectorXd d =
        fixed.atoms().col(j).array() - fixed.atoms().col(j).mean();
    const double norm = d.norm();
    if (norm == 0.0)
      throw_error(ErrorCode::kDegenerateInput,
                  "fixed atom '" + fixed.label(j) + "' is constant in time");
    demeaned.col(j) = d / norm;
  }

  const Eigen::Index n_voxels = signals.n_voxels();
  std::vector<bool> mask(static_cast<std::size_t>(n_voxels), false);
  std::int64_t selected = 0;
  for (Eigen::Index v = 0; v < n_voxels; ++v) {
    if (max_abs_correlation(signals.data().col(v), demeaned) < corr_threshold) {
      mask[static_cast<std::size_t>(v)] = true;
      ++selected;
    }
  }

  if (selected < learned_count)
    throw_error(ErrorCode::kConstraintViolation,
                "training voxel count V_r (" + std::to_string(selected) +
                    ") must satisfy V_r >= K_l (" +
                    std::to_string(learned_count) + "); raise the correlation "
                    "threshold or shrink the learned block");
  return mask;
}

DenoiseOutput denoise(const SignalMatrix& signals, const TaskParadigm& paradigm,
                      const HrfSpec& hrf, const DlscParams& params,
                      double residual_tol) {
  params.validate();

  Dictionary fixed = stage("build_fixed_dictionary", [&] {
    return build_fixed_dictionary(paradigm, signals.n_frames(),
                                  signals.tr_seconds(), hrf);
  });
  const Eigen::Index fixed_count = fixed.n_atoms();
  if (params.dict_size <= fixed_count)
    throw_error(ErrorCode::kInvalidArgument,
                "dict_size " + std::to_string(params.dict_size) +
                    " leaves no room for learned atoms beyond the " +
                    std::to_string(fixed_count) + " fixed atoms");
  const int learned_count = params.dict_size - static_cast<int>(fixed_count);

  const std::vector<bool> mask = stage("select_training_voxels", [&] {
    return select_training_voxels(signals, fixed, params.corr_threshold,
                                  learned_count);
  });

  Eigen::Index n_training = 0;
  for (const bool m : mask) n_training += m;
  Eigen::MatrixXd training(signals.n_frames(), n_training);
  for (Eigen::Index v = 0, t = 0; v < signals.n_voxels(); ++v)
    if (mask[static_cast<std::size_t>(v)]) training.col(t++) = signals.data().col(v);

  KsvdResult learned = stage("ksvd_train", [&] {
    return ksvd_train(SignalMatrix(std::move(training), signals.tr_seconds()),
                      learned_count, params.sparsity, params.ksvd_iterations,
                      params.rng_seed, residual_tol);
  });

  // Concatenate [fixed learned] and renormalize; both blocks are unit-norm
  // already, so this only strips rounding drift.
  Eigen::MatrixXd atoms(signals.n_frames(), params.dict_size);
  atoms.leftCols(fixed_count) = fixed.atoms();
  atoms.rightCols(learned_count) = learned.dictionary.atoms();
  for (Eigen::Index j = 0; j < atoms.cols(); ++j)
    atoms.col(j) /= atoms.col(j).norm();
  std::vector<std::string> labels = fixed.labels();
  labels.insert(labels.end(), learned.dictionary.labels().begin(),
                learned.dictionary.labels().end());
  Dictionary dictionary(std::move(atoms), fixed_count, std::move(labels));

  CoefficientMatrix coefficients = stage("sparse_code", [&] {
    return sparse_code(signals, dictionary, params.sparsity, residual_tol);
  });

  SignalMatrix denoised(dictionary.atoms() * coefficients.coeffs(),
                        signals.tr_seconds());

  return DenoiseOutput{std::move(denoised), std::move(dictionary),
                       std::move(coefficients), mask,
                       std::move(learned.trace)};
}

namespace {

double contrast_score(const ConnectivityReport& report,
                      const GridScorer& scorer) {
  std::map<std::pair<std::string, std::string>, const ConnectivityRow*> lookup;
  for (const auto& row : report.rows) lookup[{row.seed, row.target}] = &row;
  auto mean_z = [&](const std::vector<std::pair<std::string, std::string>>&
                        pairs, const char* label) {
    if (pairs.empty())
      throw_error(ErrorCode::kInvalidArgument,
                  std::string("contrast scorer has no ") + label + " pairs");
    double sum = 0.0;
    for (const auto& key : pairs) {
      const auto it = lookup.find(key);
      if (it == lookup.end())
        throw_error(ErrorCode::kInvalidArgument,
                    "scorer pair (" + key.first + ", " + key.second +
                        ") missing from the connectivity map");
      if (!it->second->valid)
        throw_error(ErrorCode::kDegenerateInput,
                    "scorer pair (" + key.first + ", " + key.second +
                        ") has zero-variance series");
      sum += it->second->z;
    }
    return sum / static_cast<double>(pairs.size());
  };
  return mean_z(scorer.high_pairs, "high") - mean_z(scorer.low_pairs, "low");
}

}  // namespace

GridSearchReport grid_search(const SignalMatrix& signals,
                             const TaskParadigm& paradigm, const HrfSpec& hrf,
                             const std::vector<int>& k_grid,
                             const std::vector<int>& lambda_grid,
                             const std::vector<double>& cth_grid,
                             const GridScorer& scorer, int ksvd_iterations,
                             std::uint64_t rng_seed) {
  if (k_grid.empty() || lambda_grid.empty() || cth_grid.empty())
    throw_error(ErrorCode::kInvalidArgument, "grid axes must be non-empty");
  if (scorer.rule == GridScorer::Rule::kConnectivityContrast &&
      (scorer.seeds.empty() || scorer.targets.empty()))
    throw_error(ErrorCode::kInvalidArgument,
                "contrast scorer needs seed and target regions");

  GridSearchReport report;
  report.entries.reserve(k_grid.size() * lambda_grid.size() * cth_grid.size());
  for (const int k : k_grid)
    for (const int lambda : lambda_grid)
      for (const double cth : cth_grid) {
        GridSearchEntry entry;
        entry.params = DlscParams{k, lambda, cth, ksvd_iterations, rng_seed};
        try {
          const DenoiseOutput output =
              denoise(signals, paradigm, hrf, entry.params);
          if (scorer.rule == GridScorer::Rule::kConnectivityContrast) {
            entry.connectivity =
                connectivity_map(output.denoised, scorer.seeds, scorer.targets);
            entry.score = contrast_score(entry.connectivity, scorer);
          } else {
            entry.score = -(signals.data() - output.denoised.data()).norm() /
                          signals.data().norm();
          }
          entry.succeeded = true;
        } catch (const Error& e) {
          entry.failure_reason = e.what();
        }
        report.entries.push_back(std::move(entry));
      }

  const DlscParams preferred{};  // the standard operating point
  auto rank = [&](const GridSearchEntry& e) {
    const bool is_preferred = e.params.dict_size == preferred.dict_size &&
                              e.params.sparsity == preferred.sparsity &&
                              e.params.corr_threshold == preferred.corr_threshold;
    return std::make_tuple(!e.succeeded, -e.score, !is_preferred,
                           e.params.dict_size, e.params.sparsity,
                           e.params.corr_threshold);
  };
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [&](const GridSearchEntry& a, const GridSearchEntry& b) {
                     return rank(a) < rank(b);
                   });
  return report;
}

void save_grid_report_csv(const GridSearchReport& report,
                          const std::filesystem::path& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "k,lambda,cth,status,score,reason\n";
    for (const auto& entry : report.entries) {
      out << entry.params.dict_size << ',' << entry.params.sparsity << ','
          << format_double(entry.params.corr_threshold) << ','
          << (entry.succeeded ? "ok" : "failed") << ','
          << (entry.succeeded ? format_double(entry.score) : "nan") << ',';
      std::string reason = entry.failure_reason;
      std::replace(reason.begin(), reason.end(), ',', ';');
      out << reason << '\n';
    }
  });
}

}  // namespace dlsc
