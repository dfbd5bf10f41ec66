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

#ifndef DLSC_DICTIONARY_HPP
#define DLSC_DICTIONARY_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dlsc/errors.hpp"

namespace dlsc {

/// Unit-norm atom matrix, N frames x K atoms. Columns [0, fixed_count) hold
/// the fixed block derived from the task paradigm; the remaining columns
/// hold the learned block. Fixed-only and learned-only dictionaries are just
/// the degenerate splits.
class Dictionary {
 public:
  static constexpr double kUnitNormTolerance = 1e-9;

  Dictionary(Eigen::MatrixXd atoms, Eigen::Index fixed_count,
             std::vector<std::string> atom_labels)
      : atoms_(std::move(atoms)),
        fixed_count_(fixed_count),
        labels_(std::move(atom_labels)) {
    if (atoms_.rows() < 1 || atoms_.cols() < 1)
      throw_error(ErrorCode::kInvalidArgument, "dictionary must be non-empty");
    if (fixed_count_ < 0 || fixed_count_ > atoms_.cols())
      throw_error(ErrorCode::kInvalidArgument,
                  "fixed atom count " + std::to_string(fixed_count_) +
                      " outside [0, " + std::to_string(atoms_.cols()) + "]");
    if (static_cast<Eigen::Index>(labels_.size()) != atoms_.cols())
      throw_error(ErrorCode::kInvalidArgument,
                  "expected " + std::to_string(atoms_.cols()) +
                      " atom labels, got " + std::to_string(labels_.size()));
    if (!atoms_.allFinite())
      throw_error(ErrorCode::kInvalidArgument,
                  "dictionary contains non-finite entries");
    for (Eigen::Index j = 0; j < atoms_.cols(); ++j) {
      const double norm = atoms_.col(j).norm();
      if (std::abs(norm - 1.0) > kUnitNormTolerance)
        throw_error(ErrorCode::kInvalidArgument,
                    "atom " + std::to_string(j) + " (" + labels_[j] +
                        ") has norm " + std::to_string(norm) +
                        ", expected 1 within 1e-9");
    }
  }

  Eigen::Index n_frames() const { return atoms_.rows(); }
  Eigen::Index n_atoms() const { return atoms_.cols(); }
  Eigen::Index fixed_count() const { return fixed_count_; }
  Eigen::Index learned_count() const { return atoms_.cols() - fixed_count_; }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(Eigen::Index j) const { return labels_.at(j); }

 private:
  Eigen::MatrixXd atoms_;
  Eigen::Index fixed_count_;
  std::vector<std::string> labels_;
};

}  // namespace dlsc

#endif  // DLSC_DICTIONARY_HPP
