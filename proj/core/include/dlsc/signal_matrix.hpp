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

#ifndef DLSC_SIGNAL_MATRIX_HPP
#define DLSC_SIGNAL_MATRIX_HPP

#include <string>
#include <utility>

#include <Eigen/Core>

#include "dlsc/errors.hpp"

namespace dlsc {

/// Time-series matrix: rows are time frames, columns are voxels. Immutable
/// after construction; shared freely across threads for reading.
class SignalMatrix {
 public:
  SignalMatrix(Eigen::MatrixXd data, double tr_seconds)
      : data_(std::move(data)), tr_seconds_(tr_seconds) {
    if (data_.rows() < 2)
      throw_error(ErrorCode::kInvalidArgument,
                  "signal matrix needs at least 2 frames, got " +
                      std::to_string(data_.rows()));
    if (data_.cols() < 1)
      throw_error(ErrorCode::kInvalidArgument,
                  "signal matrix needs at least 1 voxel");
    if (!data_.allFinite())
      throw_error(ErrorCode::kInvalidArgument,
                  "signal matrix contains non-finite entries");
    if (!(tr_seconds_ > 0.0))
      throw_error(ErrorCode::kInvalidArgument,
                  "sampling interval must be positive, got " +
                      std::to_string(tr_seconds_));
  }

  Eigen::Index n_frames() const { return data_.rows(); }
  Eigen::Index n_voxels() const { return data_.cols(); }
  double tr_seconds() const { return tr_seconds_; }
  const Eigen::MatrixXd& data() const { return data_; }

 private:
  Eigen::MatrixXd data_;
  double tr_seconds_;
};

}  // namespace dlsc

#endif  // DLSC_SIGNAL_MATRIX_HPP
