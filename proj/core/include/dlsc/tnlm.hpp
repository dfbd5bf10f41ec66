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

#ifndef DLSC_TNLM_HPP
#define DLSC_TNLM_HPP

#include <array>
#include <optional>
#include <vector>

#include "dlsc/signal_matrix.hpp"

namespace dlsc {

/// Temporal non-local-means parameters. Without explicit coordinates the
/// voxels sit on a 1-D line and the neighborhood is an index window; with
/// coordinates it is a Chebyshev (box) ball of the same radius.
struct TnlmParams {
  int distance_param = 11;
  double smoothing_level = 0.72;
  std::optional<std::vector<std::array<int, 3>>> voxel_coordinates;

  void validate(Eigen::Index n_voxels) const;
};

/// Replaces each voxel's series with the weighted mean of its neighborhood,
/// weights w(v,u) = exp((r(v,u) - 1) / h^2) where r is the correlation of
/// the raw series and h the smoothing level; w(v,v) = 1 exactly. A pair
/// involving a zero-variance series gets r = 0. For z-scored series this is
/// the classic NLM Gaussian kernel with the frame count absorbed into h.
SignalMatrix tnlm_denoise(const SignalMatrix& signals, const TnlmParams& params);

}  // namespace dlsc

#endif  // DLSC_TNLM_HPP
