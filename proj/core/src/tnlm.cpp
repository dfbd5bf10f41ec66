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

#include "dlsc/tnlm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>

namespace dlsc {

namespace {

std::uint64_t pack_coordinate(int x, int y, int z) {
  // 21 bits per axis, offset to keep the key non-negative.
  const auto ux = static_cast<std::uint64_t>(x + (1 << 20));
  const auto uy = static_cast<std::uint64_t>(y + (1 << 20));
  const auto uz = static_cast<std::uint64_t>(z + (1 << 20));
  return (ux << 42) | (uy << 21) | uz;
}

}  // namespace

void TnlmParams::validate(Eigen::Index n_voxels) const {
  if (distance_param < 1)
    throw_error(ErrorCode::kInvalidArgument,
                "distance parameter must be >= 1, got " +
                    std::to_string(distance_param));
  if (!(smoothing_level > 0.0))
    throw_error(ErrorCode::kInvalidArgument,
                "smoothing level must be positive, got " +
                    std::to_string(smoothing_level));
  if (voxel_coordinates.has_value()) {
    if (static_cast<Eigen::Index>(voxel_coordinates->size()) != n_voxels)
      throw_error(ErrorCode::kDimensionMismatch,
                  "coordinate list length " +
                      std::to_string(voxel_coordinates->size()) +
                      " does not match voxel count " + std::to_string(n_voxels));
    constexpr int kLimit = 1 << 20;
    for (const auto& c : *voxel_coordinates)
      for (const int axis : c)
        if (axis <= -kLimit || axis >= kLimit)
          throw_error(ErrorCode::kInvalidArgument,
                      "voxel coordinate magnitude exceeds 2^20");
  }
}

SignalMatrix tnlm_denoise(const SignalMatrix& signals, const TnlmParams& params) {
  params.validate(signals.n_voxels());
  const Eigen::MatrixXd& data = signals.data();
  const Eigen::Index n_frames = data.rows();
  const Eigen::Index n_voxels = data.cols();
  const double inv_h2 =
      1.0 / (params.smoothing_level * params.smoothing_level);

  // Demeaned unit-norm columns make every pairwise correlation a dot
  // product; a zero-variance column becomes the zero vector, giving the
  // required r = 0 against everything.
  Eigen::MatrixXd zscored(n_frames, n_voxels);
  for (Eigen::Index v = 0; v < n_voxels; ++v) {
    Eigen::VectorXd d = data.col(v).array() - data.col(v).mean();
    const double norm = d.norm();
    zscored.col(v) = norm > 0.0 ? Eigen::VectorXd(d / norm)
                                : Eigen::VectorXd::Zero(n_frames);
  }

  // Neighbor lists in ascending voxel order, so parallel and sequential
  // accumulation produce identical sums.
  std::vector<std::vector<Eigen::Index>> neighbors(
      static_cast<std::size_t>(n_voxels));
  const int radius = params.distance_param;
  if (!params.voxel_coordinates.has_value()) {
    for (Eigen::Index v = 0; v < n_voxels; ++v) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, v - radius);
      const Eigen::Index hi = std::min<Eigen::Index>(n_voxels - 1, v + radius);
      for (Eigen::Index u = lo; u <= hi; ++u)
        neighbors[static_cast<std::size_t>(v)].push_back(u);
    }
  } else {
    const auto& coords = *params.voxel_coordinates;
    std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> grid;
    grid.reserve(coords.size());
    for (Eigen::Index v = 0; v < n_voxels; ++v)
      grid[pack_coordinate(coords[v][0], coords[v][1], coords[v][2])]
          .push_back(v);
    for (Eigen::Index v = 0; v < n_voxels; ++v) {
      auto& list = neighbors[static_cast<std::size_t>(v)];
      const auto& c = coords[static_cast<std::size_t>(v)];
      for (int dx = -radius; dx <= radius; ++dx)
        for (int dy = -radius; dy <= radius; ++dy)
          for (int dz = -radius; dz <= radius; ++dz) {
            const auto it =
                grid.find(pack_coordinate(c[0] + dx, c[1] + dy, c[2] + dz));
            if (it != grid.end())
              list.insert(list.end(), it->second.begin(), it->second.end());
          }
      std::sort(list.begin(), list.end());
    }
  }

  Eigen::MatrixXd out(n_frames, n_voxels);
#pragma omp parallel for schedule(static)
  for (Eigen::Index v = 0; v < n_voxels; ++v) {
    Eigen::VectorXd accum = Eigen::VectorXd::Zero(n_frames);
    double weight_sum = 0.0;
    for (const Eigen::Index u : neighbors[static_cast<std::size_t>(v)]) {
      double w;
      if (u == v) {
        w = 1.0;
      } else {
        const double r = zscored.col(v).dot(zscored.col(u));
        w = std::exp((r - 1.0) * inv_h2);
      }
      accum += w * data.col(u);
      weight_sum += w;
    }
    out.col(v) = accum / weight_sum;
  }

  return SignalMatrix(std::move(out), signals.tr_seconds());
}

}  // namespace dlsc
