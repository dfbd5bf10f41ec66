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

#ifndef DLSC_CONNECTIVITY_HPP
#define DLSC_CONNECTIVITY_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dlsc/signal_matrix.hpp"

namespace dlsc {

/// Named set of voxel column indices; its time series is the framewise mean
/// over those columns. A single-index region is just that column.
struct RegionSpec {
  std::string name;
  std::vector<Eigen::Index> voxel_indices;
};

struct ConnectivityRow {
  std::string seed;
  std::string target;
  double r = 0.0;
  double z = 0.0;
  /// False when a region series had zero variance; such rows carry no r/z
  /// and are excluded from group aggregation.
  bool valid = true;
};

struct GroupInfo {
  int n_subjects = 0;
  std::string aggregation = "fisher-mean";
};

struct ConnectivityReport {
  std::vector<ConnectivityRow> rows;
  std::optional<GroupInfo> group_info;
};

/// Framewise mean of the region's voxel columns.
Eigen::VectorXd region_series(const SignalMatrix& signals,
                              const RegionSpec& region);

/// Standard product-moment correlation, clamped to [-1, 1] against rounding.
/// Zero variance in either input is a degenerate-input error.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y);

/// atanh with |r| clamped to 1 - 1e-15 so correlations of exactly +-1 map to
/// large finite values instead of infinities.
double fisher_z(double r);
double fisher_z_inv(double z);

/// One row per (seed, target) pair, in seed-major order.
ConnectivityReport connectivity_map(const SignalMatrix& signals,
                                    const std::vector<RegionSpec>& seeds,
                                    const std::vector<RegionSpec>& targets);

/// Per (seed, target) key: mean of the z values across reports, transformed
/// back to r. Rows are matched by name, so report row order need not agree.
ConnectivityReport group_average(const std::vector<ConnectivityReport>& reports);

struct EmphasisRow {
  std::string seed;
  std::string target;
  double z_raw = 0.0;
  double z_denoised = 0.0;
  double delta_z = 0.0;
};

/// Per-pair change in z from raw to denoised, sorted by z_raw descending.
/// Pairs invalid in either report are skipped.
std::vector<EmphasisRow> emphasis_profile(const ConnectivityReport& raw,
                                          const ConnectivityReport& denoised);

// Region CSV: header "region_name,voxel_index", one row per (region, voxel)
// pair; a region's rows may be scattered, order of first appearance wins.
std::vector<RegionSpec> load_regions_csv(const std::filesystem::path& path);
void save_regions_csv(const std::vector<RegionSpec>& regions,
                      const std::filesystem::path& path);

// Report CSV: header "seed,target,r,z" (plus ",n_subjects" for group
// reports); invalid rows serialize r and z as nan.
ConnectivityReport load_report_csv(const std::filesystem::path& path);
void save_report_csv(const ConnectivityReport& report,
                     const std::filesystem::path& path);

/// Emphasis CSV: header "seed,target,z_raw,z_denoised,delta_z".
void save_emphasis_csv(const std::vector<EmphasisRow>& rows,
                       const std::filesystem::path& path);

/// Seed-target pairs labelled by expected connectivity strength; drives the
/// connectivity-contrast scoring of grid searches.
struct PairClasses {
  std::vector<std::pair<std::string, std::string>> high;
  std::vector<std::pair<std::string, std::string>> low;
};

// Pairs CSV: header "seed,target,class" with class either high or low.
PairClasses load_pairs_csv(const std::filesystem::path& path);
void save_pairs_csv(const PairClasses& pairs, const std::filesystem::path& path);

}  // namespace dlsc

#endif  // DLSC_CONNECTIVITY_HPP
