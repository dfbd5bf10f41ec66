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

#include "dlsc/connectivity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "dlsc/matrix_io.hpp"

namespace dlsc {

namespace {

constexpr double kFisherClamp = 1.0 - 1e-15;

void check_region(const SignalMatrix& signals, const RegionSpec& region) {
  if (region.voxel_indices.empty())
    throw_error(ErrorCode::kInvalidArgument,
                "region '" + region.name + "' has no voxel indices");
  std::set<Eigen::Index> seen;
  for (const Eigen::Index v : region.voxel_indices) {
    if (v < 0 || v >= signals.n_voxels())
      throw_error(ErrorCode::kInvalidArgument,
                  "region '" + region.name + "' references voxel " +
                      std::to_string(v) + ", outside [0, " +
                      std::to_string(signals.n_voxels()) + ")");
    if (!seen.insert(v).second)
      throw_error(ErrorCode::kInvalidArgument,
                  "region '" + region.name + "' lists voxel " +
                      std::to_string(v) + " twice");
  }
}

}  // namespace

Eigen::VectorXd region_series(const SignalMatrix& signals,
                              const RegionSpec& region) {
  check_region(signals, region);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(signals.n_frames());
  for (const Eigen::Index v : region.voxel_indices) mean += signals.data().col(v);
  return mean / static_cast<double>(region.voxel_indices.size());
}

double pearson(const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size())
    throw_error(ErrorCode::kDimensionMismatch,
                "correlation inputs differ in length: " +
                    std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  if (x.size() < 2)
    throw_error(ErrorCode::kInvalidArgument,
                "correlation needs at least 2 samples");
  const Eigen::VectorXd dx = x.array() - x.mean();
  const Eigen::VectorXd dy = y.array() - y.mean();
  const double sx = dx.squaredNorm();
  const double sy = dy.squaredNorm();
  if (sx == 0.0 || sy == 0.0)
    throw_error(ErrorCode::kDegenerateInput,
                "correlation undefined: input has zero variance");
  const double r = dx.dot(dy) / std::sqrt(sx * sy);
  return std::clamp(r, -1.0, 1.0);
}

double fisher_z(double r) {
  if (std::abs(r) > 1.0)
    throw_error(ErrorCode::kInvalidArgument,
                "correlation " + std::to_string(r) + " outside [-1, 1]");
  return std::atanh(std::clamp(r, -kFisherClamp, kFisherClamp));
}

double fisher_z_inv(double z) {
  // tanh rounds to exactly +-1.0 for |z| beyond ~19; clamp so the result
  // stays strictly inside (-1, 1) like the exact function.
  return std::clamp(std::tanh(z), -kFisherClamp, kFisherClamp);
}

ConnectivityReport connectivity_map(const SignalMatrix& signals,
                                    const std::vector<RegionSpec>& seeds,
                                    const std::vector<RegionSpec>& targets) {
  ConnectivityReport report;
  report.rows.reserve(seeds.size() * targets.size());
  for (const RegionSpec& seed : seeds) {
    const Eigen::VectorXd s = region_series(signals, seed);
    for (const RegionSpec& target : targets) {
      const Eigen::VectorXd t = region_series(signals, target);
      ConnectivityRow row;
      row.seed = seed.name;
      row.target = target.name;
      try {
        row.r = pearson(s, t);
        row.z = fisher_z(row.r);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateInput) throw;
        row.valid = false;
        row.r = row.z = std::numeric_limits<double>::quiet_NaN();
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

ConnectivityReport group_average(const std::vector<ConnectivityReport>& reports) {
  if (reports.empty())
    throw_error(ErrorCode::kInvalidArgument, "no reports to average");

  using Key = std::pair<std::string, std::string>;
  auto keys_of = [](const ConnectivityReport& rep) {
    std::set<Key> keys;
    for (const auto& row : rep.rows) keys.insert({row.seed, row.target});
    return keys;
  };
  const std::set<Key> reference = keys_of(reports.front());
  for (std::size_t i = 1; i < reports.size(); ++i)
    if (keys_of(reports[i]) != reference)
      throw_error(ErrorCode::kInvalidArgument,
                  "report " + std::to_string(i) +
                      " has mismatched (seed, target) row keys");

  std::map<Key, std::pair<double, int>> sums;  // key -> (sum z, count)
  for (const ConnectivityReport& rep : reports)
    for (const auto& row : rep.rows)
      if (row.valid) {
        auto& [sum, count] = sums[{row.seed, row.target}];
        sum += row.z;
        ++count;
      }

  ConnectivityReport out;
  out.group_info = GroupInfo{static_cast<int>(reports.size()), "fisher-mean"};
  out.rows.reserve(reports.front().rows.size());
  for (const auto& row : reports.front().rows) {
    ConnectivityRow avg;
    avg.seed = row.seed;
    avg.target = row.target;
    const auto& [sum, count] = sums[{row.seed, row.target}];
    if (count == 0) {
      avg.valid = false;
      avg.r = avg.z = std::numeric_limits<double>::quiet_NaN();
    } else {
      avg.z = sum / count;
      avg.r = fisher_z_inv(avg.z);
    }
    out.rows.push_back(std::move(avg));
  }
  return out;
}

std::vector<EmphasisRow> emphasis_profile(const ConnectivityReport& raw,
                                          const ConnectivityReport& denoised) {
  std::map<std::pair<std::string, std::string>, const ConnectivityRow*> lookup;
  for (const auto& row : denoised.rows) lookup[{row.seed, row.target}] = &row;

  std::vector<EmphasisRow> rows;
  rows.reserve(raw.rows.size());
  for (const auto& row : raw.rows) {
    const auto it = lookup.find({row.seed, row.target});
    if (it == lookup.end())
      throw_error(ErrorCode::kInvalidArgument,
                  "pair (" + row.seed + ", " + row.target +
                      ") missing from the denoised report");
    if (!row.valid || !it->second->valid) continue;
    rows.push_back({row.seed, row.target, row.z, it->second->z,
                    it->second->z - row.z});
  }
  if (lookup.size() != raw.rows.size())
    throw_error(ErrorCode::kInvalidArgument,
                "raw and denoised reports have mismatched row keys");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const EmphasisRow& a, const EmphasisRow& b) {
                     return a.z_raw > b.z_raw;
                   });
  return rows;
}

std::vector<RegionSpec> load_regions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::kIo, "cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw_error(ErrorCode::kParse, path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "region_name,voxel_index")
    throw_error(ErrorCode::kParse,
                path.string() + ": expected header 'region_name,voxel_index'");
  std::vector<RegionSpec> regions;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    ++row;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw_error(ErrorCode::kParse, path.string() + ": row " +
                                         std::to_string(row) +
                                         " needs region_name,voxel_index");
    const std::string name = line.substr(0, comma);
    long long index = 0;
    auto [ptr, ec] = std::from_chars(line.data() + comma + 1,
                                     line.data() + line.size(), index);
    if (ec != std::errc() || ptr != line.data() + line.size() || index < 0)
      throw_error(ErrorCode::kParse,
                  path.string() + ": bad voxel index at row " +
                      std::to_string(row));
    auto it = std::find_if(regions.begin(), regions.end(),
                           [&](const RegionSpec& r) { return r.name == name; });
    if (it == regions.end()) {
      regions.push_back({name, {static_cast<Eigen::Index>(index)}});
    } else {
      it->voxel_indices.push_back(static_cast<Eigen::Index>(index));
    }
  }
  if (regions.empty())
    throw_error(ErrorCode::kParse, path.string() + ": no regions");
  return regions;
}

void save_regions_csv(const std::vector<RegionSpec>& regions,
                      const std::filesystem::path& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "region_name,voxel_index\n";
    for (const RegionSpec& region : regions)
      for (const Eigen::Index v : region.voxel_indices)
        out << region.name << ',' << v << '\n';
  });
}

ConnectivityReport load_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::kIo, "cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw_error(ErrorCode::kParse, path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const bool grouped = line == "seed,target,r,z,n_subjects";
  if (!grouped && line != "seed,target,r,z")
    throw_error(ErrorCode::kParse,
                path.string() + ": expected header 'seed,target,r,z[,n_subjects]'");
  ConnectivityReport report;
  int n_subjects = 0;
  Eigen::Index row_no = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    ++row_no;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(',', start);
      fields.push_back(line.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    const std::size_t expected = grouped ? 5 : 4;
    if (fields.size() != expected)
      throw_error(ErrorCode::kParse,
                  path.string() + ": row " + std::to_string(row_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(expected));
    auto parse_value = [&](const std::string& s) {
      if (s == "nan" || s == "-nan")
        return std::numeric_limits<double>::quiet_NaN();
      double value = 0.0;
      auto [ptr, ec] =
          std::from_chars(s.data(), s.data() + s.size(), value);
      if (ec != std::errc() || ptr != s.data() + s.size())
        throw_error(ErrorCode::kParse,
                    path.string() + ": non-numeric value '" + s + "' at row " +
                        std::to_string(row_no));
      return value;
    };
    ConnectivityRow row;
    row.seed = fields[0];
    row.target = fields[1];
    row.r = parse_value(fields[2]);
    row.z = parse_value(fields[3]);
    row.valid = std::isfinite(row.r) && std::isfinite(row.z);
    if (grouped) n_subjects = static_cast<int>(parse_value(fields[4]));
    report.rows.push_back(std::move(row));
  }
  if (grouped) report.group_info = GroupInfo{n_subjects, "fisher-mean"};
  return report;
}

void save_report_csv(const ConnectivityReport& report,
                     const std::filesystem::path& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    const bool grouped = report.group_info.has_value();
    out << (grouped ? "seed,target,r,z,n_subjects" : "seed,target,r,z") << '\n';
    for (const auto& row : report.rows) {
      out << row.seed << ',' << row.target << ',';
      if (row.valid)
        out << format_double(row.r) << ',' << format_double(row.z);
      else
        out << "nan,nan";
      if (grouped) out << ',' << report.group_info->n_subjects;
      out << '\n';
    }
  });
}

void save_emphasis_csv(const std::vector<EmphasisRow>& rows,
                       const std::filesystem::path& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "seed,target,z_raw,z_denoised,delta_z\n";
    for (const auto& row : rows)
      out << row.seed << ',' << row.target << ',' << format_double(row.z_raw)
          << ',' << format_double(row.z_denoised) << ','
          << format_double(row.delta_z) << '\n';
  });
}

PairClasses load_pairs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::kIo, "cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw_error(ErrorCode::kParse, path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "seed,target,class")
    throw_error(ErrorCode::kParse,
                path.string() + ": expected header 'seed,target,class'");
  PairClasses pairs;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    ++row;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? std::string::npos
                                            : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw_error(ErrorCode::kParse, path.string() + ": row " +
                                         std::to_string(row) +
                                         " needs seed,target,class");
    const std::string cls = line.substr(c2 + 1);
    if (cls != "high" && cls != "low")
      throw_error(ErrorCode::kParse, path.string() + ": unknown class '" +
                                         cls + "' at row " +
                                         std::to_string(row));
    auto& bucket = cls == "high" ? pairs.high : pairs.low;
    bucket.emplace_back(line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1));
  }
  return pairs;
}

void save_pairs_csv(const PairClasses& pairs, const std::filesystem::path& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "seed,target,class\n";
    for (const auto& [seed, target] : pairs.high)
      out << seed << ',' << target << ",high\n";
    for (const auto& [seed, target] : pairs.low)
      out << seed << ',' << target << ",low\n";
  });
}

}  // namespace dlsc
