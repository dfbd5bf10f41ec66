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

#include "dlsc/phantom.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>

namespace dlsc {

namespace {

// Distinct sub-stream tags mixed into the seed for latents, noise, drift
// and spikes so adding one nuisance never reshuffles another.
constexpr std::uint64_t kLatentStream = 0x1b873593u;
constexpr std::uint64_t kNoiseStream = 0x9e3779b9u;
constexpr std::uint64_t kDriftStream = 0x85ebca6bu;
constexpr std::uint64_t kSpikeStream = 0xc2b2ae35u;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream + index)));
}

/// Seeded white noise smoothed by a width-5 moving average, normalized to
/// unit norm; the "resting" structure shared within a community.
Eigen::VectorXd smooth_latent(Eigen::Index n_frames, std::uint64_t seed,
                              int latent_id) {
  auto rng = stream_rng(seed, kLatentStream,
                        static_cast<std::uint64_t>(latent_id));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd white(n_frames);
  for (Eigen::Index i = 0; i < n_frames; ++i) white[i] = gauss(rng);
  Eigen::VectorXd smooth(n_frames);
  for (Eigen::Index i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    int count = 0;
    for (Eigen::Index k = i - 2; k <= i + 2; ++k)
      if (k >= 0 && k < n_frames) {
        acc += white[k];
        ++count;
      }
    smooth[i] = acc / count;
  }
  const double norm = smooth.norm();
  if (norm == 0.0)
    throw_error(ErrorCode::kDegenerateInput, "latent collapsed to zero");
  return smooth / norm;
}

/// Legendre polynomial P_p on [-1, 1] by the three-term recurrence.
double legendre(int p, double x) {
  if (p == 0) return 1.0;
  if (p == 1) return x;
  double pm2 = 1.0, pm1 = x, cur = x;
  for (int k = 2; k <= p; ++k) {
    cur = ((2.0 * k - 1.0) * x * pm1 - (k - 1.0) * pm2) / k;
    pm2 = pm1;
    pm1 = cur;
  }
  return cur;
}

void validate_spec(const PhantomSpec& spec) {
  if (spec.n_frames < 2)
    throw_error(ErrorCode::kInvalidArgument, "phantom needs at least 2 frames");
  if (spec.n_voxels < 1)
    throw_error(ErrorCode::kInvalidArgument, "phantom needs at least 1 voxel");
  if (!(spec.tr_seconds > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "phantom tr must be positive");
  if (spec.noise_sigma < 0.0)
    throw_error(ErrorCode::kInvalidArgument, "noise sigma must be >= 0");
  if (spec.nuisance.has_value()) {
    if (spec.nuisance->drift_order < 0)
      throw_error(ErrorCode::kInvalidArgument, "drift order must be >= 0");
    if (spec.nuisance->spike_rate < 0.0 || spec.nuisance->spike_rate > 1.0)
      throw_error(ErrorCode::kInvalidArgument, "spike rate must lie in [0, 1]");
  }
  std::set<std::string> names;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;
  for (const Community& c : spec.communities) {
    if (c.name.empty())
      throw_error(ErrorCode::kInvalidArgument, "community name must be non-empty");
    if (!names.insert(c.name).second)
      throw_error(ErrorCode::kInvalidArgument,
                  "duplicate community name '" + c.name + "'");
    if (c.begin < 0 || c.end > spec.n_voxels || c.begin >= c.end)
      throw_error(ErrorCode::kInvalidArgument,
                  "community '" + c.name + "' has an invalid voxel range");
    if (c.atoms.empty())
      throw_error(ErrorCode::kInvalidArgument,
                  "community '" + c.name + "' has no generating atoms");
    for (const GeneratingAtom& a : c.atoms)
      if (!std::isfinite(a.amplitude))
        throw_error(ErrorCode::kInvalidArgument,
                    "community '" + c.name + "' has a non-finite amplitude");
    ranges.emplace_back(c.begin, c.end);
  }
  std::sort(ranges.begin(), ranges.end());
  for (std::size_t i = 1; i < ranges.size(); ++i)
    if (ranges[i].first < ranges[i - 1].second)
      throw_error(ErrorCode::kInvalidArgument, "community ranges overlap");
}

std::string atom_key(const GeneratingAtom& a) {
  return a.kind == GeneratingAtom::Kind::kTaskCondition
             ? "task:" + a.condition
             : "latent_" + std::to_string(a.latent_id);
}

}  // namespace

PhantomSpec default_phantom_spec() {
  PhantomSpec spec(default_motor_paradigm());
  spec.n_frames = 284;
  spec.tr_seconds = 0.72;
  spec.n_voxels = 2000;
  spec.target_snr_db = -3.0;
  spec.rng_seed = 20260501;
  const std::vector<std::string> conditions = {"cue", "lh", "lf",
                                               "rh", "rf", "t"};
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    Community community;
    community.name = conditions[c];
    community.begin = static_cast<Eigen::Index>(c) * 200;
    community.end = community.begin + 200;
    community.atoms.push_back({GeneratingAtom::Kind::kTaskCondition,
                               conditions[c], 0, 1.0});
    community.atoms.push_back({GeneratingAtom::Kind::kSmoothLatent, "",
                               static_cast<int>(c), 0.5});
    spec.communities.push_back(std::move(community));
  }
  return spec;
}

PhantomTruth generate_phantom(const PhantomSpec& spec) {
  validate_spec(spec);

  // Collect the distinct generating atoms in declaration order.
  std::vector<std::string> atom_labels;
  std::vector<Eigen::VectorXd> atom_series;
  std::map<std::string, Eigen::Index> atom_index;
  for (const Community& c : spec.communities) {
    for (const GeneratingAtom& a : c.atoms) {
      const std::string key = atom_key(a);
      if (atom_index.count(key)) continue;
      Eigen::VectorXd series;
      if (a.kind == GeneratingAtom::Kind::kTaskCondition) {
        series = stimulus_regressor(spec.paradigm, a.condition, spec.n_frames,
                                    spec.tr_seconds, spec.hrf);
        const double norm = series.norm();
        if (norm == 0.0)
          throw_error(ErrorCode::kDegenerateInput,
                      "condition '" + a.condition +
                          "' produces an all-zero regressor in the phantom run");
        series /= norm;
      } else {
        series = smooth_latent(spec.n_frames, spec.rng_seed, a.latent_id);
      }
      atom_index[key] = static_cast<Eigen::Index>(atom_series.size());
      atom_series.push_back(std::move(series));
      atom_labels.push_back(key);
    }
  }
  if (atom_series.empty())
    throw_error(ErrorCode::kInvalidArgument,
                "phantom has no communities, so no ground-truth atoms");

  const Eigen::Index n_atoms = static_cast<Eigen::Index>(atom_series.size());
  Eigen::MatrixXd dict(spec.n_frames, n_atoms);
  for (Eigen::Index j = 0; j < n_atoms; ++j)
    dict.col(j) = atom_series[static_cast<std::size_t>(j)];

  int max_atoms_per_community = 1;
  for (const Community& c : spec.communities)
    max_atoms_per_community =
        std::max(max_atoms_per_community, static_cast<int>(c.atoms.size()));

  Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(n_atoms, spec.n_voxels);
  std::vector<int> community_of_voxel(static_cast<std::size_t>(spec.n_voxels), -1);
  for (std::size_t ci = 0; ci < spec.communities.size(); ++ci) {
    const Community& c = spec.communities[ci];
    for (Eigen::Index v = c.begin; v < c.end; ++v) {
      community_of_voxel[static_cast<std::size_t>(v)] = static_cast<int>(ci);
      for (const GeneratingAtom& a : c.atoms)
        coeffs(atom_index.at(atom_key(a)), v) += a.amplitude;
    }
  }

  Eigen::MatrixXd clean = dict * coeffs;

  const double sigma = spec.target_snr_db.has_value()
                           ? sigma_for_target_snr(clean, *spec.target_snr_db)
                           : spec.noise_sigma;

  // Noise, drift and spikes, one independent stream per voxel: draws are
  // standard-normal and scaled afterwards, so sigma only scales the noise.
  Eigen::MatrixXd noisy = clean;
  const Eigen::Index n = spec.n_frames;
  for (Eigen::Index v = 0; v < spec.n_voxels; ++v) {
    if (sigma > 0.0) {
      auto rng = stream_rng(spec.rng_seed, kNoiseStream,
                            static_cast<std::uint64_t>(v));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) noisy(i, v) += sigma * gauss(rng);
    }
    if (spec.nuisance.has_value()) {
      const NuisanceSpec& nuisance = *spec.nuisance;
      auto drift_rng = stream_rng(spec.rng_seed, kDriftStream,
                                  static_cast<std::uint64_t>(v));
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int p = 0; p <= nuisance.drift_order; ++p) {
        const double coef = sigma * gauss(drift_rng);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double x = n > 1 ? 2.0 * i / (n - 1.0) - 1.0 : 0.0;
          noisy(i, v) += coef * legendre(p, x);
        }
      }
      if (nuisance.spike_rate > 0.0) {
        auto spike_rng = stream_rng(spec.rng_seed, kSpikeStream,
                                    static_cast<std::uint64_t>(v));
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double roll = uniform(spike_rng);
          if (roll < nuisance.spike_rate)
            noisy(i, v) += (uniform(spike_rng) < 0.5 ? 5.0 : -5.0) * sigma;
        }
      }
    }
  }

  // Regions: per community, a 3-voxel seed and two 3-voxel targets carved
  // from the front of the range (single voxels for tiny communities).
  std::vector<RegionSpec> seeds, targets;
  std::vector<std::pair<std::string, std::string>> high_pairs, low_pairs;
  for (const Community& c : spec.communities) {
    const Eigen::Index size = c.end - c.begin;
    if (size < 3)
      throw_error(ErrorCode::kInvalidArgument,
                  "community '" + c.name +
                      "' needs at least 3 voxels to derive regions");
    const Eigen::Index chunk = std::min<Eigen::Index>(3, size / 3);
    auto make_region = [&](const std::string& name, Eigen::Index offset) {
      RegionSpec region;
      region.name = name;
      for (Eigen::Index i = 0; i < chunk; ++i)
        region.voxel_indices.push_back(c.begin + offset * chunk + i);
      return region;
    };
    seeds.push_back(make_region("seed_" + c.name, 0));
    targets.push_back(make_region("tgt_" + c.name + "_a", 1));
    targets.push_back(make_region("tgt_" + c.name + "_b", 2));
  }
  for (const RegionSpec& seed : seeds)
    for (const RegionSpec& target : targets) {
      const std::string seed_community = seed.name.substr(5);
      const bool shared =
          target.name.rfind("tgt_" + seed_community + "_", 0) == 0;
      (shared ? high_pairs : low_pairs).emplace_back(seed.name, target.name);
    }

  return PhantomTruth{
      SignalMatrix(std::move(clean), spec.tr_seconds),
      SignalMatrix(std::move(noisy), spec.tr_seconds),
      Dictionary(std::move(dict), 0, std::move(atom_labels)),
      CoefficientMatrix(std::move(coeffs), max_atoms_per_community),
      std::move(community_of_voxel),
      std::move(seeds),
      std::move(targets),
      std::move(high_pairs),
      std::move(low_pairs),
      sigma};
}

double snr_db(const SignalMatrix& clean, const SignalMatrix& noisy) {
  if (clean.n_frames() != noisy.n_frames() ||
      clean.n_voxels() != noisy.n_voxels())
    throw_error(ErrorCode::kDimensionMismatch,
                "clean and noisy matrices differ in shape");
  const double noise_energy = (noisy.data() - clean.data()).squaredNorm();
  if (noise_energy == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(clean.data().squaredNorm() / noise_energy);
}

double sigma_for_target_snr(const Eigen::MatrixXd& clean, double target_db) {
  const double clean_norm = clean.norm();
  if (clean_norm == 0.0)
    throw_error(ErrorCode::kDegenerateInput,
                "cannot target an SNR against an all-zero clean matrix");
  const double entries = static_cast<double>(clean.rows()) *
                         static_cast<double>(clean.cols());
  return clean_norm / (std::sqrt(entries) * std::pow(10.0, target_db / 20.0));
}

PhantomSpec load_phantom_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::kIo, "cannot open for reading: " + path.string());

  std::map<std::string, std::string> scalars;
  std::vector<std::string> community_lines;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw_error(ErrorCode::kParse,
                  path.string() + ": line " + std::to_string(line_no) +
                      " is not key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "community")
      community_lines.push_back(value);
    else if (!scalars.emplace(key, value).second)
      throw_error(ErrorCode::kParse, path.string() + ": duplicate key '" +
                                         key + "'");
  }

  auto parse_number = [&](const std::string& key, const std::string& s) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw_error(ErrorCode::kParse, path.string() + ": key '" + key +
                                         "' has non-numeric value '" + s + "'");
    return value;
  };

  PhantomSpec spec = [&]() {
    const auto it = scalars.find("preset");
    if (it != scalars.end()) {
      if (it->second != "default")
        throw_error(ErrorCode::kParse,
                    path.string() + ": unknown preset '" + it->second + "'");
      return default_phantom_spec();
    }
    const auto pit = scalars.find("paradigm");
    TaskParadigm paradigm = (pit == scalars.end() || pit->second == "default")
                                ? default_motor_paradigm()
                                : load_paradigm_csv(pit->second);
    PhantomSpec fresh(std::move(paradigm));
    fresh.communities.clear();
    fresh.target_snr_db.reset();
    return fresh;
  }();
  if (scalars.count("preset") && scalars.count("paradigm") &&
      scalars.at("paradigm") != "default")
    spec.paradigm = load_paradigm_csv(scalars.at("paradigm"));

  for (const auto& [key, value] : scalars) {
    if (key == "preset" || key == "paradigm") continue;
    if (key == "n_frames") spec.n_frames = static_cast<Eigen::Index>(parse_number(key, value));
    else if (key == "tr") spec.tr_seconds = parse_number(key, value);
    else if (key == "n_voxels") spec.n_voxels = static_cast<Eigen::Index>(parse_number(key, value));
    else if (key == "noise_sigma") {
      spec.noise_sigma = parse_number(key, value);
      spec.target_snr_db.reset();
    } else if (key == "snr_db") {
      spec.target_snr_db = parse_number(key, value);
    } else if (key == "rng_seed") {
      spec.rng_seed = static_cast<std::uint64_t>(parse_number(key, value));
    } else if (key == "drift_order") {
      if (!spec.nuisance) spec.nuisance = NuisanceSpec{};
      spec.nuisance->drift_order = static_cast<int>(parse_number(key, value));
    } else if (key == "spike_rate") {
      if (!spec.nuisance) spec.nuisance = NuisanceSpec{};
      spec.nuisance->spike_rate = parse_number(key, value);
    } else {
      throw_error(ErrorCode::kParse,
                  path.string() + ": unknown key '" + key + "'");
    }
  }
  if (scalars.count("noise_sigma") && scalars.count("snr_db"))
    throw_error(ErrorCode::kParse,
                path.string() + ": noise_sigma and snr_db are mutually exclusive");

  // community=<name>:<begin>:<end>:<atom>[,<atom>...] with atom either
  // task=<condition>:<amplitude> or latent=<id>:<amplitude>.
  if (!community_lines.empty()) spec.communities.clear();
  for (const std::string& text : community_lines) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
      const auto pos = text.find(':', start);
      if (pos == std::string::npos)
        throw_error(ErrorCode::kParse,
                    path.string() + ": community '" + text +
                        "' needs name:begin:end:atoms");
      parts.push_back(text.substr(start, pos - start));
      start = pos + 1;
    }
    parts.push_back(text.substr(start));
    Community community;
    community.name = parts[0];
    community.begin = static_cast<Eigen::Index>(parse_number("community.begin", parts[1]));
    community.end = static_cast<Eigen::Index>(parse_number("community.end", parts[2]));
    std::size_t atom_start = 0;
    const std::string& atoms = parts[3];
    while (atom_start <= atoms.size()) {
      const auto pos = atoms.find(',', atom_start);
      const std::string atom = atoms.substr(atom_start, pos - atom_start);
      const auto eq = atom.find('=');
      const auto colon = atom.rfind(':');
      if (eq == std::string::npos || colon == std::string::npos || colon <= eq)
        throw_error(ErrorCode::kParse,
                    path.string() + ": bad community atom '" + atom + "'");
      GeneratingAtom g;
      const std::string kind = atom.substr(0, eq);
      const std::string source = atom.substr(eq + 1, colon - eq - 1);
      g.amplitude = parse_number("atom amplitude", atom.substr(colon + 1));
      if (kind == "task") {
        g.kind = GeneratingAtom::Kind::kTaskCondition;
        g.condition = source;
      } else if (kind == "latent") {
        g.kind = GeneratingAtom::Kind::kSmoothLatent;
        g.latent_id = static_cast<int>(parse_number("latent id", source));
      } else {
        throw_error(ErrorCode::kParse,
                    path.string() + ": unknown atom kind '" + kind + "'");
      }
      community.atoms.push_back(std::move(g));
      if (pos == std::string::npos) break;
      atom_start = pos + 1;
    }
    spec.communities.push_back(std::move(community));
  }
  return spec;
}

}  // namespace dlsc
