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

#include "dlsc/paradigm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "dlsc/matrix_io.hpp"

namespace dlsc {

namespace {

constexpr double kEventEndSlack = 1e-9;

/// Gamma probability density with shape k and scale theta, evaluated in log
/// space to stay stable for large shapes. Defined as 0 at t <= 0.
double gamma_pdf(double t, double shape, double scale) {
  if (t <= 0.0) return 0.0;
  return std::exp((shape - 1.0) * std::log(t) - t / scale -
                  std::lgamma(shape) - shape * std::log(scale));
}

bool in_any_event(const TaskCondition& cond, double t) {
  for (const TaskEvent& e : cond.events)
    if (t >= e.onset_seconds && t < e.onset_seconds + e.duration_seconds)
      return true;
  return false;
}

}  // namespace

TaskParadigm::TaskParadigm(std::vector<TaskCondition> conditions,
                           double total_duration_seconds)
    : conditions_(std::move(conditions)), total_duration_(total_duration_seconds) {
  if (!(total_duration_ > 0.0))
    throw_error(ErrorCode::kInvalidArgument,
                "paradigm total duration must be positive");
  std::set<std::string> seen;
  for (const TaskCondition& c : conditions_) {
    if (c.name.empty())
      throw_error(ErrorCode::kInvalidArgument, "condition name must be non-empty");
    if (!seen.insert(c.name).second)
      throw_error(ErrorCode::kInvalidArgument,
                  "duplicate condition name '" + c.name + "'");
    for (const TaskEvent& e : c.events) {
      if (e.onset_seconds < 0.0)
        throw_error(ErrorCode::kInvalidArgument,
                    "condition '" + c.name + "' has an event with negative onset");
      if (!(e.duration_seconds > 0.0))
        throw_error(ErrorCode::kInvalidArgument,
                    "condition '" + c.name + "' has an event with non-positive duration");
      if (e.onset_seconds + e.duration_seconds > total_duration_ + kEventEndSlack)
        throw_error(ErrorCode::kInvalidArgument,
                    "condition '" + c.name + "' has an event ending at " +
                        std::to_string(e.onset_seconds + e.duration_seconds) +
                        " s, past the total duration " +
                        std::to_string(total_duration_) + " s");
    }
  }
}

bool TaskParadigm::has_condition(const std::string& name) const {
  return std::any_of(conditions_.begin(), conditions_.end(),
                     [&](const TaskCondition& c) { return c.name == name; });
}

const TaskCondition& TaskParadigm::condition(const std::string& name) const {
  for (const TaskCondition& c : conditions_)
    if (c.name == name) return c;
  throw_error(ErrorCode::kInvalidArgument, "unknown condition '" + name + "'");
}

void HrfSpec::validate() const {
  if (!(peak_delay_seconds > 0.0) || !(undershoot_delay_seconds > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "HRF delays must be positive");
  if (!(peak_dispersion > 0.0) || !(undershoot_dispersion > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "HRF dispersions must be positive");
  if (!(undershoot_ratio > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "HRF undershoot ratio must be positive");
  if (!(kernel_length_seconds > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "HRF kernel length must be positive");
  if (oversample_factor < 1)
    throw_error(ErrorCode::kInvalidArgument, "HRF oversample factor must be >= 1");
}

Eigen::VectorXd canonical_hrf(const HrfSpec& spec, double dt) {
  spec.validate();
  if (!(dt > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "HRF sampling step must be positive");
  if (dt > spec.kernel_length_seconds)
    throw_error(ErrorCode::kInvalidArgument,
                "HRF sampling step exceeds the kernel length");
  const auto n = static_cast<Eigen::Index>(
                     std::floor(spec.kernel_length_seconds / dt + 1e-12)) + 1;
  const double peak_shape = spec.peak_delay_seconds / spec.peak_dispersion;
  const double under_shape =
      spec.undershoot_delay_seconds / spec.undershoot_dispersion;
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    h[i] = gamma_pdf(t, peak_shape, spec.peak_dispersion) -
           gamma_pdf(t, under_shape, spec.undershoot_dispersion) /
               spec.undershoot_ratio;
  }
  const double peak = h.maxCoeff();
  if (!(peak > 0.0))
    throw_error(ErrorCode::kDegenerateInput,
                "HRF kernel has no positive lobe on the sampled grid");
  return h / peak;
}

Eigen::VectorXd boxcar(const TaskParadigm& paradigm, const std::string& condition,
                       Eigen::Index n_frames, double tr) {
  if (n_frames < 1)
    throw_error(ErrorCode::kInvalidArgument, "n_frames must be >= 1");
  if (!(tr > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "tr must be positive");
  const TaskCondition& cond = paradigm.condition(condition);
  Eigen::VectorXd box = Eigen::VectorXd::Zero(n_frames);
  for (Eigen::Index i = 0; i < n_frames; ++i)
    if (in_any_event(cond, static_cast<double>(i) * tr)) box[i] = 1.0;
  return box;
}

Eigen::VectorXd stimulus_regressor(const TaskParadigm& paradigm,
                                   const std::string& condition,
                                   Eigen::Index n_frames, double tr,
                                   const HrfSpec& spec) {
  spec.validate();
  if (n_frames < 1)
    throw_error(ErrorCode::kInvalidArgument, "n_frames must be >= 1");
  if (!(tr > 0.0))
    throw_error(ErrorCode::kInvalidArgument, "tr must be positive");
  const TaskCondition& cond = paradigm.condition(condition);
  const int os = spec.oversample_factor;
  const double dt = tr / os;
  const Eigen::Index n_fine = n_frames * os;

  Eigen::VectorXd box_fine = Eigen::VectorXd::Zero(n_fine);
  for (Eigen::Index j = 0; j < n_fine; ++j)
    if (in_any_event(cond, static_cast<double>(j) * dt)) box_fine[j] = 1.0;

  const Eigen::VectorXd kernel = canonical_hrf(spec, dt);

  // Linear convolution truncated to the run length, scaled by dt so the
  // result approximates the continuous-time convolution independent of the
  // oversampling factor.
  Eigen::VectorXd conv = Eigen::VectorXd::Zero(n_fine);
  for (Eigen::Index j = 0; j < n_fine; ++j) {
    if (box_fine[j] == 0.0) continue;
    const Eigen::Index last = std::min<Eigen::Index>(kernel.size(), n_fine - j);
    for (Eigen::Index k = 0; k < last; ++k) conv[j + k] += kernel[k];
  }
  conv *= dt;

  Eigen::VectorXd regressor(n_frames);
  for (Eigen::Index i = 0; i < n_frames; ++i) regressor[i] = conv[i * os];
  return regressor;
}

Dictionary build_fixed_dictionary(const TaskParadigm& paradigm,
                                  Eigen::Index n_frames, double tr,
                                  const HrfSpec& spec) {
  const auto& conditions = paradigm.conditions();
  if (conditions.empty())
    throw_error(ErrorCode::kInvalidArgument,
                "paradigm has no conditions to build fixed atoms from");
  Eigen::MatrixXd atoms(n_frames, static_cast<Eigen::Index>(conditions.size()));
  std::vector<std::string> labels;
  labels.reserve(conditions.size());
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    Eigen::VectorXd reg =
        stimulus_regressor(paradigm, conditions[c].name, n_frames, tr, spec);
    const double norm = reg.norm();
    if (norm == 0.0)
      throw_error(ErrorCode::kDegenerateInput,
                  "condition '" + conditions[c].name +
                      "' produces an all-zero regressor within the run");
    atoms.col(static_cast<Eigen::Index>(c)) = reg / norm;
    labels.push_back(conditions[c].name);
  }
  return Dictionary(std::move(atoms), atoms.cols(), std::move(labels));
}

TaskParadigm default_motor_paradigm() {
  // Ten cue+movement blocks packed back-to-back from t = 0, effector order
  // lh, lf, rh, rf, t repeated twice, with a 15 s fixation gap after
  // movement blocks 3, 6 and 9. The trailing time up to 214 s is rest.
  const std::vector<std::string> effector_order = {"lh", "lf", "rh", "rf", "t",
                                                   "lh", "lf", "rh", "rf", "t"};
  const double cue_len = 3.0, move_len = 12.0, fix_len = 15.0;
  std::vector<TaskCondition> conds = {
      {"cue", {}}, {"lh", {}}, {"lf", {}}, {"rh", {}}, {"rf", {}}, {"t", {}}};
  auto cond = [&](const std::string& name) -> TaskCondition& {
    for (auto& c : conds)
      if (c.name == name) return c;
    throw_error(ErrorCode::kInvalidArgument, "unreachable");
  };
  double t = 0.0;
  for (std::size_t block = 0; block < effector_order.size(); ++block) {
    cond("cue").events.push_back({t, cue_len});
    t += cue_len;
    cond(effector_order[block]).events.push_back({t, move_len});
    t += move_len;
    if (block == 2 || block == 5 || block == 8) t += fix_len;
  }
  return TaskParadigm(std::move(conds), 214.0);
}

TaskParadigm load_paradigm_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::kIo, "cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw_error(ErrorCode::kParse, path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("total=", 0) != 0)
    throw_error(ErrorCode::kParse,
                path.string() + ": malformed header, expected 'total=<seconds>'");
  double total = 0.0;
  {
    const std::string v = line.substr(6);
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), total);
    if (ec != std::errc() || ptr != v.data() + v.size())
      throw_error(ErrorCode::kParse,
                  path.string() + ": malformed total duration '" + v + "'");
  }
  std::vector<TaskCondition> conds;
  auto find_or_add = [&](const std::string& name) -> TaskCondition& {
    for (auto& c : conds)
      if (c.name == name) return c;
    conds.push_back({name, {}});
    return conds.back();
  };
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;
    ++row;
    const auto comma1 = line.find(',');
    const auto comma2 = comma1 == std::string::npos
                            ? std::string::npos
                            : line.find(',', comma1 + 1);
    if (comma1 == std::string::npos || comma2 == std::string::npos)
      throw_error(ErrorCode::kParse,
                  path.string() + ": row " + std::to_string(row) +
                      " needs condition,onset,duration");
    const std::string name = line.substr(0, comma1);
    auto parse_field = [&](std::size_t from, std::size_t to) {
      double value = 0.0;
      auto [ptr, ec] =
          std::from_chars(line.data() + from, line.data() + to, value);
      if (ec != std::errc() || ptr != line.data() + to)
        throw_error(ErrorCode::kParse,
                    path.string() + ": non-numeric field at row " +
                        std::to_string(row));
      return value;
    };
    const double onset = parse_field(comma1 + 1, comma2);
    const double duration = parse_field(comma2 + 1, line.size());
    find_or_add(name).events.push_back({onset, duration});
  }
  return TaskParadigm(std::move(conds), total);
}

void save_paradigm_csv(const TaskParadigm& paradigm,
                       const std::filesystem::path& path) {
  atomic_write_file(path, [&](std::ostream& out) {
    out << "total=" << format_double(paradigm.total_duration_seconds()) << '\n';
    for (const TaskCondition& c : paradigm.conditions())
      for (const TaskEvent& e : c.events)
        out << c.name << ',' << format_double(e.onset_seconds) << ','
            << format_double(e.duration_seconds) << '\n';
  });
}

}  // namespace dlsc
