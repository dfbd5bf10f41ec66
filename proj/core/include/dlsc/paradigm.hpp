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

#ifndef DLSC_PARADIGM_HPP
#define DLSC_PARADIGM_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dlsc/dictionary.hpp"
#include "dlsc/errors.hpp"

namespace dlsc {

struct TaskEvent {
  double onset_seconds = 0.0;
  double duration_seconds = 0.0;
};

struct TaskCondition {
  std::string name;
  std::vector<TaskEvent> events;
};

/// Named task conditions with their block onsets/durations, all in seconds.
class TaskParadigm {
 public:
  TaskParadigm(std::vector<TaskCondition> conditions,
               double total_duration_seconds);

  const std::vector<TaskCondition>& conditions() const { return conditions_; }
  double total_duration_seconds() const { return total_duration_; }
  bool has_condition(const std::string& name) const;
  const TaskCondition& condition(const std::string& name) const;

 private:
  std::vector<TaskCondition> conditions_;
  double total_duration_;
};

/// Double-gamma response kernel parameters. The gamma shapes are
/// delay/dispersion with the dispersion as scale, so the positive lobe of
/// the default peaks near 5 s.
struct HrfSpec {
  double peak_delay_seconds = 6.0;
  double undershoot_delay_seconds = 16.0;
  double peak_dispersion = 1.0;
  double undershoot_dispersion = 1.0;
  double undershoot_ratio = 6.0;
  double kernel_length_seconds = 32.0;
  int oversample_factor = 16;

  void validate() const;
};

/// Samples the double-gamma kernel on t = 0, dt, 2*dt, ... up to
/// kernel_length_seconds, rescaled so the maximum sample is 1.
Eigen::VectorXd canonical_hrf(const HrfSpec& spec, double dt);

/// 0/1 block indicator: entry i is 1 iff frame time i*tr falls inside
/// [onset, onset + duration) of any event of the condition.
Eigen::VectorXd boxcar(const TaskParadigm& paradigm, const std::string& condition,
                       Eigen::Index n_frames, double tr);

/// Convolves the condition's boxcar with the response kernel on an
/// oversampled time grid (dt = tr / oversample_factor), then downsamples
/// back to frame rate. Length n_frames.
Eigen::VectorXd stimulus_regressor(const TaskParadigm& paradigm,
                                   const std::string& condition,
                                   Eigen::Index n_frames, double tr,
                                   const HrfSpec& spec);

/// One unit-norm atom per condition, labelled by condition name. A condition
/// whose regressor is identically zero (never occurs within n_frames) is a
/// degenerate-atom error.
Dictionary build_fixed_dictionary(const TaskParadigm& paradigm,
                                  Eigen::Index n_frames, double tr,
                                  const HrfSpec& spec);

/// Built-in motor-task block design: conditions cue, lh, lf, rh, rf, t.
/// Ten 12 s movement blocks (two per effector), each preceded by a 3 s cue,
/// with three 15 s fixation gaps after blocks 3, 6 and 9; 214 s total.
TaskParadigm default_motor_paradigm();

// Paradigm CSV: header line "total=<seconds>", then rows
// condition,onset_seconds,duration_seconds. Condition order is order of
// first appearance.
TaskParadigm load_paradigm_csv(const std::filesystem::path& path);
void save_paradigm_csv(const TaskParadigm& paradigm,
                       const std::filesystem::path& path);

}  // namespace dlsc

#endif  // DLSC_PARADIGM_HPP
