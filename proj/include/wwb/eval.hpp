// Copyright 2026 The wwb Authors.
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

#ifndef WWB_EVAL_HPP_
#define WWB_EVAL_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "wwb/network.hpp"
#include "wwb/training.hpp"

namespace wwb {

// A universal perturbation window is tiled along time with a per-clip
// offset: x'(t,f) = x(t,f) + delta((t + offset) mod W, f).
Eigen::MatrixXd apply_delta(const Eigen::MatrixXd& values,
                            const Eigen::MatrixXd& delta,
                            Eigen::Index offset);

// Fixed evaluation offset for clip i; pure function so accuracies are
// comparable across evaluations.
Eigen::Index delta_offset_for_clip(std::size_t clip_index, Eigen::Index window);

// Fraction of frames whose argmax class equals the label, over all clips,
// with delta applied (pass an empty matrix for the clean accuracy).
double mask_accuracy(const ModelParams& model,
                     const std::vector<LabeledClip>& clips,
                     const Eigen::MatrixXd& delta);

// 10*log10(sum clean^2 / sum delta^2) with delta tiled as applied.
// Returns +infinity for a zero delta.
double snr_db(const std::vector<LabeledClip>& clips,
              const Eigen::MatrixXd& delta);

struct EventSpanIdx {
  Eigen::Index begin = 0, end = 0;  // frame indices, half-open
};

// Wake events from per-frame wake decisions: median smoothing (window 5),
// runs separated by < min_gap merged, runs shorter than min_len dropped.
std::vector<EventSpanIdx> frames_to_events(const std::vector<bool>& wake,
                                           int min_gap_frames,
                                           int min_len_frames);

struct DetPoint {
  double threshold = 0.0;
  double fa_per_hour = 0.0;
  double miss_rate = 0.0;
};

struct DetCurve {
  std::vector<DetPoint> points;  // sorted by threshold
  int total_events = 0;
  double total_hours = 0.0;
};

// Threshold sweep over the smoothed wake-class probability. A predicted
// event counts as a hit if it overlaps a ground-truth wake span.
DetCurve det_curve(const ModelParams& model,
                   const std::vector<LabeledClip>& clips,
                   const std::vector<double>& thresholds,
                   const Eigen::MatrixXd& delta = Eigen::MatrixXd());

// Trapezoidal area of miss_rate over fa/hour in [0, cap], normalized by cap.
double det_auc(const DetCurve& curve, double fa_per_hour_cap);

struct HistoryPoint {
  int step = 0;
  double accuracy = 0.0;
  double snr_db = 0.0;
};

struct AccuracyPoint {
  double epsilon = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_snr_db = 0.0;
};

struct AccuracyCurve {
  std::string label;  // e.g. "pgd/baseline"
  std::vector<AccuracyPoint> points;
};

struct Report {
  std::vector<AccuracyCurve> accuracy_curves;
  std::vector<std::pair<std::string, DetCurve>> det_curves;
  std::vector<std::pair<std::string, std::vector<HistoryPoint>>> histories;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> noise_renderings;
};

// CSVs plus SVG plots with deterministic file names; re-running with the
// same inputs overwrites identically.
void emit_report(const Report& report, const std::string& out_dir);

}  // namespace wwb

#endif  // WWB_EVAL_HPP_
