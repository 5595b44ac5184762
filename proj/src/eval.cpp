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

#include "wwb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "wwb/svg.hpp"

namespace wwb {

Eigen::MatrixXd apply_delta(const Eigen::MatrixXd& values,
                            const Eigen::MatrixXd& delta,
                            Eigen::Index offset) {
  if (delta.size() == 0) return values;
  if (delta.cols() != values.cols())
    throw std::runtime_error("eval: delta has " + std::to_string(delta.cols()) +
                             " channels, clip has " +
                             std::to_string(values.cols()));
  Eigen::MatrixXd out = values;
  const Eigen::Index W = delta.rows();
  for (Eigen::Index t = 0; t < out.rows(); ++t)
    out.row(t) += delta.row((t + offset) % W);
  return out;
}

Eigen::Index delta_offset_for_clip(std::size_t clip_index,
                                   Eigen::Index window) {
  std::uint64_t z = clip_index + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<Eigen::Index>(z % static_cast<std::uint64_t>(window));
}

double mask_accuracy(const ModelParams& model,
                     const std::vector<LabeledClip>& clips,
                     const Eigen::MatrixXd& delta) {
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    MelSpectrogram spec = clips[i].spec;
    if (delta.size() > 0)
      spec.values = apply_delta(spec.values, delta,
                                delta_offset_for_clip(i, delta.rows()));
    const Eigen::MatrixXd logits =
        forward(spec, model, RunMode::kEval, RngStream(0));
    for (Eigen::Index t = 0; t < logits.rows(); ++t) {
      Eigen::Index am;
      logits.row(t).maxCoeff(&am);
      if (static_cast<int>(am) == clips[i].labels[static_cast<std::size_t>(t)])
        ++correct;
      ++total;
    }
  }
  if (total == 0) throw std::runtime_error("eval: no frames to score");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double snr_db(const std::vector<LabeledClip>& clips,
              const Eigen::MatrixXd& delta) {
  double clean_pow = 0.0, noise_pow = 0.0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const auto& v = clips[i].spec.values;
    clean_pow += v.squaredNorm();
    if (delta.size() > 0) {
      const Eigen::Index W = delta.rows();
      const Eigen::Index off = delta_offset_for_clip(i, W);
      for (Eigen::Index t = 0; t < v.rows(); ++t)
        noise_pow += delta.row((t + off) % W).squaredNorm();
    }
  }
  if (noise_pow == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(clean_pow / noise_pow);
}

std::vector<EventSpanIdx> frames_to_events(const std::vector<bool>& wake,
                                           int min_gap_frames,
                                           int min_len_frames) {
  const auto n = static_cast<Eigen::Index>(wake.size());
  // Median smoothing, window 5 (majority of the 5 around each frame).
  std::vector<bool> sm(wake.size());
  for (Eigen::Index t = 0; t < n; ++t) {
    int cnt = 0, tot = 0;
    for (Eigen::Index u = std::max<Eigen::Index>(0, t - 2);
         u <= std::min(n - 1, t + 2); ++u) {
      cnt += wake[static_cast<std::size_t>(u)] ? 1 : 0;
      ++tot;
    }
    sm[static_cast<std::size_t>(t)] = 2 * cnt > tot;
  }

  std::vector<EventSpanIdx> runs;
  for (Eigen::Index t = 0; t < n;) {
    if (!sm[static_cast<std::size_t>(t)]) {
      ++t;
      continue;
    }
    Eigen::Index e = t;
    while (e < n && sm[static_cast<std::size_t>(e)]) ++e;
    runs.push_back({t, e});
    t = e;
  }
  // Merge runs separated by < min_gap frames.
  std::vector<EventSpanIdx> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && r.begin - merged.back().end < min_gap_frames)
      merged.back().end = r.end;
    else
      merged.push_back(r);
  }
  // Drop remaining short runs.
  std::vector<EventSpanIdx> events;
  for (const auto& r : merged)
    if (r.end - r.begin >= min_len_frames) events.push_back(r);
  return events;
}

namespace {

std::vector<EventSpanIdx> label_events(const std::vector<int>& labels) {
  std::vector<EventSpanIdx> spans;
  const auto n = static_cast<Eigen::Index>(labels.size());
  for (Eigen::Index t = 0; t < n;) {
    if (labels[static_cast<std::size_t>(t)] != kClassWakeWord) {
      ++t;
      continue;
    }
    Eigen::Index e = t;
    while (e < n && labels[static_cast<std::size_t>(e)] == kClassWakeWord) ++e;
    spans.push_back({t, e});
    t = e;
  }
  return spans;
}

bool overlaps(const EventSpanIdx& a, const EventSpanIdx& b) {
  return a.begin < b.end && b.begin < a.end;
}

}  // namespace

DetCurve det_curve(const ModelParams& model,
                   const std::vector<LabeledClip>& clips,
                   const std::vector<double>& thresholds,
                   const Eigen::MatrixXd& delta) {
  constexpr int kMinGap = 10;
  constexpr int kMinLen = 5;

  // Per-clip smoothed wake probability and ground truth.
  std::vector<std::vector<double>> scores;
  std::vector<std::vector<EventSpanIdx>> truths;
  int total_events = 0;
  double total_hours = 0.0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    MelSpectrogram spec = clips[i].spec;
    if (delta.size() > 0)
      spec.values = apply_delta(spec.values, delta,
                                delta_offset_for_clip(i, delta.rows()));
    const Eigen::MatrixXd logits =
        forward(spec, model, RunMode::kEval, RngStream(0));
    std::vector<double> p(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index t = 0; t < logits.rows(); ++t) {
      const double m = logits.row(t).maxCoeff();
      const Eigen::Vector3d e = (logits.row(t).array() - m).exp();
      p[static_cast<std::size_t>(t)] = e(kClassWakeWord) / e.sum();
    }
    // Median smoothing window 5.
    std::vector<double> ps(p.size());
    const auto n = static_cast<Eigen::Index>(p.size());
    for (Eigen::Index t = 0; t < n; ++t) {
      std::vector<double> win;
      for (Eigen::Index u = std::max<Eigen::Index>(0, t - 2);
           u <= std::min(n - 1, t + 2); ++u)
        win.push_back(p[static_cast<std::size_t>(u)]);
      std::sort(win.begin(), win.end());
      ps[static_cast<std::size_t>(t)] = win[win.size() / 2];
    }
    scores.push_back(std::move(ps));
    auto truth = label_events(clips[i].labels);
    total_events += static_cast<int>(truth.size());
    truths.push_back(std::move(truth));
    total_hours += static_cast<double>(clips[i].spec.frames()) *
                   clips[i].spec.frame_hop_s / 3600.0;
  }
  if (total_events == 0)
    throw std::runtime_error("det_curve: no ground-truth wake events");

  DetCurve curve;
  curve.total_events = total_events;
  curve.total_hours = total_hours;
  std::vector<double> sorted_thr = thresholds;
  std::sort(sorted_thr.begin(), sorted_thr.end());
  for (double thr : sorted_thr) {
    int hits = 0, false_alarms = 0;
    for (std::size_t i = 0; i < clips.size(); ++i) {
      std::vector<bool> wake(scores[i].size());
      for (std::size_t t = 0; t < wake.size(); ++t)
        wake[t] = scores[i][t] >= thr;
      const auto events = frames_to_events(wake, kMinGap, kMinLen);
      std::vector<bool> truth_hit(truths[i].size(), false);
      for (const auto& ev : events) {
        bool matched = false;
        for (std::size_t k = 0; k < truths[i].size(); ++k)
          if (overlaps(ev, truths[i][k])) {
            truth_hit[k] = true;
            matched = true;
          }
        if (!matched) ++false_alarms;
      }
      for (bool h : truth_hit) hits += h ? 1 : 0;
    }
    DetPoint pt;
    pt.threshold = thr;
    pt.miss_rate = 1.0 - static_cast<double>(hits) / total_events;
    pt.fa_per_hour = static_cast<double>(false_alarms) / total_hours;
    curve.points.push_back(pt);
  }
  return curve;
}

double det_auc(const DetCurve& curve, double fa_per_hour_cap) {
  if (curve.points.size() < 2)
    throw std::runtime_error("det_auc: need at least 2 points");
  if (!(fa_per_hour_cap > 0.0))
    throw std::runtime_error("det_auc: cap must be positive");
  // Piecewise-linear miss(fa), constant extension outside the observed range.
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : curve.points) pts.push_back({p.fa_per_hour, p.miss_rate});
  std::sort(pts.begin(), pts.end());

  auto miss_at = [&pts](double fa) {
    if (fa <= pts.front().first) return pts.front().second;
    if (fa >= pts.back().first) return pts.back().second;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (fa <= pts[i].first) {
        const double x0 = pts[i - 1].first, x1 = pts[i].first;
        const double y0 = pts[i - 1].second, y1 = pts[i].second;
        if (x1 == x0) return std::min(y0, y1);
        return y0 + (y1 - y0) * (fa - x0) / (x1 - x0);
      }
    return pts.back().second;
  };

  // Integration nodes: interval ends plus every interior point.
  std::vector<double> nodes = {0.0, fa_per_hour_cap};
  for (const auto& [x, y] : pts)
    if (x > 0.0 && x < fa_per_hour_cap) nodes.push_back(x);
  std::sort(nodes.begin(), nodes.end());
  double area = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double a = nodes[i - 1], b = nodes[i];
    area += 0.5 * (miss_at(a) + miss_at(b)) * (b - a);
  }
  return area / fa_per_hour_cap;
}

void emit_report(const Report& report, const std::string& out_dir) {
  if (report.accuracy_curves.empty() && report.det_curves.empty() &&
      report.histories.empty() && report.noise_renderings.empty())
    throw std::runtime_error("report: nothing to emit");
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);

  if (!report.accuracy_curves.empty()) {
    std::ofstream csv(dir / "accuracy_vs_eps.csv");
    if (!csv) throw std::runtime_error("report: cannot write to " + out_dir);
    csv << "label,epsilon,mean_accuracy,std_accuracy,mean_snr_db\n";
    csv.precision(12);
    std::vector<SvgSeries> series;
    for (const auto& c : report.accuracy_curves) {
      SvgSeries s;
      s.label = c.label;
      for (const auto& p : c.points) {
        csv << c.label << "," << p.epsilon << "," << p.mean_accuracy << ","
            << p.std_accuracy << "," << p.mean_snr_db << "\n";
        s.points.push_back({p.epsilon, p.mean_accuracy});
      }
      series.push_back(std::move(s));
    }
    write_line_plot((dir / "accuracy_vs_eps.svg").string(),
                    "Mean test mask accuracy of the best noise", "epsilon",
                    "mask accuracy", series);
  }

  if (!report.det_curves.empty()) {
    std::ofstream csv(dir / "det_points.csv");
    csv << "label,threshold,fa_per_hour,miss_rate\n";
    csv.precision(12);
    std::vector<SvgSeries> series;
    for (const auto& [label, curve] : report.det_curves) {
      SvgSeries s;
      s.label = label;
      for (const auto& p : curve.points) {
        csv << label << "," << p.threshold << "," << p.fa_per_hour << ","
            << p.miss_rate << "\n";
        s.points.push_back({p.fa_per_hour, p.miss_rate});
      }
      std::sort(s.points.begin(), s.points.end());
      series.push_back(std::move(s));
    }
    write_line_plot((dir / "det_curves.svg").string(),
                    "Detection error tradeoff", "false alarms per hour",
                    "miss rate", series);
  }

  for (const auto& [name, history] : report.histories) {
    std::ofstream csv(dir / ("history_" + name + ".csv"));
    csv << "step,accuracy,snr_db\n";
    csv.precision(12);
    for (const auto& p : history)
      csv << p.step << "," << p.accuracy << "," << p.snr_db << "\n";
  }

  for (const auto& [name, delta] : report.noise_renderings)
    write_heatmap((dir / ("noise_" + name + ".svg")).string(), name, delta);
}

}  // namespace wwb
