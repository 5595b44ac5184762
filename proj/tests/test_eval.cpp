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

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "wwb/eval.hpp"

namespace {

// A model whose logits are constant: output weights zero, gates shut,
// bias selects the winning class.
wwb::ModelParams constant_model(int winner) {
  wwb::ModelConfig cfg;
  cfg.n_mels = 4;
  cfg.prenet_hidden = 4;
  cfg.highway_width = 4;
  cfg.n_feature_blocks = 1;
  cfg.bottleneck_width = 1;
  cfg.context_left = 1;
  cfg.context_right = 1;
  cfg.n_classifier_blocks = 1;
  wwb::ModelParams p = wwb::init_params(cfg, nullptr, wwb::RngStream(1));
  p.output.W.setZero();
  p.output.b.setConstant(0.0);
  p.output.b(winner) = 5.0;
  return p;
}

std::vector<wwb::LabeledClip> clips_with_labels(
    const std::vector<std::vector<int>>& labels) {
  std::vector<wwb::LabeledClip> clips;
  for (const auto& l : labels) {
    wwb::LabeledClip c;
    c.labels = l;
    c.spec.n_mels = 4;
    c.spec.values = Eigen::MatrixXd::Constant(
        static_cast<Eigen::Index>(l.size()), 4, 0.5);
    clips.push_back(std::move(c));
  }
  return clips;
}

}  // namespace

TEST_CASE("delta tiling wraps modulo the window") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(5, 2);
  Eigen::MatrixXd d(2, 2);
  d << 1, 2, 3, 4;
  const Eigen::MatrixXd y = wwb::apply_delta(x, d, 1);
  // Row t picks delta row (t + 1) mod 2.
  CHECK(y(0, 0) == 3.0);
  CHECK(y(1, 0) == 1.0);
  CHECK(y(2, 0) == 3.0);
  CHECK(y(4, 1) == 4.0);
  CHECK_THROWS_AS(wwb::apply_delta(x, Eigen::MatrixXd::Zero(2, 3), 0),
                  std::runtime_error);
}

TEST_CASE("evaluation offsets are pure in the clip index") {
  CHECK(wwb::delta_offset_for_clip(3, 100) == wwb::delta_offset_for_clip(3, 100));
  CHECK(wwb::delta_offset_for_clip(3, 100) < 100);
}

TEST_CASE("mask accuracy of matching and balanced constant predictors") {
  const auto model = constant_model(wwb::kClassNoSpeech);
  // All labels equal the constant prediction: accuracy exactly 1.
  const auto perfect = clips_with_labels({{1, 1, 1, 1, 1, 1}});
  CHECK(wwb::mask_accuracy(model, perfect, Eigen::MatrixXd()) == 1.0);
  // Exactly balanced labels: accuracy exactly 1/3.
  const auto balanced = clips_with_labels({{0, 1, 2, 0, 1, 2}});
  CHECK(wwb::mask_accuracy(model, balanced, Eigen::MatrixXd()) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("snr reports the exact power ratio") {
  auto clips = clips_with_labels({{1, 1, 1, 1}});
  clips[0].spec.values.setConstant(1.0);
  // Tiled delta rows all 0.1: power ratio (1 / 0.01) = 100 -> 20 dB.
  const Eigen::MatrixXd d = Eigen::MatrixXd::Constant(2, 4, 0.1);
  CHECK(wwb::snr_db(clips, d) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(std::isinf(wwb::snr_db(clips, Eigen::MatrixXd::Zero(2, 4))));
}

TEST_CASE("eventization merges close runs and drops short ones") {
  // 30 frames; raw wake decisions with a 2-frame gap and an isolated blip.
  std::vector<bool> wake(30, false);
  for (int t = 5; t < 12; ++t) wake[static_cast<std::size_t>(t)] = true;
  for (int t = 14; t < 20; ++t) wake[static_cast<std::size_t>(t)] = true;
  wake[27] = true;  // too short to survive smoothing
  const auto events = wwb::frames_to_events(wake, 3, 4);
  REQUIRE(events.size() == 1);
  CHECK(events[0].begin >= 4);
  CHECK(events[0].end <= 21);
  CHECK(events[0].end - events[0].begin >= 10);
}

TEST_CASE("short runs below the minimum length are dropped") {
  std::vector<bool> wake(40, false);
  for (int t = 10; t < 14; ++t) wake[static_cast<std::size_t>(t)] = true;
  CHECK(wwb::frames_to_events(wake, 3, 10).empty());
  CHECK(wwb::frames_to_events(wake, 3, 3).size() == 1);
}

TEST_CASE("det endpoints behave as forced decisions") {
  const auto model = constant_model(wwb::kClassWakeWord);
  // One clip with a wake span in the middle.
  std::vector<int> labels(200, 1);
  for (int t = 80; t < 120; ++t) labels[static_cast<std::size_t>(t)] = 2;
  const auto clips = clips_with_labels({labels});

  const auto curve = wwb::det_curve(model, clips, {0.0, 1.0});
  REQUIRE(curve.points.size() == 2);
  // Threshold 0: everything fires, the truth is covered, no misses.
  CHECK(curve.points[0].miss_rate == 0.0);
  // Threshold 1: softmax probabilities are strictly below 1, nothing
  // fires, every event is missed and there are no false alarms.
  CHECK(curve.points[1].miss_rate == 1.0);
  CHECK(curve.points[1].fa_per_hour == 0.0);
}

TEST_CASE("det curve refuses data without any wake events") {
  const auto model = constant_model(wwb::kClassNoSpeech);
  const auto clips = clips_with_labels({{1, 1, 1, 1, 1, 1, 1, 1}});
  CHECK_THROWS_AS(wwb::det_curve(model, clips, {0.5}), std::runtime_error);
}

TEST_CASE("det auc is zero for a perfect detector and normalized by the cap") {
  wwb::DetCurve perfect;
  perfect.points = {{0.0, 50.0, 0.0}, {0.5, 10.0, 0.0}, {1.0, 0.0, 0.0}};
  CHECK(wwb::det_auc(perfect, 50.0) == 0.0);

  wwb::DetCurve flat;  // miss 0.5 across the whole fa range
  flat.points = {{0.0, 100.0, 0.5}, {1.0, 0.0, 0.5}};
  CHECK(wwb::det_auc(flat, 100.0) == doctest::Approx(0.5).epsilon(1e-12));
  // Constant extension beyond the last point.
  wwb::DetCurve narrow;
  narrow.points = {{0.0, 10.0, 0.25}, {1.0, 0.0, 0.25}};
  CHECK(wwb::det_auc(narrow, 100.0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("report emission writes the expected artifact set") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wwb_report_test";
  fs::remove_all(dir);

  wwb::Report report;
  wwb::AccuracyCurve curve;
  curve.label = "pgd_baseline";
  curve.points = {{0.01, 0.8, 0.02, 25.0}, {0.04, 0.6, 0.05, 13.0}};
  report.accuracy_curves.push_back(curve);
  report.histories.emplace_back(
      "pgd_baseline",
      std::vector<wwb::HistoryPoint>{{25, 0.9, 30.0}, {50, 0.7, 28.0}});
  report.noise_renderings.emplace_back("pgd_baseline",
                                       Eigen::MatrixXd::Random(10, 8));
  wwb::emit_report(report, dir.string());
  CHECK(fs::exists(dir / "accuracy_vs_eps.csv"));
  CHECK(fs::exists(dir / "accuracy_vs_eps.svg"));
  CHECK(fs::exists(dir / "history_pgd_baseline.csv"));
  CHECK(fs::exists(dir / "noise_pgd_baseline.svg"));
  fs::remove_all(dir);

  CHECK_THROWS_AS(wwb::emit_report(wwb::Report{}, dir.string()),
                  std::runtime_error);
}
