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
#include <fstream>

#include "wwb/network.hpp"
#include "wwb/training.hpp"

namespace {

wwb::SynthConfig small_synth() {
  wwb::SynthConfig c;
  c.minutes = 1.0;
  c.frontend.n_mels = 16;
  return c;
}

}  // namespace

TEST_CASE("cross entropy of uniform logits is ln 3") {
  const Eigen::MatrixXd logits = Eigen::MatrixXd::Constant(6, 3, 0.7);
  std::vector<int> labels = {0, 1, 2, 0, 1, 2};
  CHECK(wwb::cross_entropy(logits, labels) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy gradient is (softmax - onehot) scaled") {
  wwb::RngStream rng(3);
  Eigen::MatrixXd logits(4, 3);
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    logits.data()[i] = rng.normal();
  std::vector<int> labels = {2, 0, 1, 2};
  const std::array<double, 3> w = {1.0, 2.0, 0.5};

  Eigen::MatrixXd g;
  wwb::cross_entropy_grad(logits, labels, w, &g);

  const double h = 1e-6;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    Eigen::MatrixXd lp = logits, lm = logits;
    lp.data()[i] += h;
    lm.data()[i] -= h;
    const double fd =
        (wwb::cross_entropy(lp, labels, w) - wwb::cross_entropy(lm, labels, w)) /
        (2.0 * h);
    CHECK(g.data()[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("out-of-range labels are rejected") {
  const Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(2, 3);
  std::vector<int> labels = {0, 3};
  CHECK_THROWS_AS(wwb::cross_entropy(logits, labels), std::runtime_error);
}

TEST_CASE("synthesis is deterministic in the seed") {
  const auto a = wwb::synth_dataset(small_synth(), 11);
  const auto b = wwb::synth_dataset(small_synth(), 11);
  const auto c = wwb::synth_dataset(small_synth(), 12);
  REQUIRE(a.size() == b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].spec.values - b[i].spec.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a[i].labels == b[i].labels);
    if ((a[i].spec.values - c[i].spec.values).cwiseAbs().maxCoeff() > 0.0)
      differs = true;
  }
  CHECK(differs);
}

TEST_CASE("synthesis hits the requested positive rate roughly") {
  wwb::SynthConfig cfg = small_synth();
  cfg.minutes = 4.0;
  const auto data = wwb::synth_dataset(cfg, 5);
  std::size_t wake = 0, total = 0;
  for (const auto& clip : data)
    for (int l : clip.labels) {
      wake += (l == wwb::kClassWakeWord);
      ++total;
    }
  const double rate = static_cast<double>(wake) / static_cast<double>(total);
  CHECK(rate > 0.5 * cfg.positive_rate);
  CHECK(rate < 1.5 * cfg.positive_rate);
}

TEST_CASE("every class appears in a moderate dataset") {
  const auto data = wwb::synth_dataset(small_synth(), 17);
  std::array<std::size_t, 3> counts = {0, 0, 0};
  for (const auto& clip : data)
    for (int l : clip.labels) ++counts[static_cast<std::size_t>(l)];
  CHECK(counts[0] > 0);
  CHECK(counts[1] > 0);
  CHECK(counts[2] > 0);
}

TEST_CASE("manifest round-trip preserves labels and geometry") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wwb_manifest_test";
  fs::create_directories(dir);
  wwb::SynthConfig cfg = small_synth();
  cfg.minutes = 0.2;
  const auto waves = wwb::synth_dataset_waves(cfg, 23);
  const auto manifest = (dir / "manifest.csv").string();
  wwb::write_manifest(dir.string(), manifest, waves);
  const auto loaded = wwb::load_manifest(manifest, cfg.frontend);
  REQUIRE(loaded.size() == waves.size());
  for (std::size_t i = 0; i < waves.size(); ++i) {
    CHECK(loaded[i].labels == waves[i].clip.labels);
    REQUIRE(loaded[i].spec.values.rows() == waves[i].clip.spec.values.rows());
    // 16-bit quantization perturbs the features slightly.
    CHECK((loaded[i].spec.values - waves[i].clip.spec.values)
              .cwiseAbs()
              .maxCoeff() < 0.15);
  }
  fs::remove_all(dir);
}

TEST_CASE("manifests with mismatched label lengths are rejected") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wwb_manifest_bad";
  fs::create_directories(dir);
  wwb::SynthConfig cfg = small_synth();
  cfg.minutes = 0.1;
  const auto waves = wwb::synth_dataset_waves(cfg, 29);
  const auto manifest = (dir / "manifest.csv").string();
  wwb::write_manifest(dir.string(), manifest, waves);
  {
    std::ofstream os(dir / "clip0.labels", std::ios::trunc);
    os << "1\n1\n";  // far fewer labels than frames
  }
  CHECK_THROWS_AS(wwb::load_manifest(manifest, cfg.frontend),
                  std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("training reduces the loss and is seed-deterministic") {
  wwb::SynthConfig sc = small_synth();
  sc.minutes = 0.8;
  const auto data = wwb::synth_dataset(sc, 31);
  std::vector<wwb::LabeledClip> train_set(data.begin(), data.end() - 4);
  std::vector<wwb::LabeledClip> val_set(data.end() - 4, data.end());

  wwb::ModelConfig mc;
  mc.n_mels = 16;
  mc.prenet_hidden = 16;
  mc.highway_width = 16;
  mc.n_feature_blocks = 1;
  mc.bottleneck_width = 2;
  mc.n_classifier_blocks = 1;
  const auto init = wwb::init_params(mc, nullptr, wwb::RngStream(7));

  wwb::TrainConfig tc;
  tc.epochs = 3;
  tc.seed = 99;
  const auto a = wwb::train(init, train_set, val_set, tc);
  REQUIRE(a.history.size() == 3);
  CHECK(a.history.back().train_loss < a.history.front().train_loss);

  const auto b = wwb::train(init, train_set, val_set, tc);
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    CHECK(a.history[e].train_loss == b.history[e].train_loss);
    CHECK(a.history[e].val_accuracy == b.history[e].val_accuracy);
  }
}

TEST_CASE("zero learning rate leaves the parameters fixed") {
  wwb::SynthConfig sc = small_synth();
  sc.minutes = 0.2;
  const auto data = wwb::synth_dataset(sc, 37);
  std::vector<wwb::LabeledClip> train_set(data.begin(), data.end() - 1);
  std::vector<wwb::LabeledClip> val_set(data.end() - 1, data.end());

  wwb::ModelConfig mc;
  mc.n_mels = 16;
  mc.prenet_hidden = 8;
  mc.highway_width = 8;
  mc.n_feature_blocks = 1;
  mc.bottleneck_width = 1;
  mc.n_classifier_blocks = 1;
  auto init = wwb::init_params(mc, nullptr, wwb::RngStream(7));

  wwb::TrainConfig tc;
  tc.epochs = 1;
  tc.learning_rate = 0.0;
  auto result = wwb::train(init, train_set, val_set, tc);

  double diff = 0.0;
  wwb::for_each_param(init, [&](const std::string& name, double* pv,
                                std::size_t n) {
    wwb::for_each_param(result.params,
                        [&](const std::string& name2, double* qv,
                            std::size_t n2) {
                          if (name2 == name) {
                            REQUIRE(n2 == n);
                            for (std::size_t k = 0; k < n; ++k)
                              diff = std::max(diff, std::abs(pv[k] - qv[k]));
                          }
                        });
  });
  CHECK(diff == 0.0);
}
