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

#include "wwb/attacks.hpp"
#include "wwb/training.hpp"

namespace {

// A network that collapses to logits_t = W tanh(tanh(x_t)) + b:
// identity prenet weights, every gate slammed shut, identity bottleneck,
// no context. Monotone in each input coordinate with positive slope.
wwb::ModelParams monotone_toy(const Eigen::Matrix<double, 3, 4>& W,
                              const Eigen::Vector3d& b) {
  wwb::ModelConfig cfg;
  cfg.n_mels = 4;
  cfg.prenet_hidden = 4;
  cfg.highway_width = 4;
  cfg.n_feature_blocks = 1;
  cfg.bottleneck_width = 4;
  cfg.context_left = 0;
  cfg.context_right = 0;
  cfg.n_classifier_blocks = 1;
  cfg.prenet_dropout = 0.0;
  wwb::ModelParams p = wwb::init_params(cfg, nullptr, wwb::RngStream(1));
  p.prenet.a1.W = Eigen::MatrixXd::Identity(4, 4);
  p.prenet.a1.b.setZero();
  p.prenet.a2.W = Eigen::MatrixXd::Identity(4, 4);
  p.prenet.a2.b.setZero();
  for (auto* blocks : {&p.feature_blocks, &p.classifier_blocks})
    for (auto& blk : *blocks) blk.bt.setConstant(-1e6);
  p.bottleneck.W = Eigen::MatrixXd::Identity(4, 4);
  p.bottleneck.b.setZero();
  p.output.W = W;
  p.output.b = b;
  return p;
}

wwb::MelSpectrogram spec_of(const Eigen::MatrixXd& v) {
  wwb::MelSpectrogram s;
  s.values = v;
  s.n_mels = static_cast<int>(v.cols());
  return s;
}

std::vector<wwb::LabeledClip> toy_clips(int n, Eigen::Index frames,
                                        std::uint64_t seed) {
  std::vector<wwb::LabeledClip> clips;
  wwb::RngStream rng(seed);
  for (int i = 0; i < n; ++i) {
    wwb::LabeledClip c;
    Eigen::MatrixXd v(frames, 4);
    for (Eigen::Index k = 0; k < v.size(); ++k) v.data()[k] = rng.normal();
    c.spec = spec_of(v);
    c.labels.assign(static_cast<std::size_t>(frames), 0);
    for (std::size_t t = 0; t < c.labels.size(); ++t)
      c.labels[t] = static_cast<int>(t % 3);
    clips.push_back(std::move(c));
  }
  return clips;
}

}  // namespace

TEST_CASE("linf projection clamps and is idempotent") {
  Eigen::MatrixXd d(2, 3);
  d << 0.5, -2.0, 0.05, 1.0, -0.1, 0.0;
  const auto p = wwb::project_linf(d, 0.1);
  CHECK(p.cwiseAbs().maxCoeff() <= 0.1);
  CHECK(p(0, 2) == 0.05);
  CHECK(p(0, 1) == -0.1);
  const auto pp = wwb::project_linf(p, 0.1);
  CHECK((pp - p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fgsm matches the closed-form softmax sign oracle") {
  Eigen::Matrix<double, 3, 4> W;
  W << 1.0, -2.0, 0.5, 0.3,
      -1.5, 0.7, 1.1, -0.4,
       0.2, 0.9, -0.8, 1.3;
  const Eigen::Vector3d b(0.1, -0.2, 0.05);
  const auto model = monotone_toy(W, b);

  wwb::RngStream rng(5);
  Eigen::MatrixXd x(6, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 0.3 * rng.normal();
  const int target = wwb::kClassNoSpeech;
  const double eps = 0.01;
  const Eigen::MatrixXd step = wwb::fgsm_step(spec_of(x), target, model, eps);

  // Closed form: logits_t = W u_t + b with u = tanh(tanh(x)); the CE
  // gradient w.r.t. x(t,f) is [W^T (softmax(z_t) - e_target)]_f times a
  // strictly positive chain factor, so the sign is fully determined.
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const Eigen::Vector4d u = x.row(t).array().tanh().tanh();
    Eigen::Vector3d z = W * u + b;
    const Eigen::Vector3d e = (z.array() - z.maxCoeff()).exp();
    Eigen::Vector3d p = e / e.sum();
    p(target) -= 1.0;
    const Eigen::Vector4d g = W.transpose() * p;
    for (Eigen::Index f = 0; f < 4; ++f) {
      const double expected = g(f) > 0 ? -eps : (g(f) < 0 ? eps : 0.0);
      CHECK(step(t, f) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("deepfool crosses a linear boundary in one step") {
  // At x = 0 the toy is exactly linear to third order and the gradient of
  // tanh(tanh(.)) is exactly 1, so the classifier is z = W x + b locally.
  Eigen::Matrix<double, 3, 4> W;
  W << 1.0, 0.0, 0.0, 0.0,
       0.0, 1.0, 0.0, 0.0,
       0.0, 0.0, 1.0, 0.0;
  // Class 0 wins by a whisker of 1e-4.
  const Eigen::Vector3d b(1e-4, 0.0, -1.0);
  const auto model = monotone_toy(W, b);

  const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(5, 4);
  const Eigen::MatrixXd step = wwb::deepfool_step(spec_of(x), model, 0.0);

  // Oracle: nearest boundary is class 1; w = W.row(1) - W.row(0) =
  // (-1, 1, 0, 0), f = -1e-4, step = |f|/||w||^2 * w.
  const Eigen::RowVector4d w(-1.0, 1.0, 0.0, 0.0);
  for (Eigen::Index t = 0; t < 5; ++t)
    CHECK((step.row(t) - (1e-4 / 2.0) * w).cwiseAbs().maxCoeff() < 1e-9);

  // One step (zero overshoot) lands on the boundary within tolerance.
  const auto logits = wwb::forward(spec_of(x + step), model,
                                   wwb::RunMode::kEval, wwb::RngStream(0));
  const Eigen::RowVector3d zm = logits.colwise().mean();
  CHECK(std::abs(zm(1) - zm(0)) < 1e-9);
}

TEST_CASE("attack defaults follow the evaluation protocol") {
  wwb::AttackConfig c;
  for (auto m : {wwb::AttackMethod::kFgsm, wwb::AttackMethod::kDeepfool,
                 wwb::AttackMethod::kCw}) {
    c.method = m;
    CHECK(c.resolved_iterations() == 4000);
    CHECK(c.resolved_eval_every() == 400);
  }
  c.method = wwb::AttackMethod::kPgd;
  CHECK(c.resolved_iterations() == 250);
  CHECK(c.resolved_pgd_inner() == 100);
  CHECK(c.resolved_eval_every() == 25);
  c.epsilon = 0.2;
  CHECK(c.resolved_step_size() == doctest::Approx(0.02));
  c.iterations = 7;
  c.eval_every = 3;
  c.step_size = 0.5;
  CHECK(c.resolved_iterations() == 7);
  CHECK(c.resolved_eval_every() == 3);
  CHECK(c.resolved_step_size() == 0.5);
}

TEST_CASE("every emitted delta is feasible bit-exactly") {
  Eigen::Matrix<double, 3, 4> W;
  W << 1.0, -2.0, 0.5, 0.3, -1.5, 0.7, 1.1, -0.4, 0.2, 0.9, -0.8, 1.3;
  const auto model = monotone_toy(W, Eigen::Vector3d(0.0, 0.0, 0.0));
  const auto train_clips = toy_clips(4, 30, 1);
  const auto test_clips = toy_clips(3, 30, 2);

  for (auto m : {wwb::AttackMethod::kFgsm, wwb::AttackMethod::kPgd,
                 wwb::AttackMethod::kDeepfool, wwb::AttackMethod::kCw}) {
    wwb::AttackConfig cfg;
    cfg.method = m;
    cfg.epsilon = 0.05;
    cfg.iterations = 6;
    cfg.eval_every = 3;
    cfg.pgd_inner_iterations = 4;
    cfg.delta_frames = 12;
    const auto res = wwb::universal_attack(model, train_clips, test_clips, cfg);
    CHECK(res.perturbation.delta.cwiseAbs().maxCoeff() <= cfg.epsilon);
    CHECK(res.perturbation.best_delta.cwiseAbs().maxCoeff() <= cfg.epsilon);
    CHECK(res.perturbation.history.size() == 2);
    CHECK(res.attacked_accuracy <= res.clean_accuracy);
  }
}

TEST_CASE("attacks replay exactly under a fixed seed") {
  Eigen::Matrix<double, 3, 4> W;
  W << 1.0, -2.0, 0.5, 0.3, -1.5, 0.7, 1.1, -0.4, 0.2, 0.9, -0.8, 1.3;
  const auto model = monotone_toy(W, Eigen::Vector3d(0.0, 0.0, 0.0));
  const auto train_clips = toy_clips(3, 24, 5);
  const auto test_clips = toy_clips(2, 24, 6);
  wwb::AttackConfig cfg;
  cfg.method = wwb::AttackMethod::kPgd;
  cfg.epsilon = 0.05;
  cfg.iterations = 4;
  cfg.eval_every = 2;
  cfg.pgd_inner_iterations = 3;
  cfg.delta_frames = 10;
  cfg.seed = 77;
  const auto a = wwb::universal_attack(model, train_clips, test_clips, cfg);
  const auto b = wwb::universal_attack(model, train_clips, test_clips, cfg);
  CHECK((a.perturbation.delta - b.perturbation.delta).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(a.attacked_accuracy == b.attacked_accuracy);
}

TEST_CASE("a heavier size penalty yields a smaller cw perturbation") {
  Eigen::Matrix<double, 3, 4> W;
  W << 1.0, -2.0, 0.5, 0.3, -1.5, 0.7, 1.1, -0.4, 0.2, 0.9, -0.8, 1.3;
  const auto model = monotone_toy(W, Eigen::Vector3d(0.0, 0.0, 0.0));
  const auto train_clips = toy_clips(4, 30, 8);
  const auto test_clips = toy_clips(3, 30, 9);
  double prev_norm = std::numeric_limits<double>::infinity();
  // Keep step_size * 2c < 1 so the penalized descent stays contractive.
  for (double c : {0.0, 2.0, 8.0}) {
    wwb::AttackConfig cfg;
    cfg.method = wwb::AttackMethod::kCw;
    cfg.epsilon = 0.5;
    cfg.iterations = 40;
    cfg.eval_every = 40;
    cfg.cw_c = c;
    cfg.delta_frames = 15;
    const auto res = wwb::universal_attack(model, train_clips, test_clips, cfg);
    const double n = res.perturbation.delta.norm();
    CHECK(n <= prev_norm + 1e-12);
    prev_norm = n;
  }
}

TEST_CASE("attack results serialize with history and feasible deltas") {
  namespace fs = std::filesystem;
  Eigen::Matrix<double, 3, 4> W;
  W << 1.0, -2.0, 0.5, 0.3, -1.5, 0.7, 1.1, -0.4, 0.2, 0.9, -0.8, 1.3;
  const auto model = monotone_toy(W, Eigen::Vector3d(0.0, 0.0, 0.0));
  wwb::AttackConfig cfg;
  cfg.method = wwb::AttackMethod::kFgsm;
  cfg.epsilon = 0.05;
  cfg.iterations = 4;
  cfg.eval_every = 2;
  cfg.delta_frames = 10;
  const auto res =
      wwb::universal_attack(model, toy_clips(3, 20, 1), toy_clips(2, 20, 2), cfg);
  const fs::path dir = fs::temp_directory_path() / "wwb_attack_result";
  wwb::save_attack_result(dir.string(), res, cfg, "cafebabecafebabe");
  CHECK(fs::exists(dir / "delta.ctns"));
  CHECK(fs::exists(dir / "best_delta.ctns"));
  CHECK(fs::exists(dir / "history.csv"));
  std::ifstream is(dir / "config.txt");
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("model_hash=cafebabecafebabe") != std::string::npos);
  CHECK(text.find("method=fgsm") != std::string::npos);
  fs::remove_all(dir);
}
